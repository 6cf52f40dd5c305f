#pragma once

// Run configuration: a flat `key = value` text file. Lines starting with '#'
// are comments. Unknown keys are rejected. `to_text` writes every key in a
// fixed order, so the echo of a config is itself a valid config file.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "memsnn/engine.hpp"
#include "memsnn/error.hpp"

namespace memsnn {

struct RunConfig {
  SimConfig sim = default_sim_config();

  // Rate calibration target; k_p/k_n/behavioral window are refit from it
  // unless given explicitly.
  double stdp_target_dg = 0.2e-6;
  double stdp_target_dt = 1e-6;
  bool explicit_rates = false;
  bool explicit_behavioral = false;

  std::string train_path = "data/optdigits.tra";
  std::string test_path = "data/optdigits.tes";
  std::vector<int> classes{0, 1, 2, 7};
  std::string out_dir = "out";
  std::string weights_path;
  std::size_t snapshot_every = 100;
  std::size_t epochs = 1;
  std::size_t train_per_class = 0;  // 0 = all samples
  std::size_t test_per_class = 0;   // 0 = all samples
  bool class_by_class = false;
  bool raster = false;
  int binarize_threshold = 7;

  double window_min = -5e-6;
  double window_max = 5e-6;
  std::size_t window_points = 101;

  DemoParams demo;

  double power_synapses = 10000;
  double power_r_synapse = 1e6;
  double power_voltage = 0.14;
  double power_i_ifn = 56e-6;
  double power_lrs_synapses = 784;
  double power_lrs_fraction = 0.01;
  double power_r_lrs = 1e3;
  double power_lrs_voltage = 1.0;
  double power_i_baseline = 13e-6;  // integration-mode baseline, reported separately

  /// Refit calibrated quantities and validate everything.
  void finalize() {
    if (!explicit_rates) {
      const CalibratedRates k = calibrate_rates(sim.spike, sim.device.v_p, sim.device.v_n,
                                                stdp_target_dg, stdp_target_dt);
      sim.device.k_p = k.k_p;
      sim.device.k_n = k.k_n;
    }
    if (!explicit_behavioral) {
      const BehavioralCalibration b = calibrate_behavioral(sim.device, sim.spike, sim.teach_delay);
      sim.behavioral = b.params;
      sim.behavioral_scale = b.siemens_per_unit;
    }
    sim.validate();
    if (classes.empty()) throw Error(ErrorCategory::Config, "classes must not be empty");
    ClassMap check(classes);
    if (window_points == 0) throw Error(ErrorCategory::Config, "window_points must be >= 1");
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return {};
  auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  double out = 0.0;
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size()) {
    throw Error(ErrorCategory::Config, key + ": expected a number, got '" + v + "'");
  }
  return out;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size()) {
    throw Error(ErrorCategory::Config, key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw Error(ErrorCategory::Config, key + ": expected true/false, got '" + v + "'");
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(static_cast<int>(parse_count(key, item)));
  }
  return out;
}

inline std::string fmt_real(double v) {
  if (std::isinf(v)) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline const std::vector<std::pair<std::string, Field>>& fields() {
  using R = RunConfig;
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    auto add_real = [&t](const std::string& k, std::function<double&(R&)> ref) {
      t.push_back({k,
                   {[k, ref](R& c, const std::string& v) { ref(c) = parse_real(k, v); },
                    [ref](const R& c) { return fmt_real(ref(const_cast<R&>(c))); }}});
    };
    auto add_count = [&t](const std::string& k, std::function<std::size_t&(R&)> ref) {
      t.push_back({k,
                   {[k, ref](R& c, const std::string& v) { ref(c) = parse_count(k, v); },
                    [ref](const R& c) { return std::to_string(ref(const_cast<R&>(c))); }}});
    };
    auto add_bool = [&t](const std::string& k, std::function<bool&(R&)> ref) {
      t.push_back({k,
                   {[k, ref](R& c, const std::string& v) { ref(c) = parse_bool(k, v); },
                    [ref](const R& c) { return std::string(ref(const_cast<R&>(c)) ? "true" : "false"); }}});
    };
    auto add_string = [&t](const std::string& k, std::function<std::string&(R&)> ref) {
      t.push_back({k,
                   {[ref](R& c, const std::string& v) { ref(c) = trim(v); },
                    [ref](const R& c) { return ref(const_cast<R&>(c)); }}});
    };

    t.push_back({"mode",
                 {[](R& c, const std::string& v) {
                    std::string m = trim(v);
                    if (m == "waveform") c.sim.mode = SimMode::Waveform;
                    else if (m == "behavioral") c.sim.mode = SimMode::Behavioral;
                    else throw Error(ErrorCategory::Config, "mode: expected waveform|behavioral, got '" + v + "'");
                  },
                  [](const R& c) { return std::string(to_string(c.sim.mode)); }}});
    t.push_back({"seed",
                 {[](R& c, const std::string& v) { c.sim.seed = parse_count("seed", v); },
                  [](const R& c) { return std::to_string(c.sim.seed); }}});
    add_real("dt", [](R& c) -> double& { return c.sim.dt; });
    add_real("teach_delay", [](R& c) -> double& { return c.sim.teach_delay; });
    add_real("inter_pattern_interval", [](R& c) -> double& { return c.sim.inter_pattern_interval; });
    add_real("input_repeat_period", [](R& c) -> double& { return c.sim.input_repeat_period; });
    add_count("max_input_repeats", [](R& c) -> std::size_t& { return c.sim.max_input_repeats; });
    add_real("wta_delay", [](R& c) -> double& { return c.sim.wta_delay; });
    add_real("init_mu", [](R& c) -> double& { return c.sim.init_mu; });
    add_real("init_sigma", [](R& c) -> double& { return c.sim.init_sigma; });

    add_real("va_plus", [](R& c) -> double& { return c.sim.spike.va_plus; });
    add_real("va_minus", [](R& c) -> double& { return c.sim.spike.va_minus; });
    add_real("tail_plus", [](R& c) -> double& { return c.sim.spike.tail_plus; });
    add_real("tail_minus", [](R& c) -> double& { return c.sim.spike.tail_minus; });

    add_real("c_mem", [](R& c) -> double& { return c.sim.neuron.c_mem; });
    add_real("r_leak", [](R& c) -> double& { return c.sim.neuron.r_leak; });
    add_real("v_thr", [](R& c) -> double& { return c.sim.neuron.v_thr; });

    add_real("v_p", [](R& c) -> double& { return c.sim.device.v_p; });
    add_real("v_n", [](R& c) -> double& { return c.sim.device.v_n; });
    add_real("g_min", [](R& c) -> double& { return c.sim.device.g_min; });
    add_real("g_max", [](R& c) -> double& { return c.sim.device.g_max; });
    t.push_back({"k_p",
                 {[](R& c, const std::string& v) {
                    c.sim.device.k_p = parse_real("k_p", v);
                    c.explicit_rates = true;
                  },
                  [](const R& c) { return fmt_real(c.sim.device.k_p); }}});
    t.push_back({"k_n",
                 {[](R& c, const std::string& v) {
                    c.sim.device.k_n = parse_real("k_n", v);
                    c.explicit_rates = true;
                  },
                  [](const R& c) { return fmt_real(c.sim.device.k_n); }}});
    add_real("stdp_target_dg", [](R& c) -> double& { return c.stdp_target_dg; });
    add_real("stdp_target_dt", [](R& c) -> double& { return c.stdp_target_dt; });

    for (const char* k : {"a_plus", "a_minus", "tau_plus", "tau_minus", "behavioral_scale"}) {
      std::string key = k;
      t.push_back({key,
                   {[key](R& c, const std::string& v) {
                      double x = parse_real(key, v);
                      if (key == "a_plus") c.sim.behavioral.a_plus = x;
                      else if (key == "a_minus") c.sim.behavioral.a_minus = x;
                      else if (key == "tau_plus") c.sim.behavioral.tau_plus = x;
                      else if (key == "tau_minus") c.sim.behavioral.tau_minus = x;
                      else c.sim.behavioral_scale = x;
                      c.explicit_behavioral = true;
                    },
                    [key](const R& c) {
                      if (key == "a_plus") return fmt_real(c.sim.behavioral.a_plus);
                      if (key == "a_minus") return fmt_real(c.sim.behavioral.a_minus);
                      if (key == "tau_plus") return fmt_real(c.sim.behavioral.tau_plus);
                      if (key == "tau_minus") return fmt_real(c.sim.behavioral.tau_minus);
                      return fmt_real(c.sim.behavioral_scale);
                    }}});
    }

    add_string("train_path", [](R& c) -> std::string& { return c.train_path; });
    add_string("test_path", [](R& c) -> std::string& { return c.test_path; });
    add_string("out_dir", [](R& c) -> std::string& { return c.out_dir; });
    add_string("weights_path", [](R& c) -> std::string& { return c.weights_path; });
    t.push_back({"classes",
                 {[](R& c, const std::string& v) { c.classes = parse_int_list("classes", v); },
                  [](const R& c) {
                    std::string s;
                    for (int k : c.classes) s += (s.empty() ? "" : ",") + std::to_string(k);
                    return s;
                  }}});
    add_count("snapshot_every", [](R& c) -> std::size_t& { return c.snapshot_every; });
    add_count("epochs", [](R& c) -> std::size_t& { return c.epochs; });
    add_count("train_per_class", [](R& c) -> std::size_t& { return c.train_per_class; });
    add_count("test_per_class", [](R& c) -> std::size_t& { return c.test_per_class; });
    add_bool("class_by_class", [](R& c) -> bool& { return c.class_by_class; });
    add_bool("raster", [](R& c) -> bool& { return c.raster; });
    t.push_back({"binarize_threshold",
                 {[](R& c, const std::string& v) {
                    c.binarize_threshold = static_cast<int>(parse_count("binarize_threshold", v));
                  },
                  [](const R& c) { return std::to_string(c.binarize_threshold); }}});

    add_real("window_min", [](R& c) -> double& { return c.window_min; });
    add_real("window_max", [](R& c) -> double& { return c.window_max; });
    add_count("window_points", [](R& c) -> std::size_t& { return c.window_points; });

    add_real("demo_duration", [](R& c) -> double& { return c.demo.duration; });
    add_real("demo_regular_period", [](R& c) -> double& { return c.demo.regular_period; });
    add_real("demo_random_rate", [](R& c) -> double& { return c.demo.random_rate; });
    add_real("demo_initial_g", [](R& c) -> double& { return c.demo.initial_g; });
    add_real("demo_c_mem", [](R& c) -> double& { return c.demo.c_mem; });
    add_real("demo_sample_interval", [](R& c) -> double& { return c.demo.sample_interval; });
    add_bool("demo_silence_input2", [](R& c) -> bool& { return c.demo.silence_input2; });

    add_real("power_synapses", [](R& c) -> double& { return c.power_synapses; });
    add_real("power_r_synapse", [](R& c) -> double& { return c.power_r_synapse; });
    add_real("power_voltage", [](R& c) -> double& { return c.power_voltage; });
    add_real("power_i_ifn", [](R& c) -> double& { return c.power_i_ifn; });
    add_real("power_lrs_synapses", [](R& c) -> double& { return c.power_lrs_synapses; });
    add_real("power_lrs_fraction", [](R& c) -> double& { return c.power_lrs_fraction; });
    add_real("power_r_lrs", [](R& c) -> double& { return c.power_r_lrs; });
    add_real("power_lrs_voltage", [](R& c) -> double& { return c.power_lrs_voltage; });
    add_real("power_i_baseline", [](R& c) -> double& { return c.power_i_baseline; });
    return t;
  }();
  return table;
}

}  // namespace detail

/// Set one key. Throws a Config error for unknown keys or bad values.
inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [k, f] : detail::fields()) {
    if (k == key) {
      f.set(cfg, value);
      return;
    }
  }
  throw Error(ErrorCategory::Config, "unknown config key '" + key + "'");
}

/// Apply `key = value` lines from a stream on top of `cfg`.
inline void apply_config(RunConfig& cfg, std::istream& is, const std::string& source = "<config>") {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCategory::Config, source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_config_value(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCategory::Config, source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open config '" + path + "'");
  apply_config(cfg, in, path);
}

inline std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, f] : detail::fields()) out += k + " = " + f.get(cfg) + "\n";
  return out;
}

inline std::map<std::string, std::string> to_map(const RunConfig& cfg) {
  std::map<std::string, std::string> m;
  for (const auto& [k, f] : detail::fields()) m[k] = f.get(cfg);
  return m;
}

}  // namespace memsnn
