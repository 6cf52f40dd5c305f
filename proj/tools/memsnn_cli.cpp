// memsnn: experiment runner for the memristor-crossbar spiking network.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "memsnn/memsnn.hpp"
#include "memsnn/report_json.hpp"

namespace fs = std::filesystem;
using namespace memsnn;
using json = nlohmann::ordered_json;

namespace {

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Config: return 3;
    case ErrorCategory::Io:
    case ErrorCategory::Parse: return 4;
    case ErrorCategory::CalibrationImpossible: return 5;
    case ErrorCategory::DimensionMismatch: return 6;
    case ErrorCategory::InvalidInput: return 7;
    case ErrorCategory::Undefined: return 8;
    case ErrorCategory::ModeViolation:
    case ErrorCategory::ContractViolation: return 9;
  }
  return 1;
}

constexpr int kInfeasibleExit = 10;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "Config file (key = value lines)");
  sub->add_option("--seed", f.seed, "Random seed");
  sub->add_option("--out", f.out_dir, "Output directory");
  sub->add_option("--mode", f.mode, "waveform|behavioral")->check(CLI::IsMember({"waveform", "behavioral"}));
  sub->add_option("--set", f.overrides, "Override a config key: --set key=value");
}

// Defaults, then the config file, then flags. Not yet finalized.
RunConfig load_config(const CommonFlags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) apply_config_file(cfg, f.config_path);
  for (const auto& kv : f.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCategory::Config, "--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) set_config_value(cfg, "seed", std::to_string(*f.seed));
  if (f.out_dir) cfg.out_dir = *f.out_dir;
  if (f.mode) set_config_value(cfg, "mode", *f.mode);
  return cfg;
}

fs::path prepare_out(const RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::Io, "cannot create output directory '" + cfg.out_dir + "'");
  std::ofstream echo(dir / "run_config.txt");
  echo << "# memsnn run configuration\n" << to_text(cfg);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw Error(ErrorCategory::Io, "cannot write '" + p.string() + "'");
  return os;
}

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

json feasibility_json(const FeasibilityVerdict& v, double v_p, double v_n, const SpikeShape& s) {
  json j;
  j["v_p"] = v_p;
  j["v_n"] = v_n;
  j["va_plus"] = s.va_plus;
  j["va_minus"] = s.va_minus;
  j["feasible"] = v.feasible;
  j["thresholds_balanced"] = v.thresholds_balanced;
  j["spike_non_disturbing"] = v.spike_non_disturbing;
  j["pair_can_program"] = v.pair_can_program;
  j["reasons"] = v.reasons;
  return j;
}

Dataset select_classes(const Dataset& all, const RunConfig& cfg, std::size_t per_class) {
  ClassMap cm(cfg.classes);
  if (cfg.class_by_class) {
    if (per_class == 0) {
      throw Error(ErrorCategory::Config, "class_by_class ordering needs a per-class sample count");
    }
    return order_class_by_class(all, cm.classes(), per_class);
  }
  Dataset filtered = order_for_training(all, cm.as_set());
  return per_class ? take_per_class(filtered, per_class) : filtered;
}

// ------------------------------------------------------------ subcommands

int cmd_stdp_window(RunConfig cfg, const std::vector<double>& grid_flag) {
  cfg.sim.spike.validate();
  const auto verdict = stdp_feasible(cfg.sim.device.v_p, cfg.sim.device.v_n, cfg.sim.spike);
  if (!verdict.feasible) {
    std::cerr << "error: infeasible: device thresholds and spike shape cannot support STDP\n"
              << feasibility_json(verdict, cfg.sim.device.v_p, cfg.sim.device.v_n, cfg.sim.spike).dump(2)
              << "\n";
    return kInfeasibleExit;
  }
  cfg.finalize();
  const auto grid = grid_flag.empty() ? linear_grid(cfg.window_min, cfg.window_max, cfg.window_points)
                                      : grid_flag;
  const auto window = stdp_window(cfg.sim.device, cfg.sim.spike, grid);
  const auto dir = prepare_out(cfg);
  auto os = open_out(dir / "stdp_window.csv");
  write_window_csv(os, window);
  std::cout << "k_p = " << sci(cfg.sim.device.k_p) << " S/(V s), k_n = " << sci(cfg.sim.device.k_n)
            << " S/(V s)\n"
            << "dG(+1us) = " << sci(pair_delta(cfg.sim.device, cfg.sim.spike, 1e-6)) << " S, "
            << "dG(-1us) = " << sci(pair_delta(cfg.sim.device, cfg.sim.spike, -1e-6)) << " S\n"
            << "wrote " << (dir / "stdp_window.csv").string() << " (" << window.size() << " points)\n";
  return 0;
}

int cmd_feasibility(double v_p, double v_n, const SpikeShape& shape) {
  shape.validate();
  const auto verdict = stdp_feasible(v_p, v_n, shape);
  std::cout << feasibility_json(verdict, v_p, v_n, shape).dump(2) << "\n";
  return 0;
}

int cmd_demo(const RunConfig& cfg) {
  const DemoResult r = two_synapse_demo(cfg.sim, cfg.demo);
  const auto dir = prepare_out(cfg);
  {
    auto os = open_out(dir / "demo_trace.csv");
    write_trace_csv(os, r.trace);
  }
  {
    auto os = open_out(dir / "demo_events.csv");
    r.events.write_csv(os);
  }
  std::cout << "output spikes: " << r.output_spikes << "\n"
            << "g1: " << sci(cfg.demo.initial_g) << " -> " << sci(r.g1_final) << " S\n"
            << "g2: " << sci(cfg.demo.initial_g) << " -> " << sci(r.g2_final) << " S\n";
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const Dataset all = load_optdigits(cfg.train_path);
  const ClassMap classes(cfg.classes);
  const Dataset samples = select_classes(all, cfg, cfg.train_per_class);
  Crossbar xb = init_weights(kPixels, classes.size(), cfg.sim.seed, cfg.sim.init_mu, cfg.sim.init_sigma,
                             cfg.sim.device);
  const TrainResult r = train(xb, samples, classes, cfg.sim, cfg.epochs, cfg.snapshot_every);

  const auto dir = prepare_out(cfg);
  {
    auto os = open_out(dir / "weights.txt");
    write_weights(os, xb);
  }
  for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "weights_snapshot_%04zu.txt", k);
    auto os = open_out(dir / name);
    write_weights(os, r.snapshots[k]);
  }
  {
    auto os = open_out(dir / "training_events.csv");
    r.events.write_csv(os);
  }
  json summary;
  summary["presentations"] = r.presentations;
  summary["epochs"] = cfg.epochs;
  summary["snapshots"] = r.snapshots.size();
  summary["classes"] = classes.classes();
  summary["g_min"] = xb.min_g();
  summary["g_max"] = xb.max_g();
  summary["seed"] = cfg.sim.seed;
  summary["mode"] = to_string(cfg.sim.mode);
  {
    auto os = open_out(dir / "train_summary.json");
    os << summary.dump(2) << "\n";
  }
  std::cout << "trained on " << r.presentations << " presentations (" << to_string(cfg.sim.mode)
            << " mode); conductance range " << sci(xb.min_g()) << " .. " << sci(xb.max_g()) << " S\n"
            << "wrote " << (dir / "weights.txt").string() << " and " << r.snapshots.size() << " snapshots\n";
  return 0;
}

Crossbar load_weights_file(const std::string& path, const MemristorParams& params) {
  if (path.empty()) throw Error(ErrorCategory::Config, "a weights file is required (--weights)");
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open weights '" + path + "'");
  return read_weights(in, params);
}

int cmd_test(const RunConfig& cfg) {
  const ClassMap classes(cfg.classes);
  const Crossbar xb = load_weights_file(cfg.weights_path, cfg.sim.device);
  if (xb.n_in() != kPixels || xb.n_out() != classes.size()) {
    throw Error(ErrorCategory::DimensionMismatch,
                "weights are " + std::to_string(xb.n_in()) + "x" + std::to_string(xb.n_out()) +
                    ", expected " + std::to_string(kPixels) + "x" + std::to_string(classes.size()));
  }
  const Dataset all = load_optdigits(cfg.test_path);
  const Dataset samples = select_classes(all, cfg, cfg.test_per_class);
  EvalOptions opts;
  opts.keep_events = cfg.raster;
  opts.binarize_threshold = cfg.binarize_threshold;
  const Evaluation ev = evaluate(xb, samples, classes, cfg.sim, opts);

  const auto dir = prepare_out(cfg);
  {
    auto os = open_out(dir / "report.json");
    os << report_to_json(ev.report, cfg).dump(2) << "\n";
  }
  if (cfg.raster) {
    auto os = open_out(dir / "raster.csv");
    os << "sample,label,time_s,kind,actor\n";
    for (std::size_t k = 0; k < ev.presentations.size(); ++k) {
      for (const auto& e : ev.presentations[k].events.events()) {
        if (e.kind != EventKind::InputSpike && e.kind != EventKind::OutputSpike) continue;
        os << k << ',' << ev.labels[k] << ',' << sci(e.time) << ',' << to_string(e.kind) << ','
           << e.actor << '\n';
      }
    }
  }
  std::cout << "accuracy " << ev.report.accuracy << " (" << ev.report.correct << "/" << ev.report.total
            << "), no decision " << ev.report.no_decision_total << "\n";
  return 0;
}

int cmd_power(const RunConfig& cfg, std::optional<double> i_mr_flag) {
  const double i_drive = drive_current(cfg.power_synapses, cfg.power_r_synapse, cfg.power_voltage);
  const double i_lrs = lrs_drive_current(cfg.power_lrs_synapses, cfg.power_lrs_fraction, cfg.power_r_lrs,
                                         cfg.power_lrs_voltage);
  const double i_mr = i_mr_flag.value_or(i_drive);
  json j;
  j["drive_current_a"] = i_drive;
  j["drive"] = {{"synapses", cfg.power_synapses}, {"r_each_ohm", cfg.power_r_synapse},
                {"voltage_v", cfg.power_voltage}};
  j["equivalent_load_ohm"] = cfg.power_synapses > 0 ? cfg.power_r_synapse / cfg.power_synapses : 0.0;
  j["lrs_drive_current_a"] = i_lrs;
  j["lrs"] = {{"synapses", cfg.power_lrs_synapses}, {"lrs_fraction", cfg.power_lrs_fraction},
              {"r_lrs_ohm", cfg.power_r_lrs}, {"voltage_v", cfg.power_lrs_voltage}};
  j["i_mr_a"] = i_mr;
  j["i_ifn_a"] = cfg.power_i_ifn;
  j["efficiency"] = efficiency(i_mr, cfg.power_i_ifn);
  j["efficiency_with_baseline"] = efficiency(i_mr, cfg.power_i_ifn + cfg.power_i_baseline);
  j["i_baseline_a"] = cfg.power_i_baseline;
  j["seed"] = cfg.sim.seed;
  const auto dir = prepare_out(cfg);
  {
    auto os = open_out(dir / "power.json");
    os << j.dump(2) << "\n";
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_export_maps(const RunConfig& cfg) {
  const Crossbar xb = load_weights_file(cfg.weights_path, cfg.sim.device);
  if (xb.n_in() != kPixels) {
    throw Error(ErrorCategory::DimensionMismatch, "weight maps need 64 inputs per neuron");
  }
  const auto dir = prepare_out(cfg);
  const double lo = xb.min_g();
  const double hi = xb.max_g();
  for (std::size_t n = 0; n < xb.n_out(); ++n) {
    char name[64];
    std::snprintf(name, sizeof name, "weight_map_%02zu.pgm", n);
    auto os = open_out(dir / name);
    os << "P2\n8 8\n255\n";
    for (std::size_t r = 0; r < 8; ++r) {
      for (std::size_t c = 0; c < 8; ++c) {
        const double g = xb.g(r * 8 + c, n);
        const long px = hi > lo ? std::lround((g - lo) / (hi - lo) * 255.0) : 0;
        os << (c ? " " : "") << px;
      }
      os << '\n';
    }
  }
  std::cout << "wrote " << xb.n_out() << " weight maps to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memsnn: memristor-crossbar spiking network simulator"};
  app.require_subcommand(1);

  CommonFlags common;
  std::vector<double> grid;
  std::optional<double> i_mr;
  std::string weights;
  std::optional<std::size_t> per_class;
  bool class_by_class = false;
  bool raster = false;
  double f_vp = 0, f_vn = 0;
  SpikeShape f_shape;

  auto* win = app.add_subcommand("stdp-window", "Pairwise STDP window of the calibrated device as CSV");
  add_common(win, common);
  win->add_option("--grid", grid, "Explicit delta_t values in seconds")->delimiter(',');

  auto* feas = app.add_subcommand("feasibility", "Check whether thresholds and spike shape support STDP");
  feas->add_option("--v-p", f_vp, "Potentiation threshold (V)")->required();
  feas->add_option("--v-n", f_vn, "Depression threshold magnitude (V)")->required();
  feas->add_option("--va-plus", f_shape.va_plus, "Positive pulse amplitude (V)");
  feas->add_option("--va-minus", f_shape.va_minus, "Negative tail amplitude (V)");
  feas->add_option("--tail-plus", f_shape.tail_plus, "Positive pulse width (s)");
  feas->add_option("--tail-minus", f_shape.tail_minus, "Negative tail width (s)");

  auto* demo = app.add_subcommand("demo", "Two inputs, one output: neuron operation and STDP trace");
  add_common(demo, common);

  auto* trn = app.add_subcommand("train", "Supervised STDP training on optdigits");
  add_common(trn, common);
  trn->add_option("--per-class", per_class, "Use only the first N training samples of each class");

  auto* tst = app.add_subcommand("test", "Winner-takes-all evaluation of a trained weight file");
  add_common(tst, common);
  tst->add_option("--weights", weights, "Weight matrix file");
  tst->add_option("--per-class", per_class, "Use the first N test samples of each class");
  tst->add_flag("--class-by-class", class_by_class, "Present classes in contiguous blocks");
  tst->add_flag("--raster", raster, "Also write per-sample spike raster CSV");

  auto* pwr = app.add_subcommand("power", "Drive-current budgets and neuron efficiency");
  add_common(pwr, common);
  pwr->add_option("--i-mr", i_mr, "Synapse current for the efficiency figure (A)");

  auto* maps = app.add_subcommand("export-maps", "One 8x8 PGM conductance map per output neuron");
  add_common(maps, common);
  maps->add_option("--weights", weights, "Weight matrix file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (feas->parsed()) return cmd_feasibility(f_vp, f_vn, f_shape);

    RunConfig cfg = load_config(common);
    if (!weights.empty()) cfg.weights_path = weights;
    if (class_by_class) cfg.class_by_class = true;
    if (raster) cfg.raster = true;
    if (per_class) {
      if (trn->parsed()) cfg.train_per_class = *per_class;
      else cfg.test_per_class = *per_class;
    }

    if (win->parsed()) return cmd_stdp_window(cfg, grid);
    cfg.finalize();
    if (demo->parsed()) return cmd_demo(cfg);
    if (trn->parsed()) return cmd_train(cfg);
    if (tst->parsed()) return cmd_test(cfg);
    if (pwr->parsed()) return cmd_power(cfg, i_mr);
    if (maps->parsed()) return cmd_export_maps(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.category()) << ": " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
