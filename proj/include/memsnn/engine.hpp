#pragma once

// Fixed-timestep simulation kernel: supervised training presentations,
// winner-takes-all test presentations, evaluation and the two-synapse demo.
//
// Time is always derived from integer step counts (t = t0 + k * dt) so that
// spike onsets, bus delays and spike ends land on exact step boundaries.
// Voltages inside a step are sampled at the step midpoint.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "memsnn/analysis.hpp"
#include "memsnn/dataset.hpp"
#include "memsnn/device.hpp"
#include "memsnn/error.hpp"
#include "memsnn/network.hpp"
#include "memsnn/neuron.hpp"

namespace memsnn {

enum class SimMode { Waveform, Behavioral };

inline const char* to_string(SimMode m) { return m == SimMode::Waveform ? "waveform" : "behavioral"; }

struct SimConfig {
  double dt = 10e-9;
  SimMode mode = SimMode::Waveform;
  double teach_delay = 1e-6;
  double inter_pattern_interval = 10e-6;
  double input_repeat_period = 5e-6;
  std::size_t max_input_repeats = 20;
  double wta_delay = 50e-9;
  std::uint64_t seed = 1;
  double init_mu = 8.5e-9;
  double init_sigma = 4e-9;
  SpikeShape spike;
  NeuronParams neuron;
  MemristorParams device;
  BehavioralStdpParams behavioral;
  double behavioral_scale = 0.2e-6;  // S per unit of behavioral weight change

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCategory::Config, "dt must be > 0");
    spike.validate();
    neuron.validate();
    device.validate();
    behavioral.validate();
    const double T = spike.duration();
    if (!(teach_delay >= 0.0)) throw Error(ErrorCategory::Config, "teach_delay must be >= 0");
    if (inter_pattern_interval + kTimeEpsilon < T) {
      throw Error(ErrorCategory::Config, "inter_pattern_interval must be >= spike duration");
    }
    if (teach_delay + T > inter_pattern_interval + kTimeEpsilon) {
      throw Error(ErrorCategory::Config, "teach spike must complete within inter_pattern_interval");
    }
    if (input_repeat_period + kTimeEpsilon < T) {
      throw Error(ErrorCategory::Config, "input_repeat_period must be >= spike duration");
    }
    if (max_input_repeats == 0) throw Error(ErrorCategory::Config, "max_input_repeats must be >= 1");
    if (!(wta_delay >= 0.0)) throw Error(ErrorCategory::Config, "wta_delay must be >= 0");
    if (!(init_mu > 0.0) || !(init_sigma >= 0.0)) {
      throw Error(ErrorCategory::Config, "init_mu must be > 0 and init_sigma >= 0");
    }
    if (!(behavioral_scale > 0.0)) throw Error(ErrorCategory::Config, "behavioral_scale must be > 0");
  }
};

/// Device rates fitted to +/-target_dg at +/-target_dt, and the behavioral
/// window anchored to the device at the teach delay.
inline void calibrate(SimConfig& cfg, double target_dg = 0.2e-6, double target_dt = 1e-6) {
  const CalibratedRates k =
      calibrate_rates(cfg.spike, cfg.device.v_p, cfg.device.v_n, target_dg, target_dt);
  cfg.device.k_p = k.k_p;
  cfg.device.k_n = k.k_n;
  const BehavioralCalibration b = calibrate_behavioral(cfg.device, cfg.spike, cfg.teach_delay);
  cfg.behavioral = b.params;
  cfg.behavioral_scale = b.siemens_per_unit;
}

inline SimConfig default_sim_config() {
  SimConfig cfg;
  calibrate(cfg);
  return cfg;
}

inline std::size_t to_steps(double duration, double dt) {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

inline std::size_t to_steps_ceil(double duration, double dt) {
  const double r = duration / dt;
  const double near = std::round(r);
  if (std::abs(r - near) < 1e-9) return static_cast<std::size_t>(near);
  return static_cast<std::size_t>(std::ceil(r));
}

// ---------------------------------------------------------------- event log

enum class EventKind {
  InputSpike,
  OutputSpike,
  TeachSpike,
  WtaGrant,
  WtaSuppress,
  WtaTie,
  WtaReset,
  WtaRelease,
  WeightSnapshot,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::InputSpike: return "input-spike";
    case EventKind::OutputSpike: return "output-spike";
    case EventKind::TeachSpike: return "teach-spike";
    case EventKind::WtaGrant: return "wta-grant";
    case EventKind::WtaSuppress: return "wta-suppress";
    case EventKind::WtaTie: return "wta-tie";
    case EventKind::WtaReset: return "wta-reset";
    case EventKind::WtaRelease: return "wta-release";
    case EventKind::WeightSnapshot: return "weight-snapshot";
  }
  return "?";
}

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::InputSpike;
  long actor = -1;
  std::string detail;
};

class EventLog {
 public:
  void push(double time, EventKind kind, long actor, std::string detail = {}) {
    if (!events_.empty() && time < events_.back().time) {
      throw Error(ErrorCategory::ContractViolation, "event log: time went backwards");
    }
    events_.push_back({time, kind, actor, std::move(detail)});
  }

  void append(const EventLog& other) {
    for (const auto& e : other.events_) push(e.time, e.kind, e.actor, e.detail);
  }

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  std::size_t count(EventKind k) const {
    std::size_t c = 0;
    for (const auto& e : events_) c += e.kind == k;
    return c;
  }

  void write_csv(std::ostream& os) const {
    os << "time_s,kind,actor,detail\n";
    char buf[40];
    for (const auto& e : events_) {
      std::snprintf(buf, sizeof buf, "%.9e", e.time);
      os << buf << ',' << to_string(e.kind) << ',' << e.actor << ',' << e.detail << '\n';
    }
  }

 private:
  std::vector<Event> events_;
};

// ---------------------------------------------------------- presentations

struct Presentation {
  std::optional<std::size_t> winner;  // output index
  std::optional<double> fire_time;
  std::vector<double> opportunity;    // empty when no input current
  bool tie = false;
  EventLog events;
};

/// Called after every test step with the post-step state.
using StepObserver =
    std::function<void(double t, std::span<const NeuronState> neurons, const WtaBus& bus)>;

inline std::vector<NeuronState> fresh_neurons(std::size_t n) { return std::vector<NeuronState>(n); }

/// Peak-drive opportunity of each output for an input pattern, or empty when
/// no input current flows.
inline std::vector<double> pattern_opportunity(const Crossbar& xb, std::span<const std::size_t> on,
                                               double va_plus) {
  std::vector<std::vector<double>> currents(xb.n_out());
  double total = 0.0;
  for (std::size_t n = 0; n < xb.n_out(); ++n) {
    for (std::size_t i : on) {
      currents[n].push_back(xb.g(i, n) * va_plus);
      total += currents[n].back();
    }
  }
  if (!(total > 0.0)) return {};
  return spiking_opportunity(currents);
}

/// Supervised training presentation starting at t0. All 'on' inputs spike
/// together at t0 and the labeled output is forced to fire teach_delay later.
/// Competition is disabled and output comparators are gated off, so only the
/// teach signal makes an output fire.
inline void present_train(Crossbar& xb, WtaBus& bus, std::vector<NeuronState>& neurons,
                          std::span<const std::size_t> on, std::size_t label,
                          const SimConfig& cfg, double t0, EventLog& log) {
  if (label >= xb.n_out() || neurons.size() != xb.n_out()) {
    throw Error(ErrorCategory::InvalidInput, "present_train: label out of range");
  }
  for (std::size_t i : on) {
    if (i >= xb.n_in()) throw Error(ErrorCategory::InvalidInput, "present_train: input index out of range");
  }
  const double dt = cfg.dt;
  const std::size_t teach_step = to_steps(cfg.teach_delay, dt);
  const std::size_t spike_steps = to_steps(cfg.spike.duration(), dt);
  const std::size_t total_steps = to_steps(cfg.inter_pattern_interval, dt);
  const double t_teach = t0 + static_cast<double>(teach_step) * dt;

  for (std::size_t i : on) log.push(t0, EventKind::InputSpike, static_cast<long>(i));

  if (cfg.mode == SimMode::Behavioral) {
    log.push(t_teach, EventKind::TeachSpike, static_cast<long>(label));
    const double dg = cfg.behavioral_scale * behavioral_delta(cfg.behavioral, cfg.teach_delay);
    const MemristorParams& p = xb.params();
    for (std::size_t i : on) {
      auto& c = xb.cell(i, label);
      c.g = std::clamp(c.g + dg, p.g_min, p.g_max);
    }
  } else {
    std::vector<double> pre(xb.n_in(), 0.0);
    std::vector<double> post(xb.n_out(), 0.0);
    const std::size_t input_end = spike_steps;
    for (std::size_t s = 0; s < total_steps; ++s) {
      const double t_start = t0 + static_cast<double>(s) * dt;
      if (s == teach_step) {
        request_fire(bus, label, t_start, false);
        neurons[label] = begin_fire(neurons[label], t_start);
        log.push(t_start, EventKind::TeachSpike, static_cast<long>(label));
      }
      if (neurons[label].firing() &&
          s == teach_step + spike_steps) {
        neurons[label] = end_fire(neurons[label], cfg.spike, t_start);
      }
      const bool inputs_active = s < input_end && !on.empty();
      if (!inputs_active && !neurons[label].firing()) continue;

      const double tm = t_start + 0.5 * dt;
      const double v_in = spike_value(cfg.spike, tm - t0);
      for (std::size_t i : on) pre[i] = v_in;
      for (std::size_t n = 0; n < neurons.size(); ++n) post[n] = port_voltage(neurons[n], cfg.spike, tm);
      apply_plasticity(xb, pre, post, dt);
    }
    const double t_end = t0 + static_cast<double>(total_steps) * dt;
    if (neurons[label].firing()) neurons[label] = end_fire(neurons[label], cfg.spike, t_end);
  }
  for (auto& n : neurons) n = discharge(n);
}

/// Test presentation: input volleys repeat every input_repeat_period while
/// the outputs integrate; the first output to reach threshold takes the bus,
/// the others are reset wta_delay later and held at rest until the winner's
/// spike ends. Weights are never modified.
inline Presentation present_test(const Crossbar& xb, WtaBus& bus, std::vector<NeuronState>& neurons,
                                 std::span<const std::size_t> on, const SimConfig& cfg,
                                 double t0 = 0.0, const StepObserver* observer = nullptr) {
  if (neurons.size() != xb.n_out()) {
    throw Error(ErrorCategory::DimensionMismatch, "present_test: one neuron state per output required");
  }
  Presentation out;
  out.opportunity = pattern_opportunity(xb, on, cfg.spike.va_plus);

  const double dt = cfg.dt;
  const std::size_t period_steps = to_steps(cfg.input_repeat_period, dt);
  const std::size_t spike_steps = to_steps(cfg.spike.duration(), dt);
  const std::size_t budget = period_steps * cfg.max_input_repeats;
  const std::size_t reset_lag = to_steps_ceil(bus.delay, dt);

  std::vector<double> pre(xb.n_in(), 0.0);
  std::vector<bool> suppressed(xb.n_out(), false);
  std::vector<FireCandidate> candidates;
  std::size_t volley_start = 0;
  std::size_t grant_step = 0;
  bool reset_logged = false;

  for (std::size_t s = 0;; ++s) {
    const double t_start = t0 + static_cast<double>(s) * dt;
    if (out.winner) {
      if (s == grant_step + spike_steps) {
        neurons[*out.winner] = end_fire(neurons[*out.winner], cfg.spike, t_start);
        release_bus(bus, t_start, cfg.spike);
        out.events.push(t_start, EventKind::WtaRelease, static_cast<long>(*out.winner));
        break;
      }
    } else {
      if (s >= budget) break;
      if (s % period_steps == 0) {
        volley_start = s;
        for (std::size_t i : on) out.events.push(t_start, EventKind::InputSpike, static_cast<long>(i));
      }
    }

    const double tm = t_start + 0.5 * dt;
    const double v_in = spike_value(cfg.spike, tm - (t0 + static_cast<double>(volley_start) * dt));
    for (std::size_t i : on) pre[i] = v_in;
    for (std::size_t n = 0; n < neurons.size(); ++n) {
      if (neurons[n].mode != NeuronMode::Integrate) continue;
      neurons[n] = integrate_step(neurons[n], cfg.neuron, summed_current(xb, pre, n), dt);
    }

    const double t_end = t_start + dt;
    candidates.clear();
    for (std::size_t n = 0; n < neurons.size(); ++n) {
      if (threshold_crossed(neurons[n], cfg.neuron) && !suppressed[n]) {
        candidates.push_back({n, neurons[n].v_mem - cfg.neuron.v_thr});
      }
    }
    if (!candidates.empty()) {
      std::optional<std::size_t> first;
      if (!out.winner) {
        first = arbitrate(candidates);
        if (candidates.size() > 1) {
          out.tie = true;
          std::string who;
          for (const auto& c : candidates) who += (who.empty() ? "" : " ") + std::to_string(c.index);
          out.events.push(t_end, EventKind::WtaTie, static_cast<long>(*first), "candidates=" + who);
        }
      }
      // The bus grants at most one request; everyone else latches a busy bus.
      if (first) {
        request_fire(bus, *first, t_end, true);
        neurons[*first] = begin_fire(neurons[*first], t_end);
        out.winner = first;
        out.fire_time = t_end;
        grant_step = s + 1;
        out.events.push(t_end, EventKind::WtaGrant, static_cast<long>(*first));
        out.events.push(t_end, EventKind::OutputSpike, static_cast<long>(*first));
      }
      for (const auto& c : candidates) {
        if (first && c.index == *first) continue;
        if (request_fire(bus, c.index, t_end, true) == FireDecision::Suppressed) {
          suppressed[c.index] = true;
          out.events.push(t_end, EventKind::WtaSuppress, static_cast<long>(c.index));
        }
      }
    }

    if (out.winner && s + 1 >= grant_step + reset_lag) {
      broadcast_reset(bus, neurons, t_end);
      if (!reset_logged) {
        out.events.push(t_end, EventKind::WtaReset, static_cast<long>(*out.winner));
        reset_logged = true;
      }
    }
    if (observer && *observer) (*observer)(t_end, neurons, bus);
  }
  return out;
}

// ------------------------------------------------------- training / testing

struct TrainResult {
  EventLog events;
  std::vector<Crossbar> snapshots;
  std::vector<std::size_t> snapshot_after;  // presentations completed at each snapshot
  std::size_t presentations = 0;
  double t_end = 0.0;
};

/// One pass over `samples` in order. A snapshot is taken after every
/// `snapshot_every`-th presentation and after the last one (0 disables).
inline TrainResult train_epoch(Crossbar& xb, const Dataset& samples, const ClassMap& classes,
                               const SimConfig& cfg, std::size_t snapshot_every = 0,
                               double t_start = 0.0, int binarize_threshold = 7) {
  if (classes.size() != xb.n_out()) {
    throw Error(ErrorCategory::DimensionMismatch, "train_epoch: class count differs from output count");
  }
  for (const auto& s : samples) classes.output_of(s.label);
  TrainResult r;
  WtaBus bus;
  bus.delay = cfg.wta_delay;
  auto neurons = fresh_neurons(xb.n_out());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double t0 = t_start + static_cast<double>(k) * cfg.inter_pattern_interval;
    const auto on = binarize(samples[k], binarize_threshold);
    present_train(xb, bus, neurons, on, classes.output_of(samples[k].label), cfg, t0, r.events);
    ++r.presentations;
    const bool last = k + 1 == samples.size();
    if (snapshot_every > 0 && ((k + 1) % snapshot_every == 0 || last)) {
      const double t_snap = t0 + cfg.inter_pattern_interval;
      r.events.push(t_snap, EventKind::WeightSnapshot, static_cast<long>(r.snapshots.size()),
                    "presentations=" + std::to_string(k + 1));
      r.snapshots.push_back(xb);
      r.snapshot_after.push_back(k + 1);
    }
  }
  r.t_end = t_start + static_cast<double>(samples.size()) * cfg.inter_pattern_interval;
  return r;
}

/// Several epochs, continuing simulation time and snapshot numbering.
inline TrainResult train(Crossbar& xb, const Dataset& samples, const ClassMap& classes,
                         const SimConfig& cfg, std::size_t epochs, std::size_t snapshot_every = 0) {
  TrainResult all;
  for (std::size_t e = 0; e < epochs; ++e) {
    TrainResult r = train_epoch(xb, samples, classes, cfg, snapshot_every, all.t_end);
    all.events.append(r.events);
    for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
      all.snapshots.push_back(std::move(r.snapshots[k]));
      all.snapshot_after.push_back(all.presentations + r.snapshot_after[k]);
    }
    all.presentations += r.presentations;
    all.t_end = r.t_end;
  }
  return all;
}

struct EvalOptions {
  const StepObserver* observer = nullptr;
  bool keep_events = false;
  int binarize_threshold = 7;
};

struct Evaluation {
  std::vector<std::optional<int>> predictions;  // class labels
  std::vector<int> labels;
  std::vector<Presentation> presentations;      // events kept only on request
  Report report;
};

/// Classify every sample from fresh neuron and bus state. The crossbar is
/// read-only.
inline Evaluation evaluate(const Crossbar& xb, const Dataset& samples, const ClassMap& classes,
                           const SimConfig& cfg, const EvalOptions& opts = {}) {
  if (classes.size() != xb.n_out()) {
    throw Error(ErrorCategory::DimensionMismatch, "evaluate: class count differs from output count");
  }
  Evaluation ev;
  for (const auto& s : samples) {
    WtaBus bus;
    bus.delay = cfg.wta_delay;
    auto neurons = fresh_neurons(xb.n_out());
    const auto on = binarize(s, opts.binarize_threshold);
    Presentation p = present_test(xb, bus, neurons, on, cfg, 0.0, opts.observer);
    ev.predictions.push_back(p.winner ? std::optional<int>(classes.class_of(*p.winner)) : std::nullopt);
    ev.labels.push_back(s.label);
    if (!opts.keep_events) p.events = EventLog{};
    ev.presentations.push_back(std::move(p));
  }
  ev.report = confusion_and_accuracy(ev.predictions, ev.labels, classes);
  return ev;
}

// ------------------------------------------------------------ two-synapse demo

struct DemoParams {
  double duration = 300e-6;
  double regular_period = 6e-6;   // input 1
  double random_rate = 1e5;       // input 2, mean spikes per second
  double initial_g = 50e-6;
  double c_mem = 50e-12;          // membrane of the single output neuron
  double sample_interval = 100e-9;
  bool silence_input2 = false;
};

struct TraceRow {
  double time = 0.0;
  std::string signal;
  double value = 0.0;
};

struct DemoResult {
  EventLog events;
  std::vector<TraceRow> trace;
  std::vector<double> g1;  // conductance after every output spike
  std::vector<double> g2;
  double g1_final = 0.0;
  double g2_final = 0.0;
  std::size_t output_spikes = 0;
  bool causal = true;  // every grant happened with v_mem >= v_thr
};

inline void write_trace_csv(std::ostream& os, std::span<const TraceRow> rows) {
  os << "time_s,signal,value\n";
  char t[40], v[40];
  for (const auto& r : rows) {
    std::snprintf(t, sizeof t, "%.9e", r.time);
    std::snprintf(v, sizeof v, "%.9e", r.value);
    os << t << ',' << r.signal << ',' << v << '\n';
  }
}

/// Two inputs, one output: input 1 spikes periodically, input 2 at seeded
/// random times. Both synapses learn from the overlapping waveforms.
inline DemoResult two_synapse_demo(const SimConfig& cfg, const DemoParams& demo) {
  if (!(demo.duration > 0.0) || !(demo.regular_period > 0.0) || !(demo.initial_g > 0.0) ||
      !(demo.c_mem > 0.0) || !(demo.sample_interval > 0.0) || demo.random_rate < 0.0) {
    throw Error(ErrorCategory::Config, "demo: durations, rates and c_mem must be positive");
  }
  const double dt = cfg.dt;
  const SpikeShape& shape = cfg.spike;
  const std::size_t total = to_steps(demo.duration, dt);
  const std::size_t period = std::max<std::size_t>(1, to_steps(demo.regular_period, dt));
  const std::size_t spike_steps = to_steps(shape.duration(), dt);
  const std::size_t sample_every = std::max<std::size_t>(1, to_steps(demo.sample_interval, dt));

  // Input 2 onsets: exponential gaps measured from the end of the previous spike.
  std::vector<std::size_t> random_onsets;
  if (!demo.silence_input2 && demo.random_rate > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::exponential_distribution<double> gap(demo.random_rate);
    std::size_t next = to_steps(gap(rng), dt);
    while (next < total) {
      random_onsets.push_back(next);
      next += spike_steps + to_steps(gap(rng), dt);
    }
  }

  NeuronParams np = cfg.neuron;
  np.c_mem = demo.c_mem;
  Crossbar xb(2, 1, cfg.device, demo.initial_g);
  std::vector<NeuronState> out(1);
  WtaBus bus;
  bus.delay = cfg.wta_delay;

  DemoResult r;
  std::optional<std::size_t> onset1, onset2;
  std::size_t next_random = 0;
  std::size_t fire_step = 0;
  std::vector<double> pre(2, 0.0), post(1, 0.0);

  auto sample = [&](double t) {
    r.trace.push_back({t, "v_mem", out[0].v_mem});
    r.trace.push_back({t, "v_pre1", pre[0]});
    r.trace.push_back({t, "v_pre2", pre[1]});
    r.trace.push_back({t, "v_post", post[0]});
    r.trace.push_back({t, "g1", xb.g(0, 0)});
    r.trace.push_back({t, "g2", xb.g(1, 0)});
  };

  for (std::size_t s = 0; s < total; ++s) {
    const double t_start = static_cast<double>(s) * dt;
    if (out[0].firing() && s == fire_step + spike_steps) {
      out[0] = end_fire(out[0], shape, t_start);
      release_bus(bus, t_start, shape);
      r.g1.push_back(xb.g(0, 0));
      r.g2.push_back(xb.g(1, 0));
    }
    if (s % period == 0) {
      onset1 = s;
      r.events.push(t_start, EventKind::InputSpike, 0);
    }
    if (next_random < random_onsets.size() && random_onsets[next_random] == s) {
      onset2 = s;
      ++next_random;
      r.events.push(t_start, EventKind::InputSpike, 1);
    }

    const double tm = t_start + 0.5 * dt;
    pre[0] = onset1 ? spike_value(shape, tm - static_cast<double>(*onset1) * dt) : 0.0;
    pre[1] = onset2 ? spike_value(shape, tm - static_cast<double>(*onset2) * dt) : 0.0;
    post[0] = port_voltage(out[0], shape, tm);

    if (s % sample_every == 0) sample(t_start);

    if (out[0].mode == NeuronMode::Integrate) {
      out[0] = integrate_step(out[0], np, summed_current(xb, pre, 0), dt);
    }
    apply_plasticity(xb, pre, post, dt);

    const double t_end = t_start + dt;
    if (threshold_crossed(out[0], np)) {
      if (request_fire(bus, 0, t_end, true) == FireDecision::Granted) {
        r.causal = r.causal && out[0].v_mem >= np.v_thr;
        out[0] = begin_fire(out[0], t_end);
        fire_step = s + 1;
        ++r.output_spikes;
        r.events.push(t_end, EventKind::WtaGrant, 0);
        r.events.push(t_end, EventKind::OutputSpike, 0);
      }
    }
  }
  r.g1_final = xb.g(0, 0);
  r.g2_final = xb.g(1, 0);
  return r;
}

}  // namespace memsnn
