#pragma once

// Memristor crossbar binding input axons to output dendrites, and the shared
// winner-takes-all bus.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "memsnn/device.hpp"
#include "memsnn/error.hpp"
#include "memsnn/neuron.hpp"

namespace memsnn {

class Crossbar {
 public:
  Crossbar() = default;
  Crossbar(std::size_t n_in, std::size_t n_out, const MemristorParams& params, double g0)
      : n_in_(n_in), n_out_(n_out), params_(params), cells_(n_in * n_out, MemristorState{g0}) {}

  std::size_t n_in() const { return n_in_; }
  std::size_t n_out() const { return n_out_; }
  const MemristorParams& params() const { return params_; }
  void set_params(const MemristorParams& p) { params_ = p; }

  double g(std::size_t i, std::size_t n) const { return cells_[i * n_out_ + n].g; }
  MemristorState& cell(std::size_t i, std::size_t n) { return cells_[i * n_out_ + n]; }
  const MemristorState& cell(std::size_t i, std::size_t n) const { return cells_[i * n_out_ + n]; }

  /// Column `n` as a dense vector of conductances (one per input).
  std::vector<double> column(std::size_t n) const {
    std::vector<double> c(n_in_);
    for (std::size_t i = 0; i < n_in_; ++i) c[i] = g(i, n);
    return c;
  }

  std::span<const MemristorState> cells() const { return cells_; }

  double min_g() const {
    double m = cells_.empty() ? 0.0 : cells_.front().g;
    for (const auto& c : cells_) m = std::min(m, c.g);
    return m;
  }
  double max_g() const {
    double m = cells_.empty() ? 0.0 : cells_.front().g;
    for (const auto& c : cells_) m = std::max(m, c.g);
    return m;
  }

  friend bool operator==(const Crossbar& a, const Crossbar& b) {
    if (a.n_in_ != b.n_in_ || a.n_out_ != b.n_out_) return false;
    for (std::size_t k = 0; k < a.cells_.size(); ++k) {
      if (a.cells_[k].g != b.cells_[k].g) return false;
    }
    return true;
  }

 private:
  std::size_t n_in_ = 0;
  std::size_t n_out_ = 0;
  MemristorParams params_;
  std::vector<MemristorState> cells_;
};

/// Gaussian initialization, negative or tiny draws floored at g_min.
inline Crossbar init_weights(std::size_t n_in, std::size_t n_out, std::uint64_t seed, double mu,
                             double sigma, const MemristorParams& params) {
  if (!(mu > 0.0) || !(sigma >= 0.0)) {
    throw Error(ErrorCategory::InvalidInput, "init_weights: need mu > 0 and sigma >= 0");
  }
  params.validate();
  Crossbar xb(n_in, n_out, params, params.g_min);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(mu, sigma > 0.0 ? sigma : 1.0);
  for (std::size_t i = 0; i < n_in; ++i) {
    for (std::size_t n = 0; n < n_out; ++n) {
      double draw = sigma > 0.0 ? normal(rng) : mu;
      xb.cell(i, n).g = std::clamp(draw, params.g_min, params.g_max);
    }
  }
  return xb;
}

/// Current into output `out` with its dendrite held at rest.
inline double summed_current(const Crossbar& xb, std::span<const double> pre_voltages,
                             std::size_t out) {
  if (out >= xb.n_out()) throw Error(ErrorCategory::InvalidInput, "summed_current: output index out of range");
  if (pre_voltages.size() != xb.n_in()) {
    throw Error(ErrorCategory::DimensionMismatch, "summed_current: need one voltage per input");
  }
  double i_total = 0.0;
  for (std::size_t i = 0; i < pre_voltages.size(); ++i) {
    if (pre_voltages[i] != 0.0) i_total += xb.g(i, out) * pre_voltages[i];
  }
  return i_total;
}

/// One plasticity step: every synapse sees v_post - v_pre for dt seconds.
inline void apply_plasticity(Crossbar& xb, std::span<const double> pre_voltages,
                             std::span<const double> post_voltages, double dt) {
  if (pre_voltages.size() != xb.n_in() || post_voltages.size() != xb.n_out()) {
    throw Error(ErrorCategory::DimensionMismatch, "apply_plasticity: voltage vector sizes");
  }
  if (!(dt > 0.0)) throw Error(ErrorCategory::InvalidInput, "apply_plasticity: dt must be > 0");
  const MemristorParams& p = xb.params();
  const double dead = std::min(p.v_p, p.v_n);
  for (std::size_t i = 0; i < xb.n_in(); ++i) {
    for (std::size_t n = 0; n < xb.n_out(); ++n) {
      const double v_net = post_voltages[n] - pre_voltages[i];
      if (std::abs(v_net) <= dead) continue;
      xb.cell(i, n) = step_conductance(xb.cell(i, n), p, v_net, dt);
    }
  }
}

struct WtaBus {
  enum class State { Idle, Asserted };

  State state = State::Idle;
  std::size_t owner = 0;  // valid when Asserted
  double since = 0.0;     // grant instant
  double delay = 50e-9;   // grant-to-reset latency

  bool asserted() const { return state == State::Asserted; }
};

enum class FireDecision { Granted, Suppressed };

/// The requester's bus interface latches the bus level at request time.
inline FireDecision request_fire(WtaBus& bus, std::size_t out_index, double t,
                                 bool competition_enabled) {
  if (!competition_enabled) return FireDecision::Granted;
  if (bus.asserted()) return FireDecision::Suppressed;
  bus.state = WtaBus::State::Asserted;
  bus.owner = out_index;
  bus.since = t;
  return FireDecision::Granted;
}

struct FireCandidate {
  std::size_t index = 0;
  double overshoot = 0.0;  // v_mem - v_thr at the end of the step
};

/// Same-timestep arbitration: largest overshoot stands in for the earliest
/// crossing; exact ties go to the lowest index.
inline std::optional<std::size_t> arbitrate(std::span<const FireCandidate> candidates) {
  if (candidates.empty()) return std::nullopt;
  const FireCandidate* best = &candidates.front();
  for (const auto& c : candidates.subspan(1)) {
    if (c.overshoot > best->overshoot ||
        (c.overshoot == best->overshoot && c.index < best->index)) {
      best = &c;
    }
  }
  return best->index;
}

/// Discharge every non-owner neuron in Integrate mode once the bus delay has
/// elapsed. Returns the number of neurons reset (0 if called too early).
inline std::size_t broadcast_reset(const WtaBus& bus, std::span<NeuronState> neurons, double t) {
  if (!bus.asserted()) {
    throw Error(ErrorCategory::ContractViolation, "broadcast_reset: bus is idle");
  }
  if (t + kTimeEpsilon < bus.since + bus.delay) return 0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < neurons.size(); ++n) {
    if (n == bus.owner || neurons[n].mode == NeuronMode::Fire) continue;
    neurons[n] = discharge(neurons[n]);
    ++count;
  }
  return count;
}

inline void release_bus(WtaBus& bus, double t, const SpikeShape& shape) {
  if (!bus.asserted()) return;
  if (t + kTimeEpsilon < bus.since + shape.duration()) {
    throw Error(ErrorCategory::ContractViolation, "release_bus: owner spike has not completed");
  }
  bus.state = WtaBus::State::Idle;
}

// Weight file: "n_in n_out" then one row per input, 17 significant digits.

inline void write_weights(std::ostream& os, const Crossbar& xb) {
  os << xb.n_in() << ' ' << xb.n_out() << '\n';
  char buf[40];
  for (std::size_t i = 0; i < xb.n_in(); ++i) {
    for (std::size_t n = 0; n < xb.n_out(); ++n) {
      std::snprintf(buf, sizeof buf, "%.16e", xb.g(i, n));
      if (n) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

inline std::string weights_to_string(const Crossbar& xb) {
  std::ostringstream os;
  write_weights(os, xb);
  return os.str();
}

inline Crossbar read_weights(std::istream& is, const MemristorParams& params) {
  std::size_t n_in = 0, n_out = 0;
  if (!(is >> n_in >> n_out) || n_in == 0 || n_out == 0) {
    throw Error(ErrorCategory::Parse, "weights: bad header, expected 'n_in n_out'");
  }
  Crossbar xb(n_in, n_out, params, params.g_min);
  for (std::size_t i = 0; i < n_in; ++i) {
    for (std::size_t n = 0; n < n_out; ++n) {
      std::string tok;
      if (!(is >> tok)) {
        throw Error(ErrorCategory::Parse, "weights: truncated at row " + std::to_string(i + 1));
      }
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCategory::Parse, "weights: bad value '" + tok + "' at row " + std::to_string(i + 1));
      }
      xb.cell(i, n).g = v;
    }
  }
  std::string extra;
  if (is >> extra) throw Error(ErrorCategory::Parse, "weights: trailing data after matrix");
  return xb;
}

}  // namespace memsnn
