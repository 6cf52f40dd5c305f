#pragma once

// Threshold memristor model: conductance moves only while the voltage across
// the device exceeds a programming threshold, at a rate proportional to the
// overdrive.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "memsnn/error.hpp"
#include "memsnn/neuron.hpp"

namespace memsnn {

struct MemristorParams {
  double v_p = 0.16;      // V, potentiation threshold
  double v_n = 0.15;      // V, depression threshold magnitude
  double k_p = 40.0;      // S/(V s)
  double k_n = 40.0 / 3;  // S/(V s)
  double g_min = 1e-9;    // S
  double g_max = 100e-6;  // S

  void validate() const {
    auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!pos(v_p) || !pos(v_n)) throw Error(ErrorCategory::InvalidInput, "device: thresholds must be > 0");
    if (!pos(k_p) || !pos(k_n)) throw Error(ErrorCategory::InvalidInput, "device: rates must be > 0");
    if (!pos(g_min) || !std::isfinite(g_max) || !(g_min < g_max)) {
      throw Error(ErrorCategory::InvalidInput, "device: need 0 < g_min < g_max");
    }
  }
};

struct MemristorState {
  double g = 1e-9;  // S
};

struct BehavioralStdpParams {
  double a_plus = 1.0;
  double a_minus = -1.0;
  double tau_plus = 3e-6;
  double tau_minus = 3e-6;

  void validate() const {
    if (!(tau_plus > 0.0) || !(tau_minus > 0.0) || !(a_plus > 0.0) || !(a_minus < 0.0)) {
      throw Error(ErrorCategory::InvalidInput,
                  "behavioral stdp: need tau > 0, a_plus > 0, a_minus < 0");
    }
  }
};

/// dG/dt for an instantaneous voltage across the device.
inline double conductance_rate(const MemristorParams& p, double v_net) {
  if (v_net > p.v_p) return p.k_p * (v_net - p.v_p);
  if (v_net < -p.v_n) return -p.k_n * (-v_net - p.v_n);
  return 0.0;
}

inline MemristorState step_conductance(MemristorState s, const MemristorParams& p, double v_net,
                                       double dt) {
  if (!std::isfinite(v_net) || !std::isfinite(dt)) {
    throw Error(ErrorCategory::InvalidInput, "step_conductance: non-finite v_net or dt");
  }
  if (!(dt > 0.0)) throw Error(ErrorCategory::InvalidInput, "step_conductance: dt must be > 0");
  double rate = conductance_rate(p, v_net);
  if (rate == 0.0) return s;
  s.g = std::clamp(s.g + rate * dt, p.g_min, p.g_max);
  return s;
}

/// Over-threshold flux of a pre/post pair: the integrals of
/// (v_net - v_p)+ and (-v_net - v_n)+ over the whole overlap, in V s.
struct OverdriveFlux {
  double potentiation = 0.0;
  double depression = 0.0;
};

namespace detail {

// Integral over [0, width] of max(0, v) with v linear from v0 to v1.
inline double positive_part_integral(double v0, double v1, double width) {
  if (v0 >= 0.0 && v1 >= 0.0) return width * 0.5 * (v0 + v1);
  if (v0 <= 0.0 && v1 <= 0.0) return 0.0;
  double peak = std::max(v0, v1);
  double frac = peak / (std::abs(v0) + std::abs(v1));
  return 0.5 * width * frac * peak;
}

}  // namespace detail

/// Exact flux for a pre spike at 0 and a post spike at `delta_t`. Both
/// waveforms are piecewise linear, so v_net is linear between the six
/// breakpoints and each segment integrates in closed form.
inline OverdriveFlux overdrive_flux(double v_p, double v_n, const SpikeShape& shape,
                                    double delta_t) {
  if (!std::isfinite(delta_t)) {
    throw Error(ErrorCategory::InvalidInput, "overdrive_flux: delta_t must be finite");
  }
  const double tp = shape.tail_plus;
  const double total = shape.duration();
  std::vector<double> cuts{0.0, tp, total, delta_t, delta_t + tp, delta_t + total};
  std::sort(cuts.begin(), cuts.end());

  OverdriveFlux flux;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b);
    const LinearPiece pre = spike_piece(shape, mid);
    const LinearPiece post = spike_piece(shape, mid - delta_t);
    const double v0 = post.at(a - delta_t) - pre.at(a);
    const double v1 = post.at(b - delta_t) - pre.at(b);
    flux.potentiation += detail::positive_part_integral(v0 - v_p, v1 - v_p, b - a);
    flux.depression += detail::positive_part_integral(-v0 - v_n, -v1 - v_n, b - a);
  }
  return flux;
}

/// Conductance change produced by one pre/post pair, delta_t = t_post - t_pre.
/// Bounds are not applied.
inline double pair_delta(const MemristorParams& p, const SpikeShape& shape, double delta_t) {
  const OverdriveFlux f = overdrive_flux(p.v_p, p.v_n, shape, delta_t);
  return p.k_p * f.potentiation - p.k_n * f.depression;
}

struct CalibratedRates {
  double k_p = 0.0;
  double k_n = 0.0;
};

/// Fit k_p and k_n so that a pair at +target_dt gives +target_dg and a pair
/// at -target_dt gives -target_dg.
inline CalibratedRates calibrate_rates(const SpikeShape& shape, double v_p, double v_n,
                                       double target_dg, double target_dt) {
  shape.validate();
  if (!(target_dg > 0.0) || !(target_dt > 0.0)) {
    throw Error(ErrorCategory::InvalidInput, "calibrate_rates: targets must be > 0");
  }
  const double f_pot = overdrive_flux(v_p, v_n, shape, target_dt).potentiation;
  const double f_dep = overdrive_flux(v_p, v_n, shape, -target_dt).depression;
  if (!(f_pot > 0.0) || !(f_dep > 0.0)) {
    throw Error(ErrorCategory::CalibrationImpossible,
                "calibrate_rates: no over-threshold flux at the target spike interval");
  }
  return {target_dg / f_pot, target_dg / f_dep};
}

struct WindowPoint {
  double delta_t = 0.0;
  double delta_g = 0.0;
};

inline std::vector<WindowPoint> stdp_window(const MemristorParams& p, const SpikeShape& shape,
                                            std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorCategory::InvalidInput, "stdp_window: empty grid");
  std::vector<WindowPoint> out;
  out.reserve(grid.size());
  for (double dt : grid) out.push_back({dt, pair_delta(p, shape, dt)});
  return out;
}

/// `points` evenly spaced values from lo to hi inclusive.
inline std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points == 0) throw Error(ErrorCategory::InvalidInput, "linear_grid: need at least one point");
  if (points == 1) return {lo};
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k) {
    g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return g;
}

inline void write_window_csv(std::ostream& os, std::span<const WindowPoint> window) {
  os << "delta_t_s,delta_g_s\n";
  char buf[64];
  for (const auto& w : window) {
    std::snprintf(buf, sizeof buf, "%.9e,%.9e\n", w.delta_t, w.delta_g);
    os << buf;
  }
}

/// Exponential pairwise window. Zero at delta_t == 0.
inline double behavioral_delta(const BehavioralStdpParams& bp, double delta_t) {
  if (delta_t > 0.0) return bp.a_plus * std::exp(-delta_t / bp.tau_plus);
  if (delta_t < 0.0) return bp.a_minus * std::exp(delta_t / bp.tau_minus);
  return 0.0;
}

struct FeasibilityVerdict {
  bool feasible = false;
  bool thresholds_balanced = false;  // |v_p - v_n| < min(v_p, v_n)
  bool spike_non_disturbing = false; // va_plus < min(v_p, v_n)
  bool pair_can_program = false;     // va_plus + va_minus > max(v_p, v_n)
  std::vector<std::string> reasons;  // one entry per failed condition
};

inline FeasibilityVerdict stdp_feasible(double v_p, double v_n, const SpikeShape& shape) {
  if (!(v_p > 0.0) || !(v_n > 0.0)) {
    throw Error(ErrorCategory::InvalidInput, "stdp_feasible: thresholds must be > 0");
  }
  FeasibilityVerdict v;
  const double lo = std::min(v_p, v_n);
  const double hi = std::max(v_p, v_n);
  v.thresholds_balanced = std::abs(v_p - v_n) < lo;
  v.spike_non_disturbing = shape.va_plus < lo;
  v.pair_can_program = shape.va_plus + shape.va_minus > hi;
  if (!v.thresholds_balanced) {
    v.reasons.push_back("(a) |v_p - v_n| >= min(v_p, v_n): no symmetric pulse can both potentiate and depress");
  }
  if (!v.spike_non_disturbing) {
    v.reasons.push_back("(b) va_plus >= min(v_p, v_n): a lone spike disturbs the device");
  }
  if (!v.pair_can_program) {
    v.reasons.push_back("(c) va_plus + va_minus <= max(v_p, v_n): a spike pair cannot program");
  }
  v.feasible = v.thresholds_balanced && v.spike_non_disturbing && v.pair_can_program;
  return v;
}

/// Behavioral window anchored to the device: one unit of weight change at
/// +anchor_dt corresponds to `siemens_per_unit`, and the depression branch
/// reproduces the device's ratio at -anchor_dt. Both time constants follow
/// the negative tail.
struct BehavioralCalibration {
  BehavioralStdpParams params;
  double siemens_per_unit = 0.0;
};

inline BehavioralCalibration calibrate_behavioral(const MemristorParams& p, const SpikeShape& shape,
                                                  double anchor_dt) {
  const double pot = pair_delta(p, shape, anchor_dt);
  const double dep = pair_delta(p, shape, -anchor_dt);
  if (!(pot > 0.0) || !(dep < 0.0)) {
    throw Error(ErrorCategory::CalibrationImpossible,
                "calibrate_behavioral: device window is empty at the anchor interval");
  }
  BehavioralCalibration c;
  c.params.tau_plus = shape.tail_minus;
  c.params.tau_minus = shape.tail_minus;
  c.params.a_plus = std::exp(anchor_dt / c.params.tau_plus);
  c.params.a_minus = (dep / pot) * std::exp(anchor_dt / c.params.tau_minus);
  c.siemens_per_unit = pot;
  return c;
}

}  // namespace memsnn
