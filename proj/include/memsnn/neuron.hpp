#pragma once

// Integrate-and-fire neuron with tri-mode operation and the shared
// pre/post spike waveform.

#include <cmath>
#include <limits>
#include <string>

#include "memsnn/error.hpp"

namespace memsnn {

/// Action potential: a rectangular positive pulse followed by a negative
/// tail that ramps linearly back to rest. Voltages are relative to rest.
struct SpikeShape {
  double va_plus = 0.140;     // V
  double va_minus = 0.030;    // V, magnitude at the start of the tail
  double tail_plus = 1e-6;    // s
  double tail_minus = 3e-6;   // s

  double slope() const { return va_minus / tail_minus; }
  double duration() const { return tail_plus + tail_minus; }

  void validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!ok(va_plus) || !ok(va_minus) || !ok(tail_plus) || !ok(tail_minus)) {
      throw Error(ErrorCategory::InvalidInput,
                  "spike shape: amplitudes and tail widths must be finite and > 0");
    }
  }
};

/// Spike voltage `tau` seconds after onset. Zero before onset and after the
/// tail has returned to rest.
inline double spike_value(const SpikeShape& shape, double tau) {
  if (tau < 0.0) return 0.0;
  if (tau < shape.tail_plus) return shape.va_plus;
  if (tau < shape.duration()) {
    return -shape.va_minus * (1.0 - (tau - shape.tail_plus) / shape.tail_minus);
  }
  return 0.0;
}

/// One linear segment of a waveform: v(t) = value + slope * (t - start).
struct LinearPiece {
  double value = 0.0;
  double slope = 0.0;
  double start = 0.0;

  double at(double t) const { return value + slope * (t - start); }
};

/// The linear piece of the spike (onset at 0) that contains `tau`. Used to
/// take one-sided limits at the waveform's discontinuities.
inline LinearPiece spike_piece(const SpikeShape& shape, double tau) {
  if (tau >= 0.0 && tau < shape.tail_plus) return {shape.va_plus, 0.0, 0.0};
  if (tau >= shape.tail_plus && tau < shape.duration()) {
    return {-shape.va_minus, shape.slope(), shape.tail_plus};
  }
  return {};
}

struct NeuronParams {
  double c_mem = 0.5e-9;                                  // F
  double r_leak = std::numeric_limits<double>::infinity();  // ohm, inf = no leak
  double v_thr = 0.3;                                     // V above rest
  double v_rest = 0.0;

  void validate() const {
    if (!(c_mem > 0.0) || !std::isfinite(c_mem)) {
      throw Error(ErrorCategory::InvalidInput, "neuron: c_mem must be finite and > 0");
    }
    if (!(r_leak > 0.0)) throw Error(ErrorCategory::InvalidInput, "neuron: r_leak must be > 0");
    if (!(v_thr > 0.0) || !std::isfinite(v_thr)) {
      throw Error(ErrorCategory::InvalidInput, "neuron: v_thr must be finite and > 0");
    }
  }
};

enum class NeuronMode { Integrate, Fire, Discharge };

inline const char* to_string(NeuronMode m) {
  switch (m) {
    case NeuronMode::Integrate: return "integrate";
    case NeuronMode::Fire: return "fire";
    case NeuronMode::Discharge: return "discharge";
  }
  return "?";
}

struct NeuronState {
  NeuronMode mode = NeuronMode::Integrate;
  double v_mem = 0.0;
  double fire_onset = 0.0;     // meaningful only in Fire mode
  double last_fire_end = -std::numeric_limits<double>::infinity();

  bool firing() const { return mode == NeuronMode::Fire; }
};

namespace detail {
[[noreturn]] inline void mode_violation(const std::string& op, NeuronMode m) {
  throw Error(ErrorCategory::ModeViolation,
              op + ": illegal in " + to_string(m) + " mode");
}
}  // namespace detail

/// One explicit-Euler step of C dv/dt = i - v/R.
inline NeuronState integrate_step(NeuronState s, const NeuronParams& p, double i_total, double dt) {
  if (s.mode != NeuronMode::Integrate) detail::mode_violation("integrate_step", s.mode);
  if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(i_total)) {
    throw Error(ErrorCategory::InvalidInput, "integrate_step: dt must be > 0 and inputs finite");
  }
  double leak = std::isinf(p.r_leak) ? 0.0 : s.v_mem / (p.r_leak * p.c_mem);
  s.v_mem += dt * (i_total / p.c_mem - leak);
  return s;
}

/// Comparator output; inclusive at the threshold.
inline bool threshold_crossed(const NeuronState& s, const NeuronParams& p) {
  return s.mode == NeuronMode::Integrate && s.v_mem >= p.v_thr;
}

inline NeuronState begin_fire(NeuronState s, double t) {
  if (s.mode != NeuronMode::Integrate) detail::mode_violation("begin_fire", s.mode);
  s.mode = NeuronMode::Fire;
  s.fire_onset = t;
  return s;
}

inline NeuronState end_fire(NeuronState s, const SpikeShape& shape, double t) {
  if (s.mode != NeuronMode::Fire) detail::mode_violation("end_fire", s.mode);
  if (t + kTimeEpsilon < s.fire_onset + shape.duration()) {
    throw Error(ErrorCategory::ModeViolation, "end_fire: spike has not completed");
  }
  s.mode = NeuronMode::Integrate;
  s.v_mem = 0.0;
  s.last_fire_end = t;
  return s;
}

/// Inhibitive discharge, modeled as instantaneous. A firing neuron owns the
/// bus and is never reset.
inline NeuronState discharge(NeuronState s) {
  if (s.mode == NeuronMode::Fire) detail::mode_violation("discharge", s.mode);
  s.v_mem = 0.0;
  s.mode = NeuronMode::Integrate;
  return s;
}

/// Voltage the neuron presents on both its axon and dendrite ports at `t`.
/// Rest unless firing.
inline double port_voltage(const NeuronState& s, const SpikeShape& shape, double t) {
  return s.firing() ? spike_value(shape, t - s.fire_onset) : 0.0;
}

}  // namespace memsnn
