#pragma once

// Spiking opportunity, drive-current budgets, neuron power efficiency and
// classification reporting.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "memsnn/dataset.hpp"
#include "memsnn/error.hpp"
#include "memsnn/network.hpp"

namespace memsnn {

/// Share of the total input current carried by each output neuron.
/// `currents[n][i]` is the current into output n through input i.
inline std::vector<double> spiking_opportunity(const std::vector<std::vector<double>>& currents) {
  std::vector<double> p(currents.size(), 0.0);
  double total = 0.0;
  for (std::size_t n = 0; n < currents.size(); ++n) {
    for (double c : currents[n]) {
      if (!(c >= 0.0) || !std::isfinite(c)) {
        throw Error(ErrorCategory::InvalidInput, "spiking_opportunity: currents must be finite and >= 0");
      }
      p[n] += c;
    }
    total += p[n];
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCategory::Undefined, "spiking_opportunity: total current is zero");
  }
  for (auto& x : p) x /= total;
  return p;
}

/// Current needed to hold `v` across `n` parallel synapses of `r_each`.
inline double drive_current(double n, double r_each, double v) {
  if (n < 0.0 || !(r_each > 0.0) || v < 0.0) {
    throw Error(ErrorCategory::InvalidInput, "drive_current: need n >= 0, r > 0, v >= 0");
  }
  return n * v / r_each;
}

/// Same, counting only the low-resistance fraction of the array.
inline double lrs_drive_current(double n_total, double lrs_fraction, double r_lrs, double v) {
  if (lrs_fraction < 0.0 || lrs_fraction > 1.0) {
    throw Error(ErrorCategory::InvalidInput, "lrs_drive_current: fraction must be in [0, 1]");
  }
  return drive_current(n_total * lrs_fraction, r_lrs, v);
}

/// Fraction of the drive current that reaches the synapses.
inline double efficiency(double i_mr, double i_ifn) {
  if (i_mr < 0.0 || i_ifn < 0.0) throw Error(ErrorCategory::InvalidInput, "efficiency: currents must be >= 0");
  if (i_mr + i_ifn == 0.0) throw Error(ErrorCategory::Undefined, "efficiency: both currents are zero");
  return i_mr / (i_mr + i_ifn);
}

struct Report {
  std::vector<int> classes;                      // row/column order of the confusion matrix
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<std::size_t> no_decision;          // per true class
  std::vector<double> recall;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t no_decision_total = 0;
  double accuracy = 0.0;  // correct / total, no-decisions count as errors
};

/// `predictions[k]` is the predicted class (not output index) or nullopt.
inline Report confusion_and_accuracy(std::span<const std::optional<int>> predictions,
                                     std::span<const int> labels, const ClassMap& class_map) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCategory::DimensionMismatch, "confusion_and_accuracy: size mismatch");
  }
  const std::size_t k = class_map.size();
  Report r;
  r.classes = class_map.classes();
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  r.no_decision.assign(k, 0);
  r.recall.assign(k, 0.0);
  std::vector<std::size_t> row_total(k, 0);
  for (std::size_t s = 0; s < labels.size(); ++s) {
    const std::size_t t = class_map.output_of(labels[s]);
    ++row_total[t];
    ++r.total;
    if (!predictions[s]) {
      ++r.no_decision[t];
      ++r.no_decision_total;
      continue;
    }
    const std::size_t p = class_map.output_of(*predictions[s]);
    ++r.confusion[t][p];
    if (p == t) ++r.correct;
  }
  for (std::size_t t = 0; t < k; ++t) {
    r.recall[t] = row_total[t] ? static_cast<double>(r.confusion[t][t]) / static_cast<double>(row_total[t]) : 0.0;
  }
  r.accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
  return r;
}

/// Pearson correlation; nullopt when either side has zero variance.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCategory::DimensionMismatch, "pearson: need equal sizes >= 2");
  }
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y)) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

/// r between output n's weight column and the n-th class mean bitmap.
inline std::vector<std::optional<double>> weight_feature_correlation(
    const Crossbar& xb, const std::vector<std::array<double, kPixels>>& class_means) {
  if (class_means.size() != xb.n_out() || xb.n_in() != kPixels) {
    throw Error(ErrorCategory::DimensionMismatch, "weight_feature_correlation: need 64 x n_classes weights");
  }
  std::vector<std::optional<double>> r;
  for (std::size_t n = 0; n < xb.n_out(); ++n) {
    const auto col = xb.column(n);
    r.push_back(pearson(col, class_means[n]));
  }
  return r;
}

}  // namespace memsnn
