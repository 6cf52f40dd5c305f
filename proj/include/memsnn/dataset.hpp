#pragma once

// UCI optdigits (preprocessed 8x8 form): 64 block counts and a class label
// per comma-separated line.

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "memsnn/error.hpp"

namespace memsnn {

inline constexpr std::size_t kPixels = 64;
inline constexpr int kMaxPixel = 16;

struct DigitSample {
  std::array<int, kPixels> pixels{};
  int label = 0;

  friend bool operator==(const DigitSample&, const DigitSample&) = default;
};

using Dataset = std::vector<DigitSample>;

inline Dataset parse_optdigits(std::istream& is, const std::string& source = "<stream>") {
  Dataset out;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCategory::Parse, source + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::array<int, kPixels + 1> fields{};
    std::size_t count = 0;
    std::string_view rest(line);
    while (true) {
      auto comma = rest.find(',');
      std::string_view tok = rest.substr(0, comma);
      while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
      while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
      if (count == fields.size()) fail("more than 65 fields");
      int v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
        fail("field " + std::to_string(count + 1) + " is not an integer");
      }
      fields[count++] = v;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (count != fields.size()) fail("expected 65 fields, got " + std::to_string(count));

    DigitSample s;
    for (std::size_t i = 0; i < kPixels; ++i) {
      if (fields[i] < 0 || fields[i] > kMaxPixel) {
        fail("pixel " + std::to_string(i) + " out of range [0, 16]");
      }
      s.pixels[i] = fields[i];
    }
    s.label = fields[kPixels];
    if (s.label < 0 || s.label > 9) fail("label out of range [0, 9]");
    out.push_back(s);
  }
  return out;
}

inline Dataset load_optdigits(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open dataset '" + path + "'");
  return parse_optdigits(in, path);
}

inline void write_optdigits(std::ostream& os, const Dataset& samples) {
  for (const auto& s : samples) {
    for (int p : s.pixels) os << p << ',';
    os << s.label << '\n';
  }
}

/// Indices of pixels at or above `threshold`.
inline std::vector<std::size_t> binarize(const DigitSample& s, int threshold = 7) {
  std::vector<std::size_t> on;
  for (std::size_t i = 0; i < kPixels; ++i) {
    if (s.pixels[i] >= threshold) on.push_back(i);
  }
  return on;
}

/// File order, restricted to `classes`.
inline Dataset order_for_training(const Dataset& samples, const std::set<int>& classes) {
  Dataset out;
  for (const auto& s : samples) {
    if (classes.contains(s.label)) out.push_back(s);
  }
  return out;
}

/// The first `per_class` samples of each class (file order within a class),
/// in contiguous blocks following the order of `classes`.
inline Dataset order_class_by_class(const Dataset& samples, const std::vector<int>& classes,
                                    std::size_t per_class) {
  Dataset out;
  for (int c : classes) {
    std::size_t taken = 0;
    for (const auto& s : samples) {
      if (taken == per_class) break;
      if (s.label == c) {
        out.push_back(s);
        ++taken;
      }
    }
    if (taken < per_class) {
      throw Error(ErrorCategory::InvalidInput,
                  "class " + std::to_string(c) + " has only " + std::to_string(taken) +
                      " samples, " + std::to_string(per_class) + " requested");
    }
  }
  return out;
}

/// Keep the first `per_class` samples of each class, preserving file order.
inline Dataset take_per_class(const Dataset& samples, std::size_t per_class) {
  std::array<std::size_t, 10> seen{};
  Dataset out;
  for (const auto& s : samples) {
    if (seen[static_cast<std::size_t>(s.label)]++ < per_class) out.push_back(s);
  }
  return out;
}

inline std::array<double, kPixels> class_mean_bitmap(const Dataset& samples, int label,
                                                     int threshold = 7) {
  std::array<double, kPixels> mean{};
  std::size_t count = 0;
  for (const auto& s : samples) {
    if (s.label != label) continue;
    ++count;
    for (std::size_t i = 0; i < kPixels; ++i) mean[i] += s.pixels[i] >= threshold ? 1.0 : 0.0;
  }
  if (count == 0) {
    throw Error(ErrorCategory::InvalidInput, "class_mean_bitmap: no samples of class " + std::to_string(label));
  }
  for (auto& m : mean) m /= static_cast<double>(count);
  return mean;
}

/// Ascending class order maps to ascending output index.
class ClassMap {
 public:
  ClassMap() = default;
  explicit ClassMap(std::vector<int> classes) : classes_(std::move(classes)) {
    std::sort(classes_.begin(), classes_.end());
    classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
    for (int c : classes_) {
      if (c < 0 || c > 9) throw Error(ErrorCategory::InvalidInput, "class out of range [0, 9]");
    }
  }

  std::size_t size() const { return classes_.size(); }
  const std::vector<int>& classes() const { return classes_; }
  int class_of(std::size_t output) const { return classes_.at(output); }

  std::size_t output_of(int label) const {
    auto it = std::lower_bound(classes_.begin(), classes_.end(), label);
    if (it == classes_.end() || *it != label) {
      throw Error(ErrorCategory::InvalidInput, "label " + std::to_string(label) + " has no output neuron");
    }
    return static_cast<std::size_t>(it - classes_.begin());
  }

  std::set<int> as_set() const { return {classes_.begin(), classes_.end()}; }

 private:
  std::vector<int> classes_;
};

}  // namespace memsnn
