#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "affinity/errors.hpp"

namespace affinity {

// Linearly interpolated quantile of an unsorted sample (R type 7).
inline double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw ValidationError("quantile of an empty sample");
  if (prob < 0.0 || prob > 1.0) throw ValidationError("quantile probability must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline double mean_of(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

}  // namespace affinity
