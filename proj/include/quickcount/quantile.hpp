#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "quickcount/errors.hpp"

namespace quickcount {

template <class T>
struct Interval {
  T lower{};
  T upper{};
  bool contains(T x) const { return lower <= x && x <= upper; }
  bool operator==(const Interval&) const = default;
};

/// Nearest-rank (type 1) empirical quantile of sorted data: the
/// ceil(n p)-th order statistic, clamped to [1, n].
template <class T>
T nearest_rank(const std::vector<T>& sorted, double p) {
  if (sorted.empty()) throw InputError("quantile of an empty sample");
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<long long>(std::ceil(n * p - 1e-9));
  rank = std::clamp<long long>(rank, 1, static_cast<long long>(sorted.size()));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

/// Equal-tailed interval from the (1-level)/2 and (1+level)/2 nearest-rank
/// quantiles. level = 0 gives (median, median).
template <class T>
Interval<T> percentile_interval(std::vector<T> values, double level) {
  if (!(level >= 0.0 && level < 1.0)) throw InputError("interval level must lie in [0, 1)");
  std::sort(values.begin(), values.end());
  return {nearest_rank(values, (1.0 - level) / 2.0), nearest_rank(values, (1.0 + level) / 2.0)};
}

/// Integer interval for seat counts, rounded outward.
template <class T>
Interval<int> seat_interval(const std::vector<T>& values, double level) {
  const auto iv = percentile_interval(values, level);
  return {static_cast<int>(std::floor(static_cast<double>(iv.lower))),
          static_cast<int>(std::ceil(static_cast<double>(iv.upper)))};
}

/// Shortest interval holding at least ceil(level * n) of the values
/// (highest-density interval of the empirical distribution). Leftmost on ties.
template <class T>
Interval<T> hpd_interval(std::vector<T> values, double level) {
  if (values.empty()) throw InputError("interval of an empty sample");
  if (!(level >= 0.0 && level < 1.0)) throw InputError("interval level must lie in [0, 1)");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  auto keep = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n) - 1e-9));
  keep = std::clamp<std::size_t>(keep, 1, n);
  std::size_t best = 0;
  for (std::size_t i = 1; i + keep <= n; ++i)
    if (values[i + keep - 1] - values[i] < values[best + keep - 1] - values[best]) best = i;
  return {values[best], values[best + keep - 1]};
}

template <class T>
double sample_mean(const std::vector<T>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (const auto& x : v) s += static_cast<double>(x);
  return s / static_cast<double>(v.size());
}

/// Unbiased (n - 1) sample variance; 0 for fewer than two values.
template <class T>
double sample_variance(const std::vector<T>& v) {
  if (v.size() < 2) return 0.0;
  const double m = sample_mean(v);
  double s = 0.0;
  for (const auto& x : v) s += (static_cast<double>(x) - m) * (static_cast<double>(x) - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace quickcount
