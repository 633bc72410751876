#pragma once

// Normal distribution truncated to [lower, upper].

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "quickcount/errors.hpp"
#include "quickcount/rng.hpp"

namespace quickcount {

namespace detail {

inline constexpr double kSqrt2 = 1.41421356237309504880;

/// Upper-tail probability P(Z > x).
inline double normal_sf(double x) { return 0.5 * boost::math::erfc(x / kSqrt2); }

/// x with P(Z > x) = p.
inline double normal_isf(double p) { return kSqrt2 * boost::math::erfc_inv(2.0 * p); }

/// Standard normal restricted to [a, b] with 0 <= a < b, by rejection from a
/// shifted exponential proposal. Used when the tail mass is too small for the
/// inverse-CDF method.
inline double tail_rejection(double a, double b, Rng& rng) {
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  const double width = b - a;
  // mass of the proposal beyond b, removed by sampling the truncated exponential
  const double keep = std::isinf(width) ? 1.0 : -std::expm1(-alpha * width);
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    const double z = a - std::log1p(-uniform_open(rng) * keep) / alpha;
    if (z > b) continue;
    if (uniform_open(rng) <= std::exp(-0.5 * (z - alpha) * (z - alpha))) return z;
  }
  throw EstimationError("truncated-normal tail sampler did not converge");
}

/// Standard normal restricted to [a, b].
inline double standard_truncated(double a, double b, Rng& rng) {
  if (!(a < b)) throw InputError("truncation interval is empty");
  if (a >= 0.0 || b <= 0.0) {
    // one-sided: work in the upper tail
    const bool flip = b <= 0.0;
    const double lo = flip ? -b : a;
    const double hi = flip ? -a : b;
    const double s_lo = normal_sf(lo);
    const double s_hi = normal_sf(hi);
    double z;
    if (s_lo < 1e-12 || s_lo - s_hi < 1e-6 * s_lo) {
      z = tail_rejection(lo, hi, rng);
    } else {
      const double p = s_lo - uniform_open(rng) * (s_lo - s_hi);
      z = std::clamp(normal_isf(p), lo, hi);
    }
    return flip ? -z : z;
  }
  // straddles zero: invert the lower-tail CDF
  const double c_lo = normal_sf(-a);  // P(Z < a)
  const double c_hi = normal_sf(-b);  // P(Z < b)
  const double p = c_lo + uniform_open(rng) * (c_hi - c_lo);
  return std::clamp(-normal_isf(p), a, b);
}

}  // namespace detail

/// One draw from N(mean, sd^2) truncated to [lower, upper].
inline double truncated_normal(double mean, double sd, double lower, double upper, Rng& rng) {
  if (!(sd > 0.0) || !std::isfinite(sd)) throw InputError("truncated normal needs a positive finite sd");
  if (!std::isfinite(mean)) throw InputError("truncated normal needs a finite mean");
  const double a = (lower - mean) / sd;
  const double b = (upper - mean) / sd;
  if (!(a < b)) {
    // interval narrower than the floating-point resolution of the standardized scale
    return 0.5 * (lower + upper);
  }
  return std::clamp(mean + sd * detail::standard_truncated(a, b, rng), lower, upper);
}

/// Draw on (0, 1) kept strictly inside the open interval.
inline double truncated_normal_unit(double mean, double sd, Rng& rng) {
  double x = truncated_normal(mean, sd, 0.0, 1.0, rng);
  if (x <= 0.0) x = std::nextafter(0.0, 1.0);
  if (x >= 1.0) x = std::nextafter(1.0, 0.0);
  return x;
}

}  // namespace quickcount
