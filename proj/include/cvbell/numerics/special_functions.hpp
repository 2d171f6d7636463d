#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace cvbell::numerics {

/// Error function; forwards to the C library.
inline double erf(double x) { return std::erf(x); }

namespace detail {

inline constexpr double kSeriesLimit = 6.5;

// sum_k x^{2k+1} / (k! (2k+1)); every term is positive so there is no
// cancellation. Only used for |x| <= kSeriesLimit.
inline double erfi_series_sum(double x) {
  const double x2 = x * x;
  double power = x;  // x^{2k+1} / k!
  double sum = x;
  for (int k = 1; k < 400; ++k) {
    power *= x2 / k;
    const double term = power / (2.0 * k + 1.0);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// D(x) ~ 1/(2x) sum_k (2k-1)!! / (2x^2)^k, truncated at the smallest term.
inline double dawson_asymptotic(double x) {
  const double inv = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = term * (2.0 * k - 1.0) * inv;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum / (2.0 * x);
}

}  // namespace detail

/// Dawson's integral D(x) = exp(-x^2) * int_0^x exp(t^2) dt. Odd.
inline double dawson(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? x : 0.0;
  const double ax = std::abs(x);
  double value;
  if (ax <= detail::kSeriesLimit) {
    value = std::exp(-ax * ax) * detail::erfi_series_sum(ax);
  } else {
    value = detail::dawson_asymptotic(ax);
  }
  return std::copysign(value, x);
}

/// Imaginary error function erfi(x) = -i erf(ix) = 2/sqrt(pi) exp(x^2) D(x).
/// Overflows to +-inf once exp(x^2) does (|x| > ~26.6).
inline double erfi(double x) {
  if (std::isnan(x)) return x;
  const double ax = std::abs(x);
  double value;
  if (ax <= detail::kSeriesLimit) {
    value = 2.0 * std::numbers::inv_sqrtpi * detail::erfi_series_sum(ax);
  } else if (ax < 27.0) {
    value = 2.0 * std::numbers::inv_sqrtpi * std::exp(ax * ax) * detail::dawson_asymptotic(ax);
  } else {
    value = std::numeric_limits<double>::infinity();
  }
  return std::copysign(value, x);
}

}  // namespace cvbell::numerics
