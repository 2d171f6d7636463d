#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvbell::numerics {

inline constexpr int kMaxHermiteIndex = 5000;

namespace detail {

// Values are carried as mantissa * exp(log_scale) so that the recurrence
// neither underflows in the Gaussian tail nor overflows for large n.
inline constexpr double kRescaleThreshold = 1e150;
inline constexpr double kRescaleFactor = 1e-150;
inline const double kLogRescale = 150.0 * std::log(10.0);

inline double scaled_value(double mantissa, double log_scale) {
  if (mantissa == 0.0) return 0.0;
  if (log_scale > -700.0 && log_scale < 700.0) return mantissa * std::exp(log_scale);
  return std::copysign(std::exp(std::log(std::abs(mantissa)) + log_scale), mantissa);
}

}  // namespace detail

/// Fills out[k] = phi_k(x) for k = 0 .. out.size()-1, where phi_k is the
/// normalized harmonic-oscillator eigenfunction
///   phi_k(x) = (2^k k! sqrt(pi))^{-1/2} H_k(x) exp(-x^2/2).
/// Uses the two-term recurrence
///   phi_{k+1} = x sqrt(2/(k+1)) phi_k - sqrt(k/(k+1)) phi_{k-1}
/// with a running exponent, so it is safe for |x| well beyond 40.
inline void hermite_functions(double x, std::span<double> out) {
  if (out.empty()) return;
  if (out.size() > static_cast<std::size_t>(kMaxHermiteIndex) + 1) {
    throw std::out_of_range("hermite_functions: index above " + std::to_string(kMaxHermiteIndex));
  }
  double log_scale = -0.5 * x * x - 0.25 * std::log(std::numbers::pi);
  double prev = 0.0;
  double cur = 1.0;
  out[0] = detail::scaled_value(cur, log_scale);
  for (std::size_t k = 0; k + 1 < out.size(); ++k) {
    const double kk = static_cast<double>(k);
    const double next = x * std::sqrt(2.0 / (kk + 1.0)) * cur - std::sqrt(kk / (kk + 1.0)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > detail::kRescaleThreshold) {
      prev *= detail::kRescaleFactor;
      cur *= detail::kRescaleFactor;
      log_scale += detail::kLogRescale;
    }
    out[k + 1] = detail::scaled_value(cur, log_scale);
  }
}

/// Single normalized oscillator eigenfunction phi_n(x), 0 <= n <= 5000.
inline double hermite_function(int n, double x) {
  if (n < 0 || n > kMaxHermiteIndex) {
    throw std::out_of_range("hermite_function: n=" + std::to_string(n) + " outside [0, " +
                            std::to_string(kMaxHermiteIndex) + "]");
  }
  std::vector<double> values(static_cast<std::size_t>(n) + 1);
  hermite_functions(x, values);
  return values.back();
}

/// log( sum_{k<n} h_k(x)^2 ) for the normalized Hermite polynomials h_k
/// (orthonormal under exp(-x^2)). Its negative exponential is the Christoffel
/// weight of the n-point Gauss-Hermite rule at a node x.
inline double hermite_log_christoffel_sum(int n, double x) {
  double log_scale = -0.25 * std::log(std::numbers::pi);
  double prev = 0.0;
  double cur = 1.0;
  double sum = 1.0;  // in units of exp(2 * log_scale)
  for (int k = 0; k + 1 < n; ++k) {
    const double kk = static_cast<double>(k);
    const double next = x * std::sqrt(2.0 / (kk + 1.0)) * cur - std::sqrt(kk / (kk + 1.0)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > detail::kRescaleThreshold) {
      prev *= detail::kRescaleFactor;
      cur *= detail::kRescaleFactor;
      sum *= detail::kRescaleFactor * detail::kRescaleFactor;
      log_scale += detail::kLogRescale;
    }
    sum += cur * cur;
  }
  return std::log(sum) + 2.0 * log_scale;
}

}  // namespace cvbell::numerics
