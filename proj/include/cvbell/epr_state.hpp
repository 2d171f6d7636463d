#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "cvbell/numerics/gaussian_integral.hpp"

namespace cvbell {

/// A point (q, p) of one mode's phase space, in oscillator units (hbar = 1).
struct PhasePoint {
  double q = 0.0;
  double p = 0.0;

  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

inline constexpr int kMaxSchmidtTruncation = 2048;

/// Two-mode squeezed vacuum
///   |Psi> = (1/cosh r) sum_n tanh(r)^n |n, n>,   <n> = sinh^2 r.
///
/// Immutable; the hyperbolic quantities are derived once at construction.
/// Wigner function and wavefunctions are probability-normalized under the
/// plain measure dq dp (see wigner()).
class EprState {
 public:
  static EprState from_mean_photon(double n_mean) {
    if (!std::isfinite(n_mean) || n_mean < 0.0) {
      throw std::invalid_argument("EprState: mean photon number must be finite and >= 0, got " +
                                  std::to_string(n_mean));
    }
    EprState s;
    s.n_mean_ = n_mean;
    s.r_ = std::asinh(std::sqrt(n_mean));
    s.c2_ = 1.0 + 2.0 * n_mean;
    s.s2_ = 2.0 * std::sqrt(n_mean * (n_mean + 1.0));
    s.set_axes();
    return s;
  }

  static EprState from_squeezing(double r) {
    if (!std::isfinite(r) || r < 0.0) {
      throw std::invalid_argument("EprState: squeezing must be finite and >= 0, got " + std::to_string(r));
    }
    EprState s;
    const double sh = std::sinh(r);
    s.n_mean_ = sh * sh;
    s.r_ = r;
    s.c2_ = std::cosh(2.0 * r);
    s.s2_ = std::sinh(2.0 * r);
    s.set_axes();
    return s;
  }

  double mean_photon() const { return n_mean_; }
  double squeezing() const { return r_; }
  /// cosh 2r = 1 + 2<n>
  double c2() const { return c2_; }
  /// sinh 2r = 2 sqrt(<n>(<n>+1))
  double s2() const { return s2_; }
  /// Correlation coefficient of q_a and q_b, s2 / c2 = tanh 2r.
  double position_correlation() const { return s2_ / c2_; }

  /// c_n = tanh(r)^n / cosh(r) = (<n>/(1+<n>))^{n/2} / sqrt(1+<n>)
  double schmidt_coefficient(int n) const {
    if (n < 0) throw std::invalid_argument("schmidt_coefficient: n must be >= 0");
    const double ratio = n_mean_ / (1.0 + n_mean_);
    return std::pow(ratio, 0.5 * n) / std::sqrt(1.0 + n_mean_);
  }

  /// sum_{n >= N} c_n^2 = (<n>/(1+<n>))^N
  double schmidt_tail(int truncation) const {
    return std::pow(n_mean_ / (1.0 + n_mean_), static_cast<double>(truncation));
  }

  /// Smallest N with schmidt_tail(N) < tail, capped at 2048.
  int truncation_for(double tail = 1e-12) const {
    if (n_mean_ == 0.0) return 1;
    const double ratio = n_mean_ / (1.0 + n_mean_);
    const double n = std::ceil(std::log(tail) / std::log(ratio));
    return static_cast<int>(std::clamp(n, 1.0, static_cast<double>(kMaxSchmidtTruncation)));
  }

  /// Psi(q_a, q_b) = pi^{-1/2} exp(-(c2/2)(q_a^2 + q_b^2) + s2 q_a q_b)
  double position_amplitude(double qa, double qb) const {
    const double plus = qa + qb;
    const double minus = qa - qb;
    return std::numbers::inv_sqrtpi * std::exp(-0.25 * (narrow_ * plus * plus + wide_ * minus * minus));
  }

  /// Momentum-space amplitude: same Gaussian with the cross term negated,
  /// normalized to unit probability.
  double momentum_amplitude(double pa, double pb) const { return position_amplitude(pa, -pb); }

  /// W(q_a, p_a, q_b, p_b) = pi^{-2} exp(-c2 (q_a^2 + q_b^2) + 2 s2 q_a q_b
  ///                                    -c2 (p_a^2 + p_b^2) - 2 s2 p_a p_b),
  /// which integrates to one over dq_a dp_a dq_b dp_b.
  double wigner(double qa, double pa, double qb, double pb) const {
    const double q_plus = qa + qb;
    const double q_minus = qa - qb;
    const double p_plus = pa + pb;
    const double p_minus = pa - pb;
    const double e = -0.5 * (narrow_ * (q_plus * q_plus + p_minus * p_minus) +
                             wide_ * (q_minus * q_minus + p_plus * p_plus));
    return std::exp(e) / (std::numbers::pi * std::numbers::pi);
  }
  double wigner(PhasePoint a, PhasePoint b) const { return wigner(a.q, a.p, b.q, b.p); }

  /// Covariance of (q_a, q_b, p_a, p_b) under the Wigner distribution.
  Eigen::Matrix4d covariance_matrix() const {
    Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
    cov(0, 0) = cov(1, 1) = cov(2, 2) = cov(3, 3) = 0.5 * c2_;
    cov(0, 1) = cov(1, 0) = 0.5 * s2_;
    cov(2, 3) = cov(3, 2) = -0.5 * s2_;
    return cov;
  }

  /// |Psi(q_a, q_b)|^2 as a Gaussian form over (q_a, q_b).
  numerics::GaussianForm2D position_density() const {
    return {c2_, c2_, s2_, 0.0, 0.0, -std::log(std::numbers::pi), 1.0};
  }

  /// |Psi~(p_a, p_b)|^2 as a Gaussian form over (p_a, p_b).
  numerics::GaussianForm2D momentum_density() const {
    return {c2_, c2_, -s2_, 0.0, 0.0, -std::log(std::numbers::pi), 1.0};
  }

 private:
  EprState() = default;

  // Exponent weights along the principal axes: c2 + s2 = e^{2r} and its
  // inverse c2 - s2, the latter without cancellation.
  void set_axes() {
    wide_ = c2_ + s2_;
    narrow_ = 1.0 / wide_;
  }

  double n_mean_ = 0.0;
  double r_ = 0.0;
  double c2_ = 1.0;
  double s2_ = 0.0;
  double wide_ = 1.0;
  double narrow_ = 1.0;
};

}  // namespace cvbell
