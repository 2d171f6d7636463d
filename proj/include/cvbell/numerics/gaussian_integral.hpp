#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvbell/numerics/adaptive.hpp"
#include "cvbell/numerics/rules.hpp"

namespace cvbell::numerics {

/// Controls for Gaussian-weighted 2D integration.
struct QuadratureSpec {
  int order = 20;                  ///< Gauss nodes per panel (per axis)
  std::vector<double> splits_x;    ///< discontinuity lines x = const
  std::vector<double> splits_y;    ///< discontinuity lines y = const
  double target_rel_error = 1e-10;
  int max_refinements = 4000;      ///< panel budget per 1D sweep

  void validate() const {
    if (order < 1 || order > kMaxGaussLegendreOrder) {
      throw std::invalid_argument("QuadratureSpec: order must lie in [1, " +
                                  std::to_string(kMaxGaussLegendreOrder) + "]");
    }
    if (!(target_rel_error > 0.0)) {
      throw std::invalid_argument("QuadratureSpec: target_rel_error must be positive");
    }
    if (max_refinements < 1) throw std::invalid_argument("QuadratureSpec: max_refinements < 1");
    for (const auto* axis : {&splits_x, &splits_y}) {
      for (double s : *axis) {
        if (!std::isfinite(s)) throw std::invalid_argument("QuadratureSpec: non-finite breakpoint");
      }
      if (!std::is_sorted(axis->begin(), axis->end())) {
        throw std::invalid_argument("QuadratureSpec: breakpoints must be sorted");
      }
    }
  }
};

/// exp(-a_xx x^2 - a_yy y^2 + 2 a_xy x y + b_x x + b_y y + c)
struct GaussianForm2D {
  double a_xx = 1.0;
  double a_yy = 1.0;
  double a_xy = 0.0;
  double b_x = 0.0;
  double b_y = 0.0;
  double c = 0.0;
  /// Exact a_xx a_yy - a_xy^2 when the caller knows it better than the
  /// rounded coefficients do (nearly singular forms); 0 means unknown.
  double exact_determinant = 0.0;

  [[nodiscard]] double exponent(double x, double y) const {
    return -a_xx * x * x - a_yy * y * y + 2.0 * a_xy * x * y + b_x * x + b_y * y + c;
  }

  [[nodiscard]] bool negative_definite() const {
    return a_xx > 0.0 && a_yy > 0.0 && a_xx * a_yy > a_xy * a_xy;
  }

  /// a_xx a_yy - a_xy^2 as a compensated difference of products.
  [[nodiscard]] double determinant() const {
    if (exact_determinant > 0.0) return exact_determinant;
    const double w = a_xy * a_xy;
    return std::fma(a_xx, a_yy, -w) + std::fma(-a_xy, a_xy, w);
  }

  /// Location of the maximum.
  [[nodiscard]] std::pair<double, double> mean() const {
    const double det = determinant();
    // Solve [[a_xx, -a_xy], [-a_xy, a_yy]] m = b / 2.
    const double mx = 0.5 * (a_yy * b_x + a_xy * b_y) / det;
    const double my = 0.5 * (a_xy * b_x + a_xx * b_y) / det;
    return {mx, my};
  }

  [[nodiscard]] double peak() const {
    const auto [mx, my] = mean();
    return exponent(mx, my);
  }

  /// Same form with the roles of x and y exchanged.
  [[nodiscard]] GaussianForm2D transposed() const { return {a_yy, a_xx, a_xy, b_y, b_x, c, exact_determinant}; }
};

namespace detail {

inline constexpr double kTailSigmas = 9.0;

/// Features narrower than the panel grid: breakpoints graded geometrically
/// (ratio 3) from `width` out to the panel spacing on both sides of `at`.
struct Feature {
  double at;
  double width;
};

inline std::vector<double> panel_breaks(double center, double sigma, const std::vector<double>& splits,
                                        const std::vector<Feature>& features = {}) {
  const double lo = center - kTailSigmas * sigma;
  const double hi = center + kTailSigmas * sigma;
  std::vector<double> out{lo};
  for (int k = -2; k <= 2; ++k) out.push_back(center + 3.0 * k * sigma);
  for (double s : splits) {
    if (s > lo && s < hi) out.push_back(s);
  }
  for (const Feature& f : features) {
    if (!(f.at > lo && f.at < hi) || !(f.width > 0.0)) continue;
    out.push_back(f.at);
    for (double w = f.width; w < 3.0 * sigma; w *= 3.0) {
      if (f.at - w > lo) out.push_back(f.at - w);
      if (f.at + w < hi) out.push_back(f.at + w);
    }
  }
  out.push_back(hi);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// Integrates f(x, y) * exp(form) over the plane.
///
/// Without breakpoints the integral is done by tensor Gauss-Hermite in the
/// principal axes of the form, doubling the order until two successive
/// values agree. With breakpoints the plane is swept as an iterated integral:
/// the outer variable over its marginal Gaussian, the inner one over its
/// conditional Gaussian, both cut at the supplied lines and refined
/// adaptively. Both routes truncate the Gaussian at nine standard deviations.
template <class F>
auto integrate_gaussian_2d(F&& f, const GaussianForm2D& form, const QuadratureSpec& spec = {})
    -> Estimate<std::remove_cvref_t<std::invoke_result_t<F&, double, double>>> {
  using T = std::remove_cvref_t<std::invoke_result_t<F&, double, double>>;
  spec.validate();
  if (!form.negative_definite()) {
    throw std::invalid_argument("integrate_gaussian_2d: quadratic form is not negative definite");
  }
  const auto [mx, my] = form.mean();
  const double peak = form.peak();
  const double scale = std::exp(peak);

  const double sigma_x = 1.0 / std::sqrt(2.0 * form.determinant() / form.a_yy);
  const double sigma_y_cond = 1.0 / std::sqrt(2.0 * form.a_yy);
  const double sigma_y = 1.0 / std::sqrt(2.0 * form.determinant() / form.a_xx);
  auto active = [](const std::vector<double>& splits, double center, double sigma) {
    return std::any_of(splits.begin(), splits.end(), [&](double s) {
      return std::abs(s - center) < detail::kTailSigmas * sigma;
    });
  };
  const bool split = active(spec.splits_x, mx, sigma_x) || active(spec.splits_y, my, sigma_y);

  if (!split) {
    Eigen::Matrix2d a;
    a << form.a_xx, -form.a_xy, -form.a_xy, form.a_yy;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(a);
    Eigen::Vector2d lambda = eig.eigenvalues();
    lambda(0) = form.determinant() / lambda(1);
    const Eigen::Matrix2d v = eig.eigenvectors();
    const Eigen::Matrix2d map = v * lambda.cwiseSqrt().cwiseInverse().asDiagonal();
    const double jac = 1.0 / std::sqrt(form.determinant());
    auto tensor = [&](int n) {
      const QuadratureRule& gh = gauss_hermite(n);
      T sum{};
      double abs_sum = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double t1 = gh.nodes[static_cast<std::size_t>(i)];
          const double t2 = gh.nodes[static_cast<std::size_t>(j)];
          const double w = gh.weights[static_cast<std::size_t>(i)] * gh.weights[static_cast<std::size_t>(j)];
          if (w == 0.0) continue;
          const double x = mx + map(0, 0) * t1 + map(0, 1) * t2;
          const double y = my + map(1, 0) * t1 + map(1, 1) * t2;
          const T val = f(x, y);
          sum += w * val;
          abs_sum += w * std::abs(val);
        }
      }
      return std::pair{sum, abs_sum};
    };
    int n = std::clamp(spec.order, 8, kMaxGaussHermiteOrder);
    auto [prev, prev_abs] = tensor(n);
    Estimate<T> out{prev * (scale * jac), 0.0, false};
    for (int step = 0; step < spec.max_refinements && n < kMaxGaussHermiteOrder; ++step) {
      n = std::min(2 * n, kMaxGaussHermiteOrder);
      auto [cur, cur_abs] = tensor(n);
      const double diff = std::abs(cur - prev);
      out.value = cur * (scale * jac);
      out.error = diff * scale * jac;
      out.magnitude = cur_abs * scale * jac;
      if (diff <= spec.target_rel_error * cur_abs || diff <= 1e-15 * cur_abs) {
        out.converged = true;
        break;
      }
      prev = cur;
    }
    return out;
  }

  const double slope = form.a_xy / form.a_yy;
  const double marginal_curvature = form.determinant() / form.a_yy;
  const double offset = 0.5 * form.b_y / form.a_yy;
  AdaptiveOptions outer_opts{spec.order, 0.0, spec.target_rel_error, spec.max_refinements};
  AdaptiveOptions inner_opts{spec.order, 0.0, 0.1 * spec.target_rel_error, spec.max_refinements};

  auto inner = [&](double x) {
    const double cy = slope * x + offset;
    const double marginal = -marginal_curvature * (x - mx) * (x - mx);
    const std::vector<double> ybreaks = detail::panel_breaks(cy, sigma_y_cond, spec.splits_y);
    return integrate_adaptive(
        [&](double y) -> T { return f(x, y) * std::exp(-form.a_yy * (y - cy) * (y - cy) + marginal); },
        ybreaks,
        inner_opts);
  };
  // The inner integral changes over sigma_y_cond / |slope| wherever the
  // conditional centre crosses a y split.
  std::vector<detail::Feature> features;
  if (slope != 0.0) {
    for (double sy : spec.splits_y) {
      features.push_back({(sy - offset) / slope, sigma_y_cond / std::abs(slope)});
    }
  }
  const std::vector<double> xbreaks = detail::panel_breaks(mx, sigma_x, spec.splits_x, features);
  Estimate<T> out = integrate_adaptive(inner, xbreaks, outer_opts);
  out.value *= scale;
  out.error *= scale;
  out.magnitude *= scale;
  return out;
}

}  // namespace cvbell::numerics
