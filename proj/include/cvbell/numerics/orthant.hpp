#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cvbell/numerics/gaussian_integral.hpp"

namespace cvbell::numerics {

/// E[sgn(X - shift_x) sgn(Y - shift_y)] for a standardized bivariate normal
/// with correlation rho. The unshifted case is the arcsine law
/// (2/pi) asin(rho); shifted cases are integrated over the four quadrants.
inline Estimate<double> orthant_correlation(double rho, double shift_x = 0.0, double shift_y = 0.0,
                                            double rel_tol = 1e-12) {
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("orthant_correlation: |rho| must be < 1");
  if (!std::isfinite(shift_x) || !std::isfinite(shift_y)) {
    throw std::invalid_argument("orthant_correlation: shifts must be finite");
  }
  if (shift_x == 0.0 && shift_y == 0.0) {
    return {2.0 / std::numbers::pi * std::asin(rho), 0.0, true};
  }
  const double one_minus = 1.0 - rho * rho;
  GaussianForm2D form;
  form.a_xx = form.a_yy = 0.5 / one_minus;
  form.a_xy = 0.5 * rho / one_minus;
  form.c = -std::log(2.0 * std::numbers::pi * std::sqrt(one_minus));
  QuadratureSpec spec;
  spec.splits_x = {shift_x};
  spec.splits_y = {shift_y};
  spec.target_rel_error = rel_tol;
  auto sign = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
  return integrate_gaussian_2d([&](double x, double y) { return sign(x - shift_x) * sign(y - shift_y); },
                               form, spec);
}

}  // namespace cvbell::numerics
