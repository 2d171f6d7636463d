#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cvbell/numerics/adaptive.hpp"
#include "cvbell/numerics/special_functions.hpp"
#include "cvbell/observables.hpp"

namespace cvbell {

// Phase-space symbols are normalized so that a multiplication operator a(q)
// has symbol a(q) / 2pi, i.e. they are the Weyl symbols divided by 2pi, and
//   <psi| A |psi> = 2pi * int dq dp W_A(q, p) W_psi(q, p)
// for a probability-normalized state Wigner function W_psi.

/// Bounded symbol W(q, p).
struct RegularSymbol {
  std::function<double(double, double)> fn;
  double sup = 0.0;                  ///< sup |W|
  bool momentum_independent = true;  ///< W depends on q only
  std::vector<double> q_kinks;       ///< discontinuities in q
  std::vector<double> p_kinks;       ///< discontinuities in p
  std::string label;

  double operator()(double q, double p) const { return fn(q, p); }
};

/// delta_coefficient * delta(q) * [pv_coefficient P(1/p) + smooth(p) + delta_p_coefficient delta(p)]
struct SingularLineSymbol {
  double delta_coefficient = 0.5;
  double pv_coefficient = 0.0;
  std::function<double(double)> smooth;  ///< empty means identically zero
  double delta_p_coefficient = 0.0;
  std::string label;

  double smooth_at(double p) const { return smooth ? smooth(p) : 0.0; }
};

using WignerSymbol = std::variant<RegularSymbol, SingularLineSymbol>;

enum class Boundedness { Bounded, Singular };

inline const char* to_string(Boundedness b) { return b == Boundedness::Bounded ? "bounded" : "singular"; }

/// Raised for profiles whose symbol cannot be put in either form.
class SymbolNotClassifiable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// S(p) = int_0^inf sin(p xi) [1 - f(xi/2)] dxi for the saturating shapes.
inline double tanh_residual_transform(double s, double p) {
  const double z = std::numbers::pi * p / s;
  if (std::abs(z) < 1e-2) {
    const double z2 = z * z;
    return (std::numbers::pi / s) * z * (1.0 / 6.0 - z2 * (7.0 / 360.0 - z2 * 31.0 / 15120.0));
  }
  if (std::abs(z) > 700.0) return 1.0 / p;
  return 1.0 / p - (std::numbers::pi / s) / std::sinh(z);
}

inline double exp_residual_transform(double s, double p) { return p / (p * p + 0.25 * s * s); }

inline double gauss_residual_transform(double s, double p) {
  return 2.0 / std::sqrt(s) * numerics::dawson(p / std::sqrt(s));
}

// Numerical sine transform int_0^inf sin(p xi) r(xi) dxi for a residual
// that decays before `extent`.
inline double numeric_sine_transform(const std::function<double(double)>& r, double p, double extent) {
  if (p == 0.0) return 0.0;
  const int panels = std::max(8, static_cast<int>(std::ceil(std::abs(p) * extent / 2.0)));
  std::vector<double> breaks;
  for (int i = 0; i <= panels; ++i) breaks.push_back(extent * i / panels);
  numerics::AdaptiveOptions opts;
  opts.rel_tol = 1e-11;
  opts.abs_tol = 1e-14;
  return numerics::integrate_adaptive([&](double xi) { return std::sin(p * xi) * r(xi); }, breaks, opts).value;
}

}  // namespace detail

/// Phase-space symbol of an undisplaced kernel observable.
///
/// eps = +1: W(q, p) = a(q) / 2pi (real a), bounded.
/// eps = -1: W(q, p) = (1/2) delta(q) (1/2pi) int dxi e^{-i p xi} a(xi/2). For an
/// odd profile a = i k g with g -> sgn at large |q| this is
///   (1/2) delta(q) (k/pi) [P(1/p) - S(p)],  S(p) = int_0^inf sin(p xi)(1 - g(xi/2)) dxi,
/// and the constant profile gives (1/2) delta(q) delta(p).
inline WignerSymbol wigner_symbol(const ObservableSpec& spec) {
  if (spec.shift() != PhasePoint{}) {
    throw std::invalid_argument("wigner_symbol: expects an undisplaced observable");
  }
  if (!check_hermitian(spec)) throw std::invalid_argument("wigner_symbol: observable is not hermitian");
  const Profile prof = spec.profile();
  const double two_pi = 2.0 * std::numbers::pi;

  if (spec.epsilon() == 1) {
    RegularSymbol sym;
    sym.fn = [prof, two_pi](double q, double) { return prof(q).real() / two_pi; };
    sym.momentum_independent = true;
    sym.label = "a(q)/2pi, a=" + prof.name();
    if (prof.builtin()) {
      sym.sup = std::abs(prof.coefficient()) / two_pi;
      if (prof.kind() != ProfileKind::UnitConstant) sym.q_kinks = {0.0};
    } else {
      double sup = 0.0;
      for (double q : detail::probe_grid()) sup = std::max(sup, std::abs(prof(q)));
      for (int k = -4000; k <= 4000; ++k) sup = std::max(sup, std::abs(prof(0.01 * k)));
      sym.sup = sup / two_pi;
      sym.q_kinks = {0.0};
    }
    return sym;
  }

  SingularLineSymbol sym;
  sym.delta_coefficient = 0.5;
  if (prof.builtin()) {
    Complex c = prof.coefficient();
    if (prof.kind() == ProfileKind::ImagSign) c *= Complex(0.0, 1.0);
    if (prof.kind() == ProfileKind::UnitConstant) {
      sym.delta_p_coefficient = c.real();
      sym.label = "delta(q) delta(p)";
      return sym;
    }
    // Hermiticity makes c purely imaginary: a = i k g.
    const double k = c.imag();
    sym.pv_coefficient = k / std::numbers::pi;
    const double s = prof.steepness();
    const double factor = -k / std::numbers::pi;
    switch (prof.kind()) {
      case ProfileKind::Tanh:
        sym.smooth = [s, factor](double p) { return factor * detail::tanh_residual_transform(s, p); };
        break;
      case ProfileKind::ExpSat:
        sym.smooth = [s, factor](double p) { return factor * detail::exp_residual_transform(s, p); };
        break;
      case ProfileKind::GaussSat:
        sym.smooth = [s, factor](double p) { return factor * detail::gauss_residual_transform(s, p); };
        break;
      default: break;
    }
    sym.label = "delta(q) P(1/p)" + std::string(sym.smooth ? " + smooth" : "");
    return sym;
  }

  // Custom eps = -1 profile: needs an odd, purely imaginary a(q) = i g(q)
  // with a sign-type plateau.
  for (double q : detail::probe_grid()) {
    const Complex v = prof(q);
    if (std::abs(v.real()) > 1e-12 * std::max(1.0, std::abs(v)) ||
        !detail::approx(v, -prof(-q), 1e-10)) {
      throw SymbolNotClassifiable("symbol not classifiable: custom eps=-1 profile is not odd and imaginary");
    }
  }
  constexpr double kPlateau = 60.0;
  const double tail = prof(kPlateau).imag();
  if (std::abs(tail) < 1e-12 || std::abs(prof(2.0 * kPlateau).imag() - tail) > 1e-10 ||
      std::abs(prof(4.0 * kPlateau).imag() - tail) > 1e-10) {
    throw SymbolNotClassifiable("symbol not classifiable: custom profile has no sign-type tail");
  }
  sym.pv_coefficient = tail / std::numbers::pi;
  auto residual = [prof, tail](double xi) { return tail - prof(0.5 * xi).imag(); };
  const double extent = 4.0 * kPlateau;
  sym.smooth = [residual, extent](double p) {
    return -detail::numeric_sine_transform(residual, p, extent) / std::numbers::pi;
  };
  sym.label = "delta(q) P(1/p) + numeric smooth";
  return sym;
}

/// Bounded symbols act as local response functions for positive states;
/// singular ones do not.
inline Boundedness classify_boundedness(const WignerSymbol& symbol) {
  return std::holds_alternative<RegularSymbol>(symbol) ? Boundedness::Bounded : Boundedness::Singular;
}

}  // namespace cvbell
