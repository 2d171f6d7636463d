#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace cvbell {

enum class ProfileKind { UnitConstant, Sign, ImagSign, Tanh, ExpSat, GaussSat, Custom };

/// The function a(q) carried by a kernel observable  A = int dq a(q) |q><eps q|.
///
/// Built-in shapes are evaluated as coefficient * base(q):
///   UnitConstant  1
///   Sign          sgn q
///   ImagSign      i sgn q
///   Tanh(s)       tanh(s q)
///   ExpSat(s)     sgn(q) (1 - exp(-s |q|))
///   GaussSat(s)   sgn(q) (1 - exp(-s q^2))
/// The coefficient defaults to one; the unsharp parity inversions use i.
class Profile {
 public:
  using Function = std::function<std::complex<double>(double)>;

  static Profile unit() { return Profile(ProfileKind::UnitConstant); }
  static Profile sign() { return Profile(ProfileKind::Sign); }
  static Profile imag_sign() { return Profile(ProfileKind::ImagSign); }
  static Profile tanh(double s) { return Profile(ProfileKind::Tanh, checked(s)); }
  static Profile exp_sat(double s) { return Profile(ProfileKind::ExpSat, checked(s)); }
  static Profile gauss_sat(double s) { return Profile(ProfileKind::GaussSat, checked(s)); }

  /// Unsharp family f_l, l = 1 (tanh), 2 (exponential), 3 (Gaussian).
  static Profile saturating(int l, double s) {
    switch (l) {
      case 1: return tanh(s);
      case 2: return exp_sat(s);
      case 3: return gauss_sat(s);
      default: throw std::invalid_argument("Profile::saturating: family must be 1, 2 or 3");
    }
  }

  static Profile custom(Function fn, std::string name = "custom") {
    if (!fn) throw std::invalid_argument("Profile::custom: empty function");
    Profile p(ProfileKind::Custom);
    p.custom_ = std::move(fn);
    p.name_ = std::move(name);
    return p;
  }

  [[nodiscard]] Profile scaled(std::complex<double> factor) const {
    Profile p = *this;
    p.coefficient_ *= factor;
    return p;
  }

  ProfileKind kind() const { return kind_; }
  double steepness() const { return steepness_; }
  std::complex<double> coefficient() const { return coefficient_; }
  bool builtin() const { return kind_ != ProfileKind::Custom; }

  /// Real shape before the coefficient (i included for ImagSign is not).
  double base(double q) const {
    const double sg = q > 0.0 ? 1.0 : (q < 0.0 ? -1.0 : 0.0);
    switch (kind_) {
      case ProfileKind::UnitConstant: return 1.0;
      case ProfileKind::Sign:
      case ProfileKind::ImagSign: return sg;
      case ProfileKind::Tanh: return std::tanh(steepness_ * q);
      case ProfileKind::ExpSat: return -sg * std::expm1(-steepness_ * std::abs(q));
      case ProfileKind::GaussSat: return -sg * std::expm1(-steepness_ * q * q);
      case ProfileKind::Custom: break;
    }
    throw std::logic_error("Profile::base called on a custom profile");
  }

  std::complex<double> operator()(double q) const {
    if (kind_ == ProfileKind::Custom) return coefficient_ * custom_(q);
    const std::complex<double> unit = kind_ == ProfileKind::ImagSign ? std::complex<double>(0.0, 1.0) : 1.0;
    return coefficient_ * unit * base(q);
  }

  /// Built-in shapes are even (UnitConstant) or odd (all others).
  std::optional<int> parity() const {
    if (kind_ == ProfileKind::Custom) return std::nullopt;
    return kind_ == ProfileKind::UnitConstant ? 1 : -1;
  }

  /// Width over which the saturating shapes rise from 0 to near +-1.
  std::optional<double> length_scale() const {
    switch (kind_) {
      case ProfileKind::Tanh:
      case ProfileKind::ExpSat: return 1.0 / steepness_;
      case ProfileKind::GaussSat: return 1.0 / std::sqrt(steepness_);
      default: return std::nullopt;
    }
  }

  /// True when |base| < 1 off the origin (no dichotomic spectrum).
  bool saturating() const {
    return kind_ == ProfileKind::Tanh || kind_ == ProfileKind::ExpSat || kind_ == ProfileKind::GaussSat;
  }

  std::string name() const {
    switch (kind_) {
      case ProfileKind::UnitConstant: return "unit";
      case ProfileKind::Sign: return "sign";
      case ProfileKind::ImagSign: return "isign";
      case ProfileKind::Tanh: return "tanh(" + std::to_string(steepness_) + ")";
      case ProfileKind::ExpSat: return "expsat(" + std::to_string(steepness_) + ")";
      case ProfileKind::GaussSat: return "gausssat(" + std::to_string(steepness_) + ")";
      case ProfileKind::Custom: return name_;
    }
    return {};
  }

 private:
  explicit Profile(ProfileKind kind, double s = 0.0) : kind_(kind), steepness_(s) {}

  static double checked(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("Profile: steepness s must be positive and finite");
    }
    return s;
  }

  ProfileKind kind_;
  double steepness_ = 0.0;
  std::complex<double> coefficient_{1.0, 0.0};
  Function custom_;
  std::string name_;
};

}  // namespace cvbell
