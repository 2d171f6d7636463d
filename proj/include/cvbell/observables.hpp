#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvbell/epr_state.hpp"
#include "cvbell/numerics/adaptive.hpp"
#include "cvbell/numerics/hermite.hpp"
#include "cvbell/numerics/rules.hpp"
#include "cvbell/profile.hpp"

namespace cvbell {

using Complex = std::complex<double>;
using Wavefunction = std::function<Complex(double)>;

/// Kernel observable A(q0, p0) = D A D^dagger with A = int dq a(q) |q><eps q|.
///
/// Acting on a wavefunction,
///   (A psi)(x) = a(x - q0) exp(i p0 (x - x')) psi(x'),  x' = eps (x - q0) + q0.
/// The displacement's own phase convention cancels in the conjugation.
class ObservableSpec {
 public:
  ObservableSpec(int epsilon, Profile profile, PhasePoint shift = {})
      : epsilon_(epsilon), profile_(std::move(profile)), shift_(shift) {
    if (epsilon != 1 && epsilon != -1) {
      throw std::invalid_argument("ObservableSpec: epsilon must be +1 or -1, got " + std::to_string(epsilon));
    }
    if (!std::isfinite(shift.q) || !std::isfinite(shift.p)) {
      throw std::invalid_argument("ObservableSpec: shift must be finite");
    }
  }

  int epsilon() const { return epsilon_; }
  const Profile& profile() const { return profile_; }
  PhasePoint shift() const { return shift_; }

  /// Same observable displaced to `where` (absolute, not cumulative).
  [[nodiscard]] ObservableSpec at(PhasePoint where) const { return {epsilon_, profile_, where}; }

  /// Reflection point of x for this kernel.
  double partner(double x) const { return epsilon_ * (x - shift_.q) + shift_.q; }

  /// Kernel weight a(x - q0) exp(i p0 (x - x')).
  Complex kernel_weight(double x) const {
    const double u = x - shift_.q;
    const double phase = shift_.p * (1.0 - epsilon_) * u;
    return profile_(u) * Complex(std::cos(phase), std::sin(phase));
  }

  std::string describe() const {
    return "eps=" + std::to_string(epsilon_) + " a=" + profile_.name() + " shift=(" +
           std::to_string(shift_.q) + "," + std::to_string(shift_.p) + ")";
  }

 private:
  int epsilon_;
  Profile profile_;
  PhasePoint shift_;
};

/// Complex phase-space shift alpha -> (q0, p0) = (Re alpha, Im alpha).
inline PhasePoint shift_from_complex(Complex alpha) { return {alpha.real(), alpha.imag()}; }

/// Parity: eps = -1, a = 1.
inline ObservableSpec make_parity() { return {-1, Profile::unit()}; }
/// Sign of position: eps = +1, a = sgn q.
inline ObservableSpec make_sign() { return {1, Profile::sign()}; }
/// Parity inversion: eps = -1, a = i sgn q.
inline ObservableSpec make_parity_inversion() { return {-1, Profile::imag_sign()}; }

/// Unsharp parity inversion i int dq f_l(q, s) |q><-q|.
inline ObservableSpec make_unsharp(int l, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("make_unsharp: s must be positive");
  return {-1, Profile::saturating(l, s).scaled({0.0, 1.0})};
}

namespace detail {

// Dense probe grid for custom profiles: log-spaced magnitudes of both signs.
inline std::vector<double> probe_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 400; ++k) {
    const double mag = std::pow(10.0, -6.0 + 8.0 * k / 400.0);
    grid.push_back(mag);
    grid.push_back(-mag);
  }
  return grid;
}

inline bool approx(Complex a, Complex b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace detail

/// a(q) = conj(a(eps q)). Symbolic for built-in shapes, probed on a dense
/// grid for custom ones.
inline bool check_hermitian(const ObservableSpec& spec) {
  const Profile& prof = spec.profile();
  const int eps = spec.epsilon();
  if (prof.builtin()) {
    Complex c = prof.coefficient();
    if (prof.kind() == ProfileKind::ImagSign) c *= Complex(0.0, 1.0);
    const int parity = *prof.parity();
    // eps = +1: c real.  eps = -1: c = parity * conj(c).
    const int reflected_parity = eps == 1 ? 1 : parity;
    return detail::approx(c, static_cast<double>(reflected_parity) * std::conj(c));
  }
  for (double q : detail::probe_grid()) {
    if (!detail::approx(prof(q), std::conj(prof(eps * q)), 1e-10)) return false;
  }
  return true;
}

/// a(q) a(eps q) = 1 almost everywhere (A^2 = 1).
inline bool check_sharp(const ObservableSpec& spec) {
  const Profile& prof = spec.profile();
  const int eps = spec.epsilon();
  if (prof.builtin()) {
    if (prof.saturating()) return false;
    Complex c = prof.coefficient();
    if (prof.kind() == ProfileKind::ImagSign) c *= Complex(0.0, 1.0);
    // base(q) base(eps q) = +1 for even shapes or eps = +1, -1 otherwise.
    const double base_product = (eps == 1 || *prof.parity() == 1) ? 1.0 : -1.0;
    return detail::approx(c * c * base_product, 1.0);
  }
  for (double q : detail::probe_grid()) {
    if (!detail::approx(prof(q) * prof(eps * q), 1.0, 1e-10)) return false;
  }
  return true;
}

/// (A psi)(x) for the displaced kernel observable.
inline Complex apply(const ObservableSpec& spec, const Wavefunction& psi, double x) {
  return spec.kernel_weight(x) * psi(spec.partner(x));
}

// ---------------------------------------------------------------------------
// Fock-basis matrices

struct FockMatrix {
  Eigen::MatrixXcd matrix;
  double error_estimate = 0.0;
  bool converged = true;
};

namespace detail {

struct NodeSet {
  std::vector<double> u;
  std::vector<double> w;
};

// Panel edges on [-half_width, half_width]: an edge at u = 0 (profile kink
// and reflection centre), geometric grading towards it when the profile has
// a short length scale, then uniform panels of width h.
inline std::vector<double> fock_panel_edges(double half_width, double h, std::optional<double> scale) {
  std::vector<double> positive{0.0};
  double edge = 0.0;
  if (scale && *scale < h) {
    edge = *scale / 16.0;
    while (edge < h) {
      positive.push_back(edge);
      edge *= 2.0;
    }
    edge = positive.back();
  }
  while (edge < half_width) {
    edge = std::min(edge + h, half_width);
    positive.push_back(edge);
  }
  std::vector<double> edges;
  for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
    if (*it > 0.0) edges.push_back(-*it);
  }
  edges.insert(edges.end(), positive.begin(), positive.end());
  return edges;
}

inline NodeSet fock_nodes(const std::vector<double>& edges, int order) {
  const numerics::QuadratureRule& rule = numerics::gauss_legendre(order);
  NodeSet set;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double half = 0.5 * (edges[i + 1] - edges[i]);
    const double mid = 0.5 * (edges[i + 1] + edges[i]);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      set.u.push_back(mid + half * rule.nodes[k]);
      set.w.push_back(half * rule.weights[k]);
    }
  }
  return set;
}

// sum_k phi_m(q0 + u_k) c_k phi_n(q0 + eps u_k) for rows [row_begin, N).
inline Eigen::MatrixXcd fock_accumulate(const ObservableSpec& spec, int n, int row_begin, const NodeSet& nodes) {
  const double q0 = spec.shift().q;
  const int rows = n - row_begin;
  Eigen::MatrixXd re = Eigen::MatrixXd::Zero(rows, n);
  Eigen::MatrixXd im = Eigen::MatrixXd::Zero(rows, n);
  constexpr std::size_t kChunk = 1024;
  std::vector<double> column(static_cast<std::size_t>(n));
  for (std::size_t start = 0; start < nodes.u.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, nodes.u.size() - start);
    Eigen::MatrixXd left(rows, static_cast<Eigen::Index>(len));
    Eigen::MatrixXd right_re(n, static_cast<Eigen::Index>(len));
    Eigen::MatrixXd right_im(n, static_cast<Eigen::Index>(len));
    for (std::size_t k = 0; k < len; ++k) {
      const double u = nodes.u[start + k];
      const Complex c = nodes.w[start + k] * spec.kernel_weight(q0 + u);
      numerics::hermite_functions(q0 + u, column);
      for (int m = 0; m < rows; ++m) left(m, static_cast<Eigen::Index>(k)) = column[static_cast<std::size_t>(row_begin + m)];
      if (spec.epsilon() == -1) numerics::hermite_functions(q0 - u, column);
      for (int j = 0; j < n; ++j) {
        right_re(j, static_cast<Eigen::Index>(k)) = column[static_cast<std::size_t>(j)] * c.real();
        right_im(j, static_cast<Eigen::Index>(k)) = column[static_cast<std::size_t>(j)] * c.imag();
      }
    }
    if (!right_re.isZero(0.0)) re.noalias() += left * right_re.transpose();
    if (!right_im.isZero(0.0)) im.noalias() += left * right_im.transpose();
  }
  Eigen::MatrixXcd out(rows, n);
  out.real() = re;
  out.imag() = im;
  return out;
}

}  // namespace detail

/// M[m][n] = <m| A(q0, p0) |n> in the oscillator basis, m, n < N.
///
/// Computed as int du phi_m(q0 + u) a(u) e^{i p0 (1 - eps) u} phi_n(q0 + eps u)
/// by composite Gauss-Legendre on panels split at u = 0. The error estimate
/// compares against a lower-order rule on the last rows, where the
/// integrands oscillate fastest.
inline FockMatrix fock_matrix(const ObservableSpec& spec, int n, double tolerance = 1e-9) {
  if (n < 1) throw std::invalid_argument("fock_matrix: N must be >= 1");
  if (n > kMaxSchmidtTruncation) {
    throw std::invalid_argument("fock_matrix: N above " + std::to_string(kMaxSchmidtTruncation));
  }
  if (!check_hermitian(spec)) throw std::invalid_argument("fock_matrix: observable is not hermitian");
  const double turning = std::sqrt(2.0 * n + 1.0);
  const double half_width = turning + 10.0 + std::abs(spec.shift().q);
  const double h = std::min(0.5, 4.8 / (turning + 2.0 * std::abs(spec.shift().p)));
  const auto edges = detail::fock_panel_edges(half_width, h, spec.profile().length_scale());

  FockMatrix out;
  out.matrix = detail::fock_accumulate(spec, n, 0, detail::fock_nodes(edges, 20));
  const int probe_rows = std::min(n, 4);
  const Eigen::MatrixXcd coarse = detail::fock_accumulate(spec, n, n - probe_rows, detail::fock_nodes(edges, 14));
  out.error_estimate = (out.matrix.bottomRows(probe_rows) - coarse).cwiseAbs().maxCoeff();
  out.converged = out.error_estimate <= tolerance;
  return out;
}

/// Max-entry residuals of the Pauli relations on the upper-left block of
/// N-truncated matrices:
///   [S, R] = 2i P,   [P, S] = 2i R,   [R, P] = 2i S.
/// The products are formed from the truncated matrices, so the residuals
/// carry the truncation of the intermediate sum.
struct CommutatorResiduals {
  double sr_p = 0.0;
  double ps_r = 0.0;
  double rp_s = 0.0;
  double anticommutator_ps = 0.0;  ///< P S + S P = 0

  double max() const { return std::max({sr_p, ps_r, rp_s}); }
};

inline CommutatorResiduals commutator_residuals(int n, int block) {
  if (block < 1 || block > n) throw std::invalid_argument("commutator_residuals: need 1 <= block <= N");
  const Eigen::MatrixXcd p = fock_matrix(make_parity(), n).matrix;
  const Eigen::MatrixXcd s = fock_matrix(make_sign(), n).matrix;
  const Eigen::MatrixXcd r = fock_matrix(make_parity_inversion(), n).matrix;
  const Complex two_i(0.0, 2.0);
  auto residual = [block](const Eigen::MatrixXcd& m) {
    return m.topLeftCorner(block, block).cwiseAbs().maxCoeff();
  };
  CommutatorResiduals out;
  out.sr_p = residual(s * r - r * s - two_i * p);
  out.ps_r = residual(p * s - s * p - two_i * r);
  out.rp_s = residual(r * p - p * r - two_i * s);
  out.anticommutator_ps = residual(p * s + s * p);
  return out;
}

// ---------------------------------------------------------------------------
// Single-mode expectations

struct SingleModeExpectations {
  double parity = 0.0;
  double sign = 0.0;
  double parity_inversion = 0.0;
  double max_imaginary = 0.0;  ///< largest |Im| among the three integrals
};

/// <P> = int psi*(q) psi(-q),  <S> = int sgn(q) |psi(q)|^2,
/// <R> = i int sgn(q) psi*(q) psi(-q), integrated over [-half_width, half_width]
/// with a split at the origin.
inline SingleModeExpectations single_mode_expectations(const Wavefunction& psi, double half_width = 40.0) {
  const std::vector<double> breaks{-half_width, 0.0, half_width};
  numerics::AdaptiveOptions opts;
  opts.rel_tol = 1e-13;
  const auto norm = numerics::integrate_adaptive([&](double q) { return std::norm(psi(q)); }, breaks, opts);
  if (std::abs(norm.value - 1.0) > 1e-6) {
    throw std::invalid_argument("single_mode_expectations: wavefunction not normalized (norm = " +
                                std::to_string(norm.value) + ")");
  }
  auto sg = [](double q) { return q > 0.0 ? 1.0 : (q < 0.0 ? -1.0 : 0.0); };
  const auto par = numerics::integrate_adaptive([&](double q) { return std::conj(psi(q)) * psi(-q); }, breaks, opts);
  const auto sgn = numerics::integrate_adaptive([&](double q) { return sg(q) * std::norm(psi(q)); }, breaks, opts);
  const auto inv = numerics::integrate_adaptive(
      [&](double q) { return Complex(0.0, 1.0) * sg(q) * std::conj(psi(q)) * psi(-q); }, breaks, opts);
  SingleModeExpectations out;
  out.parity = par.value.real();
  out.sign = sgn.value;
  out.parity_inversion = inv.value.real();
  out.max_imaginary = std::max(std::abs(par.value.imag()), std::abs(inv.value.imag()));
  return out;
}

}  // namespace cvbell
