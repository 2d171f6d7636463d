#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cvbell/epr_state.hpp"
#include "cvbell/numerics/gaussian_integral.hpp"
#include "cvbell/numerics/parallel.hpp"
#include "cvbell/numerics/random.hpp"
#include "cvbell/observables.hpp"

namespace cvbell {

/// Analytic E(q, q') for undisplaced-in-momentum parity inversions.
struct ClosedForm {};

/// Direct evaluation of <Psi| A (x) B |Psi> as a 2D Gaussian integral. The
/// breakpoints of `spec` are replaced by the kernel's reflection centres.
struct Quadrature {
  numerics::QuadratureSpec spec{};
};

/// Schmidt sum over N-truncated Fock matrices; N = 0 picks N from the state.
struct FockTruncation {
  int n = 0;
  double tolerance = 1e-6;
};

using CorrelationMethod = std::variant<ClosedForm, Quadrature, FockTruncation>;

inline std::string method_name(const CorrelationMethod& m) {
  return std::visit(
      [](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, ClosedForm>) return "closed";
        else if constexpr (std::is_same_v<V, Quadrature>) return "quadrature";
        else return "fock";
      },
      m);
}

/// Non-convergence of a correlation engine, surfaced when a caller asks for
/// strict results.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CorrelationResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  double imaginary = 0.0;  ///< Im of the raw evaluation; zero for hermitian pairs
};

/// Sign of <Psi| R(q) (x) R(q') |Psi> relative to the closed form below.
/// Both kernels carry a factor i, so the kernel integral is -E[sgn sgn] times
/// the Gaussian envelope; the Fock sum reproduces this sign.
inline constexpr double kParityInversionSign = -1.0;

/// (2/pi) arctan(s2) exp(-c2 (q^2 + q'^2) + 2 s2 q q')
inline double closed_form_E(double q, double q_prime, const EprState& state) {
  const double c2 = state.c2();
  const double s2 = state.s2();
  return 2.0 / std::numbers::pi * std::atan(s2) *
         std::exp(-c2 * (q * q + q_prime * q_prime) + 2.0 * s2 * q * q_prime);
}

inline bool is_parity_inversion(const ObservableSpec& spec) {
  return spec.epsilon() == -1 && spec.profile().kind() == ProfileKind::ImagSign &&
         spec.profile().coefficient() == Complex(1.0, 0.0);
}

inline bool closed_form_applicable(const ObservableSpec& a, const ObservableSpec& b) {
  return is_parity_inversion(a) && is_parity_inversion(b) && a.shift().p == 0.0 && b.shift().p == 0.0;
}

namespace detail {

inline void require_hermitian(const ObservableSpec& a, const ObservableSpec& b) {
  if (!check_hermitian(a) || !check_hermitian(b)) {
    throw std::invalid_argument("correlation: both observables must be hermitian");
  }
}

// Psi(qa + u, qb + v) Psi(qa + eps_a u, qb + eps_b v) as a form in (u, v).
inline numerics::GaussianForm2D kernel_form(const EprState& state, const ObservableSpec& a,
                                            const ObservableSpec& b) {
  const double c2 = state.c2();
  const double s2 = state.s2();
  const double qa = a.shift().q;
  const double qb = b.shift().q;
  const double ea = a.epsilon();
  const double eb = b.epsilon();
  numerics::GaussianForm2D form;
  form.a_xx = c2;
  form.a_yy = c2;
  form.a_xy = 0.5 * s2 * (1.0 + ea * eb);
  form.b_x = (1.0 + ea) * (s2 * qb - c2 * qa);
  form.b_y = (1.0 + eb) * (s2 * qa - c2 * qb);
  form.c = -c2 * (qa * qa + qb * qb) + 2.0 * s2 * qa * qb - std::log(std::numbers::pi);
  // c2^2 - s2^2 = 1
  form.exact_determinant = ea * eb > 0.0 ? 1.0 : c2 * c2;
  return form;
}

inline CorrelationResult correlation_quadrature(const EprState& state, const ObservableSpec& a,
                                                const ObservableSpec& b, const Quadrature& method) {
  numerics::QuadratureSpec spec = method.spec;
  spec.splits_x = {0.0};
  spec.splits_y = {0.0};
  const double qa = a.shift().q;
  const double qb = b.shift().q;
  auto integrand = [&](double u, double v) { return a.kernel_weight(qa + u) * b.kernel_weight(qb + v); };
  const auto est = numerics::integrate_gaussian_2d(integrand, kernel_form(state, a, b), spec);
  return {est.value.real(), est.error, est.converged, est.value.imag()};
}

struct FockPair {
  double full;
  double partial;  // same sum over the leading 7N/8 block
  double imaginary;
};

inline FockPair fock_sum(const Eigen::VectorXd& c, const Eigen::MatrixXcd& ma, const Eigen::MatrixXcd& mb) {
  const Eigen::Index n = c.size();
  const Eigen::Index np = std::max<Eigen::Index>(1, n - n / 8);
  const Eigen::MatrixXcd prod = ma.cwiseProduct(mb);
  const Complex full = c.transpose() * prod * c;
  const Complex partial = c.head(np).transpose() * prod.topLeftCorner(np, np) * c.head(np);
  return {full.real(), partial.real(), full.imag()};
}

inline Eigen::VectorXd schmidt_vector(const EprState& state, int n) {
  Eigen::VectorXd c(n);
  for (int k = 0; k < n; ++k) c(k) = state.schmidt_coefficient(k);
  return c;
}

inline int initial_truncation(const EprState& state, const FockTruncation& method) {
  if (method.n > 0) return method.n;
  return std::clamp(state.truncation_for(1e-10), 16, kMaxSchmidtTruncation);
}

inline CorrelationResult fock_result(const EprState& state, const FockMatrix& ma, const FockMatrix& mb,
                                     double tolerance) {
  const int n = static_cast<int>(ma.matrix.rows());
  const Eigen::VectorXd c = schmidt_vector(state, n);
  const FockPair sums = fock_sum(c, ma.matrix, mb.matrix);
  const double c_sum = c.sum();
  CorrelationResult out;
  out.value = sums.full;
  out.imaginary = sums.imaginary;
  out.error = std::abs(sums.full - sums.partial) +
              c_sum * c_sum * (ma.error_estimate + mb.error_estimate);
  out.converged = out.error <= tolerance && ma.converged && mb.converged;
  return out;
}

inline CorrelationResult correlation_fock(const EprState& state, const ObservableSpec& a,
                                          const ObservableSpec& b, const FockTruncation& method) {
  int n = initial_truncation(state, method);
  for (;;) {
    const FockMatrix ma = fock_matrix(a, n);
    const FockMatrix mb = fock_matrix(b, n);
    CorrelationResult out = fock_result(state, ma, mb, method.tolerance);
    if (out.converged || method.n > 0 || n >= kMaxSchmidtTruncation) return out;
    n = std::min(2 * n, kMaxSchmidtTruncation);
  }
}

}  // namespace detail

/// E = <Psi| A (x) B |Psi> for hermitian kernel observables.
inline CorrelationResult correlation(const EprState& state, const ObservableSpec& a, const ObservableSpec& b,
                                     const CorrelationMethod& method) {
  detail::require_hermitian(a, b);
  return std::visit(
      [&](const auto& m) -> CorrelationResult {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ClosedForm>) {
          if (!closed_form_applicable(a, b)) {
            throw std::invalid_argument(
                "correlation: closed form needs parity inversions with zero momentum shift");
          }
          return {kParityInversionSign * closed_form_E(a.shift().q, b.shift().q, state), 0.0, true, 0.0};
        } else if constexpr (std::is_same_v<M, Quadrature>) {
          return detail::correlation_quadrature(state, a, b, m);
        } else {
          return detail::correlation_fock(state, a, b, m);
        }
      },
      method);
}

// ---------------------------------------------------------------------------
// Bell combinations

/// Alice's settings (alpha, alpha') and Bob's (beta, beta').
struct BellSettings {
  PhasePoint alice;
  PhasePoint alice_prime;
  PhasePoint bob;
  PhasePoint bob_prime;

  /// alpha = beta = 0, alpha' = -d, beta' = d.
  static BellSettings real_pattern(double d) { return {{0.0, 0.0}, {-d, 0.0}, {0.0, 0.0}, {d, 0.0}}; }
  /// alpha = beta = 0, alpha' = -d + i d/2, beta' = d + i d/2.
  static BellSettings complex_pattern(double d) {
    return {{0.0, 0.0}, {-d, 0.5 * d}, {0.0, 0.0}, {d, 0.5 * d}};
  }
};

struct BellResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  /// E(a,b), E(a,b'), E(a',b), E(a',b')
  std::array<CorrelationResult, 4> terms{};
};

inline BellResult combine(const std::array<CorrelationResult, 4>& e) {
  BellResult out;
  out.terms = e;
  out.value = e[0].value + e[1].value + e[2].value - e[3].value;
  for (const auto& t : e) {
    out.error += t.error;
    out.converged = out.converged && t.converged;
  }
  return out;
}

/// B = E(a,b) + E(a,b') + E(a',b) - E(a',b'), both parties using `family`
/// displaced to the settings.
inline BellResult bell_value(const EprState& state, const ObservableSpec& family, const BellSettings& s,
                             const CorrelationMethod& method) {
  const ObservableSpec a = family.at(s.alice);
  const ObservableSpec a2 = family.at(s.alice_prime);
  const ObservableSpec b = family.at(s.bob);
  const ObservableSpec b2 = family.at(s.bob_prime);
  if (const auto* fock = std::get_if<FockTruncation>(&method)) {
    // Four matrices serve all four correlations.
    detail::require_hermitian(family, family);
    int n = detail::initial_truncation(state, *fock);
    for (;;) {
      const FockMatrix ma = fock_matrix(a, n);
      const FockMatrix ma2 = fock_matrix(a2, n);
      const FockMatrix mb = fock_matrix(b, n);
      const FockMatrix mb2 = fock_matrix(b2, n);
      BellResult out = combine({detail::fock_result(state, ma, mb, fock->tolerance),
                                detail::fock_result(state, ma, mb2, fock->tolerance),
                                detail::fock_result(state, ma2, mb, fock->tolerance),
                                detail::fock_result(state, ma2, mb2, fock->tolerance)});
      if (out.converged || fock->n > 0 || n >= kMaxSchmidtTruncation) return out;
      n = std::min(2 * n, kMaxSchmidtTruncation);
    }
  }
  return combine({correlation(state, a, b, method), correlation(state, a, b2, method),
                  correlation(state, a2, b, method), correlation(state, a2, b2, method)});
}

/// `count` settings with every shift drawn uniformly from the square
/// [-scale, scale]^2 (momentum zeroed when `real_only`).
inline std::vector<BellSettings> random_settings(std::size_t count, std::uint64_t seed, double scale,
                                                 bool real_only = false) {
  if (!(scale > 0.0)) throw std::invalid_argument("random_settings: scale must be positive");
  numerics::GaussianStream rng(seed);
  auto draw = [&] {
    const double q = scale * (2.0 * rng.uniform() - 1.0);
    const double p = scale * (2.0 * rng.uniform() - 1.0);
    return PhasePoint{q, real_only ? 0.0 : p};
  };
  std::vector<BellSettings> out(count);
  for (auto& s : out) {
    s.alice = draw();
    s.alice_prime = draw();
    s.bob = draw();
    s.bob_prime = draw();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scans

enum class ScanKind { Real, Complex };

inline const char* to_string(ScanKind k) { return k == ScanKind::Real ? "real" : "complex"; }

inline BellSettings settings_for(ScanKind kind, double d) {
  return kind == ScanKind::Real ? BellSettings::real_pattern(d) : BellSettings::complex_pattern(d);
}

/// B over an (n_mean, d) grid, stored row-major with n_mean as the outer index.
struct ScanResult {
  ScanKind kind = ScanKind::Real;
  std::string method;
  std::vector<double> n_mean_axis;
  std::vector<double> d_axis;
  std::optional<double> steepness;
  std::vector<double> values;
  std::vector<double> errors;
  std::vector<std::uint8_t> converged;

  std::size_t index(std::size_t row, std::size_t col) const { return row * d_axis.size() + col; }
  double at(std::size_t row, std::size_t col) const { return values[index(row, col)]; }
  bool ok(std::size_t row, std::size_t col) const { return converged[index(row, col)] != 0; }

  /// Largest |B| among converged cells, with its (row, col).
  std::optional<std::pair<double, std::pair<std::size_t, std::size_t>>> max_abs() const {
    std::optional<std::pair<double, std::pair<std::size_t, std::size_t>>> best;
    for (std::size_t r = 0; r < n_mean_axis.size(); ++r) {
      for (std::size_t c = 0; c < d_axis.size(); ++c) {
        if (!ok(r, c)) continue;
        const double v = std::abs(at(r, c));
        if (!best || v > best->first) best = {v, {r, c}};
      }
    }
    return best;
  }
};

inline ScanResult bell_scan(ScanKind kind, const std::vector<double>& n_mean_grid, const std::vector<double>& d_grid,
                            const ObservableSpec& family, const CorrelationMethod& method) {
  if (n_mean_grid.empty() || d_grid.empty()) throw std::invalid_argument("bell_scan: grids must be nonempty");
  if (kind == ScanKind::Complex && std::holds_alternative<ClosedForm>(method)) {
    throw std::invalid_argument("bell_scan: no closed form exists for momentum-displaced settings");
  }
  ScanResult out;
  out.kind = kind;
  out.method = method_name(method);
  out.n_mean_axis = n_mean_grid;
  out.d_axis = d_grid;
  if (family.profile().saturating()) out.steepness = family.profile().steepness();
  const std::size_t cells = n_mean_grid.size() * d_grid.size();
  out.values.assign(cells, 0.0);
  out.errors.assign(cells, 0.0);
  out.converged.assign(cells, 0);
  std::vector<EprState> states;
  for (double n : n_mean_grid) states.push_back(EprState::from_mean_photon(n));
  numerics::parallel_for(cells, [&](std::size_t i) {
    const std::size_t row = i / d_grid.size();
    const std::size_t col = i % d_grid.size();
    const BellResult b = bell_value(states[row], family, settings_for(kind, d_grid[col]), method);
    out.values[i] = b.value;
    out.errors[i] = b.error;
    out.converged[i] = b.converged ? 1 : 0;
  });
  return out;
}

/// B(d, <n>) = E(0,0) + E(0,d) + E(-d,0) - E(-d,d).
inline ScanResult bell_real_scan(const std::vector<double>& n_mean_grid, const std::vector<double>& d_grid,
                                 const ObservableSpec& family, const CorrelationMethod& method) {
  return bell_scan(ScanKind::Real, n_mean_grid, d_grid, family, method);
}

/// Same pattern with the primed settings displaced by i d/2 in momentum.
inline ScanResult bell_complex_scan(const std::vector<double>& n_mean_grid, const std::vector<double>& d_grid,
                                    const ObservableSpec& family, const CorrelationMethod& method) {
  return bell_scan(ScanKind::Complex, n_mean_grid, d_grid, family, method);
}

struct ViolationPeak {
  double d_star = 0.0;
  double b_star = 0.0;  ///< max |B|
  double value = 0.0;   ///< signed B at d_star
  bool converged = true;
};

/// Maximizes |B(d)| over d >= 0 for the given pattern: a grid over
/// [0, 3/sqrt(c2)] followed by golden-section refinement around the best cell
/// down to a bracket of 2e-5 times the grid extent.
inline ViolationPeak max_violation(const EprState& state, const ObservableSpec& family, ScanKind kind,
                                   const CorrelationMethod& method, int grid_points = 25) {
  if (kind == ScanKind::Complex && std::holds_alternative<ClosedForm>(method)) {
    throw std::invalid_argument("max_violation: no closed form exists for momentum-displaced settings");
  }
  const double d_hi = 3.0 / std::sqrt(state.c2());
  std::vector<double> grid(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) grid[static_cast<std::size_t>(i)] = d_hi * i / (grid_points - 1);
  std::vector<BellResult> values(grid.size());
  numerics::parallel_for(grid.size(), [&](std::size_t i) {
    values[i] = bell_value(state, family, settings_for(kind, grid[i]), method);
  });
  std::size_t best = 0;
  bool converged = true;
  for (std::size_t i = 0; i < values.size(); ++i) {
    converged = converged && values[i].converged;
    if (std::abs(values[i].value) > std::abs(values[best].value)) best = i;
  }
  ViolationPeak peak{grid[best], std::abs(values[best].value), values[best].value, converged};
  if (best == 0 || best + 1 == grid.size()) return peak;

  auto eval = [&](double d) { return bell_value(state, family, settings_for(kind, d), method); };
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = grid[best - 1];
  double hi = grid[best + 1];
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  BellResult f1 = eval(x1);
  BellResult f2 = eval(x2);
  while (hi - lo > 2e-5 * d_hi) {
    if (std::abs(f1.value) > std::abs(f2.value)) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = eval(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = eval(x2);
    }
  }
  const BellResult& top = std::abs(f1.value) > std::abs(f2.value) ? f1 : f2;
  const double d_top = std::abs(f1.value) > std::abs(f2.value) ? x1 : x2;
  if (std::abs(top.value) >= peak.b_star) {
    peak = {d_top, std::abs(top.value), top.value, converged && top.converged};
  }
  return peak;
}

struct ThresholdRow {
  double s = 0.0;
  ViolationPeak peak;
  bool violates = false;  ///< peak |B| > 2
};

/// Peak |B| of the real-shift pattern for the unsharp family l at each s.
inline std::vector<ThresholdRow> unsharp_threshold(const EprState& state, int l, const std::vector<double>& s_list,
                                                   const CorrelationMethod& method = Quadrature{}) {
  std::vector<ThresholdRow> rows;
  for (double s : s_list) {
    if (!(s > 0.0)) throw std::invalid_argument("unsharp_threshold: s must be positive");
    const ViolationPeak peak = max_violation(state, make_unsharp(l, s), ScanKind::Real, method);
    rows.push_back({s, peak, peak.b_star > 2.0});
  }
  return rows;
}

/// Smallest s in the table that violates the CHSH bound.
inline std::optional<double> smallest_violating_s(const std::vector<ThresholdRow>& rows) {
  std::optional<double> best;
  for (const auto& r : rows) {
    if (r.violates && (!best || r.s < *best)) best = r.s;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Cross-method comparison

struct OracleReport {
  std::size_t correlations = 0;
  double quadrature_vs_fock = 0.0;
  std::optional<double> quadrature_vs_closed;
  std::optional<double> fock_vs_closed;
  std::size_t unconverged = 0;

  double max_discrepancy() const {
    double m = quadrature_vs_fock;
    if (quadrature_vs_closed) m = std::max(m, *quadrature_vs_closed);
    if (fock_vs_closed) m = std::max(m, *fock_vs_closed);
    return m;
  }
};

/// Signed pairwise differences of the correlation engines over all four
/// correlations of every setting. The closed form joins wherever it applies.
inline OracleReport oracle_compare(const EprState& state, const ObservableSpec& family,
                                   const std::vector<BellSettings>& settings, Quadrature quadrature = {},
                                   FockTruncation fock = {256, 1e-6}) {
  if (settings.empty()) throw std::invalid_argument("oracle_compare: need at least one setting");
  struct Row {
    double qf = 0.0;
    std::optional<double> qc;
    std::optional<double> fc;
    std::size_t unconverged = 0;
  };
  std::vector<Row> rows(settings.size());
  numerics::parallel_for(settings.size(), [&](std::size_t i) {
    const BellSettings& s = settings[i];
    const BellResult q = bell_value(state, family, s, quadrature);
    const BellResult f = bell_value(state, family, s, fock);
    const std::array<std::pair<PhasePoint, PhasePoint>, 4> pairs{
        {{s.alice, s.bob}, {s.alice, s.bob_prime}, {s.alice_prime, s.bob}, {s.alice_prime, s.bob_prime}}};
    Row row;
    for (std::size_t k = 0; k < 4; ++k) {
      row.qf = std::max(row.qf, std::abs(q.terms[k].value - f.terms[k].value));
      row.unconverged += (q.terms[k].converged ? 0 : 1) + (f.terms[k].converged ? 0 : 1);
      const ObservableSpec a = family.at(pairs[k].first);
      const ObservableSpec b = family.at(pairs[k].second);
      if (closed_form_applicable(a, b)) {
        const double c = correlation(state, a, b, ClosedForm{}).value;
        row.qc = std::max(row.qc.value_or(0.0), std::abs(q.terms[k].value - c));
        row.fc = std::max(row.fc.value_or(0.0), std::abs(f.terms[k].value - c));
      }
    }
    rows[i] = row;
  });
  OracleReport report;
  report.correlations = 4 * settings.size();
  for (const auto& r : rows) {
    report.quadrature_vs_fock = std::max(report.quadrature_vs_fock, r.qf);
    if (r.qc) report.quadrature_vs_closed = std::max(report.quadrature_vs_closed.value_or(0.0), *r.qc);
    if (r.fc) report.fock_vs_closed = std::max(report.fock_vs_closed.value_or(0.0), *r.fc);
    report.unconverged += r.unconverged;
  }
  return report;
}

}  // namespace cvbell
