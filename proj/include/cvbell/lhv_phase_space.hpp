#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cvbell/correlators.hpp"
#include "cvbell/epr_state.hpp"
#include "cvbell/numerics/gaussian_integral.hpp"
#include "cvbell/numerics/parallel.hpp"
#include "cvbell/numerics/random.hpp"
#include "cvbell/wigner_symbol.hpp"

namespace cvbell {

/// Sample-mean estimate over `count` draws from W_Psi.
struct LhvMonteCarlo {
  std::size_t count = 1'000'000;
  std::uint64_t seed = 1;
};

struct LhvQuadrature {
  numerics::QuadratureSpec spec{};
};

using LhvMethod = std::variant<LhvMonteCarlo, LhvQuadrature>;

/// A singular symbol was handed to the phase-space model.
class SingularSymbolError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Phase-space sample (q_a, q_b, p_a, p_b), the coordinate order of
/// EprState::covariance_matrix.
using PhaseSample = std::array<double, 4>;

inline constexpr std::size_t kSampleBlock = 1u << 16;

namespace detail {

inline const RegularSymbol& regular_or_throw(const WignerSymbol& symbol) {
  if (const auto* s = std::get_if<SingularLineSymbol>(&symbol)) {
    throw SingularSymbolError(
        "symbol '" + s->label +
        "' is singular: it carries delta(q) on a line and is not a bounded function on phase space, so it "
        "cannot serve as a local response; only bounded Wigner symbols admit the phase-space LHV model");
  }
  return std::get<RegularSymbol>(symbol);
}

inline void fill_block(const EprState& state, std::uint64_t seed, std::size_t block, std::size_t count,
                       PhaseSample* out) {
  const Eigen::Matrix4d factor = numerics::covariance_factor<4>(state.covariance_matrix());
  numerics::GaussianStream normal(numerics::derive_seed(seed, block));
  Eigen::Vector4d z;
  for (std::size_t i = 0; i < count; ++i) {
    for (int k = 0; k < 4; ++k) z(k) = normal();
    const Eigen::Vector4d x = factor * z;
    out[i] = {x(0), x(1), x(2), x(3)};
  }
}

template <class Fn>
void for_each_block(std::size_t count, Fn&& fn) {
  const std::size_t blocks = (count + kSampleBlock - 1) / kSampleBlock;
  numerics::parallel_for(blocks, [&](std::size_t b) {
    const std::size_t begin = b * kSampleBlock;
    fn(b, std::min(kSampleBlock, count - begin));
  });
}

}  // namespace detail

/// Draws `count` points from W_Psi. The stream is cut into fixed blocks with
/// seeds derived from (seed, block index), so output does not depend on the
/// worker count.
inline std::vector<PhaseSample> sample_state(const EprState& state, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_state: count must be >= 1");
  std::vector<PhaseSample> out(count);
  detail::for_each_block(count, [&](std::size_t b, std::size_t n) {
    detail::fill_block(state, seed, b, n, out.data() + b * kSampleBlock);
  });
  return out;
}

/// int W^_A(l_a - shift_a) W^_B(l_b - shift_b) W_Psi(l) dl with responses
/// W^ = 2pi W. For eps = +1 observables this is the quantum correlation.
inline numerics::Estimate<double> lhv_correlation(const EprState& state, const WignerSymbol& symbol_a,
                                                  const WignerSymbol& symbol_b, PhasePoint shift_a,
                                                  PhasePoint shift_b, const LhvMethod& method) {
  const RegularSymbol& a = detail::regular_or_throw(symbol_a);
  const RegularSymbol& b = detail::regular_or_throw(symbol_b);
  const double two_pi = 2.0 * std::numbers::pi;
  auto response = [&](const RegularSymbol& s, PhasePoint shift, double q, double p) {
    return two_pi * s(q - shift.q, p - shift.p);
  };

  if (const auto* mc = std::get_if<LhvMonteCarlo>(&method)) {
    if (mc->count < 2) throw std::invalid_argument("lhv_correlation: Monte Carlo needs count >= 2");
    const std::size_t blocks = (mc->count + kSampleBlock - 1) / kSampleBlock;
    std::vector<double> sums(blocks, 0.0);
    std::vector<double> squares(blocks, 0.0);
    detail::for_each_block(mc->count, [&](std::size_t blk, std::size_t n) {
      std::vector<PhaseSample> samples(n);
      detail::fill_block(state, mc->seed, blk, n, samples.data());
      double s = 0.0;
      double s2 = 0.0;
      for (const auto& x : samples) {
        const double v = response(a, shift_a, x[0], x[2]) * response(b, shift_b, x[1], x[3]);
        s += v;
        s2 += v * v;
      }
      sums[blk] = s;
      squares[blk] = s2;
    });
    double s = 0.0;
    double s2 = 0.0;
    for (std::size_t i = 0; i < blocks; ++i) {
      s += sums[i];
      s2 += squares[i];
    }
    const double n = static_cast<double>(mc->count);
    const double mean = s / n;
    const double var = std::max(0.0, s2 / n - mean * mean);
    return {mean, std::sqrt(var / (n - 1.0)), true};
  }

  numerics::QuadratureSpec spec = std::get<LhvQuadrature>(method).spec;
  auto splits = [](const std::vector<double>& kinks, double shift) {
    std::vector<double> out;
    for (double k : kinks) out.push_back(k + shift);
    std::sort(out.begin(), out.end());
    return out;
  };
  spec.splits_x = splits(a.q_kinks, shift_a.q);
  spec.splits_y = splits(b.q_kinks, shift_b.q);
  if (a.momentum_independent && b.momentum_independent) {
    return numerics::integrate_gaussian_2d(
        [&](double qa, double qb) { return response(a, shift_a, qa, 0.0) * response(b, shift_b, qb, 0.0); },
        state.position_density(), spec);
  }
  // W_Psi factorizes into position and momentum densities; nest the momentum
  // integral inside the position one.
  numerics::QuadratureSpec inner;
  inner.order = spec.order;
  inner.target_rel_error = spec.target_rel_error;
  inner.splits_x = splits(a.p_kinks, shift_a.p);
  inner.splits_y = splits(b.p_kinks, shift_b.p);
  const numerics::GaussianForm2D momentum = state.momentum_density();
  return numerics::integrate_gaussian_2d(
      [&](double qa, double qb) {
        return numerics::integrate_gaussian_2d(
            [&](double pa, double pb) { return response(a, shift_a, qa, pa) * response(b, shift_b, qb, pb); },
            momentum, inner).value;
      },
      state.position_density(), spec);
}

struct LhvScanResult {
  double max_abs = 0.0;
  std::size_t argmax = 0;
  std::vector<double> values;  ///< B per setting
  double error = 0.0;          ///< largest per-setting error estimate
  bool converged = true;
};

/// CHSH combination of the phase-space model over a batch of settings. Monte
/// Carlo draws one sample set and reuses it for every correlation, so each
/// batch member is an exact LHV average.
inline LhvScanResult lhv_chsh_scan(const EprState& state, const WignerSymbol& symbol,
                                   const std::vector<BellSettings>& settings, const LhvMethod& method) {
  const RegularSymbol& sym = detail::regular_or_throw(symbol);
  if (2.0 * std::numbers::pi * sym.sup > 1.0 + 1e-12) {
    throw std::invalid_argument("lhv_chsh_scan: responses must satisfy |2pi W| <= 1");
  }
  if (settings.empty()) throw std::invalid_argument("lhv_chsh_scan: settings list is empty");
  LhvScanResult out;
  out.values.assign(settings.size(), 0.0);
  std::vector<double> errors(settings.size(), 0.0);
  std::vector<std::uint8_t> ok(settings.size(), 1);

  if (const auto* mc = std::get_if<LhvMonteCarlo>(&method)) {
    if (mc->count < 2) throw std::invalid_argument("lhv_chsh_scan: Monte Carlo needs count >= 2");
    const std::vector<PhaseSample> samples = sample_state(state, mc->count, mc->seed);
    const double two_pi = 2.0 * std::numbers::pi;
    numerics::parallel_for(settings.size(), [&](std::size_t i) {
      const BellSettings& s = settings[i];
      double sum = 0.0;
      double sum2 = 0.0;
      for (const auto& x : samples) {
        const double a = two_pi * sym(x[0] - s.alice.q, x[2] - s.alice.p);
        const double a2 = two_pi * sym(x[0] - s.alice_prime.q, x[2] - s.alice_prime.p);
        const double b = two_pi * sym(x[1] - s.bob.q, x[3] - s.bob.p);
        const double b2 = two_pi * sym(x[1] - s.bob_prime.q, x[3] - s.bob_prime.p);
        const double v = a * b + a * b2 + a2 * b - a2 * b2;
        sum += v;
        sum2 += v * v;
      }
      const double n = static_cast<double>(samples.size());
      const double mean = sum / n;
      out.values[i] = mean;
      errors[i] = std::sqrt(std::max(0.0, sum2 / n - mean * mean) / (n - 1.0));
    });
  } else {
    numerics::parallel_for(settings.size(), [&](std::size_t i) {
      const BellSettings& s = settings[i];
      const auto e = [&](PhasePoint x, PhasePoint y) { return lhv_correlation(state, symbol, symbol, x, y, method); };
      const std::array<numerics::Estimate<double>, 4> t{e(s.alice, s.bob), e(s.alice, s.bob_prime),
                                                        e(s.alice_prime, s.bob), e(s.alice_prime, s.bob_prime)};
      out.values[i] = t[0].value + t[1].value + t[2].value - t[3].value;
      for (const auto& x : t) {
        errors[i] += x.error;
        if (!x.converged) ok[i] = 0;
      }
    });
  }
  for (std::size_t i = 0; i < settings.size(); ++i) {
    if (std::abs(out.values[i]) > out.max_abs) {
      out.max_abs = std::abs(out.values[i]);
      out.argmax = i;
    }
    out.error = std::max(out.error, errors[i]);
    out.converged = out.converged && ok[i] != 0;
  }
  return out;
}

}  // namespace cvbell
