#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "cvbell/lhv_phase_space.hpp"

using namespace cvbell;

namespace {

double gaussian_sign_mean(double shift, double variance) {
  // E[sgn(X - shift)] for X ~ N(0, variance)
  return -std::erf(shift / std::sqrt(2.0 * variance));
}

}  // namespace

TEST(Lhv, SignSignMatchesQuantumCorrelation) {
  const auto s = EprState::from_mean_photon(10.0);
  const auto sym = wigner_symbol(make_sign());
  const auto q = lhv_correlation(s, sym, sym, {}, {}, LhvQuadrature{});
  EXPECT_NEAR(q.value, 0.96967330403579226, 1e-10);
  for (const auto& st : random_settings(4, 12, 0.6)) {
    const auto lhv = lhv_correlation(s, sym, sym, st.alice, st.bob_prime, LhvQuadrature{});
    const auto qm = correlation(s, make_sign().at(st.alice), make_sign().at(st.bob_prime), Quadrature{});
    EXPECT_NEAR(lhv.value, qm.value, 1e-9);
  }
}

TEST(Lhv, RealProfileRouteEquality) {
  const auto s = EprState::from_mean_photon(2.0);
  const ObservableSpec smooth(1, Profile::tanh(3.0));
  const auto sym = wigner_symbol(smooth);
  const PhasePoint a{0.2, 0.4};
  const PhasePoint b{-0.1, -0.3};
  EXPECT_NEAR(lhv_correlation(s, sym, sym, a, b, LhvQuadrature{}).value,
              correlation(s, smooth.at(a), smooth.at(b), Quadrature{}).value, 1e-9);
}

TEST(Lhv, VacuumFactorizes) {
  const auto s = EprState::from_mean_photon(0.0);
  const auto sym = wigner_symbol(make_sign());
  const PhasePoint a{0.3, 1.0};
  const PhasePoint b{-0.8, 0.0};
  const double expected = gaussian_sign_mean(a.q, 0.5) * gaussian_sign_mean(b.q, 0.5);
  EXPECT_NEAR(lhv_correlation(s, sym, sym, a, b, LhvQuadrature{}).value, expected, 1e-10);
}

TEST(Lhv, MomentumDependentSymbolUsesNestedIntegral) {
  const auto s = EprState::from_mean_photon(1.0);
  RegularSymbol sym;
  sym.fn = [](double, double p) { return (p > 0.0 ? 1.0 : -1.0) / (2.0 * std::numbers::pi); };
  sym.sup = 1.0 / (2.0 * std::numbers::pi);
  sym.momentum_independent = false;
  sym.p_kinks = {0.0};
  // Momentum correlation is -s2/c2, so E[sgn p_a sgn p_b] = -(2/pi) asin(s2/c2).
  const auto r = lhv_correlation(s, sym, sym, {}, {}, LhvQuadrature{});
  EXPECT_NEAR(r.value, -2.0 / std::numbers::pi * std::asin(s.position_correlation()), 1e-6);
}

TEST(Lhv, MonteCarloAgreesWithQuadrature) {
  const auto s = EprState::from_mean_photon(10.0);
  const auto sym = wigner_symbol(make_sign());
  const PhasePoint a{0.5, 0.0};
  const PhasePoint b{0.2, 0.0};
  const auto q = lhv_correlation(s, sym, sym, a, b, LhvQuadrature{});
  const auto mc = lhv_correlation(s, sym, sym, a, b, LhvMonteCarlo{1'000'000, 7});
  EXPECT_NEAR(mc.value, q.value, 4e-3);
  EXPECT_GT(mc.error, 0.0);
  const auto again = lhv_correlation(s, sym, sym, a, b, LhvMonteCarlo{1'000'000, 7});
  EXPECT_EQ(mc.value, again.value);
}

TEST(Lhv, RejectsSingularSymbols) {
  const auto s = EprState::from_mean_photon(1.0);
  const auto r = wigner_symbol(make_parity_inversion());
  const auto sgn = wigner_symbol(make_sign());
  EXPECT_THROW(lhv_correlation(s, r, sgn, {}, {}, LhvQuadrature{}), SingularSymbolError);
  EXPECT_THROW(lhv_chsh_scan(s, wigner_symbol(make_parity()), {BellSettings{}}, LhvQuadrature{}), SingularSymbolError);
  try {
    lhv_correlation(s, sgn, r, {}, {}, LhvQuadrature{});
  } catch (const SingularSymbolError& e) {
    EXPECT_NE(std::string(e.what()).find("bounded"), std::string::npos);
  }
}

TEST(LhvScan, BoundHoldsForSignFamily) {
  for (double n : {10.0, 100.0}) {
    const auto s = EprState::from_mean_photon(n);
    const auto scan =
        lhv_chsh_scan(s, wigner_symbol(make_sign()), random_settings(n == 10.0 ? 400 : 50, 99, 0.5), LhvQuadrature{});
    EXPECT_LE(scan.max_abs, 2.0 + 1e-6) << n;
    EXPECT_TRUE(scan.converged);
    EXPECT_GT(scan.max_abs, 1.0);
  }
}

TEST(LhvScan, DegenerateSettingsGiveTwiceE) {
  const auto s = EprState::from_mean_photon(10.0);
  const auto scan = lhv_chsh_scan(s, wigner_symbol(make_sign()), {BellSettings{}}, LhvQuadrature{});
  EXPECT_NEAR(scan.values[0], 2.0 * 0.96967330403579226, 1e-9);
  EXPECT_LE(scan.max_abs, 2.0);
}

TEST(LhvScan, MonteCarloNeverExceedsTwo) {
  const auto s = EprState::from_mean_photon(1.0);
  const auto scan = lhv_chsh_scan(s, wigner_symbol(make_sign()), random_settings(50, 3, 1.0), LhvMonteCarlo{100000, 5});
  EXPECT_LE(scan.max_abs, 2.0);
}

TEST(LhvScan, RejectsUnboundedResponses) {
  RegularSymbol big;
  big.fn = [](double, double) { return 1.0; };
  big.sup = 1.0;
  EXPECT_THROW(lhv_chsh_scan(EprState::from_mean_photon(1.0), big, {BellSettings{}}, LhvQuadrature{}),
               std::invalid_argument);
  EXPECT_THROW(lhv_chsh_scan(EprState::from_mean_photon(1.0), wigner_symbol(make_sign()), {}, LhvQuadrature{}),
               std::invalid_argument);
}

TEST(Sampler, MomentsMatchCovariance) {
  const auto s = EprState::from_mean_photon(10.0);
  const std::size_t count = 200000;
  const auto x = sample_state(s, count, 21);
  ASSERT_EQ(x.size(), count);
  const auto cov = s.covariance_matrix();
  double mean[4] = {0, 0, 0, 0};
  for (const auto& v : x) {
    for (int k = 0; k < 4; ++k) mean[k] += v[k];
  }
  for (int k = 0; k < 4; ++k) {
    mean[k] /= count;
    EXPECT_NEAR(mean[k], 0.0, 5.0 * std::sqrt(cov(k, k) / count));
  }
  double c[4][4] = {};
  for (const auto& v : x) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) c[i][j] += v[i] * v[j];
    }
  }
  const double rho = c[0][1] / std::sqrt(c[0][0] * c[1][1]);
  // Var of a sample correlation ~ (1 - rho^2)^2 / count.
  const double rho_true = s.position_correlation();
  EXPECT_NEAR(rho, rho_true, 5.0 * (1.0 - rho_true * rho_true) / std::sqrt(static_cast<double>(count)) + 1e-6);
  for (int i : {0, 1}) {
    for (int j : {2, 3}) EXPECT_NEAR(c[i][j] / count, 0.0, 5.0 * std::sqrt(cov(i, i) * cov(j, j) / count));
  }
}

TEST(Sampler, DeterministicAndThreadIndependent) {
  const auto s = EprState::from_mean_photon(1.0);
  const auto a = sample_state(s, 150000, 4);
  setenv("CVBELL_THREADS", "4", 1);
  const auto b = sample_state(s, 150000, 4);
  unsetenv("CVBELL_THREADS");
  EXPECT_EQ(a, b);
  EXPECT_NE(a[0], sample_state(s, 1, 5)[0]);
  EXPECT_THROW(sample_state(s, 0, 1), std::invalid_argument);
}
