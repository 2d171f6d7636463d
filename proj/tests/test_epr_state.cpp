#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cvbell/epr_state.hpp"
#include "cvbell/numerics/gaussian_integral.hpp"
#include "cvbell/numerics/hermite.hpp"
#include "cvbell/numerics/rules.hpp"

using cvbell::EprState;

TEST(EprState, Vacuum) {
  const auto s = EprState::from_mean_photon(0.0);
  EXPECT_EQ(s.squeezing(), 0.0);
  EXPECT_EQ(s.c2(), 1.0);
  EXPECT_EQ(s.s2(), 0.0);
  EXPECT_EQ(s.schmidt_coefficient(0), 1.0);
  EXPECT_EQ(s.schmidt_coefficient(3), 0.0);
  EXPECT_EQ(EprState::from_squeezing(0.0).mean_photon(), 0.0);
}

TEST(EprState, DerivedParametersAtTen) {
  const auto s = EprState::from_mean_photon(10.0);
  EXPECT_NEAR(s.squeezing(), 1.8685511210994620, 1e-14);
  EXPECT_EQ(s.c2(), 21.0);
  EXPECT_NEAR(s.s2(), 20.976176963403031, 1e-12);
  EXPECT_NEAR(s.position_correlation(), 0.99886556968585862, 1e-15);
  EXPECT_NEAR(s.schmidt_coefficient(0), 1.0 / std::sqrt(11.0), 1e-15);
}

TEST(EprState, RejectsInvalid) {
  EXPECT_THROW(EprState::from_mean_photon(-1.0), std::invalid_argument);
  EXPECT_THROW(EprState::from_mean_photon(std::nan("")), std::invalid_argument);
  EXPECT_THROW(EprState::from_mean_photon(INFINITY), std::invalid_argument);
  EXPECT_THROW(EprState::from_squeezing(-0.1), std::invalid_argument);
  EXPECT_THROW(EprState::from_mean_photon(1.0).schmidt_coefficient(-1), std::invalid_argument);
}

TEST(EprState, SqueezingRoundTrip) {
  for (double x : {0.1, 1.0, 10.0, 100.0}) {
    const auto a = EprState::from_mean_photon(x);
    const auto b = EprState::from_squeezing(a.squeezing());
    EXPECT_NEAR(b.mean_photon(), x, 1e-12 * x);
    EXPECT_NEAR(b.c2(), a.c2(), 1e-12 * a.c2());
    EXPECT_NEAR(b.s2(), a.s2(), 1e-12 * a.c2());
  }
  EXPECT_NEAR(EprState::from_squeezing(std::asinh(std::sqrt(10.0))).mean_photon(), 10.0, 1e-5);
}

TEST(EprState, HyperbolicIdentity) {
  for (double x : {0.0, 0.5, 1.0, 10.0, 100.0, 1e4}) {
    const auto s = EprState::from_mean_photon(x);
    EXPECT_NEAR((s.c2() - s.s2()) * (s.c2() + s.s2()), 1.0, 1e-12 * s.c2()) << x;
  }
}

TEST(EprState, SchmidtParameterizationsAgree) {
  const auto s = EprState::from_mean_photon(10.0);
  const double r = s.squeezing();
  double sum = 0.0;
  for (int n = 0; n <= 500; ++n) {
    const double c = s.schmidt_coefficient(n);
    EXPECT_NEAR(c, std::pow(std::tanh(r), n) / std::cosh(r), 1e-12);
    sum += c * c;
  }
  EXPECT_LT(1.0 - sum, 1e-9);
  EXPECT_NEAR(s.schmidt_tail(501), 1.0 - sum, 1e-12);
  EXPECT_LT(s.schmidt_tail(s.truncation_for(1e-12)), 1e-12);
  EXPECT_GE(s.schmidt_tail(s.truncation_for(1e-12) - 1), 1e-12);
  EXPECT_EQ(EprState::from_mean_photon(1e9).truncation_for(), cvbell::kMaxSchmidtTruncation);
}

TEST(EprState, AmplitudeValues) {
  for (double x : {0.0, 1.0, 10.0}) {
    const auto s = EprState::from_mean_photon(x);
    EXPECT_NEAR(s.position_amplitude(0.0, 0.0), 0.56418958354775629, 1e-15);
    EXPECT_NEAR(s.momentum_amplitude(0.0, 0.0), 0.56418958354775629, 1e-15);
  }
  const auto s = EprState::from_mean_photon(10.0);
  EXPECT_NEAR(s.position_amplitude(1.0, 1.0) / s.position_amplitude(0.0, 0.0), 0.97645849188704442, 1e-13);
  EXPECT_DOUBLE_EQ(s.position_amplitude(0.3, -0.2), s.position_amplitude(-0.2, 0.3));
  EXPECT_DOUBLE_EQ(s.momentum_amplitude(0.3, 0.7), s.position_amplitude(0.3, -0.7));
  EXPECT_GT(s.position_amplitude(3.0, -3.0), 0.0);
}

TEST(EprState, WignerOriginAndFactorization) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> photons(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const auto s = EprState::from_mean_photon(photons(rng));
    const double qa = coord(rng), pa = coord(rng), qb = coord(rng), pb = coord(rng);
    const double w = s.wigner(qa, pa, qb, pb);
    const double pos = s.position_amplitude(qa, qb);
    const double mom = s.momentum_amplitude(pa, pb);
    if (w > 1e-290) EXPECT_NEAR(w / (pos * pos * mom * mom), 1.0, 1e-12);
  }
  EXPECT_NEAR(EprState::from_mean_photon(7.0).wigner(0, 0, 0, 0), 0.10132118364233778, 1e-16);
}

TEST(EprState, WignerPositiveOnRandomPoints) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> coord(0.0, 1.0);
  std::uniform_real_distribution<double> photons(0.0, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const auto s = EprState::from_mean_photon(photons(rng));
    // Points drawn near the state's support so the exponential does not underflow.
    const double qa = coord(rng), pa = coord(rng);
    const double qb = qa * s.position_correlation() + 0.1 * coord(rng);
    const double pb = -pa * s.position_correlation() + 0.1 * coord(rng);
    ASSERT_GT(s.wigner(qa, pa, qb, pb), 0.0);
  }
}

class Normalization : public ::testing::TestWithParam<double> {};

TEST_P(Normalization, PositionMomentumWigner) {
  const auto s = EprState::from_mean_photon(GetParam());
  const auto pos = cvbell::numerics::integrate_gaussian_2d([](double, double) { return 1.0; }, s.position_density());
  const auto mom = cvbell::numerics::integrate_gaussian_2d([](double, double) { return 1.0; }, s.momentum_density());
  EXPECT_NEAR(pos.value, 1.0, 1e-10);
  EXPECT_NEAR(mom.value, 1.0, 1e-10);

  // Direct 4D Gauss-Hermite sum of W on a whitened grid: W is a Gaussian with
  // covariance diag blocks, so map each (q_a, q_b) and (p_a, p_b) pair through
  // its principal axes.
  const auto& rule = cvbell::numerics::gauss_hermite(24);
  const double lam_plus = s.c2() - s.s2();   // exponent weight on (x + y)/sqrt2 for q
  const double lam_minus = s.c2() + s.s2();  // on (x - y)/sqrt2 for q
  double total = 0.0;
  const double r2 = std::numbers::sqrt2;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double u = rule.nodes[i] / std::sqrt(lam_plus);
      const double v = rule.nodes[j] / std::sqrt(lam_minus);
      const double qa = (u + v) / r2, qb = (u - v) / r2;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        for (std::size_t l = 0; l < rule.nodes.size(); ++l) {
          const double x = rule.nodes[k] / std::sqrt(lam_minus);
          const double y = rule.nodes[l] / std::sqrt(lam_plus);
          const double pa = (x + y) / r2, pb = (x - y) / r2;
          const double weight = rule.weights[i] * rule.weights[j] * rule.weights[k] * rule.weights[l];
          const double gauss = std::exp(-(rule.nodes[i] * rule.nodes[i] + rule.nodes[j] * rule.nodes[j] +
                                          rule.nodes[k] * rule.nodes[k] + rule.nodes[l] * rule.nodes[l]));
          total += weight * s.wigner(qa, pa, qb, pb) / gauss;
        }
      }
    }
  }
  const double jacobian = 1.0 / (lam_plus * lam_minus);
  EXPECT_NEAR(total * jacobian, 1.0, 1e-8);
}

INSTANTIATE_TEST_SUITE_P(States, Normalization, ::testing::Values(0.0, 0.5, 1.0, 10.0, 100.0));

TEST(EprState, Covariance) {
  const auto vac = EprState::from_mean_photon(0.0).covariance_matrix();
  EXPECT_TRUE(vac.isApprox(0.5 * Eigen::Matrix4d::Identity()));
  const auto s = EprState::from_mean_photon(10.0);
  const auto cov = s.covariance_matrix();
  EXPECT_NEAR(cov(0, 0), 10.5, 1e-15);
  EXPECT_NEAR(cov(0, 1), 10.488088481701515, 1e-12);
  EXPECT_NEAR(cov(2, 3), -10.488088481701515, 1e-12);
  EXPECT_EQ(cov(0, 2), 0.0);
  EXPECT_NEAR(cov.determinant(), 1.0 / 16.0, 1e-10);
  EXPECT_NEAR((cov.topLeftCorner<2, 2>().determinant()), 0.25, 1e-12);

  // The covariance inverts the Wigner exponent: W ~ exp(-x^T Q x / 2) with Q = cov^{-1}.
  const Eigen::Matrix4d q = cov.inverse();
  EXPECT_NEAR(0.5 * q(0, 0), s.c2(), 1e-9);
  EXPECT_NEAR(-0.5 * q(0, 1), s.s2(), 1e-9);
  EXPECT_NEAR(0.5 * q(2, 3), s.s2(), 1e-9);
}

TEST(EprState, SchmidtReconstructsPositionAmplitude) {
  const auto s = EprState::from_mean_photon(1.0);
  const int n = 60;
  std::vector<double> pa(n), pb(n);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  for (int t = 0; t < 10; ++t) {
    const double qa = coord(rng), qb = coord(rng);
    cvbell::numerics::hermite_functions(qa, pa);
    cvbell::numerics::hermite_functions(qb, pb);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += s.schmidt_coefficient(k) * pa[k] * pb[k];
    EXPECT_NEAR(sum, s.position_amplitude(qa, qb), 1e-6);
  }
}
