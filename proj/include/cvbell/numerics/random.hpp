#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cvbell::numerics {

/// SplitMix64 finalizer; used to derive independent sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Standard-normal stream: std::mt19937_64 bits mapped through Box-Muller.
/// Both stages are fully specified, so a seed reproduces the same stream on
/// every platform (std::normal_distribution does not promise that).
class GaussianStream {
 public:
  static constexpr std::string_view kName = "mt19937_64/box-muller/v1";

  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // 53-bit uniforms in (0, 1].
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Cholesky factor of a covariance matrix; throws if it is not positive definite.
template <int Dim>
Eigen::Matrix<double, Dim, Dim> covariance_factor(const Eigen::Matrix<double, Dim, Dim>& cov) {
  if (!cov.isApprox(cov.transpose(), 1e-12)) {
    throw std::invalid_argument("mvn_sample: covariance is not symmetric");
  }
  Eigen::LLT<Eigen::Matrix<double, Dim, Dim>> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("mvn_sample: covariance is not positive definite");
  }
  return llt.matrixL();
}

/// Draws `count` zero-mean Gaussian vectors with covariance `cov`.
template <int Dim>
std::vector<std::array<double, Dim>> mvn_sample(const Eigen::Matrix<double, Dim, Dim>& cov,
                                                std::size_t count, std::uint64_t seed) {
  const Eigen::Matrix<double, Dim, Dim> factor = covariance_factor<Dim>(cov);
  GaussianStream normal(seed);
  std::vector<std::array<double, Dim>> out(count);
  Eigen::Matrix<double, Dim, 1> z;
  for (auto& sample : out) {
    for (int i = 0; i < Dim; ++i) z(i) = normal();
    const Eigen::Matrix<double, Dim, 1> x = factor * z;
    for (int i = 0; i < Dim; ++i) sample[static_cast<std::size_t>(i)] = x(i);
  }
  return out;
}

}  // namespace cvbell::numerics
