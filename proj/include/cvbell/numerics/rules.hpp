#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cvbell/numerics/hermite.hpp"

namespace cvbell::numerics {

/// Nodes and weights of a one-dimensional Gauss rule.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline constexpr int kMaxGaussHermiteOrder = 512;
inline constexpr int kMaxGaussLegendreOrder = 256;

namespace detail {

// Idempotent per-order cache. Rules are built outside the lock; if two
// threads race on the same order the first insertion wins and both see it.
template <class Build>
const QuadratureRule& cached_rule(std::map<int, std::unique_ptr<QuadratureRule>>& cache,
                                  std::mutex& mutex, int order, Build&& build) {
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(order); it != cache.end()) return *it->second;
  }
  auto rule = std::make_unique<QuadratureRule>(build(order));
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.try_emplace(order, std::move(rule));
  return *it->second;
}

inline QuadratureRule build_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

// Mantissas of (phi_n, phi_{n-1}) at x sharing one scale; their ratio is
// what Newton's method needs.
inline std::pair<double, double> hermite_pair_mantissa(int n, double x) {
  double prev = 0.0;
  double cur = 1.0;
  for (int k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double next = x * std::sqrt(2.0 / (kk + 1.0)) * cur - std::sqrt(kk / (kk + 1.0)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleThreshold) {
      prev *= kRescaleFactor;
      cur *= kRescaleFactor;
    }
  }
  return {cur, prev};
}

// Golub-Welsch seeds from the Jacobi matrix, Newton-polished on phi_n,
// Christoffel weights from the log-scaled kernel sum.
inline QuadratureRule build_gauss_hermite(int n) {
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = std::sqrt(std::numbers::pi);
    return rule;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& seeds = solver.eigenvalues();
  const double sqrt2n = std::sqrt(2.0 * n);
  for (int i = 0; i < n; ++i) {
    double x = seeds(i);
    for (int iter = 0; iter < 4; ++iter) {
      const auto [pn, pn1] = hermite_pair_mantissa(n, x);
      const double deriv = sqrt2n * pn1 - x * pn;
      if (deriv == 0.0) break;
      const double dx = pn / deriv;
      x -= dx;
      if (std::abs(dx) < 1e-15 * (1.0 + std::abs(x))) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
  }
  // Enforce exact symmetry.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[static_cast<std::size_t>(n - 1 - i)] -
                            rule.nodes[static_cast<std::size_t>(i)]);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rule.nodes[static_cast<std::size_t>(i)];
    rule.weights[static_cast<std::size_t>(i)] = std::exp(-hermite_log_christoffel_sum(n, x));
  }
  return rule;
}

}  // namespace detail

/// Gauss-Legendre rule on [-1, 1].
inline const QuadratureRule& gauss_legendre(int order) {
  if (order < 1 || order > kMaxGaussLegendreOrder) {
    throw std::out_of_range("gauss_legendre: order " + std::to_string(order) + " outside [1, " +
                            std::to_string(kMaxGaussLegendreOrder) + "]");
  }
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  static std::mutex mutex;
  return detail::cached_rule(cache, mutex, order, detail::build_gauss_legendre);
}

/// Gauss-Hermite rule for the weight exp(-x^2) on the real line. Nodes are
/// ascending and symmetric; the weights sum to sqrt(pi).
inline const QuadratureRule& gauss_hermite(int order) {
  if (order < 1 || order > kMaxGaussHermiteOrder) {
    throw std::out_of_range("gauss_hermite: order " + std::to_string(order) + " outside [1, " +
                            std::to_string(kMaxGaussHermiteOrder) + "]");
  }
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  static std::mutex mutex;
  return detail::cached_rule(cache, mutex, order, detail::build_gauss_hermite);
}

}  // namespace cvbell::numerics
