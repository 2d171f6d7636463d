#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <span>
#include <type_traits>
#include <vector>

#include "cvbell/numerics/rules.hpp"

namespace cvbell::numerics {

/// A computed value together with an error estimate. `converged` is false
/// when the requested tolerance was not reached; the value is then the best
/// available one.
template <class T>
struct Estimate {
  T value{};
  double error = 0.0;
  bool converged = true;
  double magnitude = 0.0;  ///< integral of |f| where known, else 0
};

template <class T>
struct is_estimate : std::false_type {};
template <class T>
struct is_estimate<Estimate<T>> : std::true_type {};

namespace detail {

template <class R>
struct unwrap_estimate {
  using type = R;
};
template <class T>
struct unwrap_estimate<Estimate<T>> {
  using type = T;
};

}  // namespace detail

/// Value type produced by integrating f: plain results pass through,
/// Estimate<T> results (nested integrals) unwrap to T.
template <class F>
using integral_value_t =
    typename detail::unwrap_estimate<std::remove_cvref_t<std::invoke_result_t<F&, double>>>::type;

struct AdaptiveOptions {
  int order = 20;             ///< Gauss-Legendre nodes per panel.
  double abs_tol = 0.0;
  double rel_tol = 1e-10;     ///< relative to the integral of |f|
  int max_panels = 2000;
};

namespace detail {

template <class T>
struct PanelSum {
  T value{};
  double abs_value = 0.0;
  double inner_error = 0.0;
};

template <class T, class F>
PanelSum<T> gauss_panel(F& f, double a, double b, const QuadratureRule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  PanelSum<T> out;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double w = rule.weights[i] * half;
    auto r = f(mid + half * rule.nodes[i]);
    if constexpr (is_estimate<decltype(r)>::value) {
      out.value += w * r.value;
      out.abs_value += w * std::max(std::abs(r.value), r.magnitude);
      out.inner_error += w * r.error;
    } else {
      out.value += w * r;
      out.abs_value += w * std::abs(r);
    }
  }
  return out;
}

template <class T>
struct Panel {
  double a;
  double b;
  PanelSum<T> left;   // rule on [a, mid]
  PanelSum<T> right;  // rule on [mid, b]
  double error;
  bool splittable;
};

template <class T>
struct PanelOrder {
  bool operator()(const Panel<T>& x, const Panel<T>& y) const { return x.error < y.error; }
};

}  // namespace detail

/// Adaptive composite Gauss-Legendre integration of f over the intervals
/// delimited by `breakpoints` (sorted, at least two entries). Each panel is
/// estimated by comparing the rule on the whole panel against the rule on
/// its two halves; the worst panel is bisected until the summed estimate
/// meets max(abs_tol, rel_tol * int|f|) or the panel budget runs out.
///
/// f may return a scalar (double or std::complex<double>) or an Estimate of
/// one, in which case the nested errors are folded into the result.
template <class F>
Estimate<integral_value_t<F>> integrate_adaptive(F&& f, std::span<const double> breakpoints,
                                                 const AdaptiveOptions& options = {}) {
  using T = integral_value_t<F>;
  using detail::Panel;
  using detail::PanelSum;
  const QuadratureRule& rule = gauss_legendre(options.order);

  auto make_panel = [&](double a, double b, const PanelSum<T>& coarse) {
    const double mid = 0.5 * (a + b);
    Panel<T> p{a, b, detail::gauss_panel<T>(f, a, mid, rule), detail::gauss_panel<T>(f, mid, b, rule),
               0.0, true};
    p.error = std::abs(p.left.value + p.right.value - coarse.value);
    const double scale = std::max({std::abs(a), std::abs(b), 1.0});
    p.splittable = (b - a) > 1e-13 * scale;
    return p;
  };

  std::priority_queue<Panel<T>, std::vector<Panel<T>>, detail::PanelOrder<T>> queue;
  std::vector<Panel<T>> frozen;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (!(b > a)) continue;
    queue.push(make_panel(a, b, detail::gauss_panel<T>(f, a, b, rule)));
  }

  auto totals = [&] {
    PanelSum<T> sum;
    double error = 0.0;
    auto add = [&](const Panel<T>& p) {
      sum.value += p.left.value + p.right.value;
      sum.abs_value += p.left.abs_value + p.right.abs_value;
      sum.inner_error += p.left.inner_error + p.right.inner_error;
      error += p.error;
    };
    // priority_queue hides its container; copy is cheap relative to f.
    auto copy = queue;
    while (!copy.empty()) {
      add(copy.top());
      copy.pop();
    }
    for (const auto& p : frozen) add(p);
    return std::pair{sum, error};
  };

  int panels = static_cast<int>(queue.size());
  double err_sum = 0.0;
  double abs_sum = 0.0;
  double inner_sum = 0.0;
  {
    auto [s, e] = totals();
    err_sum = e;
    abs_sum = s.abs_value;
    inner_sum = s.inner_error;
  }
  while (!queue.empty()) {
    const double tol = std::max({options.abs_tol, options.rel_tol * abs_sum,
                                 64.0 * std::numeric_limits<double>::epsilon() * abs_sum});
    if (err_sum + inner_sum <= tol || panels >= options.max_panels) break;
    Panel<T> worst = queue.top();
    queue.pop();
    if (!worst.splittable) {
      frozen.push_back(worst);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    Panel<T> left = make_panel(worst.a, mid, worst.left);
    Panel<T> right = make_panel(mid, worst.b, worst.right);
    err_sum += left.error + right.error - worst.error;
    abs_sum += left.left.abs_value + left.right.abs_value + right.left.abs_value +
               right.right.abs_value - worst.left.abs_value - worst.right.abs_value;
    inner_sum += left.left.inner_error + left.right.inner_error + right.left.inner_error +
                 right.right.inner_error - worst.left.inner_error - worst.right.inner_error;
    queue.push(std::move(left));
    queue.push(std::move(right));
    ++panels;
  }

  auto [sum, error] = totals();
  Estimate<T> out;
  out.value = sum.value;
  out.error = error + sum.inner_error;
  out.magnitude = sum.abs_value;
  const double tol = std::max(options.abs_tol, options.rel_tol * sum.abs_value);
  out.converged = out.error <= tol || out.error <= 64.0 * std::numeric_limits<double>::epsilon() *
                                                       std::max(sum.abs_value, 1e-300);
  return out;
}

}  // namespace cvbell::numerics
