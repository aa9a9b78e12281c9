#pragma once

#include "widthlab/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace widthlab {

// Neumaier-compensated accumulator. Quadrature sums go through this so the
// result does not depend on rounding accumulated in long node loops.
template <typename Scalar = double>
class CompensatedSum {
public:
  void add(Scalar x) {
    const Scalar t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      carry_ += (sum_ - t) + x;
    else
      carry_ += (x - t) + sum_;
    sum_ = t;
  }
  Scalar value() const { return sum_ + carry_; }

private:
  Scalar sum_{0};
  Scalar carry_{0};
};

template <typename Scalar = double>
struct GaussRule {
  std::vector<Scalar> nodes;    // on [-1, 1], ascending
  std::vector<Scalar> weights;
};

// n-point Gauss-Legendre rule by Newton iteration on P_n.
template <typename Scalar = double>
GaussRule<Scalar> gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  GaussRule<Scalar> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar x = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      Scalar p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Scalar dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 4 * std::numeric_limits<Scalar>::epsilon()) break;
    }
    // recompute derivative at the converged node
    Scalar p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = (n == 1) ? Scalar(1) : n * (x * p1 - p0) / (x * x - 1);
    const Scalar w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0;
  return rule;
}

// Composite rule on [a, b]: `panels` equal panels with an `order`-point
// Gauss-Legendre rule on each.
struct CompositeRule {
  std::vector<double> x;
  std::vector<double> w;
};

CompositeRule composite_gauss(double a, double b, int panels, int order);

// Tensor-product composite Gauss rule over a box. `panels` applies per axis.
// Also accumulates the integral of |f|, which callers use as a scale.
struct IntegralEstimate {
  double value = 0;
  double abs_value = 0;
  int panels = 0;
};

template <class F>
IntegralEstimate tensor_integrate(F&& f, const Box& box, int panels, int order) {
  const Eigen::Index k = box.dim();
  IntegralEstimate out;
  out.panels = panels;
  if (k == 0) {
    const double v = f(Vector());
    out.value = v;
    out.abs_value = std::abs(v);
    return out;
  }
  std::vector<CompositeRule> axes;
  axes.reserve(k);
  for (Eigen::Index j = 0; j < k; ++j)
    axes.push_back(composite_gauss(box.lower[j], box.upper[j], panels, order));

  const std::size_t per_axis = axes[0].x.size();
  std::vector<std::size_t> idx(k, 0);
  CompensatedSum<> sum, abs_sum;
  Vector point(k);
  while (true) {
    double weight = 1;
    for (Eigen::Index j = 0; j < k; ++j) {
      point[j] = axes[j].x[idx[j]];
      weight *= axes[j].w[idx[j]];
    }
    const double v = f(point);
    sum.add(weight * v);
    abs_sum.add(weight * std::abs(v));

    Eigen::Index j = 0;
    while (j < k && ++idx[j] == per_axis) idx[j++] = 0;
    if (j == k) break;
  }
  out.value = sum.value();
  out.abs_value = abs_sum.value();
  return out;
}

// Doubles the panel count until two successive estimates agree to
// rtol * (integral of |f|). Returns the finer estimate.
template <class F>
IntegralEstimate integrate_refined(F&& f, const Box& box, int panels, int order, double rtol,
                                   int max_levels = 6) {
  IntegralEstimate coarse = tensor_integrate(f, box, panels, order);
  for (int level = 0; level < max_levels; ++level) {
    panels *= 2;
    IntegralEstimate fine = tensor_integrate(f, box, panels, order);
    const double scale = std::max(std::abs(fine.value), fine.abs_value);
    if (std::abs(fine.value - coarse.value) <= rtol * scale) return fine;
    coarse = fine;
  }
  std::ostringstream msg;
  msg << "quadrature did not converge after " << max_levels << " refinements (rtol " << rtol << ")";
  throw ConvergenceError(msg.str());
}

}  // namespace widthlab
