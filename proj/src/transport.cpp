#include "widthlab/transport.hpp"

#include "widthlab/parallel.hpp"
#include "widthlab/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace widthlab {

namespace {

constexpr int kOrder = 6;

int panels_for(const Box& box, double resolution) {
  const double width = (box.upper - box.lower).maxCoeff();
  return std::max(1, static_cast<int>(std::ceil(12.0 * width / (resolution * kOrder) - 1e-9)));
}

}  // namespace

TransportProblem family_problem(const ProblemFamily& family, const FlowField& field,
                                std::span<const int> theta) {
  if (theta.size() != family.size()) throw DomainError("theta has wrong length");
  std::vector<int> bits(theta.begin(), theta.end());
  TransportProblem prob{.field = field};
  prob.g_minus = [&family, bits](const Vector& x) { return family.g_minus_combination(bits, x); };
  prob.g_plus = [&family](const Vector& y) { return family.g_plus(y); };
  prob.g_plus_support = family.g_plus_support();
  prob.resolution = family.h();
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) prob.g_minus_supports.push_back(family.g_minus_support(i));
  return prob;
}

TransportProblem family_problem(const ProblemFamily& family, const FlowField& field,
                                std::size_t i) {
  if (i >= family.size()) throw DomainError("family index out of range");
  TransportProblem prob{.field = field};
  prob.g_minus = [&family, i](const Vector& x) { return family.g_minus(i, x); };
  prob.g_plus = [&family](const Vector& y) { return family.g_plus(y); };
  prob.g_plus_support = family.g_plus_support();
  prob.g_minus_supports = {family.g_minus_support(i)};
  prob.resolution = family.h();
  return prob;
}

PointFunction outflow_trace(const TransportProblem& prob, const Vector& mu) {
  return [&prob, mu](const Vector& y) { return prob.g_minus(backward_map(prob.field, mu, y)); };
}

std::vector<Box> qoi_domain(const TransportProblem& prob, const Vector& mu) {
  if (prob.g_minus_supports.empty()) return {prob.g_plus_support};
  // both built-in maps fix the faces, so B_mu is the lateral shift w -> w + mu
  const Vector shift = prob.field.base_parameter(mu);
  std::vector<Box> boxes;
  for (const Box& support : prob.g_minus_supports) {
    Box box = prob.g_plus_support;
    box.lower = box.lower.cwiseMax(support.lower - shift);
    box.upper = box.upper.cwiseMin(support.upper - shift);
    if (((box.upper - box.lower).array() > 0.0).all()) boxes.push_back(std::move(box));
  }
  return boxes;
}

double qoi(const TransportProblem& prob, const Vector& mu) {
  const ReferenceMap& map = prob.field.reference;
  const auto trace = outflow_trace(prob, mu);
  const auto integrand = [&](const Vector& w) {
    const Vector y = map(1.0, w);
    const double weight = prob.g_plus(y);
    if (weight == 0.0) return 0.0;
    return weight * trace(y);
  };
  CompensatedSum<> total;
  for (const Box& box : qoi_domain(prob, mu))
    total.add(integrate_refined(integrand, box, panels_for(box, prob.resolution), kOrder, prob.rtol).value);
  return total.value();
}

double qoi_with_source(const TransportProblem& prob, const Vector& mu) {
  const double base = qoi(prob, mu);
  if (!prob.source) return base;

  const ReferenceMap& map = prob.field.reference;
  const Vector mu_base = prob.field.base_parameter(mu);
  const CompositeRule time_rule = composite_gauss(0.0, 1.0, 8, 8);
  const auto integrand = [&](const Vector& w) {
    const Vector y = map(1.0, w);
    const double weight = prob.g_plus(y);
    if (weight == 0.0) return 0.0;
    // the characteristic through y starts at xi_-,mu(w) and reaches y at t = 1
    const Vector w_ref = outflow_coordinates(map, y);
    CompensatedSum<> along;
    for (std::size_t k = 0; k < time_rule.x.size(); ++k)
      along.add(time_rule.w[k] * prob.source(xi_mu(map, mu_base, time_rule.x[k], w_ref)));
    return weight * along.value();
  };
  const Box& box = prob.g_plus_support;
  const double correction =
      integrate_refined(integrand, box, panels_for(box, prob.resolution), kOrder, prob.rtol).value;
  return base + correction;
}

QoICurve qoi_curve(const TransportProblem& prob, const std::vector<Vector>& grid) {
  QoICurve curve;
  curve.params = grid;
  curve.values.assign(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t k) { curve.values[k] = qoi(prob, grid[k]); });
  return curve;
}

double sup_distance(const QoICurve& a, const QoICurve& b) {
  if (a.size() != b.size()) throw DomainError("sup_distance: curves live on different grids");
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a.values[k] - b.values[k]));
  return d;
}

double convolution_reference(const Function1D& g_minus, const Function1D& g_plus, double mu) {
  const double lo = std::max(g_plus.lower, g_minus.lower - mu);
  const double hi = std::min(g_plus.upper, g_minus.upper - mu);
  if (!(lo < hi)) return 0.0;
  const auto integrand = [&](const Vector& z) { return g_minus.value(z[0] + mu) * g_plus.value(z[0]); };
  Box box{Vector::Constant(1, lo), Vector::Constant(1, hi)};
  return integrate_refined(integrand, box, 8, 10, 1e-13, 8).value;
}

double riemann_recovery(double mu_true) {
  if (mu_true < -1.0 || mu_true > 1.0) throw DomainError("riemann_recovery: mu outside [-1, 1]");
  // int_{-1}^{1} g(x - mu t) dx is the length of [clamp(mu t), 1]
  const auto inner = [&](double t) { return 1.0 - std::clamp(mu_true * t, -1.0, 1.0); };
  const GaussRule<double> rule = gauss_legendre<double>(3);
  CompensatedSum<> outer;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k)
    outer.add(0.5 * rule.weights[k] * inner(0.5 * (rule.nodes[k] + 1.0)));
  return 2.0 - 2.0 * outer.value();
}

std::vector<Vector> uniform_grid_1d(double lower, double upper, std::size_t count) {
  std::vector<Vector> grid;
  grid.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double s = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    grid.push_back(Vector::Constant(1, lower + s * (upper - lower)));
  }
  return grid;
}

}  // namespace widthlab
