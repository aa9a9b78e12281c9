#include "widthlab/bumps.hpp"

#include "widthlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace widthlab {

std::vector<Vector> param_grid(double h, int d_bar, const Vector& tail) {
  if (h <= 0.0 || h > 0.1 + 1e-15) throw DomainError("param_grid: h must lie in (0, 1/10]");
  if (d_bar < 0) throw DomainError("param_grid: negative dimension");
  const double spacing = 5.0 * h;
  const int per_axis = static_cast<int>(std::floor(1.0 / spacing + 1e-9)) + 1;
  std::vector<Vector> out;
  std::vector<int> idx(d_bar, 0);
  while (true) {
    Vector mu(d_bar + tail.size());
    for (int j = 0; j < d_bar; ++j) mu[j] = -0.5 + idx[j] * spacing;
    mu.tail(tail.size()) = tail;
    out.push_back(std::move(mu));
    int j = 0;
    while (j < d_bar && ++idx[j] == per_axis) idx[j++] = 0;
    if (j == d_bar) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sobolev norms

namespace {

constexpr int kOrder = 6;

int base_panels(const Box& box, double scale) {
  const double width = (box.upper - box.lower).maxCoeff();
  // at least 12 nodes per `scale` along the widest axis
  return std::max(1, static_cast<int>(std::ceil(12.0 * width / (scale * kOrder) - 1e-9)));
}

std::vector<std::vector<int>> all_indices_up_to(int dim, int s) {
  std::vector<std::vector<int>> out;
  for (int order = 0; order <= s; ++order)
    for (auto& a : multi_indices(dim, order)) out.push_back(std::move(a));
  return out;
}

// Maximize |g| near `start` by coordinate-wise golden-section sweeps.
double polish_max(const std::function<double(const Vector&)>& g, Vector x, double reach,
                  const Box& box) {
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double best = std::abs(g(x));
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      double a = std::max(box.lower[j], x[j] - reach);
      double b = std::min(box.upper[j], x[j] + reach);
      auto eval = [&](double c) {
        Vector y = x;
        y[j] = c;
        return std::abs(g(y));
      };
      double c = b - golden * (b - a), d = a + golden * (b - a);
      double fc = eval(c), fd = eval(d);
      for (int it = 0; it < 60 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
        if (fc > fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - golden * (b - a);
          fc = eval(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + golden * (b - a);
          fd = eval(d);
        }
      }
      const double mid = 0.5 * (a + b);
      const double fm = eval(mid);
      if (fm > best) {
        best = fm;
        x[j] = mid;
      }
    }
  }
  return best;
}

double grid_max(const std::function<double(const Vector&)>& g, const Box& box, int n) {
  const Eigen::Index k = box.dim();
  std::vector<int> idx(k, 0);
  Vector point(k), best_point(k);
  double best = -1.0;
  const Vector step = (box.upper - box.lower) / n;
  while (true) {
    for (Eigen::Index j = 0; j < k; ++j) point[j] = box.lower[j] + idx[j] * step[j];
    const double v = std::abs(g(point));
    if (v > best) {
      best = v;
      best_point = point;
    }
    Eigen::Index j = 0;
    while (j < k && ++idx[j] == n + 1) idx[j++] = 0;
    if (j == k) break;
  }
  return std::max(best, polish_max(g, best_point, step.maxCoeff(), box));
}

}  // namespace

double sobolev_norm(const BoundaryFunction& f, int s, double p, double rtol) {
  if (s < 0) throw DomainError("sobolev_norm: negative smoothness");
  if (!(p >= 1.0)) throw DomainError("sobolev_norm: p must be at least 1");
  const auto indices = all_indices_up_to(f.dim, s);

  if (std::isinf(p)) {
    double norm = 0.0;
    for (const auto& alpha : indices) {
      const std::function<double(const Vector&)> g = [&](const Vector& z) {
        return f.derivative(z, alpha);
      };
      double sup = 0.0;
      for (const Box& patch : f.patches) {
        int n = std::max(8, 2 * base_panels(patch, f.scale) * kOrder);
        double coarse = grid_max(g, patch, n);
        bool converged = false;
        for (int level = 0; level < 4 && !converged; ++level) {
          n *= 2;
          const double fine = grid_max(g, patch, n);
          converged = std::abs(fine - coarse) <= rtol * std::max(fine, 1e-300);
          coarse = std::max(coarse, fine);
        }
        if (!converged) throw ConvergenceError("sobolev_norm: sup-norm search did not settle");
        sup = std::max(sup, coarse);
      }
      norm = std::max(norm, sup);
    }
    return norm;
  }

  const auto integrand = [&](const Vector& z) {
    double acc = 0.0;
    for (const auto& alpha : indices) acc += std::pow(std::abs(f.derivative(z, alpha)), p);
    return acc;
  };
  CompensatedSum<> total;
  for (const Box& patch : f.patches)
    total.add(integrate_refined(integrand, patch, base_panels(patch, f.scale), kOrder, rtol).value);
  return std::pow(total.value(), 1.0 / p);
}

// ---------------------------------------------------------------------------
// ProblemFamily

ProblemFamily::ProblemFamily(FlowField field, FamilyOptions options)
    : field_(std::move(field)),
      options_(std::move(options)),
      psi_(field_.reference.lateral_dim(), std::max(6, std::max(options_.s_minus, options_.s_plus) + 2)) {}

double ProblemFamily::psi_h_plus(const Vector& w_out) const {
  if (!in_cube(w_out, h(), 0.0)) return 0.0;
  return psi_(w_out / h());
}

double ProblemFamily::g_plus(const Vector& y) const {
  const Vector w = outflow_coordinates(field_.reference, y);
  return c_plus_ * std::pow(h(), s_plus()) * psi_h_plus(w);
}

double ProblemFamily::g_minus(std::size_t i, const Vector& x) const {
  const Vector w = inflow_coordinates(field_.reference, params_[i], x);
  if (!in_cube(w, h(), 0.0)) return 0.0;
  const Vector y = forward_map(field_, params_[i], x);
  return c_minus_ * std::pow(h(), s_minus()) * psi_h_plus(outflow_coordinates(field_.reference, y));
}

double ProblemFamily::g_minus_combination(std::span<const int> theta, const Vector& x) const {
  if (theta.size() != params_.size()) throw DomainError("theta has wrong length");
  double value = 0.0;
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (theta[i]) value += g_minus(i, x);
  return value;
}

Box ProblemFamily::g_plus_support() const {
  const int k = lateral_dim();
  return Box{Vector::Constant(k, -h()), Vector::Constant(k, h())};
}

Box ProblemFamily::g_minus_support(std::size_t i) const {
  return Box{params_[i].array() - h(), params_[i].array() + h()};
}

// The built-in maps fix both faces, so F_mu restricted to lateral
// coordinates is the translation z -> z - mu and derivatives of the pullback
// are derivatives of psi_h.
BoundaryFunction ProblemFamily::g_plus_function() const {
  BoundaryFunction f;
  f.dim = lateral_dim();
  f.scale = h();
  f.patches = {g_plus_support()};
  f.derivative = [this](const Vector& z, std::span<const int> alpha) {
    int order = 0;
    for (int a : alpha) order += a;
    if (!in_cube(z, h(), 0.0)) return 0.0;
    return c_plus_ * std::pow(h(), s_plus() - order) * psi_.derivative(z / h(), alpha);
  };
  return f;
}

BoundaryFunction ProblemFamily::g_minus_function(std::span<const int> theta) const {
  if (theta.size() != params_.size()) throw DomainError("theta has wrong length");
  BoundaryFunction f;
  f.dim = lateral_dim();
  f.scale = h();
  std::vector<int> active(theta.begin(), theta.end());
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (active[i]) f.patches.push_back(g_minus_support(i));
  f.derivative = [this, active](const Vector& z, std::span<const int> alpha) {
    int order = 0;
    for (int a : alpha) order += a;
    double value = 0.0;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (!active[i]) continue;
      const Vector local = z - params_[i];
      if (!in_cube(local, h(), 0.0)) continue;
      value += c_minus_ * std::pow(h(), s_minus() - order) * psi_.derivative(local / h(), alpha);
    }
    return value;
  };
  return f;
}

double ProblemFamily::g_plus_norm() const { return sobolev_norm(g_plus_function(), s_plus(), kInfinity); }

double ProblemFamily::g_minus_norm(std::span<const int> theta) const {
  return sobolev_norm(g_minus_function(theta), s_minus(), p());
}

double ProblemFamily::diagonal_value() const {
  const auto square = [this](const Vector& w) {
    const double v = psi_h_plus(w);
    return v * v;
  };
  const Box box = g_plus_support();
  const double integral = integrate_refined(square, box, 4, kOrder, 1e-12).value;
  return c_minus_ * c_plus_ * std::pow(h(), s_minus() + s_plus()) * integral;
}

ProblemFamily build_family(const FlowField& field, const FamilyOptions& options) {
  if (options.h <= 0.0 || options.h > 0.1 + 1e-15)
    throw DomainError("build_family: h must lie in (0, 1/10]");
  if (options.s_minus < 0 || options.s_plus < 0)
    throw DomainError("build_family: smoothness orders must be non-negative integers");
  if (!(options.p >= 1.0) || std::isinf(options.p))
    throw DomainError("build_family: p must lie in [1, inf)");
  const int lat = field.reference.lateral_dim();
  if (options.d_bar + options.tail.size() != lat)
    throw DomainError("build_family: d_bar plus fixed components must equal d - 1");

  // Pullbacks always use the underlying (d-1)-parameter flow.
  ProblemFamily family(make_flow(field.reference, field.smoothness), options);
  family.params_ = param_grid(options.h, options.d_bar, options.tail);
  for (const Vector& mu : family.params_)
    if (!in_cube(mu, 0.5, 1e-12)) throw DomainError("build_family: parameter outside (1/2)[-1,1]^(d-1)");

  family.c_plus_ = 1.0;
  family.c_minus_ = 1.0;
  const double plus = family.g_plus_norm();
  const std::vector<int> ones(family.params_.size(), 1);
  const double minus = family.g_minus_norm(ones);
  family.c_plus_ = (1.0 - options.margin) / plus;
  family.c_minus_ = (1.0 - options.margin) / minus;
  return family;
}

}  // namespace widthlab
