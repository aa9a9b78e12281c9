#include "widthlab/refdomain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace widthlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFaceTol = 1e-12;
constexpr double kBoxSlack = 1e-9;

void require_dim(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n)
    throw DomainError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                      std::to_string(v.size()));
}

void require_half_cube(const Vector& v, const char* what) {
  if (!in_cube(v, 0.5, 1e-12))
    throw DomainError(std::string(what) + " outside (1/2)[-1,1]^k");
}

}  // namespace

// ---------------------------------------------------------------------------
// ReferenceMap

ReferenceMap::ReferenceMap(int dim, MapKind kind, double amplitude)
    : dim_(dim), kind_(kind), amplitude_(amplitude) {
  if (dim < 2) throw DomainError("ReferenceMap: dimension must be at least 2");
}

ReferenceMap ReferenceMap::identity(int dim) { return ReferenceMap(dim, MapKind::identity, 0.0); }

ReferenceMap ReferenceMap::curved(int dim, double amplitude) {
  if (amplitude < 0.0 || amplitude > 0.2)
    throw DomainError("ReferenceMap: curvature amplitude must lie in [0, 0.2]");
  return ReferenceMap(dim, MapKind::curved, amplitude);
}

Vector ReferenceMap::lateral(double t, const Vector& w) const {
  if (kind_ == MapKind::identity) return w;
  const double bend = amplitude_ * t * (1.0 - t);
  return w + bend * (kPi * w.array()).sin().matrix();
}

Vector ReferenceMap::operator()(double t, const Vector& w) const {
  require_dim(w, lateral_dim(), "ReferenceMap");
  Vector x(dim_);
  x[0] = t;
  x.tail(lateral_dim()) = lateral(t, w);
  return x;
}

Matrix ReferenceMap::lateral_jacobian(double t, const Vector& w) const {
  Matrix jac = Matrix::Identity(lateral_dim(), lateral_dim());
  if (kind_ == MapKind::curved) {
    const double bend = amplitude_ * t * (1.0 - t);
    jac.diagonal().array() += bend * kPi * (kPi * w.array()).cos();
  }
  return jac;
}

Vector ReferenceMap::time_derivative(double t, const Vector& w) const {
  Vector d = Vector::Zero(dim_);
  d[0] = 1.0;
  if (kind_ == MapKind::curved)
    d.tail(lateral_dim()) = amplitude_ * (1.0 - 2.0 * t) * (kPi * w.array()).sin().matrix();
  return d;
}

std::pair<double, Vector> ReferenceMap::inverse(const Vector& x) const {
  require_dim(x, dim_, "ReferenceMap::inverse");
  const double t = x[0];
  const Vector target = x.tail(lateral_dim());
  if (kind_ == MapKind::identity) return {t, target};

  Vector v = target;
  Vector residual = lateral(t, v) - target;
  for (int iter = 0; iter < 50; ++iter) {
    if (residual.lpNorm<Eigen::Infinity>() < 1e-12) return {t, v};
    const Vector step = lateral_jacobian(t, v).partialPivLu().solve(residual);
    double damping = 1.0;
    for (int k = 0; k < 30; ++k) {
      const Vector trial = v - damping * step;
      const Vector trial_res = lateral(t, trial) - target;
      if (trial_res.norm() < residual.norm() || k == 29) {
        v = trial;
        residual = trial_res;
        break;
      }
      damping *= 0.5;
    }
  }
  if (residual.lpNorm<Eigen::Infinity>() < 1e-12) return {t, v};
  throw ConvergenceError("ReferenceMap::inverse: Newton did not converge");
}

// ---------------------------------------------------------------------------
// SwitchFunction

namespace {

std::vector<Vector> switch_centers(int D, double spacing) {
  const int per_axis = static_cast<int>(std::floor(1.0 / spacing + 1e-12)) + 1;
  std::vector<Vector> out;
  std::vector<int> idx(D, 0);
  while (true) {
    Vector c(D);
    for (int j = 0; j < D; ++j) c[j] = -0.5 + idx[j] * spacing;
    out.push_back(c);
    int j = 0;
    while (j < D && ++idx[j] == per_axis) idx[j++] = 0;
    if (j == D) break;
  }
  return out;
}

}  // namespace

SwitchFunction::SwitchFunction(int D, double h, int s_b, std::vector<int> bits, int max_centers)
    : dim_(D), h_(h), s_b_(s_b), bits_(std::move(bits)), phi_(D, std::max(6, s_b + 2)) {
  if (D < 1) throw DomainError("SwitchFunction: D must be at least 1");
  if (s_b < 1) throw DomainError("SwitchFunction: s_b must be a positive integer");
  if (h <= 0.0 || h > 0.1) throw DomainError("SwitchFunction: h must lie in (0, 1/10]");
  centers_ = switch_centers(D, 5.0 * radius());
  if (max_centers >= 0 && centers_.size() > static_cast<std::size_t>(max_centers))
    centers_.resize(max_centers);
  if (bits_.size() != centers_.size())
    throw DomainError("SwitchFunction: expected " + std::to_string(centers_.size()) +
                      " bits, got " + std::to_string(bits_.size()));
}

double SwitchFunction::radius() const { return std::pow(h_, 1.0 / s_b_); }

std::size_t SwitchFunction::natural_count(int D, double h, int s_b) {
  return switch_centers(D, 5.0 * std::pow(h, 1.0 / s_b)).size();
}

double SwitchFunction::operator()(const Vector& mu_hat) const {
  require_dim(mu_hat, dim_, "SwitchFunction");
  const double r = radius();
  double value = 0.0;
  for (std::size_t k = 0; k < centers_.size(); ++k) {
    if (!bits_[k]) continue;
    value += delta() * phi_((mu_hat - centers_[k]) / r);
  }
  return value;
}

double SwitchFunction::derivative(const Vector& mu_hat, std::span<const int> alpha) const {
  require_dim(mu_hat, dim_, "SwitchFunction");
  int order = 0;
  for (int a : alpha) order += a;
  const double r = radius();
  const double scale = delta() * std::pow(r, -order);
  double value = 0.0;
  for (std::size_t k = 0; k < centers_.size(); ++k) {
    if (!bits_[k]) continue;
    value += scale * phi_.derivative((mu_hat - centers_[k]) / r, alpha);
  }
  return value;
}

// ---------------------------------------------------------------------------
// FlowField

int FlowField::param_dim() const {
  const int lat = reference.lateral_dim();
  return switch_fn ? (lat - 1) + switch_fn->dim() : lat;
}

Vector FlowField::base_parameter(const Vector& mu) const {
  require_dim(mu, param_dim(), "flow parameter");
  if (!switch_fn) return mu;
  const int bar = reference.lateral_dim() - 1;
  const Vector mu_hat = mu.tail(switch_fn->dim());
  if (!in_cube(mu_hat, 1.0, 1e-12)) throw DomainError("mu_hat outside [-1,1]^D");
  Vector base(bar + 1);
  base.head(bar) = mu.head(bar);
  base[bar] = (*switch_fn)(mu_hat);
  return base;
}

FlowField make_flow(ReferenceMap map, int smoothness) {
  return FlowField{std::move(map), smoothness, std::nullopt};
}

FlowField make_switched_flow(ReferenceMap map, SwitchFunction sw, int smoothness) {
  if (map.dim() < 2) throw DomainError("switched flow needs d >= 2");
  return FlowField{std::move(map), smoothness, std::move(sw)};
}

// ---------------------------------------------------------------------------
// Parametric map and derived quantities

Vector xi_mu(const ReferenceMap& map, const Vector& mu, double t, const Vector& w) {
  require_dim(mu, map.lateral_dim(), "xi_mu: mu");
  require_dim(w, map.lateral_dim(), "xi_mu: w");
  require_half_cube(mu, "xi_mu: mu");
  require_half_cube(w, "xi_mu: w");
  if (t < -kFaceTol || t > 1.0 + kFaceTol) throw DomainError("xi_mu: t outside [0,1]");
  return map(t, w + (1.0 - t) * mu);
}

Vector xi_mu_time_derivative(const ReferenceMap& map, const Vector& mu, double t,
                             const Vector& w) {
  const Vector v = w + (1.0 - t) * mu;
  Vector d = map.time_derivative(t, v);
  d.tail(map.lateral_dim()) -= map.lateral_jacobian(t, v) * mu;
  return d;
}

std::pair<double, Vector> xi_mu_inverse(const ReferenceMap& map, const Vector& mu,
                                        const Vector& x) {
  require_dim(mu, map.lateral_dim(), "xi_mu_inverse: mu");
  auto [t, v] = map.inverse(x);
  return {t, v - (1.0 - t) * mu};
}

Vector flow_field(const FlowField& field, const Vector& mu, const Vector& x) {
  const ReferenceMap& map = field.reference;
  require_dim(x, map.dim(), "flow_field: x");
  if (x[0] < -kBoxSlack || x[0] > 1.0 + kBoxSlack || !in_cube(x.tail(map.lateral_dim()), 1.0, kBoxSlack))
    throw DomainError("flow_field: point outside the domain box");
  const Vector base = field.base_parameter(mu);
  Vector clamped = x;
  clamped[0] = std::clamp(x[0], 0.0, 1.0);
  clamped.tail(map.lateral_dim()) = x.tail(map.lateral_dim()).cwiseMax(-1.0).cwiseMin(1.0);
  auto [t, v] = map.inverse(clamped);
  v = v.cwiseMax(-1.0).cwiseMin(1.0);
  Vector d = map.time_derivative(t, v);
  d.tail(map.lateral_dim()) -= map.lateral_jacobian(t, v) * base;
  return d;
}

Vector switched_flow(const FlowField& field, const Vector& mu_bar, const Vector& mu_hat,
                     const Vector& x) {
  if (!field.switch_fn) throw DomainError("switched_flow: field has no switch function");
  Vector mu(mu_bar.size() + mu_hat.size());
  mu << mu_bar, mu_hat;
  return flow_field(field, mu, x);
}

Vector outflow_coordinates(const ReferenceMap& map, const Vector& y) {
  require_dim(y, map.dim(), "outflow point");
  if (std::abs(y[0] - 1.0) > kFaceTol) throw DomainError("point is not on the outflow face");
  Vector on_face = y;
  on_face[0] = 1.0;
  return map.inverse(on_face).second;
}

Vector inflow_coordinates(const ReferenceMap& map, const Vector& mu, const Vector& x) {
  require_dim(x, map.dim(), "inflow point");
  if (std::abs(x[0]) > kFaceTol) throw DomainError("point is not on the inflow face");
  Vector on_face = x;
  on_face[0] = 0.0;
  return map.inverse(on_face).second - mu;
}

Vector forward_map(const FlowField& field, const Vector& mu, const Vector& x) {
  const ReferenceMap& map = field.reference;
  const Vector base = field.base_parameter(mu);
  require_half_cube(base, "forward_map: mu");
  const Vector w = inflow_coordinates(map, base, x);
  if (!in_cube(w, 0.5, 1e-12)) throw DomainError("forward_map: point outside the inflow patch");
  return map(1.0, w);
}

Vector backward_map(const FlowField& field, const Vector& mu, const Vector& y) {
  const ReferenceMap& map = field.reference;
  const Vector base = field.base_parameter(mu);
  require_half_cube(base, "backward_map: mu");
  const Vector w = outflow_coordinates(map, y);
  if (!in_cube(w, 0.5, 1e-12)) throw DomainError("backward_map: point outside the outflow patch");
  return map(0.0, w + base);
}

Vector trace_characteristic(const FlowField& field, const Vector& mu, const Vector& x0,
                            int steps) {
  const ReferenceMap& map = field.reference;
  if (steps < 1) throw DomainError("trace_characteristic: steps must be positive");
  require_dim(x0, map.dim(), "trace_characteristic: x0");
  const Vector base = field.base_parameter(mu);
  const Vector w0 = inflow_coordinates(map, base, x0);
  if (!in_cube(w0, 0.5, 1e-12))
    throw DomainError("trace_characteristic: start point outside the inflow patch");

  const double dt = 1.0 / steps;
  auto rhs = [&](const Vector& x) {
    if (x[0] < -kBoxSlack || !in_cube(x.tail(map.lateral_dim()), 1.0, kBoxSlack))
      throw IntegrationError("characteristic left the domain before reaching the outflow face");
    return flow_field(field, mu, x);
  };

  Vector x = x0;
  Vector bx = rhs(x);
  const int max_steps = 4 * steps + 16;
  for (int n = 0; n < max_steps; ++n) {
    const Vector k1 = bx;
    const Vector k2 = rhs(x + 0.5 * dt * k1);
    const Vector k3 = rhs(x + 0.5 * dt * k2);
    const Vector k4 = rhs(x + dt * k3);
    const Vector next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (next[0] >= 1.0 - 1e-13) {
      if (std::abs(next[0] - 1.0) <= 1e-13) {
        Vector out = next;
        out[0] = 1.0;
        return out;
      }
      const Vector b_next = rhs(next);
      // cubic Hermite between (x, bx) and (next, b_next); solve first component = 1
      auto hermite = [&](double s, Eigen::Index j) {
        const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
        const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
        return h00 * x[j] + h10 * dt * bx[j] + h01 * next[j] + h11 * dt * b_next[j];
      };
      auto hermite_ds = [&](double s) {
        const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
        const double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
        return d00 * x[0] + d10 * dt * bx[0] + d01 * next[0] + d11 * dt * b_next[0];
      };
      double s = (1.0 - x[0]) / (next[0] - x[0]);
      for (int it = 0; it < 30; ++it) {
        const double f = hermite(s, 0) - 1.0;
        if (std::abs(f) < 1e-15) break;
        s -= f / hermite_ds(s);
      }
      Vector out(map.dim());
      for (Eigen::Index j = 0; j < out.size(); ++j) out[j] = hermite(s, j);
      out[0] = 1.0;
      return out;
    }
    x = next;
    bx = rhs(x);
  }
  throw IntegrationError("characteristic did not reach the outflow face");
}

}  // namespace widthlab
