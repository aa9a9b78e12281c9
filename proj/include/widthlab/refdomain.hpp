#pragma once

#include "widthlab/common.hpp"
#include "widthlab/mollifier.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace widthlab {

// Reference coordinates are (t, w) with t in [0, 1] and w in [-1, 1]^(d-1).
// The physical domain is the box Omega = [0, 1] x [-1, 1]^(d-1); the inflow
// face is t = 0 and the outflow face is t = 1.
enum class MapKind { identity, curved };

// The map Xi(t, w) = (t, w + a t (1 - t) s(w)) with s_j(w) = sin(pi w_j).
// a = 0 is the identity. Both kinds fix the faces t = 0 and t = 1 pointwise,
// so the boundary parametrizations xi_-, xi_+ are the identity in lateral
// coordinates. One-to-one for a < 4 / pi; we allow a <= 0.2.
class ReferenceMap {
public:
  static ReferenceMap identity(int dim);
  static ReferenceMap curved(int dim, double amplitude);

  int dim() const { return dim_; }
  int lateral_dim() const { return dim_ - 1; }
  MapKind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }

  // Xi(t, w) as a point of R^d.
  Vector operator()(double t, const Vector& w) const;
  // Lateral part of Xi(t, w).
  Vector lateral(double t, const Vector& w) const;
  // d/dw of the lateral part.
  Matrix lateral_jacobian(double t, const Vector& w) const;
  // d/dt Xi(t, w).
  Vector time_derivative(double t, const Vector& w) const;

  // Xi^{-1}(x) = (t, w). Damped Newton on the lateral equation, tolerance
  // 1e-12, at most 50 iterations. Throws ConvergenceError otherwise.
  std::pair<double, Vector> inverse(const Vector& x) const;

private:
  ReferenceMap(int dim, MapKind kind, double amplitude);

  int dim_;
  MapKind kind_;
  double amplitude_;
};

// Scaled bumps phi_k(mu_hat) = delta * phi(h^(-1/s_b) (mu_hat - mu_hat_k))
// with delta = 5h, summed over the active bits.
class SwitchFunction {
public:
  // Centers on the Cartesian grid in (1/2)[-1, 1]^D with spacing
  // 5 h^(1/s_b), truncated to the first `max_centers` points.
  SwitchFunction(int D, double h, int s_b, std::vector<int> bits, int max_centers = -1);

  int dim() const { return dim_; }
  double h() const { return h_; }
  double delta() const { return 5.0 * h_; }
  int smoothness() const { return s_b_; }
  double radius() const;  // h^(1/s_b), support radius of each phi_k
  const std::vector<Vector>& centers() const { return centers_; }
  const std::vector<int>& bits() const { return bits_; }
  std::size_t size() const { return centers_.size(); }

  // vartheta(mu_hat)
  double operator()(const Vector& mu_hat) const;
  // D^alpha vartheta(mu_hat)
  double derivative(const Vector& mu_hat, std::span<const int> alpha) const;

  // Center count for (D, h, s_b) before truncation.
  static std::size_t natural_count(int D, double h, int s_b);

private:
  int dim_;
  double h_;
  int s_b_;
  std::vector<Vector> centers_;
  std::vector<int> bits_;
  Mollifier phi_;
};

// Parametric flow b_mu = (d/dt Xi_mu) o Xi_mu^{-1}. In switched mode the
// parameter is (mu_bar, mu_hat) of length (d - 2) + D and the base flow is
// evaluated at (mu_bar, vartheta(mu_hat)).
struct FlowField {
  ReferenceMap reference;
  int smoothness = 1;
  std::optional<SwitchFunction> switch_fn;

  int param_dim() const;
  // Parameter of the underlying (d-1)-parameter flow.
  Vector base_parameter(const Vector& mu) const;
};

FlowField make_flow(ReferenceMap map, int smoothness = 1);
FlowField make_switched_flow(ReferenceMap map, SwitchFunction sw, int smoothness = 1);

// Xi_mu(t, w) = Xi(t, w + (1 - t) mu) for w, mu in (1/2)[-1, 1]^(d-1).
Vector xi_mu(const ReferenceMap& map, const Vector& mu, double t, const Vector& w);
// d/dt Xi_mu(t, w).
Vector xi_mu_time_derivative(const ReferenceMap& map, const Vector& mu, double t,
                             const Vector& w);
// (t, w) with Xi_mu(t, w) = x.
std::pair<double, Vector> xi_mu_inverse(const ReferenceMap& map, const Vector& mu,
                                        const Vector& x);

// b_mu(x). Inside Omega but outside the range of Xi_mu the same formula is
// evaluated at reference coordinates clamped to the box. Points outside
// Omega are rejected.
Vector flow_field(const FlowField& field, const Vector& mu, const Vector& x);

// Base flow at (mu_bar, vartheta(mu_hat)).
Vector switched_flow(const FlowField& field, const Vector& mu_bar, const Vector& mu_hat,
                     const Vector& x);

// F_mu = xi_+ o xi_-,mu^{-1} and B_mu = xi_-,mu o xi_+^{-1}, restricted to the
// patches built on (1/2)[-1, 1]^(d-1).
Vector forward_map(const FlowField& field, const Vector& mu, const Vector& x);
Vector backward_map(const FlowField& field, const Vector& mu, const Vector& y);

// Classical RK4 on dX/dt = b_mu(X) from an inflow point until the outflow
// face is crossed; the last step is cut back to the face by cubic Hermite
// interpolation. Throws IntegrationError if the trajectory leaves Omega.
Vector trace_characteristic(const FlowField& field, const Vector& mu, const Vector& x0,
                            int steps);

// Lateral reference coordinate of a point on the outflow face, xi_+^{-1}(y).
Vector outflow_coordinates(const ReferenceMap& map, const Vector& y);
// Lateral reference coordinate of an inflow point for parameter mu,
// xi_-,mu^{-1}(x). No patch check.
Vector inflow_coordinates(const ReferenceMap& map, const Vector& mu, const Vector& x);

}  // namespace widthlab
