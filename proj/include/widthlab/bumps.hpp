#pragma once

#include "widthlab/common.hpp"
#include "widthlab/mollifier.hpp"
#include "widthlab/refdomain.hpp"

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace widthlab {

// Cartesian grid in (1/2)[-1, 1]^d_bar with spacing exactly 5h, extended by
// the fixed trailing components `tail`. Count is (floor(1/(5h)) + 1)^d_bar.
std::vector<Vector> param_grid(double h, int d_bar, const Vector& tail = Vector());

// A function on a boundary face, in lateral coordinates, that can supply
// partial derivatives. `patches` are disjoint boxes covering its support.
struct BoundaryFunction {
  int dim = 1;
  std::function<double(const Vector&, std::span<const int>)> derivative;
  std::vector<Box> patches;
  // characteristic length of the function; sets the base quadrature resolution
  double scale = 1.0;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// (sum_{|alpha| <= s} ||D^alpha f||_p^p)^(1/p) for p < inf, by tensor
// Gauss-Legendre with at least 12 nodes per `scale` per axis and refinement
// to a relative change below rtol. For p = inf the norm is
// max_{|alpha| <= s} ||D^alpha f||_inf from a grid search polished by
// coordinate-wise golden-section steps and confirmed on a doubled grid.
double sobolev_norm(const BoundaryFunction& f, int s, double p, double rtol = 1e-6);

struct FamilyOptions {
  double h = 0.1;
  int s_minus = 1;
  int s_plus = 1;
  double p = 2.0;
  int d_bar = 1;
  double margin = 1e-3;
  // Trailing parameter components held fixed (switched construction uses 5h).
  Vector tail;
};

// One adversarial instance: the outflow density g_+ = c_+ h^{s_+} psi_h o xi_+^{-1}
// and the inflow bumps g_-,i = c_- h^{s_-} psi_h^+ o F_{mu_i}.
class ProblemFamily {
public:
  const FlowField& field() const { return field_; }
  const FamilyOptions& options() const { return options_; }
  double h() const { return options_.h; }
  int s_minus() const { return options_.s_minus; }
  int s_plus() const { return options_.s_plus; }
  double p() const { return options_.p; }
  int lateral_dim() const { return field_.reference.lateral_dim(); }
  std::size_t size() const { return params_.size(); }
  const std::vector<Vector>& params() const { return params_; }
  double c_minus() const { return c_minus_; }
  double c_plus() const { return c_plus_; }

  // g_+ at a point y of the outflow face.
  double g_plus(const Vector& y) const;
  // g_-,i at a point x of the inflow face.
  double g_minus(std::size_t i, const Vector& x) const;
  // sum_i theta_i g_-,i
  double g_minus_combination(std::span<const int> theta, const Vector& x) const;

  // Lateral-coordinate versions with derivatives.
  BoundaryFunction g_plus_function() const;
  BoundaryFunction g_minus_function(std::span<const int> theta) const;

  // Support of g_+ in lateral outflow coordinates: the box around B_h.
  Box g_plus_support() const;
  // Support box of g_-,i in lateral inflow coordinates.
  Box g_minus_support(std::size_t i) const;

  // Measured norms, for checking the unit-ball constraints.
  double g_plus_norm() const;
  double g_minus_norm(std::span<const int> theta) const;

  // c_- c_+ h^{s_- + s_+} int (psi_h^+)^2, the diagonal value of the family.
  double diagonal_value() const;

private:
  friend ProblemFamily build_family(const FlowField& field, const FamilyOptions& options);
  ProblemFamily(FlowField field, FamilyOptions options);

  double psi_h_plus(const Vector& w_out) const;

  FlowField field_;
  FamilyOptions options_;
  Mollifier psi_;
  std::vector<Vector> params_;
  double c_minus_ = 1.0;
  double c_plus_ = 1.0;
};

// Builds the family on the 5h grid and normalizes c_-, c_+ so that the
// all-ones inflow combination and g_+ have measured norms 1 - margin.
// Requires h <= 1/10. The inflow parameters mu_i are (grid point, tail) for the
// base (d-1)-parameter flow.
ProblemFamily build_family(const FlowField& field, const FamilyOptions& options);

}  // namespace widthlab
