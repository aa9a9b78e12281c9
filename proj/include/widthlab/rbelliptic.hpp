#pragma once

#include "widthlab/common.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <vector>

namespace widthlab {

using SparseMatrix = Eigen::SparseMatrix<double>;
using ScalarFunction = std::function<double(double)>;

// -(a_mu u')' = f on (0, 1), u(0) = u(1) = 0, with
// a_mu(x) = abar(x) + sum_q mu_q phi_q(x), mu in [-1, 1]^Q, and the
// quantity of interest l(u) = int l(x) u(x) dx.
struct AffineEllipticProblem {
  int elements = 512;
  ScalarFunction mean_coefficient;
  std::vector<ScalarFunction> coefficients;
  ScalarFunction rhs;
  ScalarFunction functional;

  int Q() const { return static_cast<int>(coefficients.size()); }
  int interior_nodes() const { return elements - 1; }
  double mesh_size() const { return 1.0 / elements; }
};

// abar = 2.5, phi_1 = (1/2) sin(2 pi x), f = 1, l = mean over (0, 1).
AffineEllipticProblem default_elliptic_problem(int elements = 512);

// P1 Galerkin operators. stiffness[0] belongs to abar (theta_0 = 1),
// stiffness[q] to phi_q (theta_q = mu_q).
struct AssembledProblem {
  AffineEllipticProblem problem;
  std::vector<SparseMatrix> stiffness;
  Vector load;
  Vector functional;
  Vector nodes;  // interior node coordinates

  int terms() const { return static_cast<int>(stiffness.size()); }
  int size() const { return static_cast<int>(load.size()); }
};

AssembledProblem assemble(const AffineEllipticProblem& problem);

// Stiffness matrix of a_mu assembled directly from the coefficient, not
// through the affine sum.
SparseMatrix assemble_direct(const AffineEllipticProblem& problem, const Vector& mu);

// Checks a_mu >= 1 at every quadrature point for the corners of the box.
bool is_elliptic(const AffineEllipticProblem& problem);

// min and max of a_mu / abar over quadrature points.
std::pair<double, double> coefficient_ratio_bounds(const AffineEllipticProblem& problem, const Vector& mu);

// Full-order solution at the interior nodes.
Vector hifi_solve(const AssembledProblem& assembled, const Vector& mu);

double energy_norm(const AssembledProblem& assembled, const Vector& v);

struct GreedyResult {
  Matrix basis;                     // N x m, orthonormal in the mu = 0 energy inner product
  std::vector<double> max_errors;   // max training error before each addition
  std::vector<std::size_t> picked;  // training indices in selection order
  double final_error = 0.0;         // max training error with the full basis
};

// Strong greedy with exact best-approximation errors in the energy norm at
// mu = 0. Stops early when the next snapshot is numerically dependent
// (projection residual below 1e-13 relative to the largest snapshot).
GreedyResult greedy_basis(const AssembledProblem& assembled, const std::vector<Vector>& training,
                          int m);

// Everything the online phase needs, flattened: terms * m^2 + 2m reals.
struct OnlineData {
  int m = 0;
  std::vector<Matrix> matrices;  // matrices[0] for theta_0 = 1, then theta_q = mu_q
  Vector f;
  Vector l;

  std::size_t n_store() const;
  std::vector<double> flat() const;
  static OnlineData from_flat(int terms, int m, const std::vector<double>& data);
};

std::size_t stored_real_count(int terms, int m);

OnlineData offline(const AssembledProblem& assembled, const Matrix& basis);

// l^T (sum_q theta_q(mu) A_q)^{-1} f. Throws DomainError when the reduced
// matrix is not positive definite.
double online(const OnlineData& data, const Vector& mu);

// l(V c) with (V^T K_mu V) c = V^T F and K_mu assembled directly.
double galerkin_in_span(const AssembledProblem& assembled, const Matrix& basis, const Vector& mu);

// Reduced solution lifted back to nodal values.
Vector reduced_solution(const AssembledProblem& assembled, const Matrix& basis, const Vector& mu);

struct SvdDecay {
  Vector singular_values;
  std::vector<double> tail;  // tail[n] = (sum_{k > n} sigma_k^2)^{1/2}
  double exponent = 0.0;     // log-log slope of tail over [n_lo, n_hi]
};

// Singular values of the L2-weighted snapshot matrix [g(x_j - mu_i)] for the
// Heaviside g, x in [-1, 1] (midpoint cells) and mu in [-1, 1].
SvdDecay snapshot_svd_decay(int mu_points = 512, int x_points = 2048, int n_lo = 4, int n_hi = 64);

// Same decay analysis for an arbitrary weighted snapshot matrix.
SvdDecay svd_decay(const Matrix& weighted_snapshots, int n_lo, int n_hi);

}  // namespace widthlab
