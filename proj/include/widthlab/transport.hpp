#pragma once

#include "widthlab/bumps.hpp"
#include "widthlab/common.hpp"
#include "widthlab/refdomain.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace widthlab {

using PointFunction = std::function<double(const Vector&)>;

// b_mu . grad u = f in Omega, u = g_- on the inflow face, with the quantity
// of interest q(mu) = int_{Gamma_+} g_+ u_mu.
struct TransportProblem {
  FlowField field;
  PointFunction g_minus;         // on the inflow face, physical coordinates
  PointFunction g_plus;          // on the outflow face, physical coordinates
  Box g_plus_support;            // lateral outflow coordinates
  // Pairwise disjoint boxes in lateral inflow reference coordinates covering
  // supp g_-. Empty means unknown. Lets the QoI integrate over the overlaps
  // with supp g_+ only.
  std::vector<Box> g_minus_supports;
  PointFunction source;          // optional volumetric source; empty means zero
  double resolution = 0.1;       // length scale of g_+; quadrature spacing <= resolution / 12
  double rtol = 1e-8;
};

// The family's g_+ and the combination sum_i theta_i g_-,i on `field`.
TransportProblem family_problem(const ProblemFamily& family, const FlowField& field,
                                std::span<const int> theta);
// Same, with the single bump g_-,i.
TransportProblem family_problem(const ProblemFamily& family, const FlowField& field,
                                std::size_t i);

// y -> g_-(B_mu(y)) on the outflow face.
PointFunction outflow_trace(const TransportProblem& prob, const Vector& mu);

// Integration boxes in lateral outflow coordinates: supp g_+ intersected with
// the preimages of g_minus_supports under B_mu, dropping empty overlaps.
std::vector<Box> qoi_domain(const TransportProblem& prob, const Vector& mu);

// Characteristic QoI by refined tensor Gauss-Legendre over supp(g_+).
double qoi(const TransportProblem& prob, const Vector& mu);

// q for the problem with its volumetric source: the zero-source value plus
// int g_+ u^f, u^f(y) = int_0^1 f(X_mu(t; B_mu(y))) dt (unit transit time).
double qoi_with_source(const TransportProblem& prob, const Vector& mu);

struct QoICurve {
  std::vector<Vector> params;
  std::vector<double> values;
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return values.size(); }
};

// q over a parameter grid, in grid order. Parallel over grid points.
QoICurve qoi_curve(const TransportProblem& prob, const std::vector<Vector>& grid);

// sup over grid points of |a - b|; the curves must share a grid.
double sup_distance(const QoICurve& a, const QoICurve& b);

// int g_-(z + mu) g_+(z) dz over the intersection of the two supports, for
// the shear flow with d = 2.
struct Function1D {
  std::function<double(double)> value;
  double lower;
  double upper;
};
double convolution_reference(const Function1D& g_minus, const Function1D& g_plus, double mu);

// mu = 2 - 2 int_0^1 int_{-1}^1 g(x - mu t) dx dt for the Heaviside g.
double riemann_recovery(double mu_true);

// Uniform grid of `count` points on [lower, upper], as length-1 vectors.
std::vector<Vector> uniform_grid_1d(double lower, double upper, std::size_t count);

}  // namespace widthlab
