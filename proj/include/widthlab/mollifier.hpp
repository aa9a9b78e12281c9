#pragma once

#include "widthlab/common.hpp"

#include <span>
#include <vector>

namespace widthlab {

// The standard C-infinity bump psi(z) = exp(1 - 1/(1 - |z|^2)) on |z| < 1,
// zero outside, with psi(0) = 1.
//
// Derivatives are exact: psi = F(|z|^2) with F(u) = exp(1 - v), v = 1/(1-u),
// and F^(k)(u) = P_k(v) F(u) where P_0 = 1, P_{k+1} = v^2 (P_k' - P_k).
// Mixed partials of F(sum z_j^2) follow from the one-dimensional identity
//   d^a/dx^a f(x^2) = sum_m a! / (m! (a-2m)!) (2x)^(a-2m) f^(a-m)(x^2)
// applied per axis, since every partial of F with respect to z_j^2 is the
// same ordinary derivative of F.
class Mollifier {
public:
  explicit Mollifier(int dim, int max_order = 6);

  int dim() const { return dim_; }
  int max_order() const { return max_order_; }

  double operator()(const Vector& z) const;

  // D^alpha psi(z). Throws DomainError if |alpha| exceeds max_order().
  double derivative(const Vector& z, std::span<const int> alpha) const;

  // F^(k)(u) for u = |z|^2 < 1; zero for u >= 1.
  double radial_derivative(double u, int k) const;

private:
  int dim_;
  int max_order_;
  std::vector<std::vector<double>> poly_;  // coefficients of P_k in v, ascending
};

// All multi-indices of the given length with |alpha| == order, in
// descending lexicographic order ((2,0), (1,1), (0,2) for dim 2).
std::vector<std::vector<int>> multi_indices(int dim, int order);

}  // namespace widthlab
