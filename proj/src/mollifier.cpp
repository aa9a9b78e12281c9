#include "widthlab/mollifier.hpp"

#include <cmath>
#include <numeric>

namespace widthlab {

namespace {

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Above this v, P_k(v) exp(1 - v) is below 1e-250 for every order we allow.
constexpr double kVanishing = 700.0;

}  // namespace

Mollifier::Mollifier(int dim, int max_order) : dim_(dim), max_order_(max_order) {
  if (dim < 1) throw DomainError("Mollifier: dimension must be at least 1");
  if (max_order < 0) throw DomainError("Mollifier: negative max order");
  poly_.resize(max_order + 1);
  poly_[0] = {1.0};
  for (int k = 0; k < max_order; ++k) {
    const auto& p = poly_[k];
    // q = P_k' - P_k
    std::vector<double> q(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      q[i] -= p[i];
      if (i + 1 < p.size()) q[i] += (i + 1) * p[i + 1];
    }
    // multiply by v^2
    std::vector<double> next(q.size() + 2, 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) next[i + 2] = q[i];
    poly_[k + 1] = std::move(next);
  }
}

double Mollifier::radial_derivative(double u, int k) const {
  if (u >= 1.0) return 0.0;
  const double v = 1.0 / (1.0 - u);
  if (v > kVanishing) return 0.0;
  const auto& p = poly_[k];
  double acc = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * v + p[i];
  return acc * std::exp(1.0 - v);
}

double Mollifier::operator()(const Vector& z) const {
  if (z.size() != dim_) throw DomainError("Mollifier: argument has wrong dimension");
  return radial_derivative(z.squaredNorm(), 0);
}

double Mollifier::derivative(const Vector& z, std::span<const int> alpha) const {
  if (z.size() != dim_ || static_cast<int>(alpha.size()) != dim_)
    throw DomainError("Mollifier: argument has wrong dimension");
  const int order = std::accumulate(alpha.begin(), alpha.end(), 0);
  if (order > max_order_)
    throw DomainError("Mollifier: derivative order " + std::to_string(order) +
                      " exceeds configured maximum " + std::to_string(max_order_));
  const double u = z.squaredNorm();
  if (u >= 1.0) return 0.0;
  if (order == 0) return radial_derivative(u, 0);

  // Enumerate (m_1, ..., m_dim) with 0 <= m_j <= alpha_j / 2.
  std::vector<int> m(dim_, 0);
  double total = 0.0;
  while (true) {
    double coeff = 1.0;
    int reduction = 0;
    for (int j = 0; j < dim_; ++j) {
      const int a = alpha[j];
      const int mj = m[j];
      coeff *= factorial(a) / (factorial(mj) * factorial(a - 2 * mj));
      coeff *= std::pow(2.0 * z[j], a - 2 * mj);
      reduction += mj;
    }
    if (coeff != 0.0) total += coeff * radial_derivative(u, order - reduction);

    int j = 0;
    while (j < dim_) {
      if (++m[j] <= alpha[j] / 2) break;
      m[j++] = 0;
    }
    if (j == dim_) break;
  }
  return total;
}

std::vector<std::vector<int>> multi_indices(int dim, int order) {
  std::vector<std::vector<int>> out;
  std::vector<int> alpha(dim, 0);
  // recursive fill of compositions of `order` into `dim` parts
  auto fill = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == dim - 1) {
      alpha[pos] = remaining;
      out.push_back(alpha);
      return;
    }
    for (int a = remaining; a >= 0; --a) {
      alpha[pos] = a;
      self(self, pos + 1, remaining - a);
    }
  };
  if (dim > 0) fill(fill, 0, order);
  return out;
}

}  // namespace widthlab
