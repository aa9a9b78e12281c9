#include "widthlab/rbelliptic.hpp"

#include "widthlab/parallel.hpp"
#include "widthlab/quadrature.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace widthlab {

namespace {

constexpr int kElementOrder = 4;

const GaussRule<double>& element_rule() {
  static const GaussRule<double> rule = gauss_legendre<double>(kElementOrder);
  return rule;
}

// Tridiagonal P1 stiffness for a coefficient sampled at element quadrature points.
SparseMatrix stiffness_from(const AffineEllipticProblem& problem, const ScalarFunction& coeff) {
  const int n_el = problem.elements;
  const int n = problem.interior_nodes();
  const double h = problem.mesh_size();
  const auto& rule = element_rule();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(4 * n_el);
  for (int e = 0; e < n_el; ++e) {
    const double left = e * h;
    double integral = 0.0;
    for (int q = 0; q < kElementOrder; ++q)
      integral += 0.5 * h * rule.weights[q] * coeff(left + 0.5 * h * (rule.nodes[q] + 1.0));
    const double k = integral / (h * h);
    // local nodes e (left) and e+1 (right); interior index = node - 1
    const int a = e - 1, b = e;
    if (a >= 0) triplets.emplace_back(a, a, k);
    if (b < n) triplets.emplace_back(b, b, k);
    if (a >= 0 && b < n) {
      triplets.emplace_back(a, b, -k);
      triplets.emplace_back(b, a, -k);
    }
  }
  SparseMatrix mat(n, n);
  mat.setFromTriplets(triplets.begin(), triplets.end());
  return mat;
}

Vector load_from(const AffineEllipticProblem& problem, const ScalarFunction& density) {
  const int n_el = problem.elements;
  const int n = problem.interior_nodes();
  const double h = problem.mesh_size();
  const auto& rule = element_rule();
  Vector load = Vector::Zero(n);
  for (int e = 0; e < n_el; ++e) {
    const double left = e * h;
    for (int q = 0; q < kElementOrder; ++q) {
      const double s = 0.5 * (rule.nodes[q] + 1.0);
      const double w = 0.5 * h * rule.weights[q] * density(left + s * h);
      if (e - 1 >= 0) load[e - 1] += w * (1.0 - s);
      if (e < n) load[e] += w * s;
    }
  }
  return load;
}

ScalarFunction coefficient_at(const AffineEllipticProblem& problem, const Vector& mu) {
  return [&problem, mu](double x) {
    double a = problem.mean_coefficient(x);
    for (int q = 0; q < problem.Q(); ++q) a += mu[q] * problem.coefficients[q](x);
    return a;
  };
}

void require_box(const AffineEllipticProblem& problem, const Vector& mu) {
  if (mu.size() != problem.Q()) throw DomainError("parameter has wrong length");
  if (!in_cube(mu, 1.0, 1e-12)) throw DomainError("parameter outside [-1, 1]^Q");
}

}  // namespace

AffineEllipticProblem default_elliptic_problem(int elements) {
  AffineEllipticProblem p;
  p.elements = elements;
  p.mean_coefficient = [](double) { return 2.5; };
  p.coefficients = {[](double x) { return 0.5 * std::sin(2.0 * std::numbers::pi * x); }};
  p.rhs = [](double) { return 1.0; };
  p.functional = [](double) { return 1.0; };
  return p;
}

AssembledProblem assemble(const AffineEllipticProblem& problem) {
  if (problem.elements < 2) throw DomainError("assemble: need at least two elements");
  AssembledProblem out;
  out.problem = problem;
  out.stiffness.push_back(stiffness_from(problem, problem.mean_coefficient));
  for (const auto& phi : problem.coefficients) out.stiffness.push_back(stiffness_from(problem, phi));
  out.load = load_from(problem, problem.rhs);
  out.functional = load_from(problem, problem.functional);
  out.nodes = Vector::LinSpaced(problem.interior_nodes(), problem.mesh_size(),
                                1.0 - problem.mesh_size());
  return out;
}

SparseMatrix assemble_direct(const AffineEllipticProblem& problem, const Vector& mu) {
  require_box(problem, mu);
  return stiffness_from(problem, coefficient_at(problem, mu));
}

std::pair<double, double> coefficient_ratio_bounds(const AffineEllipticProblem& problem,
                                                   const Vector& mu) {
  const auto a = coefficient_at(problem, mu);
  const auto& rule = element_rule();
  const double h = problem.mesh_size();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int e = 0; e < problem.elements; ++e)
    for (int q = 0; q < kElementOrder; ++q) {
      const double x = e * h + 0.5 * h * (rule.nodes[q] + 1.0);
      const double r = a(x) / problem.mean_coefficient(x);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  return {lo, hi};
}

bool is_elliptic(const AffineEllipticProblem& problem) {
  const auto& rule = element_rule();
  const double h = problem.mesh_size();
  for (int e = 0; e < problem.elements; ++e)
    for (int q = 0; q < kElementOrder; ++q) {
      const double x = e * h + 0.5 * h * (rule.nodes[q] + 1.0);
      double worst = problem.mean_coefficient(x);
      for (const auto& phi : problem.coefficients) worst -= std::abs(phi(x));
      if (worst < 1.0 - 1e-12) return false;
    }
  return true;
}

Vector hifi_solve(const AssembledProblem& assembled, const Vector& mu) {
  require_box(assembled.problem, mu);
  SparseMatrix k = assembled.stiffness[0];
  for (int q = 1; q < assembled.terms(); ++q) k += mu[q - 1] * assembled.stiffness[q];
  Eigen::SimplicialLDLT<SparseMatrix> solver(k);
  if (solver.info() != Eigen::Success) throw DomainError("hifi_solve: singular stiffness matrix");
  Vector u = solver.solve(assembled.load);
  // normwise backward error
  const double scale = Eigen::MatrixXd(k).lpNorm<Eigen::Infinity>() * u.lpNorm<Eigen::Infinity>() +
                       assembled.load.lpNorm<Eigen::Infinity>();
  if ((k * u - assembled.load).lpNorm<Eigen::Infinity>() > 1e-12 * scale)
    throw ConvergenceError("hifi_solve: linear residual above 1e-12");
  return u;
}

double energy_norm(const AssembledProblem& assembled, const Vector& v) {
  return std::sqrt(std::max(0.0, v.dot(assembled.stiffness[0] * v)));
}

GreedyResult greedy_basis(const AssembledProblem& assembled, const std::vector<Vector>& training,
                          int m) {
  if (m < 1) throw DomainError("greedy_basis: m must be positive");
  if (training.size() < static_cast<std::size_t>(m))
    throw DomainError("greedy_basis: training set smaller than m");
  const SparseMatrix& energy = assembled.stiffness[0];
  const int n = assembled.size();

  std::vector<Vector> snapshots(training.size());
  parallel_for(training.size(), [&](std::size_t j) { snapshots[j] = hifi_solve(assembled, training[j]); });
  double largest = 0.0;
  for (const auto& s : snapshots) largest = std::max(largest, energy_norm(assembled, s));

  GreedyResult result;
  result.basis.resize(n, 0);
  auto residual_of = [&](const Vector& u) {
    Vector r = u;
    for (int pass = 0; pass < 2; ++pass)
      if (result.basis.cols() > 0) r -= result.basis * (result.basis.transpose() * (energy * r));
    return r;
  };
  auto training_errors = [&] {
    std::vector<double> err(snapshots.size());
    for (std::size_t j = 0; j < snapshots.size(); ++j) err[j] = energy_norm(assembled, residual_of(snapshots[j]));
    return err;
  };

  for (int step = 0; step < m; ++step) {
    const auto err = training_errors();
    const auto worst = std::max_element(err.begin(), err.end());
    const std::size_t pick = static_cast<std::size_t>(worst - err.begin());
    const Vector r = residual_of(snapshots[pick]);
    const double norm = energy_norm(assembled, r);
    if (norm < 1e-13 * std::max(largest, 1e-300)) break;
    result.max_errors.push_back(*worst);
    result.picked.push_back(pick);
    result.basis.conservativeResize(n, result.basis.cols() + 1);
    result.basis.col(result.basis.cols() - 1) = r / norm;
  }
  const auto err = training_errors();
  result.final_error = *std::max_element(err.begin(), err.end());
  return result;
}

std::size_t stored_real_count(int terms, int m) {
  return static_cast<std::size_t>(terms) * m * m + 2 * static_cast<std::size_t>(m);
}

std::size_t OnlineData::n_store() const { return stored_real_count(static_cast<int>(matrices.size()), m); }

std::vector<double> OnlineData::flat() const {
  std::vector<double> out;
  out.reserve(n_store());
  for (const auto& a : matrices)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) out.push_back(a(i, j));
  for (int i = 0; i < m; ++i) out.push_back(f[i]);
  for (int i = 0; i < m; ++i) out.push_back(l[i]);
  return out;
}

OnlineData OnlineData::from_flat(int terms, int m, const std::vector<double>& data) {
  if (data.size() != stored_real_count(terms, m)) throw DomainError("OnlineData: wrong flat length");
  OnlineData out;
  out.m = m;
  std::size_t k = 0;
  for (int t = 0; t < terms; ++t) {
    Matrix a(m, m);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) a(i, j) = data[k++];
    out.matrices.push_back(std::move(a));
  }
  out.f.resize(m);
  out.l.resize(m);
  for (int i = 0; i < m; ++i) out.f[i] = data[k++];
  for (int i = 0; i < m; ++i) out.l[i] = data[k++];
  return out;
}

OnlineData offline(const AssembledProblem& assembled, const Matrix& basis) {
  OnlineData data;
  data.m = static_cast<int>(basis.cols());
  for (const auto& k : assembled.stiffness) {
    Matrix reduced = basis.transpose() * (k * basis);
    // bilinear forms are symmetric; remove rounding asymmetry
    data.matrices.push_back(0.5 * (reduced + reduced.transpose()));
  }
  data.f = basis.transpose() * assembled.load;
  data.l = basis.transpose() * assembled.functional;
  return data;
}

double online(const OnlineData& data, const Vector& mu) {
  if (mu.size() + 1 != static_cast<Eigen::Index>(data.matrices.size()))
    throw DomainError("online: parameter has wrong length");
  Matrix reduced = data.matrices[0];
  for (Eigen::Index q = 0; q < mu.size(); ++q) reduced += mu[q] * data.matrices[q + 1];
  Eigen::LLT<Matrix> llt(reduced);
  if (llt.info() != Eigen::Success) throw DomainError("online: reduced matrix is not positive definite");
  return data.l.dot(llt.solve(data.f));
}

Vector reduced_solution(const AssembledProblem& assembled, const Matrix& basis, const Vector& mu) {
  const SparseMatrix k = assemble_direct(assembled.problem, mu);
  const Matrix reduced = basis.transpose() * (k * basis);
  const Vector coef = reduced.ldlt().solve(basis.transpose() * assembled.load);
  return basis * coef;
}

double galerkin_in_span(const AssembledProblem& assembled, const Matrix& basis, const Vector& mu) {
  return assembled.functional.dot(reduced_solution(assembled, basis, mu));
}

SvdDecay svd_decay(const Matrix& weighted, int n_lo, int n_hi) {
  SvdDecay out;
  Eigen::BDCSVD<Matrix> svd(weighted);
  out.singular_values = svd.singularValues();
  const Eigen::Index r = out.singular_values.size();
  out.tail.assign(r + 1, 0.0);
  double acc = 0.0;
  for (Eigen::Index k = r; k-- > 0;) {
    out.tail[k + 1] = std::sqrt(acc);
    acc += out.singular_values[k] * out.singular_values[k];
  }
  out.tail[0] = std::sqrt(acc);

  if (n_hi > n_lo && n_hi < r) {
    const int count = n_hi - n_lo + 1;
    Matrix design(count, 2);
    Vector rhs(count);
    for (int i = 0; i < count; ++i) {
      design(i, 0) = 1.0;
      design(i, 1) = std::log(static_cast<double>(n_lo + i));
      rhs[i] = std::log(out.tail[n_lo + i]);
    }
    out.exponent = design.colPivHouseholderQr().solve(rhs)[1];
  }
  return out;
}

SvdDecay snapshot_svd_decay(int mu_points, int x_points, int n_lo, int n_hi) {
  if (mu_points < 2 || x_points < 2) throw DomainError("snapshot_svd_decay: grids too small");
  const double dx = 2.0 / x_points;
  const double dmu = 2.0 / (mu_points - 1);
  Matrix snapshots(x_points, mu_points);
  for (int i = 0; i < mu_points; ++i) {
    const double mu = -1.0 + i * dmu;
    const double wmu = (i == 0 || i == mu_points - 1) ? 0.5 * dmu : dmu;
    for (int j = 0; j < x_points; ++j) {
      const double x = -1.0 + (j + 0.5) * dx;
      snapshots(j, i) = (x - mu >= 0.0 ? 1.0 : 0.0) * std::sqrt(dx * wmu);
    }
  }
  return svd_decay(snapshots, n_lo, n_hi);
}

}  // namespace widthlab
