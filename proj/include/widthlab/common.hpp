#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace widthlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Input outside the documented domain of an operation.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Quadrature refinement or an iterative solve did not settle.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A characteristic left the domain before reaching the outflow face.
class IntegrationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised when a packing certificate cannot be issued; names the offending pair.
class CertificateRefused : public std::runtime_error {
public:
  CertificateRefused(const std::string& what, std::size_t first, std::size_t second)
      : std::runtime_error(what), first_(first), second_(second) {}
  std::size_t first() const { return first_; }
  std::size_t second() const { return second_; }

private:
  std::size_t first_;
  std::size_t second_;
};

// Axis-aligned box in R^k, used for quadrature patches and supports.
struct Box {
  Vector lower;
  Vector upper;

  Eigen::Index dim() const { return lower.size(); }
  double measure() const { return (upper - lower).prod(); }
};

// True if every component of v lies in [-r, r].
inline bool in_cube(const Vector& v, double r, double slack = 1e-14) {
  return v.size() == 0 || v.cwiseAbs().maxCoeff() <= r + slack;
}

}  // namespace widthlab
