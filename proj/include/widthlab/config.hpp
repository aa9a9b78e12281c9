#pragma once

#include "widthlab/refdomain.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace widthlab {

enum class ExperimentKind {
  fixed_b,
  variable_b,
  upper_bound,
  rhs_invariance,
  convolution,
  rb_elliptic,
  svd_transport,
  riemann,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);  // throws ConfigError("kind")
const std::vector<ExperimentKind>& all_kinds();

// Raised for malformed configuration; key() names the offending entry as
// "section.key".
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

private:
  std::string key_;
};

struct VariableBSettings {
  int n = 3;
  int K = 3;
  int max_curves = 256;
  bool operator==(const VariableBSettings&) const = default;
};

struct UpperBoundSettings {
  int samples = 1001;
  std::vector<int> pieces = {4, 8, 16, 32, 64};
  double min_rate = 1.5;
  bool operator==(const UpperBoundSettings&) const = default;
};

struct RhsInvarianceSettings {
  int inflows = 3;
  double source = 1.0;
  bool operator==(const RhsInvarianceSettings&) const = default;
};

struct ConvolutionSettings {
  double trace_mu = 0.2;
  double trace_x = 0.1;
  int trace_steps = 1000;
  bool operator==(const ConvolutionSettings&) const = default;
};

struct RbEllipticSettings {
  int elements = 512;
  int m_max = 6;
  int training = 65;
  int test = 201;
  int random_checks = 50;
  double min_ratio = 2.0;
  bool operator==(const RbEllipticSettings&) const = default;
};

struct SvdTransportSettings {
  int mu_points = 512;
  int x_points = 2048;
  int n_lo = 4;
  int n_hi = 64;
  double exponent_min = -0.65;
  double exponent_max = -0.35;
  bool operator==(const SvdTransportSettings&) const = default;
};

struct RiemannSettings {
  std::vector<double> mu = {-1.0, -0.5, 0.0, 0.5, 1.0};
  bool operator==(const RiemannSettings&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::fixed_b;
  std::string output;
  std::optional<std::uint64_t> seed;

  std::optional<int> d;
  MapKind map = MapKind::identity;
  double curvature = 0.1;
  int D = 1;

  int s_minus = 1;
  int s_plus = 1;
  int s_b = 1;
  double p = 2.0;

  std::vector<double> h;
  int grid_points = 200;

  double rtol = 1e-8;
  double zero_rtol = 1e-12;
  double fit_tolerance = 0.15;
  double abs_tolerance = 1e-10;

  VariableBSettings variable_b;
  UpperBoundSettings upper_bound;
  RhsInvarianceSettings rhs_invariance;
  ConvolutionSettings convolution;
  RbEllipticSettings rb_elliptic;
  SvdTransportSettings svd_transport;
  RiemannSettings riemann;

  bool operator==(const ExperimentConfig&) const = default;
};

// INI text: [experiment], [geometry], [smoothness], [scales], [grid],
// [tolerances] and one optional section named after the experiment kind.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

// Semantic checks (h <= 1/10, d >= 2, ...). Throws ConfigError.
void validate(const ExperimentConfig& config);

}  // namespace widthlab
