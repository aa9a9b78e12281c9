#pragma once

#include "widthlab/config.hpp"
#include "widthlab/report.hpp"

namespace widthlab {

// Canonical configuration of each experiment (what configs/*.ini hold).
ExperimentConfig default_config(ExperimentKind kind);

// Runs the experiment named by config.kind. Assertion outcomes are recorded
// in the report; exceptions signal execution errors.
RunReport run(const ExperimentConfig& config);

RunReport run_fixed_b(const ExperimentConfig& config);
RunReport run_variable_b(const ExperimentConfig& config);
RunReport run_upper_bound(const ExperimentConfig& config);
RunReport run_rhs_invariance(const ExperimentConfig& config);
RunReport run_convolution(const ExperimentConfig& config);
RunReport run_rb_elliptic(const ExperimentConfig& config);
RunReport run_svd_transport(const ExperimentConfig& config);
RunReport run_riemann(const ExperimentConfig& config);

// Entropy exponents predicted for the bump families.
double fixed_b_exponent(int s_minus, int s_plus, int d);
double variable_b_exponent(int s_minus, int s_plus, int d, int D, int s_b);

}  // namespace widthlab
