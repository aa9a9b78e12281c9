#include "widthlab/experiments.hpp"

#include "widthlab/bumps.hpp"
#include "widthlab/parallel.hpp"
#include "widthlab/quadrature.hpp"
#include "widthlab/rbelliptic.hpp"
#include "widthlab/refdomain.hpp"
#include "widthlab/transport.hpp"
#include "widthlab/widths.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace widthlab {

namespace {

ReferenceMap make_map(const ExperimentConfig& c) {
  return c.map == MapKind::identity ? ReferenceMap::identity(*c.d) : ReferenceMap::curved(*c.d, c.curvature);
}

FamilyOptions fixed_family_options(const ExperimentConfig& c, double h) {
  FamilyOptions o;
  o.h = h;
  o.s_minus = c.s_minus;
  o.s_plus = c.s_plus;
  o.p = c.p;
  o.d_bar = *c.d - 1;
  return o;
}

std::size_t center_bump(const ProblemFamily& family) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < family.size(); ++i)
    if (family.params()[i].norm() < family.params()[best].norm()) best = i;
  return best;
}

std::string g(double v) { return fmt::format("{:.6g}", v); }

}  // namespace

double fixed_b_exponent(int s_minus, int s_plus, int d) {
  return static_cast<double>(s_minus + s_plus + d - 1) / (d - 1);
}

double variable_b_exponent(int s_minus, int s_plus, int d, int D, int s_b) {
  return (s_minus + s_plus + d - 1) / std::max(static_cast<double>(D) / s_b, static_cast<double>(d - 2));
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::fixed_b:
      c.d = 2;
      c.h = {0.1, 0.05, 0.025};
      break;
    case ExperimentKind::variable_b:
      c.d = 3;
      c.h = {0.1};
      break;
    case ExperimentKind::upper_bound:
      c.d = 2;
      c.h = {0.1, 0.05, 0.025};
      break;
    case ExperimentKind::rhs_invariance:
    case ExperimentKind::convolution:
      c.d = 2;
      c.h = {0.1};
      break;
    case ExperimentKind::rb_elliptic:
      c.seed = 20240917;
      break;
    default:
      break;
  }
  if (kind == ExperimentKind::convolution) c.grid_points = 101;
  return c;
}

RunReport run(const ExperimentConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  switch (config.kind) {
    case ExperimentKind::fixed_b: report = run_fixed_b(config); break;
    case ExperimentKind::variable_b: report = run_variable_b(config); break;
    case ExperimentKind::upper_bound: report = run_upper_bound(config); break;
    case ExperimentKind::rhs_invariance: report = run_rhs_invariance(config); break;
    case ExperimentKind::convolution: report = run_convolution(config); break;
    case ExperimentKind::rb_elliptic: report = run_rb_elliptic(config); break;
    case ExperimentKind::svd_transport: report = run_svd_transport(config); break;
    case ExperimentKind::riemann: report = run_riemann(config); break;
  }
  report.kind = config.kind;
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

RunReport run_fixed_b(const ExperimentConfig& c) {
  RunReport report;
  report.kind = ExperimentKind::fixed_b;
  report.table.schema = {"h", "n", "epsilon", "n_ent"};
  const FlowField field = make_flow(make_map(c), c.s_b);

  std::vector<std::pair<double, double>> samples;
  for (double h : c.h) {
    const ProblemFamily family = build_family(field, fixed_family_options(c, h));
    std::vector<QoICurve> curves;
    PackingCertificate cert;
    try {
      cert = certificate_disjoint(family, field, family.params(), &curves);
    } catch (const CertificateRefused& e) {
      report.check(fmt::format("certificate h={}", g(h)), false, e.what());
      continue;
    }
    const std::string recheck = verify_certificate(cert, curves);
    double cross = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < curves.size(); ++i)
      for (std::size_t j = 0; j < curves.size(); ++j) {
        if (i == j) peak = std::max(peak, std::abs(curves[i].values[j]));
        else cross = std::max(cross, std::abs(curves[i].values[j]));
      }
    report.check(fmt::format("certificate h={}", g(h)), recheck.empty(),
                 recheck.empty() ? fmt::format("n={} epsilon={:.6e} n_ent={}", family.size(), cert.epsilon, cert.n_ent)
                                 : recheck);
    report.check(fmt::format("cross terms h={}", g(h)), cross <= c.zero_rtol * peak,
                 fmt::format("max |q_i(mu_j)| = {:.3e}, limit {:.3e}", cross, c.zero_rtol * peak));

    if (*c.d == 2) {
      // nonzero sets {mu : q_i(mu) != 0} on a uniform grid must not overlap
      const auto grid = uniform_grid_1d(-0.5, 0.5, static_cast<std::size_t>(c.grid_points));
      std::vector<QoICurve> sampled(family.size());
      for (std::size_t i = 0; i < family.size(); ++i)
        sampled[i] = qoi_curve(family_problem(family, field, i), grid);
      std::size_t overlaps = 0;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        int nonzero = 0;
        for (const auto& q : sampled) nonzero += q.values[k] != 0.0;
        overlaps += nonzero > 1;
      }
      report.check(fmt::format("disjoint supports h={}", g(h)), overlaps == 0,
                   fmt::format("{} of {} grid points in more than one support", overlaps, grid.size()));
    }

    report.certificates.push_back({h, family.size(), cert.epsilon, cert.n_ent});
    report.table.rows.push_back({h, static_cast<double>(family.size()), cert.epsilon, static_cast<double>(cert.n_ent)});
    samples.emplace_back(static_cast<double>(cert.n_ent), cert.epsilon);
  }

  const double theory = fixed_b_exponent(c.s_minus, c.s_plus, *c.d);
  report.theory_exponent = theory;
  if (samples.size() >= 3) {
    const RateFit fit = rate_fit(samples, theory);
    report.fitted_exponent = fit.alpha_hat;
    const double rel = std::abs(fit.alpha_hat - theory) / theory;
    report.check("entropy exponent", rel <= c.fit_tolerance,
                 fmt::format("fitted {:.4f} vs theory {:.4f} (relative deviation {:.3f}, limit {:.3f})",
                             fit.alpha_hat, theory, rel, c.fit_tolerance));
  } else {
    report.notes.push_back("fewer than three scales: exponent not fitted");
  }
  return report;
}

RunReport run_variable_b(const ExperimentConfig& c) {
  RunReport report;
  report.kind = ExperimentKind::variable_b;
  report.table.schema = {"h", "n", "epsilon", "n_ent"};
  for (double h : c.h) {
    VariableBOptions o;
    o.h = h;
    o.d = *c.d;
    o.D = c.D;
    o.s_b = c.s_b;
    o.s_minus = c.s_minus;
    o.s_plus = c.s_plus;
    o.p = c.p;
    o.max_n = c.variable_b.n;
    o.max_K = c.variable_b.K;
    o.max_curves = static_cast<std::size_t>(c.variable_b.max_curves);
    const VariableBFamily family = variable_b_family(o);
    const double eps = 0.5 * family.diagonal;
    const double tol = c.zero_rtol * family.peak;
    report.notes.push_back(fmt::format("h={}: n={} K={} curves={} diagonal={:.6e}", g(h), family.n, family.K,
                                       family.curves.size(), family.diagonal));

    const std::string structure = check_product_structure(family, eps, tol);
    report.check(fmt::format("product structure h={}", g(h)), structure.empty(),
                 structure.empty() ? fmt::format("value > {:.3e} exactly on theta_i = vartheta_k = 1, else below {:.3e}", eps, tol)
                                   : structure);
    try {
      const PackingCertificate cert = certificate_count(family.curves, eps);
      const std::string recheck = verify_certificate(cert, family.curves);
      report.check(fmt::format("counting certificate h={}", g(h)), recheck.empty(),
                   recheck.empty() ? fmt::format("{} curves pairwise separated by more than {:.6e}", cert.family_size, eps)
                                   : recheck);
      report.certificates.push_back({h, cert.family_size, cert.bound, cert.n_ent});
      report.table.rows.push_back({h, static_cast<double>(cert.family_size), cert.bound, static_cast<double>(cert.n_ent)});
    } catch (const CertificateRefused& e) {
      report.check(fmt::format("counting certificate h={}", g(h)), false, e.what());
    }
  }
  report.theory_exponent = variable_b_exponent(c.s_minus, c.s_plus, *c.d, c.D, c.s_b);
  return report;
}

RunReport run_upper_bound(const ExperimentConfig& c) {
  RunReport report;
  report.kind = ExperimentKind::upper_bound;
  report.table.schema = {"h", "order", "max_abs", "consistent", "disagreement"};
  const FlowField field = make_flow(make_map(c), c.s_b);
  if (*c.d != 2) throw DomainError("upper-bound: only d = 2 (one-dimensional parameter) is supported");

  const int ceiling = c.s_minus + c.s_plus;
  const int top = ceiling + 2;
  std::vector<std::vector<double>> magnitude(c.h.size(), std::vector<double>(top + 1, 0.0));
  for (std::size_t hi = 0; hi < c.h.size(); ++hi) {
    const double h = c.h[hi];
    const ProblemFamily family = build_family(field, fixed_family_options(c, h));
    const std::size_t i = center_bump(family);
    const TransportProblem prob = family_problem(family, field, i);
    const double center = family.params()[i][0];
    const auto q = [&](double mu) { return qoi(prob, Vector::Constant(1, mu)); };
    const double lo = std::max(-0.5, center - 3.0 * h), up = std::min(0.5, center + 3.0 * h);
    for (int order = 1; order <= top; ++order) {
      const SmoothnessReport s = smoothness_probe(q, lo, up, order);
      magnitude[hi][order] = s.max_abs;
      report.table.rows.push_back({h, static_cast<double>(order), s.max_abs, s.consistent ? 1.0 : 0.0, s.worst_disagreement});
      if (!s.consistent)
        report.notes.push_back(fmt::format("h={} order {}: Richardson disagreement {:.3f} above 10%, derivative estimate unreliable",
                                           g(h), order, s.worst_disagreement));
    }
  }

  for (std::size_t hi = 1; hi < c.h.size(); ++hi) {
    const double shrink = c.h[hi - 1] / c.h[hi];
    for (int order = 1; order <= top; ++order) {
      const double growth = magnitude[hi][order] / magnitude[hi - 1][order];
      const std::string what = fmt::format("h {} -> {}: sup|q^({})| {:.4e} -> {:.4e}, growth {:.3f}", g(c.h[hi - 1]),
                                            g(c.h[hi]), order, magnitude[hi - 1][order], magnitude[hi][order], growth);
      if (order <= ceiling)
        report.check(fmt::format("order {} bounded", order), growth < 2.0, what);
      else if (order == ceiling + 1)
        report.check(fmt::format("order {} grows like 1/h", order), growth >= shrink * (1.0 - c.fit_tolerance), what);
      else
        report.notes.push_back("measured only: " + what);
    }
  }

  // piecewise polynomial upper bound at the coarsest scale
  const double h = c.h.front();
  const ProblemFamily family = build_family(field, fixed_family_options(c, h));
  const TransportProblem prob = family_problem(family, field, center_bump(family));
  const auto grid = uniform_grid_1d(-0.5, 0.5, static_cast<std::size_t>(c.upper_bound.samples));
  const QoICurve curve = qoi_curve(prob, grid);
  std::vector<double> mu(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) mu[k] = grid[k][0];
  std::vector<std::pair<double, double>> samples;
  for (int pieces : c.upper_bound.pieces) {
    const double err = piecewise_poly_upper(mu, curve.values, ceiling, pieces);
    samples.emplace_back(static_cast<double>(pieces * (ceiling + 1)), err);
    report.notes.push_back(fmt::format("degree {} on {} pieces: sup error {:.4e}", ceiling, pieces, err));
  }
  const RateFit fit = rate_fit(samples, static_cast<double>(ceiling));
  report.fitted_exponent = fit.alpha_hat;
  report.theory_exponent = static_cast<double>(ceiling);
  report.check("piecewise polynomial rate", fit.alpha_hat >= c.upper_bound.min_rate,
               fmt::format("fitted {:.4f}, required >= {:.2f}", fit.alpha_hat, c.upper_bound.min_rate));
  return report;
}

RunReport run_rhs_invariance(const ExperimentConfig& c) {
  RunReport report;
  report.kind = ExperimentKind::rhs_invariance;
  const FlowField field = make_flow(make_map(c), c.s_b);
  const ProblemFamily family = build_family(field, fixed_family_options(c, c.h.front()));
  std::vector<Vector> mus;
  if (*c.d == 2) {
    mus = uniform_grid_1d(-0.5, 0.5, static_cast<std::size_t>(c.grid_points));
  } else {
    mus = family.params();
  }

  // inflows: single bumps first, then the all-ones combination
  std::vector<std::vector<int>> inflows;
  for (std::size_t i = 0; i < family.size() && static_cast<int>(inflows.size()) + 1 < c.rhs_invariance.inflows; ++i) {
    std::vector<int> bits(family.size(), 0);
    bits[i] = 1;
    inflows.push_back(bits);
  }
  inflows.emplace_back(family.size(), 1);
  if (static_cast<int>(inflows.size()) < c.rhs_invariance.inflows)
    throw DomainError("rhs-invariance: family too small for the requested number of inflows");

  const double f = c.rhs_invariance.source;
  report.table.schema = {"mu"};
  for (std::size_t a = 0; a < inflows.size(); ++a) report.table.schema.push_back(fmt::format("diff_{}", a));
  std::vector<std::vector<double>> diffs(inflows.size(), std::vector<double>(mus.size()));
  for (std::size_t a = 0; a < inflows.size(); ++a) {
    TransportProblem prob = family_problem(family, field, inflows[a]);
    TransportProblem forced = prob;
    forced.source = [f](const Vector&) { return f; };
    parallel_for(mus.size(), [&](std::size_t k) {
      diffs[a][k] = qoi_with_source(forced, mus[k]) - qoi(prob, mus[k]);
    });
  }
  for (std::size_t k = 0; k < mus.size(); ++k) {
    std::vector<double> row = {mus[k][0]};
    for (const auto& d : diffs) row.push_back(d[k]);
    report.table.rows.push_back(std::move(row));
  }

  double worst = 0.0;
  for (std::size_t a = 1; a < diffs.size(); ++a)
    for (std::size_t k = 0; k < mus.size(); ++k) worst = std::max(worst, std::abs(diffs[a][k] - diffs[0][k]));
  report.check("difference curves coincide", worst < c.abs_tolerance,
               fmt::format("sup |(q_f - q_0)_a - (q_f - q_0)_0| = {:.3e} over {} inflows, limit {:.1e}", worst,
                           inflows.size(), c.abs_tolerance));

  // for a constant source the difference is f * int g_+ along unit-time characteristics
  const Box box = family.g_plus_support();
  const auto integrand = [&](const Vector& w) { return family.g_plus(field.reference(1.0, w)); };
  const double mass = integrate_refined(integrand, box, 8, 6, 1e-13).value;
  double off = 0.0;
  for (std::size_t k = 0; k < mus.size(); ++k) off = std::max(off, std::abs(diffs[0][k] - f * mass));
  report.notes.push_back(fmt::format("difference curve vs f * int g_+ = {:.12e}: sup deviation {:.3e}", f * mass, off));
  return report;
}

RunReport run_convolution(const ExperimentConfig& c) {
  RunReport report;
  report.kind = ExperimentKind::convolution;
  report.table.schema = {"mu", "qoi", "convolution", "difference"};
  if (*c.d != 2) throw DomainError("convolution: the reference is one-dimensional, d must be 2");

  // shear flow: identity reference map
  const FlowField shear = make_flow(ReferenceMap::identity(2), c.s_b);
  const ProblemFamily family = build_family(shear, fixed_family_options(c, c.h.front()));
  const std::size_t i = center_bump(family);
  const double h = family.h();
  const double mu_i = family.params()[i][0];
  TransportProblem prob = family_problem(family, shear, i);
  prob.rtol = std::min(prob.rtol, 1e-12);

  const Function1D gm{[&](double z) { return family.g_minus(i, (Vector(2) << 0.0, z).finished()); }, mu_i - h, mu_i + h};
  const Function1D gp{[&](double z) { return family.g_plus((Vector(2) << 1.0, z).finished()); }, -h, h};

  const auto grid = uniform_grid_1d(-0.5, 0.5, static_cast<std::size_t>(c.grid_points));
  std::vector<double> ours(grid.size()), ref(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    ours[k] = qoi(prob, grid[k]);
    ref[k] = convolution_reference(gm, gp, grid[k][0]);
  });
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    worst = std::max(worst, std::abs(ours[k] - ref[k]));
    report.table.rows.push_back({grid[k][0], ours[k], ref[k], ours[k] - ref[k]});
  }
  report.check("characteristic qoi equals convolution", worst < 1e-8,
               fmt::format("sup difference {:.3e} over {} points", worst, grid.size()));

  // RK4 trace against the analytic forward map on the curved reference map
  const FlowField curved = make_flow(ReferenceMap::curved(2, c.curvature > 0 ? c.curvature : 0.1), c.s_b);
  const Vector mu = Vector::Constant(1, c.convolution.trace_mu);
  const Vector x0 = (Vector(2) << 0.0, c.convolution.trace_x).finished();
  const Vector exact = forward_map(curved, mu, x0);
  const int steps = c.convolution.trace_steps;
  const double err = (trace_characteristic(curved, mu, x0, steps) - exact).norm();
  report.check("rk4 trace matches forward map", err < 1e-8,
               fmt::format("error {:.3e} at {} steps", err, steps));
  const double e8 = (trace_characteristic(curved, mu, x0, 8) - exact).norm();
  const double e16 = (trace_characteristic(curved, mu, x0, 16) - exact).norm();
  const double e32 = (trace_characteristic(curved, mu, x0, 32) - exact).norm();
  const double order = std::log2(std::sqrt(e8 * e16) / std::sqrt(e16 * e32));
  report.check("rk4 observed order", order > 3.5,
               fmt::format("errors {:.3e}, {:.3e}, {:.3e} at 8, 16, 32 steps; observed order {:.3f}", e8, e16, e32, order));
  return report;
}

RunReport run_rb_elliptic(const ExperimentConfig& c) {
  RunReport report;
  report.kind = ExperimentKind::rb_elliptic;
  report.table.schema = {"m", "qoi_sup_error", "greedy_error", "n_store"};
  const auto& s = c.rb_elliptic;
  const AssembledProblem assembled = assemble(default_elliptic_problem(s.elements));
  const int Q = assembled.problem.Q();
  if (Q != 1) throw DomainError("rb-elliptic: the training grid assumes one parameter");

  std::vector<Vector> training;
  for (int k = 0; k < s.training; ++k) training.push_back(Vector::Constant(1, -1.0 + 2.0 * k / (s.training - 1)));
  const GreedyResult greedy = greedy_basis(assembled, training, s.m_max);
  const int m_built = static_cast<int>(greedy.basis.cols());
  if (m_built < s.m_max)
    report.notes.push_back(fmt::format("greedy stopped at m = {}: remaining snapshots numerically dependent", m_built));

  std::vector<Vector> test;
  for (int k = 0; k < s.test; ++k) test.push_back(Vector::Constant(1, -1.0 + 2.0 * k / (s.test - 1)));
  std::vector<double> truth(test.size());
  parallel_for(test.size(), [&](std::size_t k) { truth[k] = assembled.functional.dot(hifi_solve(assembled, test[k])); });

  std::vector<double> errors;
  for (int m = 1; m <= m_built; ++m) {
    const OnlineData data = offline(assembled, greedy.basis.leftCols(m));
    double worst = 0.0;
    for (std::size_t k = 0; k < test.size(); ++k) worst = std::max(worst, std::abs(online(data, test[k]) - truth[k]));
    errors.push_back(worst);
    report.table.rows.push_back({static_cast<double>(m), worst, greedy.max_errors[m - 1], static_cast<double>(data.n_store())});
  }
  double min_ratio = std::numeric_limits<double>::infinity();
  std::string ratios;
  for (std::size_t m = 1; m < errors.size(); ++m) {
    const double r = errors[m - 1] / errors[m];
    min_ratio = std::min(min_ratio, r);
    ratios += (m > 1 ? ", " : "") + fmt::format("{:.3g}", r);
  }
  report.check("geometric qoi decay", m_built == s.m_max && min_ratio >= s.min_ratio,
               fmt::format("error ratios over m = 1..{}: {} (required >= {:.1f})", m_built, ratios, s.min_ratio));

  // online evaluation against the directly assembled Galerkin system in the same span
  const OnlineData full = offline(assembled, greedy.basis);
  std::mt19937_64 rng(c.seed.value_or(0));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double consistency = 0.0, cea_slack = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < s.random_checks; ++k) {
    const Vector mu = Vector::Constant(1, unif(rng));
    consistency = std::max(consistency, std::abs(online(full, mu) - galerkin_in_span(assembled, greedy.basis, mu)));
    const Vector u = hifi_solve(assembled, mu);
    const Vector u_rb = reduced_solution(assembled, greedy.basis, mu);
    const Matrix& V = greedy.basis;
    const Vector best = V * (V.transpose() * (assembled.stiffness[0] * u));
    const auto [alpha, gamma] = coefficient_ratio_bounds(assembled.problem, mu);
    const double lhs = energy_norm(assembled, u - u_rb);
    const double rhs = std::sqrt(gamma / alpha) * energy_norm(assembled, u - best);
    cea_slack = std::max(cea_slack, lhs - rhs);
  }
  report.check("online matches galerkin in span", consistency < 1e-12,
               fmt::format("max |online - galerkin| = {:.3e} over {} random parameters", consistency, s.random_checks));
  report.check("cea near-optimality", cea_slack <= 1e-13,
               fmt::format("max (||u - u_rb|| - sqrt(gamma/alpha) ||u - P u||) = {:.3e}", cea_slack));
  return report;
}

RunReport run_svd_transport(const ExperimentConfig& c) {
  RunReport report;
  report.kind = ExperimentKind::svd_transport;
  report.table.schema = {"n", "sigma", "tail"};
  const auto& s = c.svd_transport;
  const SvdDecay decay = snapshot_svd_decay(s.mu_points, s.x_points, s.n_lo, s.n_hi);
  const Eigen::Index r = decay.singular_values.size();
  for (Eigen::Index n = 0; n < r && n <= 2 * s.n_hi; ++n)
    report.table.rows.push_back({static_cast<double>(n), decay.singular_values[n], decay.tail[n]});
  report.fitted_exponent = decay.exponent;
  report.theory_exponent = -0.5;
  report.check("snapshot tail exponent", decay.exponent >= s.exponent_min && decay.exponent <= s.exponent_max,
               fmt::format("fitted {:.4f} over n in [{}, {}], required in [{:.2f}, {:.2f}]", decay.exponent, s.n_lo,
                           s.n_hi, s.exponent_min, s.exponent_max));
  return report;
}

RunReport run_riemann(const ExperimentConfig& c) {
  RunReport report;
  report.kind = ExperimentKind::riemann;
  report.table.schema = {"mu", "recovered", "error"};
  double worst = 0.0;
  for (double mu : c.riemann.mu) {
    const double back = riemann_recovery(mu);
    worst = std::max(worst, std::abs(back - mu));
    report.table.rows.push_back({mu, back, back - mu});
  }
  report.check("parameter recovered", worst <= c.abs_tolerance,
               fmt::format("max |recovered - mu| = {:.3e}, limit {:.1e}", worst, c.abs_tolerance));
  return report;
}

}  // namespace widthlab
