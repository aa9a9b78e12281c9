#include "widthlab/widths.hpp"

#include "widthlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace widthlab {

namespace {

std::size_t floor_log2(std::size_t x) {
  std::size_t r = 0;
  while (x >>= 1) ++r;
  return r;
}

std::size_t locate(const std::vector<Vector>& grid, const Vector& mu) {
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (grid[k].size() == mu.size() && (grid[k] - mu).lpNorm<Eigen::Infinity>() < 1e-12) return k;
  throw DomainError("parameter grid does not contain a family parameter");
}

void require_common_grid(const std::vector<QoICurve>& curves) {
  for (const auto& c : curves)
    if (c.size() != curves.front().size())
      throw DomainError("curves must share a common grid");
}

}  // namespace

// ---------------------------------------------------------------------------
// Certificates

PackingCertificate certificate_disjoint(const std::vector<QoICurve>& curves,
                                        const std::vector<std::size_t>& home, double zero_rtol) {
  if (curves.empty()) throw DomainError("certificate_disjoint: empty family");
  if (home.size() != curves.size()) throw DomainError("certificate_disjoint: one home point per curve");
  require_common_grid(curves);
  const std::size_t n = curves.size();

  double peak = 0.0, min_diag = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double diag = curves[i].values.at(home[i]);
    peak = std::max(peak, std::abs(diag));
    min_diag = std::min(min_diag, diag);
  }
  if (!(min_diag > 0.0))
    throw CertificateRefused("certificate_disjoint: a diagonal value is not positive", 0, 0);

  const double zero_tol = zero_rtol * peak;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double cross = curves[i].values[home[j]];
      if (std::abs(cross) > zero_tol) {
        std::ostringstream msg;
        msg << "certificate_disjoint: q_" << i << "(mu_" << j << ") = " << cross
            << " exceeds the zero tolerance " << zero_tol;
        throw CertificateRefused(msg.str(), i, j);
      }
    }

  PackingCertificate cert;
  cert.form = CertificateForm::disjoint_support;
  cert.family_size = n;
  cert.epsilon = std::nextafter(min_diag, 0.0);
  cert.n_ent = n - 1;
  cert.bound = cert.epsilon;
  for (std::size_t i = 0; i < n; ++i) {
    cert.witnesses.push_back(curves[i].params[home[i]]);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double gap = std::abs(curves[i].values[home[i]] - curves[j].values[home[i]]);
      cert.log.push_back({i, j, home[i], gap});
    }
  }
  return cert;
}

PackingCertificate certificate_disjoint(const ProblemFamily& family, const FlowField& field,
                                        const std::vector<Vector>& grid,
                                        std::vector<QoICurve>* curves_out) {
  std::vector<std::size_t> home;
  for (const Vector& mu : family.params()) home.push_back(locate(grid, mu));
  std::vector<QoICurve> curves(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    const TransportProblem prob = family_problem(family, field, i);
    curves[i] = qoi_curve(prob, grid);
    curves[i].metadata["bump"] = std::to_string(i);
  }
  PackingCertificate cert = certificate_disjoint(curves, home);
  if (curves_out) *curves_out = std::move(curves);
  return cert;
}

PackingCertificate certificate_count(const std::vector<QoICurve>& curves, double epsilon,
                                     const std::vector<std::size_t>& preferred) {
  if (curves.size() < 2) throw DomainError("certificate_count: need at least two curves");
  require_common_grid(curves);
  const std::size_t m = curves.front().size();
  std::vector<std::size_t> order = preferred;
  for (std::size_t k = 0; k < m; ++k)
    if (std::find(preferred.begin(), preferred.end(), k) == preferred.end()) order.push_back(k);

  PackingCertificate cert;
  cert.form = CertificateForm::counting;
  cert.family_size = curves.size();
  cert.epsilon = epsilon;
  cert.n_ent = floor_log2(curves.size() - 1);
  cert.bound = epsilon / 2.0;

  std::vector<SeparationRecord> log;
  for (std::size_t a = 0; a < curves.size(); ++a)
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      bool found = false;
      for (std::size_t k : order) {
        const double gap = std::abs(curves[a].values[k] - curves[b].values[k]);
        if (gap > epsilon) {
          log.push_back({a, b, k, gap});
          found = true;
          break;
        }
      }
      if (!found) {
        std::ostringstream msg;
        msg << "certificate_count: curves " << a << " and " << b << " are not separated by "
            << epsilon << " on the grid";
        throw CertificateRefused(msg.str(), a, b);
      }
    }
  cert.log = std::move(log);
  for (const auto& rec : cert.log) cert.witnesses.push_back(curves[rec.first].params[rec.witness]);
  return cert;
}

std::string verify_certificate(const PackingCertificate& cert, const std::vector<QoICurve>& curves) {
  std::ostringstream msg;
  if (cert.family_size != curves.size()) return "family size does not match the curve set";
  const std::size_t expect_n = cert.form == CertificateForm::disjoint_support
                                   ? cert.family_size - 1
                                   : floor_log2(cert.family_size - 1);
  if (cert.n_ent != expect_n) return "entropy index inconsistent with family size";
  const double expect_bound = cert.form == CertificateForm::disjoint_support ? cert.epsilon : cert.epsilon / 2;
  if (cert.bound != expect_bound) return "bound inconsistent with epsilon";
  for (const auto& rec : cert.log) {
    const double gap = std::abs(curves.at(rec.first).values.at(rec.witness) -
                                curves.at(rec.second).values.at(rec.witness));
    if (!(gap > cert.epsilon)) {
      msg << "pair (" << rec.first << ", " << rec.second << ") separation " << gap
          << " does not exceed " << cert.epsilon;
      return msg.str();
    }
  }
  if (cert.form == CertificateForm::counting) {
    const std::size_t pairs = cert.family_size * (cert.family_size - 1) / 2;
    if (cert.log.size() != pairs) return "counting certificate must log every pair";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Variable flow family

std::vector<std::vector<int>> nonzero_bits(std::size_t n) {
  std::vector<std::vector<int>> out;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::vector<int> bits(n);
    for (std::size_t j = 0; j < n; ++j) bits[j] = (mask >> j) & 1;
    out.push_back(std::move(bits));
  }
  return out;
}

VariableBFamily variable_b_family(const VariableBOptions& options,
                                  std::vector<std::vector<int>> thetas,
                                  std::vector<std::vector<int>> varthetas) {
  if (options.d < 2) throw DomainError("variable_b_family: d must be at least 2");
  if (options.D < 1) throw DomainError("variable_b_family: D must be at least 1");

  const ReferenceMap map = ReferenceMap::identity(options.d);
  FamilyOptions fo;
  fo.h = options.h;
  fo.s_minus = options.s_minus;
  fo.s_plus = options.s_plus;
  fo.p = options.p;
  fo.d_bar = options.d - 2;
  fo.tail = Vector::Constant(1, 5.0 * options.h);
  const ProblemFamily family = build_family(make_flow(map), fo);
  if (family.size() > static_cast<std::size_t>(options.max_n))
    throw DomainError("variable_b_family: " + std::to_string(family.size()) +
                      " inflow bumps exceed max_n = " + std::to_string(options.max_n));

  const std::size_t K = std::min<std::size_t>(
      SwitchFunction::natural_count(options.D, options.h, options.s_b), options.max_K);

  VariableBFamily out;
  out.options = options;
  out.n = family.size();
  out.K = K;
  out.thetas = thetas.empty() ? nonzero_bits(out.n) : std::move(thetas);
  out.varthetas = varthetas.empty() ? nonzero_bits(K) : std::move(varthetas);
  for (const auto& t : out.thetas)
    if (t.size() != out.n || std::count(t.begin(), t.end(), 1) == 0)
      throw DomainError("variable_b_family: theta must be a nonzero vector of length n");
  for (const auto& v : out.varthetas)
    if (v.size() != K || std::count(v.begin(), v.end(), 1) == 0)
      throw DomainError("variable_b_family: vartheta must be a nonzero vector of length K");

  const SwitchFunction probe(options.D, options.h, options.s_b, std::vector<int>(K, 0),
                             static_cast<int>(K));
  for (std::size_t i = 0; i < out.n; ++i)
    for (std::size_t k = 0; k < K; ++k) {
      const Vector mu_bar = family.params()[i].head(options.d - 2);
      Vector mu(mu_bar.size() + options.D);
      mu << mu_bar, probe.centers()[k];
      out.grid.push_back(mu);
    }

  for (std::size_t a = 0; a < out.thetas.size(); ++a)
    for (std::size_t b = 0; b < out.varthetas.size(); ++b) {
      if (out.labels.size() == options.max_curves) break;
      out.labels.emplace_back(a, b);
    }

  std::vector<FlowField> fields;
  for (const auto& v : out.varthetas)
    fields.push_back(make_switched_flow(
        map, SwitchFunction(options.D, options.h, options.s_b, v, static_cast<int>(K)), options.s_b));

  out.curves.resize(out.labels.size());
  parallel_for(out.labels.size(), [&](std::size_t c) {
    const auto [a, b] = out.labels[c];
    const TransportProblem prob = family_problem(family, fields[b], out.thetas[a]);
    QoICurve curve;
    curve.params = out.grid;
    curve.values.resize(out.grid.size());
    for (std::size_t g = 0; g < out.grid.size(); ++g) curve.values[g] = qoi(prob, out.grid[g]);
    curve.metadata["theta"] = std::to_string(a);
    curve.metadata["vartheta"] = std::to_string(b);
    out.curves[c] = std::move(curve);
  });

  double diag = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < out.curves.size(); ++c) {
    const auto [a, b] = out.labels[c];
    for (std::size_t i = 0; i < out.n; ++i)
      for (std::size_t k = 0; k < K; ++k) {
        const double v = out.curves[c].values[i * K + k];
        out.peak = std::max(out.peak, std::abs(v));
        if (out.thetas[a][i] && out.varthetas[b][k]) diag = std::min(diag, v);
      }
  }
  out.diagonal = diag;
  return out;
}

std::string check_product_structure(const VariableBFamily& family, double epsilon, double tol) {
  std::ostringstream msg;
  for (std::size_t c = 0; c < family.curves.size(); ++c) {
    const auto [a, b] = family.labels[c];
    for (std::size_t i = 0; i < family.n; ++i)
      for (std::size_t k = 0; k < family.K; ++k) {
        const double v = family.curves[c].values[i * family.K + k];
        const bool on = family.thetas[a][i] && family.varthetas[b][k];
        if (on && !(v > epsilon)) {
          msg << "curve " << c << " value(" << i << "," << k << ") = " << v << " not above " << epsilon;
          return msg.str();
        }
        if (!on && !(std::abs(v) < tol)) {
          msg << "curve " << c << " value(" << i << "," << k << ") = " << v << " not below " << tol;
          return msg.str();
        }
      }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Covers and packings

CoverResult greedy_cover_centers(const std::vector<QoICurve>& curves, double epsilon) {
  CoverResult out;
  if (curves.empty()) return out;
  require_common_grid(curves);
  std::vector<double> nearest(curves.size(), std::numeric_limits<double>::infinity());
  std::size_t next = 0;
  while (true) {
    out.centers.push_back(next);
    for (std::size_t j = 0; j < curves.size(); ++j)
      nearest[j] = std::min(nearest[j], sup_distance(curves[j], curves[next]));
    std::size_t far = 0;
    for (std::size_t j = 1; j < curves.size(); ++j)
      if (nearest[j] > nearest[far]) far = j;
    out.radius = nearest[far];
    if (out.radius <= epsilon) break;
    next = far;
  }
  return out;
}

std::size_t greedy_cover(const std::vector<QoICurve>& curves, double epsilon) {
  return greedy_cover_centers(curves, epsilon).size();
}

std::size_t packing_count(const std::vector<QoICurve>& curves, double separation) {
  std::vector<std::size_t> chosen;
  for (std::size_t j = 0; j < curves.size(); ++j) {
    bool separated = true;
    for (std::size_t c : chosen)
      if (!(sup_distance(curves[j], curves[c]) > separation)) {
        separated = false;
        break;
      }
    if (separated) chosen.push_back(j);
  }
  return chosen.size();
}

BitCodec::BitCodec(const std::vector<QoICurve>& curves, const CoverResult& cover) {
  for (std::size_t c : cover.centers) centers_.push_back(curves.at(c));
  if (centers_.empty()) throw DomainError("BitCodec: empty cover");
}

std::size_t BitCodec::bits() const {
  std::size_t b = 0;
  while ((std::size_t{1} << b) < centers_.size()) ++b;
  return b;
}

std::size_t BitCodec::encode(const QoICurve& q) const {
  std::size_t best = 0;
  double best_d = sup_distance(q, centers_[0]);
  for (std::size_t c = 1; c < centers_.size(); ++c) {
    const double d = sup_distance(q, centers_[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

const QoICurve& BitCodec::decode(std::size_t code) const { return centers_.at(code); }

double BitCodec::worst_error(const std::vector<QoICurve>& curves) const {
  double worst = 0.0;
  for (const auto& q : curves) worst = std::max(worst, sup_distance(q, decode(encode(q))));
  return worst;
}

// ---------------------------------------------------------------------------
// Rates and smoothness

RateFit rate_fit(const std::vector<std::pair<double, double>>& samples, double alpha_theory) {
  if (samples.size() < 3) throw DomainError("rate_fit: need at least three samples");
  double n_min = std::numeric_limits<double>::infinity(), n_max = 0.0;
  for (const auto& [n, bound] : samples) {
    if (!(n > 0.0) || !(bound > 0.0)) throw DomainError("rate_fit: samples must be positive");
    n_min = std::min(n_min, n);
    n_max = std::max(n_max, n);
  }
  if (n_max < 4.0 * n_min) throw DomainError("rate_fit: samples must span a factor of 4 in n");

  Matrix design(samples.size(), 2);
  Vector rhs(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    design(k, 0) = 1.0;
    design(k, 1) = std::log(samples[k].first);
    rhs[k] = std::log(samples[k].second);
  }
  const Vector coef = design.colPivHouseholderQr().solve(rhs);
  RateFit fit;
  fit.samples = samples;
  fit.alpha_hat = -coef[1];
  fit.residual = std::sqrt((design * coef - rhs).squaredNorm() / samples.size());
  fit.alpha_theory = alpha_theory;
  return fit;
}

namespace {

double central_difference(const std::function<double(double)>& q, double x, int order, double step) {
  // sum_j (-1)^j C(order, j) q(x + (order/2 - j) step) / step^order
  double acc = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= order; ++j) {
    const double offset = (0.5 * order - j) * step;
    acc += ((j % 2) ? -binom : binom) * q(x + offset);
    binom = binom * (order - j) / (j + 1);
  }
  return acc / std::pow(step, order);
}

}  // namespace

SmoothnessReport smoothness_probe(const std::function<double(double)>& q, double lower,
                                  double upper, int order, std::size_t points, double threshold) {
  if (order < 1) throw DomainError("smoothness_probe: order must be positive");
  constexpr double steps[3] = {1e-2, 5e-3, 2.5e-3};
  const double reach = 0.5 * order * steps[0];
  if (upper - lower <= 2 * reach) throw DomainError("smoothness_probe: interval too short");
  const double a = lower + reach, b = upper - reach;

  std::vector<double> coarse(points), fine(points);
  parallel_for(points, [&](std::size_t k) {
    const double x = points == 1 ? 0.5 * (a + b) : a + (b - a) * k / (points - 1);
    const double d0 = central_difference(q, x, order, steps[0]);
    const double d1 = central_difference(q, x, order, steps[1]);
    const double d2 = central_difference(q, x, order, steps[2]);
    coarse[k] = (4.0 * d1 - d0) / 3.0;
    fine[k] = (4.0 * d2 - d1) / 3.0;
  });

  SmoothnessReport report;
  for (double v : fine) report.max_abs = std::max(report.max_abs, std::abs(v));
  double disagreement = 0.0;
  for (std::size_t k = 0; k < points; ++k)
    disagreement = std::max(disagreement, std::abs(fine[k] - coarse[k]));
  report.worst_disagreement = report.max_abs > 0 ? disagreement / report.max_abs : disagreement;
  report.consistent = report.worst_disagreement <= threshold;
  return report;
}

double piecewise_poly_upper(const std::vector<double>& mu, const std::vector<double>& values,
                            int degree, int pieces) {
  if (mu.size() != values.size() || mu.empty())
    throw DomainError("piecewise_poly_upper: samples and values differ in length");
  if (degree < 0 || pieces < 1) throw DomainError("piecewise_poly_upper: invalid degree or pieces");
  const auto [lo_it, hi_it] = std::minmax_element(mu.begin(), mu.end());
  const double lo = *lo_it, hi = *hi_it;
  const double width = (hi - lo) / pieces;

  std::vector<std::vector<std::size_t>> members(pieces);
  for (std::size_t k = 0; k < mu.size(); ++k) {
    int piece = width > 0 ? static_cast<int>(std::floor((mu[k] - lo) / width)) : 0;
    members[std::clamp(piece, 0, pieces - 1)].push_back(k);
  }

  double worst = 0.0;
  for (int piece = 0; piece < pieces; ++piece) {
    const auto& idx = members[piece];
    if (idx.size() < static_cast<std::size_t>(degree + 1))
      throw DomainError("piecewise_poly_upper: piece " + std::to_string(piece) +
                        " has fewer samples than coefficients");
    const double center = lo + (piece + 0.5) * width;
    const double half = width > 0 ? 0.5 * width : 1.0;
    Matrix vander(idx.size(), degree + 1);
    Vector rhs(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const double s = (mu[idx[r]] - center) / half;
      double power = 1.0;
      for (int c = 0; c <= degree; ++c) {
        vander(r, c) = power;
        power *= s;
      }
      rhs[r] = values[idx[r]];
    }
    const Vector coef = vander.colPivHouseholderQr().solve(rhs);
    worst = std::max(worst, (vander * coef - rhs).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace widthlab
