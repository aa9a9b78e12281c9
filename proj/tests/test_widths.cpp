#include "widthlab/widths.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace widthlab;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

std::vector<Vector> index_grid(std::size_t m) {
  std::vector<Vector> g;
  for (std::size_t k = 0; k < m; ++k) g.push_back(v1(static_cast<double>(k)));
  return g;
}

QoICurve curve(std::vector<double> values) {
  QoICurve c;
  c.params = index_grid(values.size());
  c.values = std::move(values);
  return c;
}

// Exact sup distance on the same grid, written out independently.
double sup_gap(const QoICurve& a, const QoICurve& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) d = std::max(d, std::fabs(a.values[k] - b.values[k]));
  return d;
}

std::vector<QoICurve> random_class(std::size_t count, std::size_t points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<QoICurve> out;
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<double> v(points);
    for (double& x : v) x = u(rng);
    out.push_back(curve(v));
  }
  return out;
}

}  // namespace

TEST_CASE("disjoint certificate from a diagonal family") {
  std::vector<QoICurve> curves{curve({0.7, 0.0, 0.0}), curve({0.0, 0.5, 0.0}), curve({0.0, 0.0, 0.9})};
  const PackingCertificate cert = certificate_disjoint(curves, {0, 1, 2});
  CHECK(cert.form == CertificateForm::disjoint_support);
  CHECK(cert.family_size == 3);
  CHECK(cert.n_ent == 2);
  CHECK(cert.epsilon < 0.5);
  CHECK(cert.epsilon == std::nextafter(0.5, 0.0));
  CHECK(cert.bound == cert.epsilon);
  CHECK(cert.log.size() == 6);
  CHECK(verify_certificate(cert, curves).empty());

  const PackingCertificate one = certificate_disjoint({curve({0.3})}, {0});
  CHECK(one.n_ent == 0);
  CHECK(one.epsilon == std::nextafter(0.3, 0.0));
}

TEST_CASE("disjoint certificate refuses a nonzero cross term and names the pair") {
  std::vector<QoICurve> curves{curve({1.0, 0.0}), curve({1e-6, 1.0})};
  try {
    certificate_disjoint(curves, {0, 1});
    FAIL("expected a refusal");
  } catch (const CertificateRefused& e) {
    CHECK(e.first() == 1);
    CHECK(e.second() == 0);
    CHECK(std::string(e.what()).find("q_1(mu_0)") != std::string::npos);
  }
  CHECK_THROWS_AS(certificate_disjoint(curves, {0}), DomainError);
}

TEST_CASE("verify_certificate catches tampering") {
  std::vector<QoICurve> curves{curve({0.7, 0.0}), curve({0.0, 0.5})};
  PackingCertificate cert = certificate_disjoint(curves, {0, 1});
  cert.n_ent = 5;
  CHECK_FALSE(verify_certificate(cert, curves).empty());
  cert = certificate_disjoint(curves, {0, 1});
  cert.epsilon = 0.6;
  cert.bound = 0.6;
  CHECK_FALSE(verify_certificate(cert, curves).empty());
}

TEST_CASE("counting certificate") {
  SUBCASE("two curves with gap 0.3") {
    std::vector<QoICurve> curves{curve({0.0, 0.0}), curve({0.0, 0.3})};
    const PackingCertificate cert = certificate_count(curves, 0.2);
    CHECK(cert.n_ent == 0);
    CHECK(cert.bound == doctest::Approx(0.1));
    REQUIRE(cert.log.size() == 1);
    CHECK(cert.log[0].witness == 1);
    CHECK(verify_certificate(cert, curves).empty());
    CHECK_THROWS_AS(certificate_count(curves, 0.3), CertificateRefused);
  }
  SUBCASE("nine well separated curves") {
    std::vector<QoICurve> curves;
    for (int j = 0; j < 9; ++j) curves.push_back(curve({static_cast<double>(j)}));
    const PackingCertificate cert = certificate_count(curves, 0.5);
    CHECK(cert.n_ent == 3);
    CHECK(cert.log.size() == 36);
    CHECK(verify_certificate(cert, curves).empty());
  }
  SUBCASE("an unseparated pair is refused by name") {
    std::vector<QoICurve> curves{curve({0.0, 1.0}), curve({1.0, 0.0}), curve({0.05, 1.02})};
    try {
      certificate_count(curves, 0.2);
      FAIL("expected a refusal");
    } catch (const CertificateRefused& e) {
      CHECK(e.first() == 0);
      CHECK(e.second() == 2);
    }
  }
  SUBCASE("preferred witnesses are tried first") {
    std::vector<QoICurve> curves{curve({0.0, 0.0}), curve({1.0, 1.0})};
    CHECK(certificate_count(curves, 0.5, {1}).log[0].witness == 1);
  }
}

TEST_CASE("fixed-flow certificate on the transported family") {
  for (double h : {0.1, 0.05}) {
    FamilyOptions opt;
    opt.h = h;
    const FlowField field = make_flow(ReferenceMap::curved(2, 0.1));
    const ProblemFamily fam = build_family(field, opt);
    std::vector<QoICurve> curves;
    const auto grid = uniform_grid_1d(-0.5, 0.5, 41);
    const PackingCertificate cert = certificate_disjoint(fam, field, grid, &curves);
    CHECK(cert.family_size == fam.size());
    CHECK(cert.epsilon == doctest::Approx(fam.diagonal_value()).epsilon(1e-8));
    CHECK(verify_certificate(cert, curves).empty());
  }
}

TEST_CASE("epsilon scales like h^(s_- + s_+ + d - 1)") {
  // with the norms fixed, the diagonal value is c_- c_+ h^{s_- + s_+} int psi_h^2
  for (int d : {2, 3}) {
    std::vector<std::pair<double, double>> samples;
    for (double h : {0.1, 0.05, 0.025}) {
      if (d == 3 && h < 0.05) continue;
      FamilyOptions opt;
      opt.h = h;
      opt.d_bar = d - 1;
      const ProblemFamily fam = build_family(make_flow(ReferenceMap::identity(d)), opt);
      samples.emplace_back(1.0 / h, fam.diagonal_value());
    }
    if (d == 2) {
      const RateFit fit = rate_fit(samples);
      // c_- drifts with n h^{d-1} since n = floor(1/(5h)) + 1, hence the loose tolerance
      CHECK(fit.alpha_hat == doctest::Approx(3.0).epsilon(0.1));
    } else {
      const double slope = std::log(samples[0].second / samples[1].second) / std::log(2.0);
      CHECK(slope == doctest::Approx(4.0).epsilon(0.1));
    }
  }
}

TEST_CASE("variable-flow family has product structure") {
  VariableBOptions opt;
  opt.h = 0.1;
  opt.d = 3;
  const std::vector<std::vector<int>> e1{{1, 0, 0}};
  const VariableBFamily single = variable_b_family(opt, e1, e1);
  REQUIRE(single.curves.size() == 1);
  CHECK(single.n == 3);
  CHECK(single.K == 3);
  CHECK(single.grid.size() == 9);
  const double peak = single.peak;
  CHECK(single.curves[0].values[0] > 0.5 * peak);
  for (std::size_t g = 1; g < single.grid.size(); ++g) CHECK(std::abs(single.curves[0].values[g]) < 1e-12 * peak);
  CHECK(check_product_structure(single, 0.5 * single.diagonal, 1e-12 * peak).empty());

  const VariableBFamily mixed = variable_b_family(opt, {{1, 0, 1}, {0, 1, 0}}, {{0, 1, 1}, {1, 0, 0}});
  CHECK(mixed.curves.size() == 4);
  CHECK(check_product_structure(mixed, 0.5 * mixed.diagonal, 1e-12 * mixed.peak).empty());
  const PackingCertificate cert = certificate_count(mixed.curves, std::nextafter(mixed.diagonal, 0.0));
  CHECK(cert.n_ent == 1);
  CHECK(verify_certificate(cert, mixed.curves).empty());
  CHECK_THROWS_AS(variable_b_family(opt, {{0, 0, 0}}, e1), DomainError);
}

TEST_CASE("nonzero bit vectors") {
  const auto bits = nonzero_bits(3);
  REQUIRE(bits.size() == 7);
  CHECK(bits[0] == std::vector<int>{1, 0, 0});
  CHECK(bits[6] == std::vector<int>{1, 1, 1});
}

TEST_CASE("greedy cover") {
  std::vector<QoICurve> line;
  for (int j = 0; j <= 10; ++j) line.push_back(curve({0.1 * j}));
  CHECK(greedy_cover(line, 1.0) == 1);
  CHECK(greedy_cover(line, 0.0) == 11);
  const CoverResult cover = greedy_cover_centers(line, 0.3);
  CHECK(cover.centers[0] == 0);
  CHECK(cover.centers[1] == 10);
  CHECK(cover.radius <= 0.3);

  const auto cls = random_class(40, 6, 7);
  std::size_t prev = greedy_cover(cls, 0.0);
  for (double eps : {0.2, 0.5, 0.8, 1.2, 2.0}) {
    const CoverResult c = greedy_cover_centers(cls, eps);
    CHECK(c.size() <= prev);
    prev = c.size();
    // every curve sits within the radius of some center
    for (const auto& q : cls) {
      double best = 1e300;
      for (std::size_t k : c.centers) best = std::min(best, sup_gap(q, cls[k]));
      CHECK(best <= c.radius);
    }
    CHECK(c.radius <= eps);
    // a 2 eps packing has at most one point per eps ball
    CHECK(packing_count(cls, 2 * eps) <= c.size());
  }
}

TEST_CASE("bit codec reproduces the cover radius") {
  const auto cls = random_class(30, 5, 11);
  for (double eps : {0.3, 0.9, 1.5}) {
    const CoverResult cover = greedy_cover_centers(cls, eps);
    const BitCodec codec(cls, cover);
    CHECK(codec.worst_error(cls) == cover.radius);
    CHECK((std::size_t{1} << codec.bits()) >= cover.size());
    if (codec.bits() > 0) CHECK((std::size_t{1} << (codec.bits() - 1)) < cover.size());
    for (std::size_t k : cover.centers) CHECK(sup_gap(codec.decode(codec.encode(cls[k])), cls[k]) == 0.0);
  }
}

TEST_CASE("rate fit") {
  std::vector<std::pair<double, double>> cube;
  for (double n : {2.0, 4.0, 8.0, 16.0}) cube.emplace_back(n, 5.0 * std::pow(n, -3.0));
  const RateFit fit = rate_fit(cube, 3.0);
  CHECK(fit.alpha_hat == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.residual < 1e-12);
  CHECK(fit.alpha_theory == 3.0);
  CHECK(rate_fit({{1, 2}, {3, 2}, {9, 2}}).alpha_hat == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(rate_fit({{1, 1}, {4, 1}}), DomainError);
  CHECK_THROWS_AS(rate_fit({{1, 1}, {2, 1}, {3, 1}}), DomainError);
  CHECK_THROWS_AS(rate_fit({{1, 1}, {2, 0}, {8, 1}}), DomainError);
}

TEST_CASE("smoothness probe") {
  const auto square = [](double x) { return x * x; };
  const SmoothnessReport r = smoothness_probe(square, -0.5, 0.5, 2);
  CHECK(r.max_abs == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(r.consistent);
  const SmoothnessReport cubic = smoothness_probe([](double x) { return x * x * x; }, -0.5, 0.5, 1);
  CHECK(cubic.max_abs == doctest::Approx(3 * 0.495 * 0.495).epsilon(1e-6));
  // a kink inside the interval spoils the second difference
  const SmoothnessReport kink = smoothness_probe([](double x) { return std::abs(x - 0.0013); }, -0.5, 0.5, 2, 401);
  CHECK_FALSE(kink.consistent);
  CHECK_THROWS_AS(smoothness_probe(square, 0.0, 0.005, 2), DomainError);
  CHECK_THROWS_AS(smoothness_probe(square, -1, 1, 0), DomainError);
}

TEST_CASE("piecewise polynomial upper bound") {
  std::vector<double> mu, lin, absval;
  for (int k = 0; k <= 2000; ++k) {
    mu.push_back(-1.0 + k / 1000.0);
    lin.push_back(3.0 * mu.back() - 1.0);
    absval.push_back(std::abs(mu.back()));
  }
  CHECK(piecewise_poly_upper(mu, lin, 1, 3) < 1e-12);
  CHECK(piecewise_poly_upper(mu, absval, 1, 2) < 1e-12);
  const double e4 = piecewise_poly_upper(mu, absval, 0, 4);
  const double e8 = piecewise_poly_upper(mu, absval, 0, 8);
  CHECK(e4 / e8 == doctest::Approx(2.0).epsilon(0.01));
  CHECK_THROWS_AS(piecewise_poly_upper({0.0, 1.0}, {0.0, 1.0}, 3, 1), DomainError);
  CHECK_THROWS_AS(piecewise_poly_upper({0.0, 1.0}, {0.0}, 1, 1), DomainError);
}
