// One line per acceptance criterion; exit status is nonzero if any fails.
#include "widthlab/experiments.hpp"
#include "widthlab/widths.hpp"

#include <fmt/core.h>

#include <chrono>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace widthlab;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

// Collects the assertions whose names start with any of the prefixes.
Outcome select(const RunReport& report, const std::vector<std::string>& prefixes) {
  Outcome o;
  std::string last, failures;
  for (const Assertion& a : report.assertions)
    for (const std::string& p : prefixes)
      if (a.name.rfind(p, 0) == 0) {
        last = a.name + ": " + a.measurement;
        if (!a.passed) {
          o.passed = false;
          failures += (failures.empty() ? "" : "; ") + last;
        }
        break;
      }
  if (last.empty()) return {false, "no matching assertions"};
  // failures when there are any, else the last (usually summarizing) assertion
  o.detail = o.passed ? last : failures;
  return o;
}

RunReport timed(ExperimentKind kind, double limit, Outcome& budget) {
  const auto start = std::chrono::steady_clock::now();
  RunReport r = run(default_config(kind));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  budget.passed = secs < limit;
  budget.detail = fmt::format("wall {:.1f} s, limit {:.0f} s", secs, limit);
  return r;
}

Outcome merge(Outcome a, const Outcome& b) {
  a.passed = a.passed && b.passed;
  a.detail += "; " + b.detail;
  return a;
}

Outcome synthetic_codec() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<QoICurve> cls(8);
  for (QoICurve& q : cls) {
    q.params = uniform_grid_1d(-1, 1, 16);
    for (int k = 0; k < 16; ++k) q.values.push_back(u(rng));
  }
  Outcome o;
  for (double eps : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    const CoverResult cover = greedy_cover_centers(cls, eps);
    const BitCodec codec(cls, cover);
    const double worst = codec.worst_error(cls);
    const std::size_t packing = packing_count(cls, 2 * eps);
    const bool ok = worst == cover.radius && cover.radius <= eps && packing <= cover.size();
    o.passed = o.passed && ok;
    if (!o.detail.empty()) o.detail += ", ";
    o.detail += fmt::format("eps {}: cover {} ({} bits) error {:.3f} packing {}", eps, cover.size(),
                            codec.bits(), worst, packing);
  }
  return o;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
  RunReport fixed;
  criteria.emplace_back("fixed-flow entropy exponent", [&] {
    Outcome budget;
    fixed = timed(ExperimentKind::fixed_b, 60.0, budget);
    return merge(select(fixed, {"certificate", "entropy exponent"}), budget);
  });
  criteria.emplace_back("cross terms vanish on disjoint supports",
                        [&] { return select(fixed, {"cross terms", "disjoint supports"}); });
  criteria.emplace_back("variable-flow counting certificate", [] {
    Outcome budget;
    const RunReport r = timed(ExperimentKind::variable_b, 300.0, budget);
    return merge(select(r, {"product structure", "counting certificate"}), budget);
  });
  criteria.emplace_back("upper bound smoothness and piecewise rate", [] {
    return select(run(default_config(ExperimentKind::upper_bound)), {"order", "piecewise"});
  });
  criteria.emplace_back("source term invariance", [] {
    return select(run(default_config(ExperimentKind::rhs_invariance)), {"difference curves"});
  });
  criteria.emplace_back("shear flow convolution and rk4 tracing", [] {
    return select(run(default_config(ExperimentKind::convolution)), {"characteristic", "rk4"});
  });
  criteria.emplace_back("riemann parameter recovery",
                        [] { return select(run(default_config(ExperimentKind::riemann)), {"parameter"}); });
  criteria.emplace_back("reduced basis consistency and decay", [] {
    return select(run(default_config(ExperimentKind::rb_elliptic)), {"geometric", "online", "cea"});
  });
  criteria.emplace_back("transport snapshot singular value decay", [] {
    return select(run(default_config(ExperimentKind::svd_transport)), {"snapshot"});
  });
  criteria.emplace_back("bit codec and cover duality", synthetic_codec);

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.passed;
    fmt::print("criterion {:2} [{}] {}: {}\n", k + 1, o.passed ? "PASS" : "FAIL", criteria[k].first, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
