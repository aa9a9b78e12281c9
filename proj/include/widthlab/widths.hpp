#pragma once

#include "widthlab/bumps.hpp"
#include "widthlab/common.hpp"
#include "widthlab/transport.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace widthlab {

// One verified separation: curves `first` and `second` differ by
// `separation` at grid point `witness`.
struct SeparationRecord {
  std::size_t first = 0;
  std::size_t second = 0;
  std::size_t witness = 0;
  double separation = 0.0;
};

enum class CertificateForm { disjoint_support, counting };

// A verified finite family of pairwise-separated elements of a class. The
// disjoint-support form certifies eps_{n-1}(K) > epsilon; the counting form
// certifies eps_{floor(log2(|Theta| - 1))}(K) > epsilon / 2.
struct PackingCertificate {
  CertificateForm form = CertificateForm::disjoint_support;
  std::size_t family_size = 0;
  double epsilon = 0.0;
  std::size_t n_ent = 0;
  double bound = 0.0;
  std::vector<Vector> witnesses;       // parameter of every logged witness index
  std::vector<SeparationRecord> log;
};

// Disjoint-support certificate from the curves q_i sampled on a common grid.
// `home[i]` is the grid index of mu_i. Cross terms |q_i(mu_j)| must stay
// below zero_rtol * max_i q_i(mu_i); epsilon is the largest double strictly
// below min_i q_i(mu_i).
PackingCertificate certificate_disjoint(const std::vector<QoICurve>& curves,
                                        const std::vector<std::size_t>& home,
                                        double zero_rtol = 1e-12);

// Evaluates q_i for every bump of `family` transported by `field` on `grid`
// (which must contain every mu_i) and certifies them.
PackingCertificate certificate_disjoint(const ProblemFamily& family, const FlowField& field,
                                        const std::vector<Vector>& grid,
                                        std::vector<QoICurve>* curves_out = nullptr);

// Counting certificate: every pair needs a grid witness with gap > epsilon.
// Witnesses in `preferred` are tried first.
PackingCertificate certificate_count(const std::vector<QoICurve>& curves, double epsilon,
                                     const std::vector<std::size_t>& preferred = {});

// Re-checks a certificate against raw curve values. Returns an empty string on
// success, otherwise a description of the first failure.
std::string verify_certificate(const PackingCertificate& cert, const std::vector<QoICurve>& curves);

// Variable-flow family: inflows sum_i theta_i g_-,i, flows switched by
// vartheta, evaluated on the natural grid {(mu_bar_i, mu_hat_k)}.
struct VariableBOptions {
  double h = 0.1;
  int d = 3;
  int D = 1;
  int s_b = 1;
  int s_minus = 1;
  int s_plus = 1;
  double p = 2.0;
  int max_n = 4;
  int max_K = 4;
  std::size_t max_curves = 256;
};

struct VariableBFamily {
  VariableBOptions options;
  std::size_t n = 0;  // inflow bumps
  std::size_t K = 0;  // switch centers
  std::vector<std::vector<int>> thetas;
  std::vector<std::vector<int>> varthetas;
  std::vector<std::pair<std::size_t, std::size_t>> labels;  // (theta index, vartheta index) per curve
  std::vector<QoICurve> curves;       // grid index = i * K + k
  std::vector<Vector> grid;           // (mu_bar_i, mu_hat_k)
  double diagonal = 0.0;              // min over i of q at a switched-on grid point
  double peak = 0.0;
};

// All nonzero bit vectors of length n in increasing binary order.
std::vector<std::vector<int>> nonzero_bits(std::size_t n);

VariableBFamily variable_b_family(const VariableBOptions& options,
                                  std::vector<std::vector<int>> thetas = {},
                                  std::vector<std::vector<int>> varthetas = {});

// value(i, k) > epsilon iff theta_i = vartheta_k = 1, else |value| < tol.
// Returns an empty string when the structure holds.
std::string check_product_structure(const VariableBFamily& family, double epsilon, double tol);

// Greedy farthest-point cover in the sup norm over the grid, started from
// curve 0. The center order does not depend on epsilon.
struct CoverResult {
  std::vector<std::size_t> centers;
  double radius = 0.0;  // max over curves of the distance to the nearest center
  std::size_t size() const { return centers.size(); }
};
CoverResult greedy_cover_centers(const std::vector<QoICurve>& curves, double epsilon);
std::size_t greedy_cover(const std::vector<QoICurve>& curves, double epsilon);

// Size of a greedy maximal subset with pairwise sup distance > separation.
std::size_t packing_count(const std::vector<QoICurve>& curves, double separation);

// n-bit encoder/decoder from a cover: encode picks the nearest center,
// decode returns it.
class BitCodec {
public:
  BitCodec(const std::vector<QoICurve>& curves, const CoverResult& cover);
  std::size_t bits() const;
  std::size_t encode(const QoICurve& q) const;
  const QoICurve& decode(std::size_t code) const;
  // max over the class of ||q - decode(encode(q))||
  double worst_error(const std::vector<QoICurve>& curves) const;

private:
  std::vector<QoICurve> centers_;
};

struct RateFit {
  std::vector<std::pair<double, double>> samples;  // (n, bound)
  double alpha_hat = 0.0;   // bound ~ n^{-alpha_hat}
  double residual = 0.0;    // rms residual of the log-log fit
  double alpha_theory = 0.0;
};

// Least-squares slope of log(bound) against log(n). Needs at least three
// samples spanning a factor of 4 in n.
RateFit rate_fit(const std::vector<std::pair<double, double>>& samples, double alpha_theory = 0.0);

struct SmoothnessReport {
  double max_abs = 0.0;
  bool consistent = true;
  double worst_disagreement = 0.0;  // relative to max_abs
};

// Central differences of `order` on the step ladder {1e-2, 5e-3, 2.5e-3},
// Richardson-extrapolated, at `points` probe locations in [lower, upper].
SmoothnessReport smoothness_probe(const std::function<double(double)>& q, double lower,
                                  double upper, int order, std::size_t points = 41,
                                  double threshold = 0.1);

// Sup error over the samples of a least-squares piecewise polynomial fit of
// the given degree on `pieces` uniform pieces.
double piecewise_poly_upper(const std::vector<double>& mu, const std::vector<double>& values,
                            int degree, int pieces);

}  // namespace widthlab
