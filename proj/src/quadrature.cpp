#include "widthlab/quadrature.hpp"

namespace widthlab {

CompositeRule composite_gauss(double a, double b, int panels, int order) {
  if (panels < 1) throw DomainError("composite_gauss: panels must be positive");
  static thread_local int cached_order = -1;
  static thread_local GaussRule<double> cached;
  if (cached_order != order) {
    cached = gauss_legendre<double>(order);
    cached_order = order;
  }
  CompositeRule rule;
  rule.x.reserve(static_cast<std::size_t>(panels) * order);
  rule.w.reserve(static_cast<std::size_t>(panels) * order);
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double left = a + p * width;
    const double mid = left + 0.5 * width;
    for (int i = 0; i < order; ++i) {
      rule.x.push_back(mid + 0.5 * width * cached.nodes[i]);
      rule.w.push_back(0.5 * width * cached.weights[i]);
    }
  }
  return rule;
}

}  // namespace widthlab
