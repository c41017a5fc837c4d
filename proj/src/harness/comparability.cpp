#include "besselp/error.hpp"
#include "besselp/harness.hpp"

#include <cmath>
#include <limits>

namespace besselp::harness {

std::pair<double, double> comparability_bracket(double lambda) {
  const double e = lambda + 1.0;
  const double lo = 0.5 * std::pow(0.5, e) * std::pow(4.0 / 9.0, e);
  const double hi = 2.0 * std::pow(2.0, e) * std::pow(4.0, e);
  return {lo, hi};
}

void check_box_comparability(const TwoWeightInstance& inst, std::span<const std::size_t> f_atoms,
                             const DyadicInterval& j, ComparabilityReport& report) {
  if (f_atoms.empty()) return;
  const auto [lo, hi] = comparability_bracket(inst.p.lambda);
  report.c_lo = lo;
  report.c_hi = hi;
  if (report.samples == 0) {
    report.min_ratio = std::numeric_limits<double>::infinity();
    report.max_ratio = 0.0;
  }
  const double len = j.length();
  const double xj = j.center();
  auto p_sigma = [&](double x, double t) {
    double v = 0.0;
    for (std::size_t i : f_atoms) v += eval_kernel(inst.p, {x, inst.sigma[i].y, t}) * inst.sigma[i].w;
    return v;
  };

  double reference = -1.0;
  for (double fx : {0.25, 0.5, 0.75}) {
    const double x = j.left() + fx * len;
    bool admissible = true;
    for (std::size_t i : f_atoms) {
      if (!(std::abs(x - inst.sigma[i].y) > len)) admissible = false;
    }
    if (!admissible) {
      report.skipped += 3;
      continue;
    }
    if (reference < 0.0) reference = p_sigma(xj, len);
    for (double ft : {1.0, 0.5, 0.125}) {
      const double t = ft * len;
      const double ratio = p_sigma(x, t) / (ft * reference);
      ++report.samples;
      report.min_ratio = std::min(report.min_ratio, ratio);
      report.max_ratio = std::max(report.max_ratio, ratio);
      if (!(ratio >= lo && ratio <= hi)) report.ok = false;
    }
  }
}

}  // namespace besselp::harness
