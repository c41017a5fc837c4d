#include "besselp/error.hpp"
#include "besselp/harness.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace besselp::harness {

void check_max_principle(const TwoWeightInstance& inst, const KernelMatrix& k, std::span<const double> phi, int level,
                         const WhitneyCollection& w, double constant, MaxPrincipleReport& report) {
  report.constant = constant;
  const double bound = constant * std::ldexp(1.0, level);
  for (const auto& d : w.intervals) {
    const Interval iv = d.interval();
    const CarlesonBox box = hat(dilate(iv, 3));
    for (std::size_t i = 0; i < inst.sigma.size(); ++i) {
      if (!iv.contains(inst.sigma[i].y)) continue;
      double lhs = 0.0;
      for (std::size_t j = 0; j < inst.mu.size(); ++j) {
        const auto& m = inst.mu[j];
        if (box.contains(m.x, m.t)) continue;
        lhs += k(j, i) * phi[j] * m.w;
      }
      ++report.checked;
      const double ratio = lhs / bound;
      if (ratio > report.worst_ratio) {
        report.worst_ratio = ratio;
        std::ostringstream os;
        os << "k=" << level << " I=" << to_string(d) << " sigma-atom " << i;
        report.worst_witness = os.str();
      }
      if (!(lhs < bound)) {
        ++report.violations;
        report.ok = false;
      }
    }
  }
}

namespace {

struct CaseRng {
  std::mt19937_64 rng;
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
  // Open unit interval.
  double open() {
    double u = 0.0;
    do u = uniform();
    while (u == 0.0);
    return u;
  }
  double log_uniform(double lo, double hi) { return lo * std::exp(uniform() * std::log(hi / lo)); }
  double sign() { return uniform() < 0.5 ? -1.0 : 1.0; }
};

void record(CaseSampleReport& rep, double lhs, double rhs) {
  ++rep.samples;
  const double ratio = lhs / rhs;
  rep.worst_ratio = std::max(rep.worst_ratio, ratio);
  if (!(lhs <= rhs)) ++rep.violations;
}

}  // namespace

KernelCaseReport sample_kernel_cases(const BesselParam& p, std::uint64_t seed, std::size_t samples) {
  CaseRng r{std::mt19937_64(seed)};
  KernelCaseReport rep;
  const double c16 = std::pow(16.0, p.lambda + 1.0);
  const double c19 = std::pow(19.0, p.lambda + 1.0);
  for (std::size_t s = 0; s < samples; ++s) {
    const double len = r.log_uniform(0.01, 10.0);
    const double a = len * 8.0 * r.uniform();
    const double x = a + len * r.open();

    // Case 1: |I| < |z - x| < 3|I| and |x - y| > |I|.
    {
      const double dz = len * (1.0 + 2.0 * r.open());
      double z = x + r.sign() * dz;
      if (z <= 0.0) z = x + dz;
      const double dy = len * (1.0 + r.log_uniform(1e-3, 100.0));
      double y = x + r.sign() * dy;
      if (y <= 0.0) y = x + dy;
      const double t = r.log_uniform(0.01 * len, 100.0 * len);
      record(rep.case1, eval_kernel(p, {x, y, t}), c16 * eval_kernel(p, {z, y, t}));
    }
    // Case 2: y in 3I, t > |I| and |z - x| < 3|I|.
    {
      const Interval triple = dilate(Interval(a, a + len), 3);
      const double y = triple.a + triple.length() * r.open();
      const double t = len * r.log_uniform(1.0 + 1e-9, 100.0);
      const double dz = 3.0 * len * r.open();
      double z = x + r.sign() * dz;
      if (z <= 0.0) z = x + dz;
      record(rep.case2, eval_kernel(p, {x, y, t}), c19 * eval_kernel(p, {z, y, t}));
    }
  }
  return rep;
}

}  // namespace besselp::harness
