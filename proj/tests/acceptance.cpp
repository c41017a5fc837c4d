// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed here.
//
//   acceptance [--known-failures 5,7]
//
// Exit status is 0 when every failing criterion is listed as known, so a
// documented failure stays visible in the output without masking new ones.

#include "besselp/dyadic.hpp"
#include "besselp/harness.hpp"
#include "besselp/kernel.hpp"
#include "besselp/operators.hpp"
#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace besselp;
using namespace besselp::harness;

namespace {

constexpr double kKernelTol = 1e-8;
constexpr double kKernelSeconds = 5.0;
constexpr double kConservationTol = 1e-6;
constexpr double kConservationSeconds = 30.0;
constexpr double kDualityTol = 1e-12;
constexpr double kDualitySeconds = 5.0;
constexpr double kNecessitySlack = 1e-8;
constexpr double kSuiteSeconds = 300.0;
constexpr double kStability = 0.10;
constexpr double kSingleAtomTol = 1e-8;
constexpr double kOverlapBound = 12.0;
constexpr double kCarlesonC = 8.0;
constexpr double kExactTol = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Tally {
  std::set<int> known;
  std::set<int> failed;

  void report(int id, bool ok, const std::string& what) {
    const char* tag = ok ? "PASS" : (known.count(id) ? "FAIL (known)" : "FAIL");
    std::printf("[%s] %2d  %s\n", tag, id, what.c_str());
    std::fflush(stdout);
    if (!ok) failed.insert(id);
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void kernel_oracle(Tally& t) {
  const auto t0 = Clock::now();
  const BesselParam p(1.0);
  double worst = 0.0;
  for (int q = 0; q < 1000; ++q) {
    const double u = q / 999.0;
    const double x = std::pow(10.0, -2.0 + 4.0 * u);
    const double y = std::pow(10.0, -2.0 + 4.0 * std::fmod(7.0 * u + 0.31, 1.0));
    const double tt = std::pow(10.0, 2.0 - 4.0 * std::fmod(3.0 * u + 0.17, 1.0));
    const double ref = oracle::poisson_lambda1(x, y, tt);
    worst = std::max(worst, std::abs(eval_kernel(p, {x, y, tt}) - ref) / ref);
  }
  const double secs = seconds_since(t0);
  t.report(1, worst <= kKernelTol && secs < kKernelSeconds,
           fmt("kernel vs closed form, 1000 points: max rel err %.3g (<= %.0e), %.2f s (< %.0f s)", worst, kKernelTol,
               secs, kKernelSeconds));
}

void conservation(Tally& t) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (double lambda : {0.3, 0.5, 1.0, 2.0}) {
    const BesselParam p(lambda, 1e-12);
    for (double x : {0.1, 1.0, 3.0, 10.0}) {
      for (double tt : {0.05, 0.5, 2.0, 10.0}) {
        auto f = [&](double y) { return y > 0.0 ? eval_kernel(p, {x, y, tt}) * std::pow(y, 2.0 * lambda) : 0.0; };
        // The mass sits within a few t of y = x; the tail decays like t / y^2.
        const double lo = std::max(0.0, x - 20.0 * tt);
        const double hi = x + 20.0 * tt;
        double total = 0.0;
        double err = 0.0;
        if (lo > 0.0) total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, lo, 20, 1e-12, &err);
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, x, 20, 1e-12, &err);
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, x, hi, 20, 1e-12, &err);
        // y = hi / u maps the tail onto (0, 1); the integrand tends to a constant as u -> 0.
        auto g = [&](double u) { return f(hi / u) * hi / (u * u); };
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, 1.0, 20, 1e-12, &err);
        worst = std::max(worst, std::abs(total - 1.0));
      }
    }
  }
  const double secs = seconds_since(t0);
  t.report(2, worst <= kConservationTol && secs < kConservationSeconds,
           fmt("conservation, 4 lambdas x 16 (x,t): max |mass - 1| %.3g (<= %.0e), %.2f s (< %.0f s)", worst,
               kConservationTol, secs, kConservationSeconds));
}

void duality(Tally& t) {
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  std::mt19937_64 rng(cfg.seed ^ 0x5eed);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  const double lambdas[] = {0.5, 1.0, 2.0};
  double worst = 0.0;
  for (std::size_t q = 0; q < 100; ++q) {
    cfg.n_sigma = 1 + q % 20;
    cfg.n_mu = 20 - q % 20;
    const GeneratedInstance g = gen_instance(cfg, q, lambdas[q % 3]);
    const KernelMatrix k(g.inst);
    std::vector<double> f(cfg.n_sigma), h(cfg.n_mu);
    for (auto& v : f) v = u(rng);
    for (auto& v : h) v = u(rng);
    const auto pf = apply_forward(k, g.inst, f);
    const auto ph = apply_adjoint(k, g.inst, h);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t j = 0; j < cfg.n_mu; ++j) lhs += pf[j] * h[j] * g.inst.mu[j].w;
    for (std::size_t i = 0; i < cfg.n_sigma; ++i) rhs += f[i] * ph[i] * g.inst.sigma[i].w;
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
  }
  const double secs = seconds_since(t0);
  t.report(3, worst <= kDualityTol && secs < kDualitySeconds,
           fmt("duality, 100 instances (<= 20 atoms): max rel gap %.3g (<= %.0e), %.2f s (< %.0f s)", worst,
               kDualityTol, secs, kDualitySeconds));
}

void necessity(Tally& t, const TestReport& rep, double secs) {
  std::size_t bad = 0, errors = 0;
  double worst = 0.0;
  for (const auto& r : rep.records) {
    if (r.error) ++errors;
    if (!r.necessity_ok) ++bad;
    worst = std::max({worst, r.F / r.N, r.B / r.N, r.F_shift / r.N, r.B_shift / r.N});
  }
  t.report(4, bad == 0 && errors == 0 && secs < kSuiteSeconds,
           fmt("necessity, %zu records: %zu violations, %zu errors, max max(F,B)/N %.6f (<= 1 + %.0e), suite %.1f s "
               "(< %.0f s)",
               rep.records.size(), bad, errors, worst, kNecessitySlack, secs, kSuiteSeconds));
}

void equivalence(Tally& t, const TestReport& rep) {
  const double plain = rep.max_ratio();
  const double shifted = rep.max_ratio_shift();
  const double change = std::abs(shifted - plain) / plain;

  ExperimentConfig one;
  one.n_sigma = one.n_mu = 1;
  double single_gap = 0.0;
  for (double lambda : one.lambda_set) {
    for (std::size_t q = 0; q < 10; ++q) {
      const auto g = gen_instance(one, q, lambda);
      for (bool shift : {false, true}) single_gap = std::max(single_gap, std::abs(run_testing(g.inst, shift).ratio - 0.5));
    }
  }
  const bool ok = std::isfinite(plain) && plain > 0.0 && change <= kStability && single_gap <= kSingleAtomTol;
  t.report(5, ok,
           fmt("equivalence: max N/(F+B) %.4f, with shifts %.4f, change %.1f%% (<= %.0f%%); single-atom |ratio - 1/2| "
               "%.2g (<= %.0e)",
               plain, shifted, 100.0 * change, 100.0 * kStability, single_gap, kSingleAtomTol));
}

void max_principle(Tally& t, const TestReport& rep) {
  std::size_t checked = 0, violations = 0, records_bad = 0;
  double worst = 0.0;
  for (const auto& r : rep.records) {
    if (!r.decomposition) {
      ++records_bad;
      continue;
    }
    const auto& mp = r.decomposition->max_principle;
    checked += mp.checked;
    violations += mp.violations;
    worst = std::max(worst, mp.worst_ratio);
  }
  std::size_t case_samples = 0, case_violations = 0;
  double w1 = 0.0, w2 = 0.0;
  for (const auto& [lambda, c] : rep.kernel_cases) {
    case_samples += c.case1.samples;
    case_violations += c.case1.violations + c.case2.violations;
    w1 = std::max(w1, c.case1.worst_ratio);
    w2 = std::max(w2, c.case2.worst_ratio);
  }
  const bool per_lambda = std::all_of(rep.kernel_cases.begin(), rep.kernel_cases.end(),
                                      [](const auto& c) { return c.second.case1.samples >= 10000; });
  t.report(6, violations == 0 && records_bad == 0 && case_violations == 0 && per_lambda,
           fmt("maximum principle: %zu checks, %zu violations, worst lhs/(33^(l+1) 2^k) %.3g; kernel cases: %zu "
               "samples per case over all lambdas, %zu violations, worst ratios %.3g / %.3g",
               checked, violations, worst, case_samples, case_violations, w1, w2));
}

void whitney(Tally& t, const TestReport& rep) {
  bool disjoint = true, coverage = true, tail = true, nesting = true;
  int overlap = 0;
  std::size_t over = 0, members = 0;
  for (const auto& r : rep.records) {
    if (!r.decomposition) {
      coverage = false;
      continue;
    }
    const auto& w = r.decomposition->whitney;
    disjoint = disjoint && w.disjoint;
    coverage = coverage && w.coverage_ok;
    tail = tail && w.tail_ok;
    nesting = nesting && w.nesting.ok;
    overlap = std::max(overlap, w.overlap);
    members += w.members;
    if (w.overlap > kOverlapBound) ++over;
  }
  t.report(7, disjoint && coverage && tail && nesting && overlap <= kOverlapBound,
           fmt("Whitney: disjoint %d, defect == tail %d, tail <= 2^-12|Omega| %d, nesting %d, max overlap %d (<= %.0f; "
               "%zu records above), %zu members",
               disjoint, coverage, tail, nesting, overlap, kOverlapBound, over, members));
}

void weak11(Tally& t, const TestReport& rep) {
  std::size_t suite_checks = 0, suite_bad = 0;
  for (const auto& r : rep.records) {
    suite_checks += r.weak11_checks;
    if (!r.weak11_ok) ++suite_bad;
  }
  // Brute-force oracle on small instances.
  ExperimentConfig cfg;
  cfg.n_sigma = cfg.n_mu = 10;
  std::size_t oracle_checks = 0, oracle_bad = 0;
  for (std::size_t q = 0; q < 30; ++q) {
    const auto g = gen_instance(cfg, 1000 + q, 1.0);
    const DiscreteMeasure2D mt = tilde(g.inst.mu);
    std::vector<double> psi(mt.size());
    double top = 0.0, l1 = 0.0;
    for (std::size_t j = 0; j < mt.size(); ++j) {
      psi[j] = g.phi[j] / mt[j].t;
      top = std::max(top, psi[j]);
      l1 += psi[j] * mt[j].w;
    }
    for (std::size_t s = 0; s < 16; ++s) {
      const double alpha = top * std::ldexp(1.0, -static_cast<int>(s)) * 0.97;
      const Weak11Report w = weak_11_check(mt, psi, alpha);
      double brute = 0.0;
      for (std::size_t j = 0; j < mt.size(); ++j) {
        if (oracle::maximal_brute(mt, psi, mt[j].x, mt[j].t, -8, 8) > alpha) brute += mt[j].w;
      }
      ++oracle_checks;
      const bool agree = std::abs(w.level_set_mass - brute) <= kExactTol * std::max(brute, 1e-300);
      if (!w.ok || !agree || brute > l1 / alpha * (1.0 + kExactTol)) ++oracle_bad;
    }
  }
  t.report(8, suite_bad == 0 && oracle_bad == 0,
           fmt("weak (1,1), constant 1: %zu suite checks, %zu records failing; brute-force oracle %zu checks, %zu "
               "mismatches",
               suite_checks, suite_bad, oracle_checks, oracle_bad));
}

void carleson(Tally& t, const TestReport& rep) {
  std::size_t bad = 0;
  double worst = 0.0;
  for (const auto& r : rep.records) {
    if (!r.decomposition || !r.decomposition->carleson.ok) ++bad;
    if (r.decomposition) worst = std::max(worst, r.decomposition->carleson.ratio);
  }
  const DiscreteMeasure2D mu({{1.0, 0.5, 2.0}});
  const std::vector<double> phi{3.0};
  const auto g = principal_intervals(tilde(mu), phi, DyadicInterval{1, 0});
  const CarlesonReport one = carleson_packing_check(g, mu, phi, 1.0);
  const double gap = std::abs(one.lhs - one.rhs) / one.rhs;
  t.report(9, bad == 0 && worst <= kCarlesonC && gap <= kExactTol,
           fmt("Carleson packing: max sum alpha^2 mu~ / ||phi||^2 = %.4f (<= %.0f), %zu records failing; single atom "
               "lhs/rhs - 1 = %.2g",
               worst, kCarlesonC, bad, gap));
}

void counting(Tally& t, const TestReport& rep) {
  std::size_t max_count = 0, lacey = 0, bad = 0;
  const std::size_t bound = static_cast<std::size_t>(std::ceil(1.0 / rep.config.delta));
  for (const auto& r : rep.records) {
    if (!r.decomposition) {
      ++bad;
      continue;
    }
    const auto& c = r.decomposition->counting;
    max_count = std::max(max_count, c.max_count);
    lacey = std::max(lacey, c.lacey_max);
    if (!c.ok || !c.lacey_ok) ++bad;
  }
  t.report(10, bad == 0 && max_count <= bound && lacey <= rep.config.lacey_bound,
           fmt("counting: max qualifying k per interval %zu (<= %zu), max Lacey cardinality %zu (<= recorded %zu)",
               max_count, bound, lacey, rep.config.lacey_bound));
}

}  // namespace

int main(int argc, char** argv) {
  Tally tally;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--known-failures") == 0 && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) tally.known.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: acceptance [--known-failures 5,7]\n");
      return 2;
    }
  }

  kernel_oracle(tally);
  conservation(tally);
  duality(tally);

  const ExperimentConfig cfg;  // 100 instances x lambda in {0.5, 1, 2}
  const auto t0 = Clock::now();
  const TestReport rep = run_equivalence_suite(cfg);
  const double secs = seconds_since(t0);
  necessity(tally, rep, secs);
  equivalence(tally, rep);
  max_principle(tally, rep);
  whitney(tally, rep);
  weak11(tally, rep);
  carleson(tally, rep);
  counting(tally, rep);

  std::size_t unexpected = 0;
  for (int id : tally.failed) unexpected += tally.known.count(id) ? 0 : 1;
  std::printf("%zu of 10 criteria pass; %zu failing (%zu known)\n", 10 - tally.failed.size(), tally.failed.size(),
              tally.failed.size() - unexpected);
  return unexpected == 0 ? 0 : 1;
}
