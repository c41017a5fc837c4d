#include "besselp/kernel.hpp"

#include "besselp/error.hpp"
#include "besselp/quadrature.hpp"
#include "besselp/simd.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>

namespace besselp {

BesselParam::BesselParam(double lambda_, double quad_rel_tol_, int quad_max_depth_)
    : lambda(lambda_), quad_rel_tol(quad_rel_tol_), quad_max_depth(quad_max_depth_) {
  validate();
}

void BesselParam::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParameter("lambda must be positive");
  if (!(quad_rel_tol > 0.0 && quad_rel_tol < 1.0)) throw InvalidParameter("quad_rel_tol must lie in (0, 1)");
  if (quad_max_depth < 1) throw InvalidParameter("quad_max_depth must be at least 1");
}

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

void validate_query(const KernelQuery& q) {
  auto ok = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!ok(q.x) || !ok(q.y) || !ok(q.t)) throw InvalidParameter("kernel query requires x, y, t > 0");
}

// Both halves of [0, pi] folded onto phi in [0, pi/2]:
//   tag 0: theta = phi,      denominator (x-y)^2 + t^2 + 4xy sin^2(phi/2)
//   tag 1: theta = pi - phi, denominator (x+y)^2 + t^2 - 4xy sin^2(phi/2)
struct WeinsteinIntegrand {
  simd::IntegrandPlan halves[2];
  const simd::Backend* backend;

  void operator()(int tag, std::span<const double> nodes, std::span<double> out) const {
    backend->integrand(halves[tag], nodes.data(), out.data(), nodes.size());
  }
};

}  // namespace

KernelEvaluation eval_kernel_detailed(const BesselParam& p, const KernelQuery& q) {
  p.validate();
  validate_query(q);

  const double lambda = p.lambda;
  const bool substituted = lambda < 0.5;
  const double xy = q.x * q.y;
  const double t2 = q.t * q.t;
  const double dm = q.x - q.y;
  const double dp = q.x + q.y;

  simd::IntegrandPlan base;
  base.substituted = substituted;
  base.inv_two_lambda = 0.5 / lambda;
  base.sine_power = simd::PowPlan::make(2.0 * lambda - 1.0);
  base.denom_power = simd::PowPlan::make(-(lambda + 1.0));
  base.angle_power = simd::PowPlan::make(0.5 / lambda);

  WeinsteinIntegrand f{{base, base}, &simd::active()};
  f.halves[0].c0 = dm * dm + t2;
  f.halves[0].c1 = 4.0 * xy;
  f.halves[1].c0 = dp * dp + t2;
  f.halves[1].c1 = -4.0 * xy;

  auto to_node = [&](double phi) { return substituted ? std::pow(phi, 2.0 * lambda) : phi; };

  // Near theta = 0 the integrand has a peak of angular width ~ sqrt(c0 / xy);
  // seed the near half with geometrically spaced breakpoints across it.
  std::vector<double> breaks{0.0};
  const double width = std::sqrt(f.halves[0].c0 / xy);
  if (width < kHalfPi) {
    for (double b = 0.25 * width; b < kHalfPi; b *= 2.0) breaks.push_back(b);
  }
  breaks.push_back(kHalfPi);

  std::vector<quad::Panel> panels;
  panels.reserve(breaks.size() + 1);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    panels.push_back({to_node(breaks[i]), to_node(breaks[i + 1]), 0, 0});
  }
  panels.push_back({0.0, to_node(kHalfPi), 1, 0});

  quad::Options opt;
  opt.rel_tol = p.quad_rel_tol;
  opt.max_depth = p.quad_max_depth;
  const quad::Result r = quad::integrate(f, panels, opt);

  const double scale = 2.0 * lambda * q.t / std::numbers::pi;
  if (!r.converged) {
    throw AccuracyNotReached("kernel quadrature did not reach rel tol " + std::to_string(p.quad_rel_tol) +
                                 " (lambda=" + std::to_string(lambda) + ", x=" + std::to_string(q.x) +
                                 ", y=" + std::to_string(q.y) + ", t=" + std::to_string(q.t) + ")",
                             scale * r.value, scale * r.error);
  }
  return {scale * r.value, scale * r.error, r.panels, r.deepest};
}

double eval_kernel(const BesselParam& p, const KernelQuery& q) { return eval_kernel_detailed(p, q).value; }

std::vector<double> eval_kernel_batch(const BesselParam& p, std::span<const KernelQuery> qs) {
  p.validate();
  std::vector<double> out(qs.size(), 0.0);
  std::vector<std::exception_ptr> errors(qs.size());
  const auto n = static_cast<std::ptrdiff_t>(qs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = eval_kernel(p, qs[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw BatchError(i, e.what());
    }
  }
  return out;
}

double m_lambda(const BesselParam& p, const Interval& interval) {
  p.validate();
  if (interval.is_empty()) return 0.0;
  const double e = 2.0 * p.lambda + 1.0;
  return (std::pow(interval.b, e) - std::pow(interval.a, e)) / e;
}

double kernel_bound_shape(const BesselParam& p, const KernelQuery& q, double gamma) {
  validate_query(q);
  const double gap = std::abs(q.x - q.y);
  double denom = m_lambda(p, general_interval(q.y, q.t));
  if (gap > 0.0) denom += m_lambda(p, general_interval(q.y, gap));
  return std::pow(q.t / (q.t + gap), gamma) / denom;
}

bool check_kernel_upper_bound(const BesselParam& p, const KernelQuery& q, double gamma, double C) {
  if (!(gamma > 0.0) || !(C > 0.0)) throw InvalidParameter("gamma and C must be positive");
  return eval_kernel(p, q) <= C * kernel_bound_shape(p, q, gamma);
}

double calibrate_kernel_bound(const BesselParam& p, std::span<const KernelQuery> grid, double gamma) {
  if (!(gamma > 0.0)) throw InvalidParameter("gamma must be positive");
  const std::vector<double> values = eval_kernel_batch(p, grid);
  double c = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    c = std::max(c, values[i] / kernel_bound_shape(p, grid[i], gamma));
  }
  return c;
}

KernelBoundFit fit_kernel_bound(const BesselParam& p, std::span<const KernelQuery> grid,
                                std::span<const double> gamma_candidates, double c_cap) {
  if (gamma_candidates.empty()) throw InvalidParameter("no gamma candidates");
  const std::vector<double> values = eval_kernel_batch(p, grid);
  auto constant_for = [&](double gamma) {
    double c = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) c = std::max(c, values[i] / kernel_bound_shape(p, grid[i], gamma));
    return c;
  };
  std::vector<double> sorted(gamma_candidates.begin(), gamma_candidates.end());
  std::sort(sorted.begin(), sorted.end());
  KernelBoundFit fit{sorted.front(), constant_for(sorted.front())};
  for (double g : sorted) {
    const double c = constant_for(g);
    if (c <= c_cap) fit = {g, c};
  }
  return fit;
}

std::vector<KernelQuery> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw InvalidParameter("log_grid requires 0 < lo < hi and n >= 2");
  std::vector<double> axis(n);
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) axis[i] = lo * std::exp(step * static_cast<double>(i));
  axis.back() = hi;
  std::vector<KernelQuery> out;
  out.reserve(n * n * n);
  for (double x : axis)
    for (double y : axis)
      for (double t : axis) out.push_back({x, y, t});
  return out;
}

}  // namespace besselp
