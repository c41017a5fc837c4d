#include "besselp/kernel.hpp"
#include "besselp/simd.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace besselp;

namespace {

constexpr double kTol = 1e-13;

bool close(double a, double b, double scale) { return std::abs(a - b) <= kTol * std::max(scale, 1e-300); }

simd::IntegrandPlan make_plan(double lambda, double c0, double c1) {
  simd::IntegrandPlan p;
  p.c0 = c0;
  p.c1 = c1;
  p.substituted = lambda < 0.5;
  p.inv_two_lambda = 0.5 / lambda;
  p.sine_power = simd::PowPlan::make(2.0 * lambda - 1.0);
  p.denom_power = simd::PowPlan::make(-(lambda + 1.0));
  p.angle_power = simd::PowPlan::make(0.5 / lambda);
  return p;
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("pow plans classify exponents") {
  CHECK(simd::PowPlan::make(3.0).kind == simd::PowKind::Integer);
  CHECK(simd::PowPlan::make(-2.0).n == -2);
  const auto half = simd::PowPlan::make(-1.5);
  CHECK(half.kind == simd::PowKind::HalfInteger);
  CHECK(half.n == -2);
  CHECK(simd::PowPlan::make(0.3).kind == simd::PowKind::General);
}

TEST_CASE("scalar backend is always present and selectable") {
  CHECK(simd::select("scalar"));
  CHECK(std::string(simd::active().name) == "scalar");
  CHECK(simd::select("auto"));
  CHECK_FALSE(simd::select("neon-nonexistent"));
  CHECK(!simd::available_backends().empty());
}

TEST_CASE("every backend matches the scalar reference") {
  const auto& ref = simd::scalar_backend();
  std::mt19937_64 rng(7);
  for (const simd::Backend* be : simd::available_backends()) {
    CAPTURE(be->name);
    SUBCASE("integrand") {
      for (double lambda : {0.1, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 3.25}) {
        for (auto [c0, c1] : {std::pair{1.0, 4.0}, std::pair{1e-6, 4.0}, std::pair{20.0, -16.0}, std::pair{2.5, 0.0}}) {
          const auto plan = make_plan(lambda, c0, c1);
          const double hi = plan.substituted ? std::pow(std::numbers::pi / 2, 2.0 * lambda) : std::numbers::pi / 2;
          std::vector<double> nodes(37);
          for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = hi * (static_cast<double>(i) + 0.5) / 37.0;
          std::vector<double> a(nodes.size()), b(nodes.size());
          ref.integrand(plan, nodes.data(), a.data(), nodes.size());
          be->integrand(plan, nodes.data(), b.data(), nodes.size());
          for (std::size_t i = 0; i < nodes.size(); ++i) {
            CAPTURE(lambda);
            CAPTURE(nodes[i]);
            CHECK(close(a[i], b[i], std::abs(a[i])));
          }
        }
      }
    }
    SUBCASE("dense kernels") {
      for (std::size_t n : {1u, 3u, 4u, 7u, 16u, 33u}) {
        const auto x = random_vector(rng, n);
        const auto y = random_vector(rng, n);
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y[i]);
        CHECK(close(ref.dot(x.data(), y.data(), n), be->dot(x.data(), y.data(), n), scale));

        auto w = random_vector(rng, n);
        for (double& v : w) v = std::abs(v);
        double wscale = 0.0;
        for (std::size_t i = 0; i < n; ++i) wscale += w[i] * x[i] * x[i];
        CHECK(close(ref.weighted_sum_sq(w.data(), x.data(), n), be->weighted_sum_sq(w.data(), x.data(), n), wscale));

        const std::size_t rows = n + 2;
        const auto a = random_vector(rng, rows * n);
        const auto xr = random_vector(rng, rows);
        std::vector<double> y1(rows), y2(rows), z1(n), z2(n);
        ref.gemv(a.data(), rows, n, x.data(), y1.data());
        be->gemv(a.data(), rows, n, x.data(), y2.data());
        for (std::size_t r = 0; r < rows; ++r) CHECK(close(y1[r], y2[r], static_cast<double>(n)));
        ref.gemv_t(a.data(), rows, n, xr.data(), z1.data());
        be->gemv_t(a.data(), rows, n, xr.data(), z2.data());
        for (std::size_t c = 0; c < n; ++c) CHECK(close(z1[c], z2[c], static_cast<double>(rows)));
      }
    }
  }
}

TEST_CASE("kernel values agree across backends") {
  const auto backends = simd::available_backends();
  for (double lambda : {0.2, 0.5, 1.0, 2.0}) {
    const BesselParam p(lambda);
    for (KernelQuery q : {KernelQuery{1, 1, 1}, KernelQuery{1, 1.001, 1e-3}, KernelQuery{0.05, 7, 0.3}}) {
      std::vector<double> vals;
      for (const auto* be : backends) {
        simd::select(be->name);
        vals.push_back(eval_kernel(p, q));
      }
      for (double v : vals) CHECK(std::abs(v - vals.front()) <= 1e-11 * vals.front());
    }
  }
  simd::select("auto");
}
