#include "besselp/simd.hpp"
#include "simd_internal.hpp"

#include <cmath>

namespace besselp::simd {
namespace {

void integrand_scalar(const IntegrandPlan& plan, const double* nodes, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = plan.substituted ? std::pow(nodes[i], plan.angle_power.exponent) : nodes[i];
    const double s = std::sin(0.5 * phi);
    const double denom = plan.c0 + plan.c1 * s * s;
    double pref;
    if (plan.substituted) {
      const double sinc = phi < 1e-8 ? 1.0 - phi * phi / 6.0 : std::sin(phi) / phi;
      pref = plan.inv_two_lambda * std::pow(sinc, plan.sine_power.exponent);
    } else {
      pref = std::pow(std::sin(phi), plan.sine_power.exponent);
    }
    out[i] = pref * std::pow(denom, plan.denom_power.exponent);
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

void gemv_t_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double xr = x[r];
    const double* row = a + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
  }
}

double weighted_sum_sq_scalar(const double* w, const double* v, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * v[i] * v[i];
  return acc;
}

constexpr Backend kScalar{
    "scalar", integrand_scalar, dot_scalar, gemv_scalar, gemv_t_scalar, weighted_sum_sq_scalar,
};

}  // namespace

const Backend& scalar_backend() { return kScalar; }

}  // namespace besselp::simd
