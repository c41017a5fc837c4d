#pragma once

// Data-parallel inner loops with a scalar reference implementation and
// optional AVX2/FMA variants. The active backend is chosen once at startup
// from the CPU feature set; BESSELP_SIMD=scalar|avx2|auto overrides it.

#include <cstddef>
#include <string_view>
#include <vector>

namespace besselp::simd {

enum class PowKind { Integer, HalfInteger, General };

// Evaluation strategy for x^exponent with x > 0.
struct PowPlan {
  PowKind kind = PowKind::General;
  int n = 0;  // Integer: exponent == n. HalfInteger: exponent == n + 1/2.
  double exponent = 0.0;

  static PowPlan make(double exponent);
};

// Weinstein integrand on one half of [0, pi], written in the folded angle
// phi in [0, pi/2]:
//
//   sin(phi)^(2 lambda - 1) / (c0 + c1 sin^2(phi / 2))^(lambda + 1).
//
// With `substituted` set the node variable is u = phi^(2 lambda) and the
// Jacobian is folded in, giving
//
//   (1 / (2 lambda)) (sin(phi) / phi)^(2 lambda - 1) / (c0 + c1 sin^2(phi / 2))^(lambda + 1),
//
// which is bounded at u = 0 for every lambda > 0.
struct IntegrandPlan {
  double c0 = 0.0;
  double c1 = 0.0;
  bool substituted = false;
  double inv_two_lambda = 0.0;
  PowPlan sine_power;   // exponent 2 lambda - 1
  PowPlan denom_power;  // exponent -(lambda + 1)
  PowPlan angle_power;  // exponent 1 / (2 lambda), used when substituted
};

struct Backend {
  const char* name;
  // out[i] = integrand(nodes[i]) for i < n.
  void (*integrand)(const IntegrandPlan& plan, const double* nodes, double* out, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y = A x, A row-major rows x cols.
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y = A^T x, A row-major rows x cols.
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // sum_i w[i] * v[i]^2
  double (*weighted_sum_sq)(const double* w, const double* v, std::size_t n);
};

const Backend& scalar_backend();

// nullptr when the variant was not compiled in or the CPU lacks the features.
const Backend* avx2_backend();

const Backend& active();

// Select by name: "scalar", "avx2" or "auto". Returns false (and leaves the
// selection unchanged) when the requested backend is unavailable.
bool select(std::string_view name);

std::vector<const Backend*> available_backends();

}  // namespace besselp::simd
