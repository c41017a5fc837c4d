// AVX2/FMA variants of the backend kernels. This translation unit is built
// with -mavx2 -mfma; nothing here may run before avx2_backend() has checked
// the CPU feature bits.

#include "besselp/simd.hpp"
#include "simd_internal.hpp"

#include <immintrin.h>

#include <cmath>

namespace besselp::simd {
namespace {

inline __m256d set1(double v) { return _mm256_set1_pd(v); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// sin(h) = h * sin_poly(h^2) and cos(h) on |h| <= pi/4 (Taylor, truncation < 1e-17).
inline __m256d sin_poly(__m256d h2) {
  __m256d p = set1(1.0 / 355687428096000.0);       // 1/17!
  p = _mm256_fmadd_pd(p, h2, set1(-1.0 / 1307674368000.0));  // -1/15!
  p = _mm256_fmadd_pd(p, h2, set1(1.0 / 6227020800.0));      // 1/13!
  p = _mm256_fmadd_pd(p, h2, set1(-1.0 / 39916800.0));       // -1/11!
  p = _mm256_fmadd_pd(p, h2, set1(1.0 / 362880.0));          // 1/9!
  p = _mm256_fmadd_pd(p, h2, set1(-1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, h2, set1(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, h2, set1(-1.0 / 6.0));
  return _mm256_fmadd_pd(p, h2, set1(1.0));
}

inline __m256d cos_poly(__m256d h2) {
  __m256d p = set1(-1.0 / 6402373705728000.0);             // -1/18!
  p = _mm256_fmadd_pd(p, h2, set1(1.0 / 20922789888000.0));   // 1/16!
  p = _mm256_fmadd_pd(p, h2, set1(-1.0 / 87178291200.0));     // -1/14!
  p = _mm256_fmadd_pd(p, h2, set1(1.0 / 479001600.0));        // 1/12!
  p = _mm256_fmadd_pd(p, h2, set1(-1.0 / 3628800.0));         // -1/10!
  p = _mm256_fmadd_pd(p, h2, set1(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, h2, set1(-1.0 / 720.0));
  p = _mm256_fmadd_pd(p, h2, set1(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, h2, set1(-0.5));
  return _mm256_fmadd_pd(p, h2, set1(1.0));
}

constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kLog2e = 1.44269504088896338700e+00;

// Natural log for positive normal inputs.
inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i expo_field = _mm256_srli_epi64(bits, 52);
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

  // exponent field -> double via the 2^52 trick
  const __m256d two52 = set1(4503599627370496.0);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(expo_field, _mm256_castpd_si256(two52))),
      set1(4503599627370496.0 + 1023.0));

  const __m256d big = _mm256_cmp_pd(m, set1(1.4142135623730951), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, set1(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, set1(1.0)));

  const __m256d f = _mm256_sub_pd(m, set1(1.0));
  const __m256d z = _mm256_div_pd(f, _mm256_add_pd(set1(2.0), f));
  const __m256d z2 = _mm256_mul_pd(z, z);
  // atanh series: 1 + z2/3 + z2^2/5 + ... through z2^11/23
  __m256d p = set1(1.0 / 23.0);
  p = _mm256_fmadd_pd(p, z2, set1(1.0 / 21.0));
  p = _mm256_fmadd_pd(p, z2, set1(1.0 / 19.0));
  p = _mm256_fmadd_pd(p, z2, set1(1.0 / 17.0));
  p = _mm256_fmadd_pd(p, z2, set1(1.0 / 15.0));
  p = _mm256_fmadd_pd(p, z2, set1(1.0 / 13.0));
  p = _mm256_fmadd_pd(p, z2, set1(1.0 / 11.0));
  p = _mm256_fmadd_pd(p, z2, set1(1.0 / 9.0));
  p = _mm256_fmadd_pd(p, z2, set1(1.0 / 7.0));
  p = _mm256_fmadd_pd(p, z2, set1(1.0 / 5.0));
  p = _mm256_fmadd_pd(p, z2, set1(1.0 / 3.0));
  const __m256d two_z = _mm256_add_pd(z, z);
  // 2z * (1 + z2 * p) = 2z + 2z * z2 * p
  const __m256d log_m = _mm256_fmadd_pd(_mm256_mul_pd(two_z, z2), p, two_z);
  return _mm256_fmadd_pd(e, set1(kLn2Hi), _mm256_fmadd_pd(e, set1(kLn2Lo), log_m));
}

inline __m256d pow2_int(__m256d nd) {
  // nd integral with |nd| <= 1100; split so each factor stays normal.
  const __m256d n1 = _mm256_floor_pd(_mm256_mul_pd(nd, set1(0.5)));
  const __m256d n2 = _mm256_sub_pd(nd, n1);
  const __m256d magic = set1(6755399441055744.0);  // 1.5 * 2^52
  auto scale = [&](__m256d k) {
    const __m256i ki = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)),
                                        _mm256_castpd_si256(magic));
    return _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52));
  };
  return _mm256_mul_pd(scale(n1), scale(n2));
}

inline __m256d exp_pd(__m256d x) {
  const __m256d lo_limit = set1(-745.2);
  const __m256d hi_limit = set1(709.78);
  const __m256d underflow = _mm256_cmp_pd(x, lo_limit, _CMP_LT_OQ);
  const __m256d overflow = _mm256_cmp_pd(x, hi_limit, _CMP_GT_OQ);
  const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo_limit), hi_limit);

  const __m256d nd = _mm256_round_pd(_mm256_mul_pd(xc, set1(kLog2e)),
                                     _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(nd, set1(kLn2Hi), xc);
  r = _mm256_fnmadd_pd(nd, set1(kLn2Lo), r);

  // Taylor through r^13 on |r| <= ln2/2
  __m256d p = set1(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, set1(0.5));
  p = _mm256_fmadd_pd(p, r, set1(1.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0));

  __m256d out = _mm256_mul_pd(p, pow2_int(nd));
  out = _mm256_blendv_pd(out, _mm256_setzero_pd(), underflow);
  out = _mm256_blendv_pd(out, set1(HUGE_VAL), overflow);
  return out;
}

inline __m256d ipow(__m256d x, int n) {
  unsigned k = static_cast<unsigned>(n < 0 ? -n : n);
  __m256d result = set1(1.0);
  __m256d base = x;
  while (k) {
    if (k & 1u) result = _mm256_mul_pd(result, base);
    k >>= 1;
    if (k) base = _mm256_mul_pd(base, base);
  }
  return n < 0 ? _mm256_div_pd(set1(1.0), result) : result;
}

inline __m256d pow_pd(__m256d x, const PowPlan& plan) {
  switch (plan.kind) {
    case PowKind::Integer:
      return ipow(x, plan.n);
    case PowKind::HalfInteger:
      return _mm256_mul_pd(ipow(x, plan.n), _mm256_sqrt_pd(x));
    case PowKind::General:
      break;
  }
  return exp_pd(_mm256_mul_pd(set1(plan.exponent), log_pd(x)));
}

inline __m256d integrand_block(const IntegrandPlan& plan, __m256d node) {
  const __m256d phi = plan.substituted ? pow_pd(node, plan.angle_power) : node;
  const __m256d h = _mm256_mul_pd(phi, set1(0.5));
  const __m256d h2 = _mm256_mul_pd(h, h);
  const __m256d sp = sin_poly(h2);
  const __m256d c = cos_poly(h2);
  const __m256d s = _mm256_mul_pd(h, sp);
  const __m256d denom = _mm256_fmadd_pd(set1(plan.c1), _mm256_mul_pd(s, s), set1(plan.c0));
  __m256d pref;
  if (plan.substituted) {
    // sin(phi) / phi = sin_poly(h^2) * cos(h)
    pref = _mm256_mul_pd(set1(plan.inv_two_lambda), pow_pd(_mm256_mul_pd(sp, c), plan.sine_power));
  } else {
    const __m256d sin_phi = _mm256_mul_pd(set1(2.0), _mm256_mul_pd(s, c));
    pref = pow_pd(sin_phi, plan.sine_power);
  }
  return _mm256_mul_pd(pref, pow_pd(denom, plan.denom_power));
}

void integrand_avx2(const IntegrandPlan& plan, const double* nodes, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, integrand_block(plan, _mm256_loadu_pd(nodes + i)));
  }
  if (i < n) {
    alignas(32) double in[4];
    alignas(32) double res[4];
    for (std::size_t k = 0; k < 4; ++k) in[k] = nodes[i + (i + k < n ? k : 0)];
    _mm256_store_pd(res, integrand_block(plan, _mm256_load_pd(in)));
    for (std::size_t k = 0; i + k < n; ++k) out[i + k] = res[k];
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void gemv_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(a + r * cols, x, cols);
}

void gemv_t_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a + r * cols;
    const __m256d xr = set1(x[r]);
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      _mm256_storeu_pd(y + c, _mm256_fmadd_pd(_mm256_loadu_pd(row + c), xr, _mm256_loadu_pd(y + c)));
    }
    for (; c < cols; ++c) y[c] += row[c] * x[r];
  }
}

double weighted_sum_sq_avx2(const double* w, const double* v, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vv = _mm256_loadu_pd(v + i);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), vv), vv, acc);
  }
  double out = hsum(acc);
  for (; i < n; ++i) out += w[i] * v[i] * v[i];
  return out;
}

constexpr Backend kAvx2{
    "avx2", integrand_avx2, dot_avx2, gemv_avx2, gemv_t_avx2, weighted_sum_sq_avx2,
};

}  // namespace

namespace detail {
const Backend* avx2_table() { return &kAvx2; }
}  // namespace detail

}  // namespace besselp::simd
