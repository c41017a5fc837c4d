#include "besselp/simd.hpp"
#include "simd_internal.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

namespace besselp::simd {

PowPlan PowPlan::make(double exponent) {
  PowPlan plan;
  plan.exponent = exponent;
  constexpr double kMaxFast = 64.0;
  if (std::abs(exponent) <= kMaxFast) {
    if (exponent == std::nearbyint(exponent)) {
      plan.kind = PowKind::Integer;
      plan.n = static_cast<int>(exponent);
    } else if (2.0 * exponent == std::nearbyint(2.0 * exponent)) {
      plan.kind = PowKind::HalfInteger;
      plan.n = static_cast<int>(std::floor(exponent));
    }
  }
  return plan;
}

#ifndef BESSELP_HAVE_AVX2
namespace detail {
const Backend* avx2_table() { return nullptr; }
}  // namespace detail
#endif

const Backend* avx2_backend() {
  static const Backend* table = [] () -> const Backend* {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return detail::avx2_table();
#endif
    return nullptr;
  }();
  return table;
}

namespace {

const Backend* resolve(std::string_view name) {
  if (name == "scalar") return &scalar_backend();
  if (name == "avx2") return avx2_backend();
  if (name == "auto" || name.empty()) {
    if (const Backend* b = avx2_backend()) return b;
    return &scalar_backend();
  }
  return nullptr;
}

std::atomic<const Backend*>& current() {
  static std::atomic<const Backend*> selected = [] {
    const char* env = std::getenv("BESSELP_SIMD");
    const Backend* b = resolve(env ? std::string_view(env) : std::string_view("auto"));
    return b ? b : resolve("auto");
  }();
  return selected;
}

}  // namespace

const Backend& active() { return *current().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  const Backend* b = resolve(name);
  if (!b) return false;
  current().store(b, std::memory_order_release);
  return true;
}

std::vector<const Backend*> available_backends() {
  std::vector<const Backend*> out{&scalar_backend()};
  if (const Backend* b = avx2_backend()) out.push_back(b);
  return out;
}

}  // namespace besselp::simd
