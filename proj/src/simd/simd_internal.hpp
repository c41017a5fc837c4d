#pragma once

#include "besselp/simd.hpp"

namespace besselp::simd::detail {

// Defined in avx2.cpp when that translation unit is built; the returned
// table must only be used after a successful CPU feature check.
const Backend* avx2_table();

}  // namespace besselp::simd::detail
