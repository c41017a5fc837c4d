#pragma once

// The Poisson kernel of the Bessel operator, evaluated from Weinstein's
// integral
//
//   P_t(x, y) = (2 lambda t / pi) * int_0^pi sin^(2 lambda - 1)(theta)
//               / (x^2 + y^2 + t^2 - 2 x y cos(theta))^(lambda + 1) d theta,
//
// together with the reference measure dm(x) = x^(2 lambda) dx.

#include "besselp/geometry.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace besselp {

struct BesselParam {
  double lambda = 1.0;
  double quad_rel_tol = 1e-10;
  int quad_max_depth = 60;

  BesselParam() = default;
  explicit BesselParam(double lambda, double quad_rel_tol = 1e-10, int quad_max_depth = 60);

  // Throws InvalidParameter unless lambda > 0, 0 < quad_rel_tol < 1 and quad_max_depth >= 1.
  void validate() const;
};

struct KernelQuery {
  double x;
  double y;
  double t;
};

struct KernelEvaluation {
  double value;
  double error_estimate;  // absolute
  std::size_t panels;
  int deepest;
};

// Throws InvalidParameter for nonpositive inputs and AccuracyNotReached when
// the adaptive scheme exhausts its depth or panel budget.
double eval_kernel(const BesselParam& p, const KernelQuery& q);
KernelEvaluation eval_kernel_detailed(const BesselParam& p, const KernelQuery& q);

// Elementwise eval_kernel; queries are evaluated concurrently. The first
// failing query (lowest index) is rethrown as a BatchError.
std::vector<double> eval_kernel_batch(const BesselParam& p, std::span<const KernelQuery> qs);

// m_lambda((a, b)) = (b^(2 lambda + 1) - a^(2 lambda + 1)) / (2 lambda + 1).
double m_lambda(const BesselParam& p, const Interval& interval);

// Right-hand side of the size estimate
//   P_t(x, y) <= C / (m(I(y, t)) + m(I(y, |x - y|))) * (t / (t + |x - y|))^gamma
// without the constant C.
double kernel_bound_shape(const BesselParam& p, const KernelQuery& q, double gamma);

bool check_kernel_upper_bound(const BesselParam& p, const KernelQuery& q, double gamma, double C);

struct KernelBoundFit {
  double gamma;
  double C;  // smallest constant valid on the whole grid for this gamma
};

// C*(gamma) = max over the grid of P / shape.
double calibrate_kernel_bound(const BesselParam& p, std::span<const KernelQuery> grid, double gamma);

// Largest candidate gamma whose calibrated constant stays at or below c_cap;
// falls back to the smallest candidate when none qualifies.
KernelBoundFit fit_kernel_bound(const BesselParam& p, std::span<const KernelQuery> grid,
                                std::span<const double> gamma_candidates, double c_cap);

// Log-spaced n x n x n grid over [lo, hi]^3.
std::vector<KernelQuery> log_grid(double lo, double hi, std::size_t n);

}  // namespace besselp
