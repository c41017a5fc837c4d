#pragma once

// The forward operator P_sigma f(x, t) = sum_i P_t(x, y_i) f(y_i) sigma_i, its
// adjoint P*_mu g(y) = sum_j P_{t_j}(x_j, y) g(x_j, t_j) mu_j, the Sawyer
// testing constants F and B over a finite interval family, and the norm N.

#include "besselp/geometry.hpp"
#include "besselp/kernel.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace besselp {

struct TwoWeightInstance {
  BesselParam p;
  DiscreteMeasure1D sigma;
  DiscreteMeasure2D mu;

  // Throws InvalidParameter when either measure is empty.
  void validate() const;
};

// K(j, i) = P_{t_j}(x_j, y_i): rows are mu-atoms, columns sigma-atoms. Every
// testing quantity, the norm and the harness read kernel values from here.
class KernelMatrix {
 public:
  explicit KernelMatrix(const TwoWeightInstance& inst);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t j, std::size_t i) const { return data_[j * cols_ + i]; }
  std::span<const double> data() const { return data_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

struct Point2D {
  double x;
  double t;
};

std::vector<double> apply_forward(const TwoWeightInstance& inst, std::span<const double> f,
                                  std::span<const Point2D> targets);
std::vector<double> apply_adjoint(const TwoWeightInstance& inst, std::span<const double> g,
                                  std::span<const double> targets);

// Matrix forms evaluated at the atoms of the other measure.
std::vector<double> apply_forward(const KernelMatrix& k, const TwoWeightInstance& inst, std::span<const double> f);
std::vector<double> apply_adjoint(const KernelMatrix& k, const TwoWeightInstance& inst, std::span<const double> g);

struct TestingValue {
  double value = 0.0;
  std::optional<Interval> witness;
  bool any_admissible = false;  // false when every family member was skipped
};

// F^2 = max_I (1 / sigma(I)) sum_{mu-atoms in hat(3I)} w_j (P_sigma 1_I)(x_j, t_j)^2.
TestingValue forward_testing(const TwoWeightInstance& inst, const KernelMatrix& k, std::span<const Interval> family);
// B^2 = max_I (1 / mu~(hat I)) sum_{sigma-atoms in 3I} sigma_i (P*_mu (t 1_{hat I}))(y_i)^2.
TestingValue backward_testing(const TwoWeightInstance& inst, const KernelMatrix& k, std::span<const Interval> family);

struct NormResult {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Largest singular value of A = diag(sqrt w) K diag(sqrt sigma) by power
// iteration on the smaller Gram matrix from the all-ones start. Stops once the
// Rayleigh quotient moves by less than tol (relative) and the eigen-residual
// is below sqrt(tol) times the quotient.
NormResult operator_norm(const TwoWeightInstance& inst, const KernelMatrix& k, double tol = 1e-10,
                         std::size_t max_iters = 10000);

// Dyadic intervals whose closure meets an atom location, at levels from the
// finest gap (or smallest height) up to the engulfing level; optionally with
// the translates by +-|I|/3 (truncated at 0). Duplicate-free.
std::vector<Interval> interval_family(const TwoWeightInstance& inst, bool shift_thirds);

struct TestingResult {
  double F = 0.0;
  double B = 0.0;
  double N = 0.0;
  double ratio = 0.0;  // N / (F + B)
  std::optional<Interval> witness_F;
  std::optional<Interval> witness_B;
  std::size_t iterations = 0;
  bool norm_converged = false;
  std::size_t family_size = 0;
};

TestingResult run_testing(const TwoWeightInstance& inst, const KernelMatrix& k, bool shift_thirds,
                          double tol = 1e-10, std::size_t max_iters = 10000);
TestingResult run_testing(const TwoWeightInstance& inst, bool shift_thirds);

}  // namespace besselp
