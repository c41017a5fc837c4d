#include "besselp/error.hpp"
#include "besselp/operators.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace besselp;

namespace {

TwoWeightInstance single_atom() {
  return {BesselParam(1.0), DiscreteMeasure1D({{1.0, 1.0}}), DiscreteMeasure2D({{1.0, 0.5, 1.0}})};
}

TwoWeightInstance random_instance(std::mt19937_64& rng, std::size_t ns, std::size_t nm, double lambda) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto lu = [&](double lo, double hi) { return lo * std::exp(u(rng) * std::log(hi / lo)); };
  std::vector<Atom1D> s;
  for (std::size_t i = 0; i < ns; ++i) s.push_back({lu(0.125, 8.0), lu(0.1, 10.0)});
  std::vector<Atom2D> m;
  for (std::size_t j = 0; j < nm; ++j) m.push_back({lu(0.125, 8.0), lu(0.125, 8.0), lu(0.1, 10.0)});
  return {BesselParam(lambda), DiscreteMeasure1D(s), DiscreteMeasure2D(m)};
}

double svd_norm(const TwoWeightInstance& inst, const KernelMatrix& k) {
  Eigen::MatrixXd a(k.rows(), k.cols());
  for (std::size_t j = 0; j < k.rows(); ++j) {
    for (std::size_t i = 0; i < k.cols(); ++i) {
      a(j, i) = std::sqrt(inst.mu[j].w) * k(j, i) * std::sqrt(inst.sigma[i].w);
    }
  }
  return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
}

}  // namespace

TEST_CASE("apply examples") {
  const TwoWeightInstance a{BesselParam(1.0), DiscreteMeasure1D({{1.0, 1.0}}), DiscreteMeasure2D({{2.0, 1.0, 1.0}})};
  const double expect = 4.0 / (20.0 * std::numbers::pi);
  const std::vector<double> one{1.0};
  const std::vector<Point2D> target{{2.0, 1.0}};
  CHECK(apply_forward(a, one, target)[0] == doctest::Approx(expect).epsilon(1e-10));
  const std::vector<double> y{1.0};
  CHECK(apply_adjoint(a, one, y)[0] == doctest::Approx(expect).epsilon(1e-10));
  CHECK(expect == doctest::Approx(0.0636620).epsilon(1e-6));

  const std::vector<double> zero{0.0};
  CHECK(apply_forward(a, zero, target)[0] == 0.0);
  CHECK(apply_adjoint(a, zero, y)[0] == 0.0);
}

TEST_CASE("apply is linear and the two sides are dual") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double lambda : {0.5, 1.0, 2.0}) {
    const auto inst = random_instance(rng, 9, 11, lambda);
    const KernelMatrix k(inst);
    std::vector<double> f1(9), f2(9), sum(9), g(11);
    for (std::size_t i = 0; i < 9; ++i) {
      f1[i] = u(rng);
      f2[i] = u(rng);
      sum[i] = f1[i] + f2[i];
    }
    for (auto& v : g) v = u(rng);
    const auto p1 = apply_forward(k, inst, f1);
    const auto p2 = apply_forward(k, inst, f2);
    const auto ps = apply_forward(k, inst, sum);
    for (std::size_t j = 0; j < 11; ++j) CHECK(ps[j] == doctest::Approx(p1[j] + p2[j]).epsilon(1e-14));

    // Matrix form agrees with direct evaluation.
    std::vector<Point2D> targets;
    for (const auto& m : inst.mu.atoms()) targets.push_back({m.x, m.t});
    const auto direct = apply_forward(inst, f1, targets);
    for (std::size_t j = 0; j < 11; ++j) CHECK(direct[j] == doctest::Approx(p1[j]).epsilon(1e-12));

    const auto q = apply_adjoint(k, inst, g);
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < 11; ++j) {
      lhs += p1[j] * g[j] * inst.mu[j].w;
      scale += std::abs(p1[j] * g[j] * inst.mu[j].w);
    }
    for (std::size_t i = 0; i < 9; ++i) rhs += f1[i] * q[i] * inst.sigma[i].w;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
  }
}

TEST_CASE("single-atom testing constants and norm") {
  const auto inst = single_atom();
  const double p = 32.0 / (17.0 * std::numbers::pi);
  CHECK(oracle::poisson_lambda1(1.0, 1.0, 0.5) == doctest::Approx(p).epsilon(1e-15));
  const TestingResult r = run_testing(inst, false);
  CHECK(r.F == doctest::Approx(p).epsilon(1e-9));
  CHECK(r.B == doctest::Approx(p).epsilon(1e-9));
  CHECK(r.N == doctest::Approx(p).epsilon(1e-9));
  CHECK(r.ratio == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.norm_converged);
  REQUIRE(r.witness_F);
  CHECK(r.witness_F->contains(1.0));
  const TestingResult s = run_testing(inst, true);
  CHECK(s.ratio == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("testing constants vanish when no atom is reachable") {
  const auto inst = single_atom();
  const KernelMatrix k(inst);
  const std::vector<Interval> far{Interval(16, 32)};
  const TestingValue f = forward_testing(inst, k, far);
  CHECK(f.value == 0.0);
  CHECK_FALSE(f.any_admissible);
  const TestingValue b = backward_testing(inst, k, far);
  CHECK(b.value == 0.0);
  CHECK_FALSE(b.any_admissible);
}

TEST_CASE("homogeneity of F, B and N") {
  std::mt19937_64 rng(9);
  const auto inst = random_instance(rng, 6, 7, 1.0);
  const TestingResult r = run_testing(inst, false);

  std::vector<Atom2D> m2(inst.mu.atoms().begin(), inst.mu.atoms().end());
  for (auto& a : m2) a.w *= 2.0;
  const TwoWeightInstance mu2{inst.p, inst.sigma, DiscreteMeasure2D(m2)};
  const TestingResult r2 = run_testing(mu2, false);
  CHECK(r2.F == doctest::Approx(std::sqrt(2.0) * r.F).epsilon(1e-12));
  CHECK(r2.B == doctest::Approx(std::sqrt(2.0) * r.B).epsilon(1e-12));
  CHECK(r2.N == doctest::Approx(std::sqrt(2.0) * r.N).epsilon(1e-9));

  std::vector<Atom1D> s3(inst.sigma.atoms().begin(), inst.sigma.atoms().end());
  for (auto& a : s3) a.w *= 3.0;
  const TwoWeightInstance sg3{inst.p, DiscreteMeasure1D(s3), inst.mu};
  const TestingResult r3 = run_testing(sg3, false);
  CHECK(r3.F == doctest::Approx(std::sqrt(3.0) * r.F).epsilon(1e-12));
  CHECK(r3.B == doctest::Approx(std::sqrt(3.0) * r.B).epsilon(1e-12));
  CHECK(r3.N == doctest::Approx(std::sqrt(3.0) * r.N).epsilon(1e-9));
  CHECK(r3.ratio == doctest::Approx(r.ratio).epsilon(1e-9));
}

TEST_CASE("operator norm matches a dense SVD") {
  std::mt19937_64 rng(13);
  for (double lambda : {0.5, 1.0, 2.0}) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto inst = random_instance(rng, 3 + rep, 12 - rep, lambda);
      const KernelMatrix k(inst);
      const NormResult n = operator_norm(inst, k);
      CHECK(n.converged);
      CHECK(n.value == doctest::Approx(svd_norm(inst, k)).epsilon(1e-8));
    }
  }
}

TEST_CASE("operator norm of a nearly diagonal pair") {
  // Two well separated blocks: the cross kernel values are below 1e-9 of the diagonal ones,
  // and they move the top singular value only at second order.
  const TwoWeightInstance inst{BesselParam(1.0), DiscreteMeasure1D({{1.0, 2.0}, {4000.0, 1.0}}),
                               DiscreteMeasure2D({{1.0, 0.01, 1.0}, {4000.0, 0.02, 5.0}})};
  const KernelMatrix k(inst);
  CHECK(k(0, 1) < 1e-9 * k(0, 0));
  CHECK(k(1, 0) < 1e-9 * k(1, 1));
  const double d0 = std::sqrt(1.0 * 2.0) * k(0, 0);
  const double d1 = std::sqrt(5.0 * 1.0) * k(1, 1);
  const NormResult n = operator_norm(inst, k);
  CHECK(n.value == doctest::Approx(std::max(d0, d1)).epsilon(1e-9));
}

TEST_CASE("operator norm is invariant under permuting atoms") {
  std::mt19937_64 rng(17);
  const auto inst = random_instance(rng, 8, 10, 1.5);
  const double base = operator_norm(inst, KernelMatrix(inst)).value;
  std::vector<Atom1D> s(inst.sigma.atoms().begin(), inst.sigma.atoms().end());
  std::vector<Atom2D> m(inst.mu.atoms().begin(), inst.mu.atoms().end());
  std::reverse(s.begin(), s.end());
  std::rotate(m.begin(), m.begin() + 3, m.end());
  const TwoWeightInstance perm{inst.p, DiscreteMeasure1D(s), DiscreteMeasure2D(m)};
  CHECK(operator_norm(perm, KernelMatrix(perm)).value == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("necessity on random instances") {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 12; ++rep) {
    const auto inst = random_instance(rng, 7, 9, 0.5 + 0.25 * rep);
    for (bool shift : {false, true}) {
      const TestingResult r = run_testing(inst, shift);
      CHECK(r.F <= r.N * (1.0 + 1e-8));
      CHECK(r.B <= r.N * (1.0 + 1e-8));
    }
  }
}

TEST_CASE("interval family") {
  const auto inst = single_atom();
  const auto plain = interval_family(inst, false);
  for (const Interval& iv : {Interval(0.5, 1), Interval(1, 2), Interval(0, 1), Interval(0, 2)}) {
    CHECK(std::count(plain.begin(), plain.end(), iv) == 1);
  }
  // Levels -1..1 around the point 1: two cells per level below the top, one at the top.
  CHECK(plain.size() == 5);
  const auto shifted = interval_family(inst, true);
  CHECK(shifted.size() > plain.size());
  for (const auto& iv : plain) CHECK(std::count(shifted.begin(), shifted.end(), iv) == 1);

  std::mt19937_64 rng(23);
  const auto big = random_instance(rng, 10, 10, 1.0);
  for (bool shift : {false, true}) {
    const auto fam = interval_family(big, shift);
    std::set<std::pair<double, double>> seen;
    for (const auto& iv : fam) {
      CHECK(seen.insert({iv.a, iv.b}).second);
      CHECK(iv.a >= 0.0);
      CHECK(iv.b > iv.a);
    }
  }
}

TEST_CASE("kernel matrix and invalid instances") {
  const auto inst = single_atom();
  const KernelMatrix k(inst);
  CHECK(k.rows() == 1);
  CHECK(k.cols() == 1);
  CHECK(k(0, 0) == doctest::Approx(oracle::poisson_lambda1(1.0, 1.0, 0.5)).epsilon(1e-10));
  const TwoWeightInstance empty{BesselParam(1.0), DiscreteMeasure1D(), DiscreteMeasure2D({{1.0, 1.0, 1.0}})};
  CHECK_THROWS_AS(empty.validate(), InvalidParameter);
  const std::vector<double> wrong(3, 1.0);
  CHECK_THROWS_AS(apply_forward(k, inst, wrong), InvalidParameter);
}
