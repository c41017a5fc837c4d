#include "besselp/operators.hpp"

#include "besselp/dyadic.hpp"
#include "besselp/error.hpp"
#include "besselp/simd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace besselp {

void TwoWeightInstance::validate() const {
  p.validate();
  if (sigma.empty()) throw InvalidParameter("sigma has no atoms");
  if (mu.empty()) throw InvalidParameter("mu has no atoms");
}

KernelMatrix::KernelMatrix(const TwoWeightInstance& inst) : rows_(inst.mu.size()), cols_(inst.sigma.size()) {
  inst.validate();
  std::vector<KernelQuery> qs;
  qs.reserve(rows_ * cols_);
  for (const auto& m : inst.mu.atoms()) {
    for (const auto& s : inst.sigma.atoms()) qs.push_back({m.x, s.y, m.t});
  }
  data_ = eval_kernel_batch(inst.p, qs);
}

namespace {

void check_size(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) throw InvalidParameter(std::string(what) + ": expected one value per atom");
}

}  // namespace

std::vector<double> apply_forward(const TwoWeightInstance& inst, std::span<const double> f,
                                  std::span<const Point2D> targets) {
  inst.validate();
  check_size(f, inst.sigma.size(), "apply_forward");
  std::vector<KernelQuery> qs;
  qs.reserve(targets.size() * inst.sigma.size());
  for (const auto& tg : targets) {
    for (const auto& s : inst.sigma.atoms()) qs.push_back({tg.x, s.y, tg.t});
  }
  const std::vector<double> kv = eval_kernel_batch(inst.p, qs);
  std::vector<double> fs(inst.sigma.size());
  for (std::size_t i = 0; i < fs.size(); ++i) fs[i] = f[i] * inst.sigma[i].w;
  std::vector<double> out(targets.size());
  simd::active().gemv(kv.data(), targets.size(), fs.size(), fs.data(), out.data());
  return out;
}

std::vector<double> apply_adjoint(const TwoWeightInstance& inst, std::span<const double> g,
                                  std::span<const double> targets) {
  inst.validate();
  check_size(g, inst.mu.size(), "apply_adjoint");
  std::vector<KernelQuery> qs;
  qs.reserve(targets.size() * inst.mu.size());
  for (double y : targets) {
    for (const auto& m : inst.mu.atoms()) qs.push_back({m.x, y, m.t});
  }
  const std::vector<double> kv = eval_kernel_batch(inst.p, qs);
  std::vector<double> gm(inst.mu.size());
  for (std::size_t j = 0; j < gm.size(); ++j) gm[j] = g[j] * inst.mu[j].w;
  std::vector<double> out(targets.size());
  simd::active().gemv(kv.data(), targets.size(), gm.size(), gm.data(), out.data());
  return out;
}

std::vector<double> apply_forward(const KernelMatrix& k, const TwoWeightInstance& inst, std::span<const double> f) {
  check_size(f, k.cols(), "apply_forward");
  std::vector<double> fs(k.cols());
  for (std::size_t i = 0; i < fs.size(); ++i) fs[i] = f[i] * inst.sigma[i].w;
  std::vector<double> out(k.rows());
  simd::active().gemv(k.data().data(), k.rows(), k.cols(), fs.data(), out.data());
  return out;
}

std::vector<double> apply_adjoint(const KernelMatrix& k, const TwoWeightInstance& inst, std::span<const double> g) {
  check_size(g, k.rows(), "apply_adjoint");
  std::vector<double> gm(k.rows());
  for (std::size_t j = 0; j < gm.size(); ++j) gm[j] = g[j] * inst.mu[j].w;
  std::vector<double> out(k.cols());
  simd::active().gemv_t(k.data().data(), k.rows(), k.cols(), gm.data(), out.data());
  return out;
}

TestingValue forward_testing(const TwoWeightInstance& inst, const KernelMatrix& k, std::span<const Interval> family) {
  const auto& be = simd::active();
  TestingValue best;
  double best_sq = -1.0;
  std::vector<double> masked(k.cols());
  for (const Interval& iv : family) {
    double s_mass = 0.0;
    for (std::size_t i = 0; i < k.cols(); ++i) {
      const bool in = iv.contains(inst.sigma[i].y);
      masked[i] = in ? inst.sigma[i].w : 0.0;
      s_mass += masked[i];
    }
    if (s_mass <= 0.0) continue;
    best.any_admissible = true;
    const CarlesonBox box = hat(dilate(iv, 3));
    double acc = 0.0;
    for (std::size_t j = 0; j < k.rows(); ++j) {
      const auto& m = inst.mu[j];
      if (!box.contains(m.x, m.t)) continue;
      const double v = be.dot(k.data().data() + j * k.cols(), masked.data(), k.cols());
      acc += m.w * v * v;
    }
    const double sq = acc / s_mass;
    if (sq > best_sq) {
      best_sq = sq;
      best.witness = iv;
    }
  }
  best.value = best_sq > 0.0 ? std::sqrt(best_sq) : 0.0;
  return best;
}

TestingValue backward_testing(const TwoWeightInstance& inst, const KernelMatrix& k, std::span<const Interval> family) {
  const auto& be = simd::active();
  TestingValue best;
  double best_sq = -1.0;
  std::vector<double> g(k.rows());
  std::vector<double> u(k.cols());
  std::vector<double> w3(k.cols());
  for (const Interval& iv : family) {
    const CarlesonBox box = hat(iv);
    double tilde_mass = 0.0;
    for (std::size_t j = 0; j < k.rows(); ++j) {
      const auto& m = inst.mu[j];
      const bool in = box.contains(m.x, m.t);
      g[j] = in ? m.t * m.w : 0.0;
      if (in) tilde_mass += m.t * m.t * m.w;
    }
    if (tilde_mass <= 0.0) continue;
    best.any_admissible = true;
    const Interval triple = dilate(iv, 3);
    for (std::size_t i = 0; i < k.cols(); ++i) {
      w3[i] = triple.contains(inst.sigma[i].y) ? inst.sigma[i].w : 0.0;
    }
    be.gemv_t(k.data().data(), k.rows(), k.cols(), g.data(), u.data());
    const double sq = be.weighted_sum_sq(w3.data(), u.data(), k.cols()) / tilde_mass;
    if (sq > best_sq) {
      best_sq = sq;
      best.witness = iv;
    }
  }
  best.value = best_sq > 0.0 ? std::sqrt(best_sq) : 0.0;
  return best;
}

NormResult operator_norm(const TwoWeightInstance& inst, const KernelMatrix& k, double tol, std::size_t max_iters) {
  if (!(tol > 0.0 && tol < 1.0)) throw InvalidParameter("norm tolerance must lie in (0, 1)");
  if (max_iters == 0) throw InvalidParameter("max_iters must be positive");
  const auto& be = simd::active();
  const std::size_t rows = k.rows();
  const std::size_t cols = k.cols();

  // Columns of A (or of A^T when rows < cols) laid out contiguously so that
  // Gram entries are plain dot products.
  const bool use_cols = cols <= rows;
  const std::size_t n = use_cols ? cols : rows;
  const std::size_t len = use_cols ? rows : cols;
  std::vector<double> vecs(n * len);
  for (std::size_t j = 0; j < rows; ++j) {
    for (std::size_t i = 0; i < cols; ++i) {
      const double a = std::sqrt(inst.mu[j].w) * k(j, i) * std::sqrt(inst.sigma[i].w);
      if (use_cols) {
        vecs[i * len + j] = a;
      } else {
        vecs[j * len + i] = a;
      }
    }
  }
  std::vector<double> gram(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const double v = be.dot(vecs.data() + a * len, vecs.data() + b * len, len);
      gram[a * n + b] = v;
      gram[b * n + a] = v;
    }
  }

  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> y(n);
  NormResult r;
  double prev = -1.0;
  double rho = 0.0;
  for (std::size_t it = 1; it <= max_iters; ++it) {
    be.gemv(gram.data(), n, n, v.data(), y.data());
    rho = be.dot(v.data(), y.data(), n);
    double res = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      const double d = y[a] - rho * v[a];
      res += d * d;
    }
    res = std::sqrt(res);
    r.iterations = it;
    if (prev >= 0.0 && std::abs(rho - prev) <= tol * rho && res <= std::sqrt(tol) * rho) {
      r.converged = true;
      break;
    }
    prev = rho;
    const double norm = std::sqrt(be.dot(y.data(), y.data(), n));
    if (!(norm > 0.0)) break;
    for (std::size_t a = 0; a < n; ++a) v[a] = y[a] / norm;
  }
  r.value = std::sqrt(std::max(rho, 0.0));
  return r;
}

std::vector<Interval> interval_family(const TwoWeightInstance& inst, bool shift_thirds) {
  inst.validate();
  std::vector<double> points;
  std::vector<double> heights;
  for (const auto& s : inst.sigma.atoms()) points.push_back(s.y);
  for (const auto& m : inst.mu.atoms()) {
    points.push_back(m.x);
    heights.push_back(m.t);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  double finest = *std::min_element(heights.begin(), heights.end());
  for (std::size_t i = 1; i < points.size(); ++i) finest = std::min(finest, points[i] - points[i - 1]);
  int lo = 0;
  std::frexp(finest, &lo);
  lo -= 1;  // floor(log2 finest)
  const int hi = engulfing_level(points, heights);

  std::set<DyadicInterval> dyadic;
  for (int level = lo; level <= hi; ++level) {
    for (double p : points) {
      const DyadicInterval d = DyadicInterval::containing(p, level);
      dyadic.insert(d);
      if (d.left() == p && d.index > 0) dyadic.insert({level, d.index - 1});
    }
  }

  std::set<std::pair<double, double>> seen;
  std::vector<Interval> out;
  auto add = [&](double a, double b) {
    if (!(b > a)) return;
    if (seen.insert({a, b}).second) out.emplace_back(a, b);
  };
  for (const auto& d : dyadic) add(d.left(), d.right());
  if (shift_thirds) {
    for (const auto& d : dyadic) {
      const double third = d.length() / 3.0;
      add(d.left() + third, d.right() + third);
      add(std::max(d.left() - third, 0.0), d.right() - third);
    }
  }
  return out;
}

TestingResult run_testing(const TwoWeightInstance& inst, const KernelMatrix& k, bool shift_thirds, double tol,
                          std::size_t max_iters) {
  const std::vector<Interval> family = interval_family(inst, shift_thirds);
  const TestingValue f = forward_testing(inst, k, family);
  const TestingValue b = backward_testing(inst, k, family);
  const NormResult n = operator_norm(inst, k, tol, max_iters);
  TestingResult r;
  r.F = f.value;
  r.B = b.value;
  r.N = n.value;
  r.ratio = (r.F + r.B) > 0.0 ? r.N / (r.F + r.B) : 0.0;
  r.witness_F = f.witness;
  r.witness_B = b.witness;
  r.iterations = n.iterations;
  r.norm_converged = n.converged;
  r.family_size = family.size();
  return r;
}

TestingResult run_testing(const TwoWeightInstance& inst, bool shift_thirds) {
  const KernelMatrix k(inst);
  return run_testing(inst, k, shift_thirds);
}

}  // namespace besselp
