#include "besselp/dyadic.hpp"

#include "besselp/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace besselp {

namespace {

void check_values(const DiscreteMeasure2D& mu_tilde, std::span<const double> psi) {
  if (psi.size() != mu_tilde.size()) throw InvalidParameter("one value per atom required");
  for (double v : psi) {
    if (!std::isfinite(v)) throw InvalidParameter("values must be finite");
  }
}

// ceil(log2 t): the first level whose boxes are tall enough to hold height t.
int height_level(double t) {
  int e = 0;
  const double mant = std::frexp(t, &e);
  return mant == 0.5 ? e - 1 : e;
}

struct BoxSums {
  double mass = 0.0;
  double integral = 0.0;  // of |psi| d mu~
};

BoxSums box_sums(const DiscreteMeasure2D& mu_tilde, std::span<const double> psi, const DyadicInterval& j) {
  const CarlesonBox box = hat(j.interval());
  BoxSums s;
  for (std::size_t i = 0; i < mu_tilde.size(); ++i) {
    const auto& a = mu_tilde[i];
    if (box.contains(a.x, a.t)) {
      s.mass += a.w;
      s.integral += std::abs(psi[i]) * a.w;
    }
  }
  return s;
}

int support_level(const DiscreteMeasure2D& mu_tilde, double x, double t) {
  std::vector<double> xs{x};
  std::vector<double> ts{t};
  for (const auto& a : mu_tilde.atoms()) {
    xs.push_back(a.x);
    ts.push_back(a.t);
  }
  return engulfing_level(xs, ts);
}

// Dyadic boxes containing (x, t), from the first tall enough to the top level.
std::vector<DyadicInterval> chain(double x, double t, int min_level, int max_level) {
  std::vector<DyadicInterval> out;
  for (int k = std::max(min_level, height_level(t)); k <= max_level; ++k) {
    const DyadicInterval d = DyadicInterval::containing(x, k);
    if (d.left() < x) out.push_back(d);  // x on a dyadic endpoint lies in no open interval of this level
  }
  return out;
}

}  // namespace

MaximalValue maximal_function(const DiscreteMeasure2D& mu_tilde, std::span<const double> psi, double x, double t,
                              int min_level, int max_level) {
  check_values(mu_tilde, psi);
  if (!(x > 0.0) || !(t > 0.0)) throw InvalidParameter("maximal function query requires x, t > 0");
  MaximalValue r;
  for (const auto& d : chain(x, t, min_level, max_level)) {
    const BoxSums s = box_sums(mu_tilde, psi, d);
    if (s.mass <= 0.0) continue;
    r.covered = true;
    r.value = std::max(r.value, s.integral / s.mass);
  }
  return r;
}

MaximalValue maximal_function(const DiscreteMeasure2D& mu_tilde, std::span<const double> psi, double x, double t) {
  return maximal_function(mu_tilde, psi, x, t, height_level(t), support_level(mu_tilde, x, t));
}

Weak11Report weak_11_check(const DiscreteMeasure2D& mu_tilde, std::span<const double> psi, double alpha) {
  check_values(mu_tilde, psi);
  if (!(alpha > 0.0)) throw InvalidParameter("alpha must be positive");
  Weak11Report r;
  r.alpha = alpha;
  if (mu_tilde.empty()) {
    r.cover_consistent = true;
    r.ok = true;
    return r;
  }

  double l1 = 0.0;
  for (std::size_t i = 0; i < mu_tilde.size(); ++i) l1 += std::abs(psi[i]) * mu_tilde[i].w;
  r.bound = l1 / alpha;

  // Every box with positive mass contains an atom, so the chains through the
  // atoms enumerate all candidates; the top level is shared by all chains.
  std::vector<double> xs;
  std::vector<double> ts;
  for (const auto& a : mu_tilde.atoms()) {
    xs.push_back(a.x);
    ts.push_back(a.t);
  }
  const int top = engulfing_level(xs, ts);
  std::set<DyadicInterval> qualifying;
  std::vector<bool> above(mu_tilde.size(), false);
  for (std::size_t i = 0; i < mu_tilde.size(); ++i) {
    for (const auto& d : chain(xs[i], ts[i], height_level(ts[i]), top)) {
      const BoxSums s = box_sums(mu_tilde, psi, d);
      if (s.mass > 0.0 && s.integral > alpha * s.mass) {
        qualifying.insert(d);
        above[i] = true;
      }
    }
  }

  std::vector<DyadicInterval> cover;
  for (const auto& d : qualifying) {
    bool maximal = true;
    for (DyadicInterval a = d.parent(); a.level <= top; a = a.parent()) {
      if (qualifying.count(a)) {
        maximal = false;
        break;
      }
    }
    if (maximal) cover.push_back(d);
  }
  r.cover_size = cover.size();

  std::vector<bool> in_cover(mu_tilde.size(), false);
  for (const auto& d : cover) {
    const CarlesonBox box = hat(d.interval());
    for (std::size_t i = 0; i < mu_tilde.size(); ++i) {
      if (box.contains(mu_tilde[i].x, mu_tilde[i].t)) {
        r.cover_mass += mu_tilde[i].w;
        in_cover[i] = true;
      }
    }
  }
  for (std::size_t i = 0; i < mu_tilde.size(); ++i) {
    if (above[i]) r.level_set_mass += mu_tilde[i].w;
  }
  r.cover_consistent = in_cover == above;
  // Summation order differs between the two sides; allow roundoff only.
  r.ok = r.cover_consistent && r.level_set_mass <= r.cover_mass * (1.0 + 1e-12) &&
         r.cover_mass <= r.bound * (1.0 + 1e-12);
  return r;
}

}  // namespace besselp
