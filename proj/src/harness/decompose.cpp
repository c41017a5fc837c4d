#include "besselp/error.hpp"
#include "besselp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>

namespace besselp::harness {

namespace {

double atom_sum(const TwoWeightInstance& inst, const KernelMatrix& k, std::span<const double> phi, std::size_t i) {
  double v = 0.0;
  for (std::size_t j = 0; j < inst.mu.size(); ++j) v += k(j, i) * phi[j] * inst.mu[j].w;
  return v;
}

std::optional<int> band_or_none(double v) {
  if (!(v > 0.0)) return std::nullopt;
  return band_of(v);
}

// Coarsest resolution floor that keeps the tail below 2^-12 |omega| and puts
// every given sigma-atom of omega inside a member. The overlap of the 3I is
// unbounded as the floor descends towards a dyadic endpoint, so finer floors
// only inflate it without changing anything the argument uses.
WhitneyCollection whitney_at_floor(const OpenSet& omega, std::span<const double> atoms, WhitneyMode mode) {
  int coarsest = std::numeric_limits<int>::max();
  for (const auto& part : omega.parts()) {
    coarsest = std::min(coarsest, static_cast<int>(std::floor(std::log2(part.length()))));
  }
  const int finest = default_min_level(omega) - 8;
  const double tail_cap = std::ldexp(omega.measure(), -12);
  for (int floor_level = coarsest;; --floor_level) {
    WhitneyCollection w = whitney_decompose(omega, floor_level, WhitneyMode::Repaired);
    bool covered = w.uncovered_tail <= tail_cap;
    for (std::size_t q = 0; covered && q < atoms.size(); ++q) {
      const double y = atoms[q];
      auto it = std::upper_bound(w.intervals.begin(), w.intervals.end(), y,
                                 [](double v, const DyadicInterval& d) { return v < d.left(); });
      covered = it != w.intervals.begin() && std::prev(it)->interval().contains(y);
    }
    if (covered || floor_level <= finest) {
      return mode == WhitneyMode::Repaired ? w : whitney_decompose(omega, floor_level, mode);
    }
  }
}

}  // namespace

LevelSets::LevelSets(const TwoWeightInstance& inst, const KernelMatrix& k, std::span<const double> phi,
                     int lowest_level, std::size_t grid_cells, int refine_depth) {
  const std::size_t ns = inst.sigma.size();
  const std::size_t nm = inst.mu.size();
  values_.resize(ns);
  bands_.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    values_[i] = atom_sum(inst, k, phi, i);
    bands_[i] = band_or_none(values_[i]);
  }

  // Window: P* decreases beyond every atom, so once it is below 2^lowest at X
  // no level set reaches past X.
  double reach = 0.0;
  for (const auto& m : inst.mu.atoms()) reach = std::max(reach, m.x + m.t);
  for (const auto& s : inst.sigma.atoms()) reach = std::max(reach, s.y);
  window_ = std::ldexp(1.0, static_cast<int>(std::ceil(std::log2(reach))));
  const double floor_value = std::ldexp(1.0, lowest_level);
  for (int guard = 0;; ++guard) {
    ++evaluations_;
    if (potential(inst, phi, window_) <= floor_value) break;
    if (guard == 64) throw GridTooCoarse("potential does not decay below 2^" + std::to_string(lowest_level));
    window_ *= 2.0;
  }
  const int g = static_cast<int>(std::ceil(std::log2(window_ / static_cast<double>(grid_cells))));
  cell_ = std::ldexp(1.0, g);
  const auto n = static_cast<std::size_t>(window_ / cell_);

  std::vector<KernelQuery> qs;
  qs.reserve(n * nm);
  for (std::size_t c = 1; c <= n; ++c) {
    for (const auto& m : inst.mu.atoms()) qs.push_back({m.x, static_cast<double>(c) * cell_, m.t});
  }
  const std::vector<double> kv = eval_kernel_batch(inst.p, qs);
  evaluations_ += n;
  std::vector<double> grid(n);
  for (std::size_t c = 0; c < n; ++c) {
    double v = 0.0;
    for (std::size_t j = 0; j < nm; ++j) v += kv[c * nm + j] * phi[j] * inst.mu[j].w;
    grid[c] = v;
  }

  // Sigma-atoms in the closure of each cell.
  std::vector<std::vector<std::size_t>> touching(n);
  for (std::size_t i = 0; i < ns; ++i) {
    const double y = inst.sigma[i].y;
    const auto c = static_cast<std::size_t>(std::floor(y / cell_));
    if (c > 0 && static_cast<double>(c) * cell_ == y) touching[c - 1].push_back(i);
    if (c < n) touching[c].push_back(i);
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  // Endpoint values at atoms come from the atom itself.
  auto value_at = [&](double x, double fallback, const std::vector<std::size_t>& atoms) {
    for (std::size_t i : atoms) {
      if (inst.sigma[i].y == x) return values_[i];
    }
    return fallback;
  };

  std::function<void(double, double, double, double, std::vector<std::size_t>, int)> refine =
      [&](double a, double va, double b, double vb, std::vector<std::size_t> atoms, int depth) {
        va = std::isnan(va) ? va : value_at(a, va, atoms);
        vb = value_at(b, vb, atoms);
        double value = std::isnan(va) ? vb : std::max(va, vb);
        for (std::size_t i : atoms) value = std::max(value, values_[i]);
        const auto band = band_or_none(value);
        bool consistent = true;
        for (std::size_t i : atoms) consistent = consistent && bands_[i] == band;
        if (consistent) {
          cells_.push_back({a, b, value});
          return;
        }
        if (depth >= refine_depth) {
          throw GridTooCoarse("cannot separate sigma-atom bands near " + std::to_string(a) + " after " +
                              std::to_string(depth) + " bisections");
        }
        const double mid = 0.5 * (a + b);
        const double vm = value_at(mid, potential(inst, phi, mid), atoms);
        ++evaluations_;
        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t i : atoms) {
          const double y = inst.sigma[i].y;
          if (y <= mid) left.push_back(i);
          if (y >= mid) right.push_back(i);
        }
        refine(a, va, mid, vm, std::move(left), depth + 1);
        refine(mid, vm, b, vb, std::move(right), depth + 1);
      };

  for (std::size_t c = 0; c < n; ++c) {
    const double a = static_cast<double>(c) * cell_;
    const double b = static_cast<double>(c + 1) * cell_;
    const double va = c == 0 ? nan : grid[c - 1];
    if (touching[c].empty()) {
      cells_.push_back({a, b, std::isnan(va) ? grid[c] : std::max(va, grid[c])});
    } else {
      refine(a, va, b, grid[c], touching[c], 0);
    }
  }
}

OpenSet LevelSets::omega(int k) const {
  const double threshold = std::ldexp(1.0, k);
  std::vector<Interval> parts;
  for (const auto& c : cells_) {
    if (!(c.value > threshold)) continue;
    if (!parts.empty() && parts.back().b == c.a) {
      parts.back().b = c.b;
    } else {
      parts.emplace_back(c.a, c.b);
    }
  }
  return OpenSet(std::move(parts));
}

bool DecompositionReport::ok() const {
  bool w = whitney.disjoint && whitney.dilates_inside && whitney.overlap_ok && whitney.nesting.ok;
  if (repaired) w = w && whitney.coverage_ok && whitney.tail_ok && whitney.witness_ok;
  bool e = energy.bracket_ok && energy.a_bound_ok && energy.lower_bound_ok && energy.b_split_ok;
  if (repaired) e = e && energy.partition_ok;
  return w && max_principle.ok && e && counting.ok && counting.lacey_ok && comparability.ok && carleson.ok;
}

DecompositionReport decompose_energy(const TwoWeightInstance& inst, const KernelMatrix& k, std::span<const double> phi,
                                     const ExperimentConfig& cfg, const TestingResult& testing) {
  if (phi.size() != inst.mu.size()) throw InvalidParameter("phi must have one value per mu-atom");
  const double lambda = inst.p.lambda;
  const double delta = cfg.delta;
  const int m = level_shift(cfg, lambda);
  const double cmp = mp_constant(cfg.mp_mode, lambda);
  const WhitneyMode mode = cfg.mp_mode == MpConstantMode::Repaired33 ? WhitneyMode::Repaired : WhitneyMode::Literal;

  DecompositionReport rep;
  rep.lambda = lambda;
  rep.mp_constant = cmp;
  rep.repaired = mode == WhitneyMode::Repaired;
  rep.F = testing.F;
  rep.B = testing.B;
  rep.max_principle.constant = cmp;
  rep.energy.m = m;
  rep.energy.delta = delta;
  rep.counting.bound = static_cast<std::size_t>(std::ceil(1.0 / delta));
  rep.counting.lacey_bound = cfg.lacey_bound;
  rep.comparability.c_lo = comparability_bracket(lambda).first;
  rep.comparability.c_hi = comparability_bracket(lambda).second;

  const std::size_t ns = inst.sigma.size();
  const std::size_t nm = inst.mu.size();
  double phi_norm_sq = 0.0;
  for (std::size_t j = 0; j < nm; ++j) phi_norm_sq += phi[j] * phi[j] * inst.mu[j].w;

  std::vector<double> v(ns);
  std::set<int> band_set;
  for (std::size_t i = 0; i < ns; ++i) {
    v[i] = atom_sum(inst, k, phi, i);
    if (v[i] > 0.0) band_set.insert(band_of(v[i]));
  }
  for (std::size_t i = 0; i < ns; ++i) rep.energy.total += inst.sigma[i].w * v[i] * v[i];

  // Principal intervals on a root engulfing every atom and the grid window.
  const DiscreteMeasure2D mt = tilde(inst.mu);
  auto finish_carleson = [&](double window) {
    std::vector<double> points;
    std::vector<double> heights;
    for (const auto& s : inst.sigma.atoms()) points.push_back(s.y);
    for (const auto& a : inst.mu.atoms()) {
      points.push_back(a.x);
      heights.push_back(a.t);
    }
    int top = engulfing_level(points, heights);
    if (window > 0.0) top = std::max(top, std::ilogb(window));
    const StoppingFamily g = principal_intervals(mt, phi, DyadicInterval{top + 1, 0});
    rep.principal_intervals = g.size();
    rep.carleson = carleson_packing_check(g, inst.mu, phi, cfg.carleson_C);
    return g;
  };

  if (band_set.empty()) {
    // phi vanishes: every term is zero.
    rep.energy.partition_ok = rep.energy.bracket_ok = rep.energy.a_bound_ok = rep.energy.b_split_ok = true;
    finish_carleson(0.0);
    return rep;
  }

  std::set<int> level_set;
  for (int b : band_set) {
    level_set.insert(b - m);
    level_set.insert(b + 1);
  }
  rep.levels.assign(level_set.begin(), level_set.end());

  const LevelSets ls(inst, k, phi, *band_set.begin() - m, cfg.grid_cells, cfg.refine_depth);
  rep.window = ls.window();
  rep.cell_length = ls.cell_length();
  rep.cells = ls.cell_count();
  const auto& bands = ls.bands();

  std::map<int, WhitneyCollection> fam;
  for (int lev : rep.levels) {
    const OpenSet omega = ls.omega(lev);
    std::vector<double> inside;
    for (const auto& a : inst.sigma.atoms()) {
      if (omega.contains(a.y)) inside.push_back(a.y);
    }
    WhitneyCollection w =
        omega.empty() ? WhitneyCollection{{}, omega, mode, 0, 0.0} : whitney_at_floor(omega, inside, mode);
    if (!omega.empty()) {
      const WhitneyProperties pr = whitney_properties(w);
      rep.whitney.disjoint = rep.whitney.disjoint && pr.disjoint;
      rep.whitney.coverage_ok = rep.whitney.coverage_ok && pr.coverage_matches_tail;
      rep.whitney.tail_ok = rep.whitney.tail_ok && w.uncovered_tail <= std::ldexp(omega.measure(), -12) * (1 + 1e-12);
      rep.whitney.dilates_inside = rep.whitney.dilates_inside && pr.dilates_inside;
      rep.whitney.witness_ok = rep.whitney.witness_ok && pr.witness_ok;
      rep.whitney.overlap = std::max(rep.whitney.overlap, pr.overlap);
    }
    ++rep.whitney.families;
    rep.whitney.members += w.intervals.size();
    check_max_principle(inst, k, phi, lev, w, cmp, rep.max_principle);
    fam.emplace(lev, std::move(w));
  }
  rep.whitney.overlap_ok = rep.whitney.overlap <= cfg.overlap_bound;
  {
    std::vector<WhitneyCollection> fs;
    for (const auto& [lev, w] : fam) fs.push_back(w);
    rep.whitney.nesting = nesting_check(fs, rep.levels);
  }

  const StoppingFamily g = finish_carleson(ls.window());
  auto proj = [&](const DyadicInterval& d) { return g.project(d).value_or(g.root()); };

  EnergyReport& en = rep.energy;
  for (std::size_t i = 0; i < ns; ++i) {
    if (bands[i]) en.band_sum += std::ldexp(inst.sigma[i].w, 2 * (*bands[i] - m));
  }
  double a_level = 0.0;
  for (std::size_t i = 0; i < ns; ++i) {
    if (bands[i]) a_level += std::ldexp(inst.sigma[i].w, 2 * *bands[i]);
  }
  en.a_level_bound = delta * (4.0 / 3.0) * a_level;
  en.absorption_factor = (4.0 / 3.0) * delta * std::ldexp(1.0, 2 * (m + 1));

  std::map<DyadicInterval, std::vector<int>> heavy_levels;
  std::map<DyadicInterval, std::set<int>> lacey;
  bool comparability_started = false;

  for (int b : band_set) {
    const int lev = b - m;
    const double w4 = std::ldexp(1.0, 2 * lev);
    const WhitneyCollection& wk = fam.at(lev);
    const WhitneyCollection& wnext = fam.at(lev + m + 1);
    for (const auto& d : wk.intervals) {
      const Interval iv = d.interval();
      double sig_i = 0.0;
      double sig_f = 0.0;
      std::vector<std::size_t> in_i;
      std::vector<std::size_t> in_f;
      for (std::size_t i = 0; i < ns; ++i) {
        if (!iv.contains(inst.sigma[i].y)) continue;
        sig_i += inst.sigma[i].w;
        in_i.push_back(i);
        if (bands[i] && *bands[i] == lev + m) {
          sig_f += inst.sigma[i].w;
          in_f.push_back(i);
        }
      }
      const bool heavy = sig_f > 0.0 && sig_f >= delta * sig_i;
      if (!heavy) {
        en.A += w4 * sig_f;
        en.a_intermediate += delta * w4 * sig_i;
        continue;
      }
      en.B += w4 * sig_f;
      ++en.heavy_pairs;
      heavy_levels[d].push_back(lev);

      const Interval triple = dilate(iv, 3);
      const CarlesonBox box3 = hat(triple);
      std::vector<double> pf(nm, 0.0);
      std::vector<double> pi(nm, 0.0);
      for (std::size_t j = 0; j < nm; ++j) {
        for (std::size_t i : in_f) pf[j] += k(j, i) * inst.sigma[i].w;
        for (std::size_t i : in_i) pi[j] += k(j, i) * inst.sigma[i].w;
      }

      // Omega-hat_{k+m+1}: the boxes of next-family members inside 3I.
      std::vector<DyadicInterval> inner;
      for (const auto& jd : wnext.intervals) {
        if (jd.interval().subset_of(triple)) inner.push_back(jd);
      }
      double b1 = 0.0;
      double b2 = 0.0;
      for (std::size_t j = 0; j < nm; ++j) {
        const auto& a = inst.mu[j];
        if (!box3.contains(a.x, a.t)) continue;
        bool in_hat = false;
        for (const auto& jd : inner) in_hat = in_hat || hat(jd.interval()).contains(a.x, a.t);
        (in_hat ? b2 : b1) += pf[j] * phi[j] * a.w;
      }
      b1 /= sig_f;
      b2 /= sig_f;
      // Same quantity summed on the sigma side.
      double avg = 0.0;
      for (std::size_t i : in_f) {
        double s = 0.0;
        for (std::size_t j = 0; j < nm; ++j) {
          const auto& a = inst.mu[j];
          if (box3.contains(a.x, a.t)) s += k(j, i) * phi[j] * a.w;
        }
        avg += inst.sigma[i].w * s;
      }
      avg /= sig_f;
      if (avg > 0.0) en.duality_gap = std::max(en.duality_gap, std::abs(avg - (b1 + b2)) / avg);
      if (!(b1 + b2 >= std::ldexp(1.0, lev) * (1.0 - 1e-12))) en.lower_bound_ok = false;
      en.B1 += 2.0 * b1 * b1 * sig_f;
      en.B2 += 2.0 * b2 * b2 * sig_f;

      // The three translates share one square.
      double s21 = 0.0;
      double s22 = 0.0;
      for (std::int64_t theta = -1; theta <= 1; ++theta) {
        const auto shifted = d.shifted(theta);
        if (!shifted) continue;
        const DyadicInterval g_theta = proj(*shifted);
        for (const auto& jd : wnext.intervals) {
          if (!jd.within(*shifted)) continue;
          const CarlesonBox bj = hat(jd.interval());
          double pj = 0.0;
          for (std::size_t j = 0; j < nm; ++j) {
            const auto& a = inst.mu[j];
            if (bj.contains(a.x, a.t)) pj += pi[j] * a.t * a.w;
          }
          if (pj == 0.0) continue;
          const double val = pj * box_alpha(mt, phi, jd);
          const DyadicInterval gj = proj(jd);
          if (gj == g_theta) {
            s21 += val;
          } else {
            s22 += val;
            lacey[gj].insert(lev);
          }
        }
      }
      en.B21 += s21 * s21 / (delta * sig_i);
      en.B22 += s22 * s22 / (delta * sig_i);

      for (const auto& jd : inner) {
        if (!comparability_started) {
          rep.comparability.min_ratio = std::numeric_limits<double>::infinity();
          comparability_started = true;
        }
        check_box_comparability(inst, in_f, jd, rep.comparability);
      }
    }
  }
  if (rep.comparability.samples == 0) rep.comparability.min_ratio = 0.0;

  const double tol = 1e-12;
  en.partition_ok = std::abs(en.A + en.B - en.band_sum) <= tol * std::max(en.band_sum, 1e-300);
  en.scaled_sum = std::ldexp(en.A + en.B, 2 * m);
  en.bracket_ok = en.scaled_sum >= 0.25 * en.total * (1 - tol) && en.scaled_sum <= en.total * (1 + tol);
  en.a_bound_ok = en.A <= en.a_intermediate * (1 + tol) && en.a_intermediate <= en.a_level_bound * (1 + tol) &&
                  en.a_level_bound <= (4.0 / 3.0) * delta * en.total * (1 + tol);
  en.b_split_ok = en.B <= (en.B1 + en.B2) * (1 + tol);

  const double F = testing.F;
  const double Bc = testing.B;
  if (F > 0.0 && phi_norm_sq > 0.0) {
    en.C_B1 = en.B1 / (F * F * phi_norm_sq / (delta * delta));
    en.C_B22 = en.B22 / (F * F * phi_norm_sq / delta);
  }
  if (en.B21 + en.B22 > 0.0) en.C_B2 = en.B2 / (en.B21 + en.B22);
  if (Bc > 0.0 && phi_norm_sq > 0.0) en.C_B21 = en.B21 / (Bc * Bc * phi_norm_sq / (delta * delta));

  CountingReport& cnt = rep.counting;
  for (auto& [d, ks] : heavy_levels) {
    std::sort(ks.begin(), ks.end());
    cnt.max_count = std::max(cnt.max_count, ks.size());
    for (std::size_t q = 1; q < ks.size(); ++q) {
      if (ks[q] != ks[q - 1] + 1) cnt.consecutive = false;
    }
  }
  cnt.ok = cnt.max_count <= cnt.bound;
  for (const auto& [gd, ks] : lacey) cnt.lacey_max = std::max(cnt.lacey_max, ks.size());
  cnt.lacey_ok = cnt.lacey_max <= cnt.lacey_bound;
  return rep;
}

}  // namespace besselp::harness
