#pragma once

// Dyadic lattice on (0, inf), Whitney decompositions of finite unions of
// intervals, the dyadic maximal function over Carleson boxes, and the
// principal-interval stopping family.

#include "besselp/geometry.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace besselp {

struct DyadicInterval {
  int level = 0;
  std::int64_t index = 0;

  // The dyadic interval at `level` whose half-open cell [j 2^k, (j+1) 2^k) holds x.
  static DyadicInterval containing(double x, int level);

  double left() const;
  double right() const;
  double length() const;
  double center() const { return 0.5 * (left() + right()); }
  Interval interval() const { return Interval(left(), right()); }

  DyadicInterval parent() const;
  DyadicInterval child(int which) const { return {level - 1, 2 * index + which}; }
  // Neighbor at the same level shifted by `steps` lengths; nullopt when it would leave (0, inf).
  std::optional<DyadicInterval> shifted(std::int64_t steps) const;
  // Non-strict containment in the dyadic tree.
  bool within(const DyadicInterval& ancestor) const;

  friend auto operator<=>(const DyadicInterval&, const DyadicInterval&) = default;
};

std::string to_string(const DyadicInterval& d);

// Smallest L such that (0, 2^L) contains every given point and 2^L >= every height.
int engulfing_level(std::span<const double> points, std::span<const double> heights);

class OpenSet {
 public:
  OpenSet() = default;
  // Parts must be nonempty, sorted and pairwise disjoint (shared endpoints allowed).
  explicit OpenSet(std::vector<Interval> parts);

  // Parses "a1,b1;a2,b2"; "inf" is accepted as a right endpoint.
  static OpenSet parse(const std::string& text);

  std::span<const Interval> parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  double measure() const;
  bool contains(double x) const;
  // Open-interval subset test; a connected set lies in the union iff it lies in one part.
  bool contains(const Interval& interval) const;

 private:
  std::vector<Interval> parts_;
};

enum class WhitneyMode { Repaired, Literal };

const char* to_string(WhitneyMode mode);
WhitneyMode parse_whitney_mode(const std::string& text);

struct WhitneyCollection {
  std::vector<DyadicInterval> intervals;  // sorted by position
  OpenSet omega;
  WhitneyMode mode = WhitneyMode::Repaired;
  int min_level = 0;
  double uncovered_tail = 0.0;
};

// (level of the shortest part of omega) - 14. Each part leaves at most
// 4 * 2^min_level uncovered, so this keeps the tail below 2^-12 |omega|.
int default_min_level(const OpenSet& omega);

// Repaired: all maximal dyadic I with 3I inside omega and level >= min_level.
// Literal: the maximal dyadic I with 3I inside omega and 5I not inside omega;
// these are exactly the repaired members failing the 5I test, since 3I inside
// omega forces 5J inside omega for every proper dyadic descendant J of I.
WhitneyCollection whitney_decompose(const OpenSet& omega, int min_level, WhitneyMode mode);
WhitneyCollection whitney_decompose(const OpenSet& omega, WhitneyMode mode = WhitneyMode::Repaired);

struct WhitneyProperties {
  double coverage_defect = 0.0;  // |omega \ union of members|
  bool coverage_matches_tail = false;
  bool disjoint = false;
  bool dilates_inside = false;   // 3I inside omega for every member
  bool witness_ok = false;       // 3 parent(I) meets the complement (repaired maximality)
  int overlap = 0;               // sup_x sum_I 1_{3I}(x)
};

WhitneyProperties whitney_properties(const WhitneyCollection& w);

// sup_x sum_I 1_{dilate(I, n)}(x) for open intervals.
int overlap_count(std::span<const Interval> intervals);

struct NestingReport {
  bool ok = true;
  std::size_t violations = 0;
  std::size_t pairs_checked = 0;
};

// For families indexed by levels ks[i]: I in W_k, I' in W_k', I strictly inside I' implies k > k'.
NestingReport nesting_check(std::span<const WhitneyCollection> families, std::span<const int> ks);

struct MaximalValue {
  double value = 0.0;
  bool covered = false;  // false when no candidate box with positive mass contains the query
};

// sup over dyadic J with (x, t) in hat(J), min_level <= level(J) <= max_level, of
// the mu-tilde average of |psi| over hat(J). Boxes with zero mass are ignored.
MaximalValue maximal_function(const DiscreteMeasure2D& mu_tilde, std::span<const double> psi, double x, double t,
                              int min_level, int max_level);
// Level bounds chosen so the sup is exact: from the first box tall enough for t
// up to the first box engulfing the support and the query.
MaximalValue maximal_function(const DiscreteMeasure2D& mu_tilde, std::span<const double> psi, double x, double t);

struct Weak11Report {
  double alpha = 0.0;
  double level_set_mass = 0.0;  // mu-tilde(S_alpha)
  double cover_mass = 0.0;      // sum of mu-tilde over the maximal qualifying boxes
  double bound = 0.0;           // ||psi||_1 / alpha
  std::size_t cover_size = 0;
  bool cover_consistent = false;  // cover agrees atom by atom with {M psi > alpha}
  bool ok = false;
};

Weak11Report weak_11_check(const DiscreteMeasure2D& mu_tilde, std::span<const double> psi, double alpha);

class StoppingFamily {
 public:
  StoppingFamily(DyadicInterval root, std::map<DyadicInterval, double> alpha,
                 std::map<DyadicInterval, DyadicInterval> stopping_parent, bool root_covers_support);

  const DyadicInterval& root() const { return root_; }
  std::vector<DyadicInterval> members() const;
  std::size_t size() const { return alpha_.size(); }
  bool contains(const DyadicInterval& d) const { return alpha_.count(d) != 0; }
  double alpha(const DyadicInterval& member) const;
  std::optional<DyadicInterval> stopping_parent(const DyadicInterval& member) const;
  bool root_covers_support() const { return root_covers_support_; }

  // Minimal member containing d; nullopt when d is not inside the root.
  std::optional<DyadicInterval> project(const DyadicInterval& d) const;

 private:
  DyadicInterval root_;
  std::map<DyadicInterval, double> alpha_;
  std::map<DyadicInterval, DyadicInterval> parent_;
  bool root_covers_support_;
};

// alpha(J) = (1 / mu~(hat J)) sum_{atoms in hat J} (phi / t) w~.
// phi is given on the atoms of mu; mu_tilde must be tilde(mu).
double box_alpha(const DiscreteMeasure2D& mu_tilde, std::span<const double> phi, const DyadicInterval& j);

StoppingFamily principal_intervals(const DiscreteMeasure2D& mu_tilde, std::span<const double> phi,
                                   const DyadicInterval& root);

struct CarlesonReport {
  double lhs = 0.0;  // sum_G alpha(G)^2 mu~(hat G)
  double rhs = 0.0;  // C ||phi||^2_{L^2(mu)}
  double phi_norm_sq = 0.0;
  double ratio = 0.0;  // lhs / ||phi||^2, the empirical constant
  bool ok = false;
};

// mu is the untilted measure; phi lives on its atoms.
CarlesonReport carleson_packing_check(const StoppingFamily& g, const DiscreteMeasure2D& mu,
                                      std::span<const double> phi, double C);

}  // namespace besselp
