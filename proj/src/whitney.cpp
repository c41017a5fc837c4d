#include "besselp/dyadic.hpp"

#include "besselp/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace besselp {

DyadicInterval DyadicInterval::containing(double x, int level) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidParameter("dyadic lookup requires a finite x >= 0");
  const double scaled = std::floor(std::ldexp(x, -level));
  if (scaled >= 0x1p62) throw ResolutionError("dyadic index overflow at level " + std::to_string(level));
  return {level, static_cast<std::int64_t>(scaled)};
}

double DyadicInterval::left() const { return std::ldexp(static_cast<double>(index), level); }
double DyadicInterval::right() const { return std::ldexp(static_cast<double>(index + 1), level); }
double DyadicInterval::length() const { return std::ldexp(1.0, level); }

DyadicInterval DyadicInterval::parent() const { return {level + 1, index >> 1}; }

std::optional<DyadicInterval> DyadicInterval::shifted(std::int64_t steps) const {
  if (index + steps < 0) return std::nullopt;
  return DyadicInterval{level, index + steps};
}

bool DyadicInterval::within(const DyadicInterval& ancestor) const {
  if (level > ancestor.level) return false;
  const int diff = ancestor.level - level;
  if (diff >= 63) return ancestor.index == 0;
  return (index >> diff) == ancestor.index;
}

std::string to_string(const DyadicInterval& d) {
  std::ostringstream os;
  os << "D(" << d.level << ", " << d.index << ")";
  return os.str();
}

int engulfing_level(std::span<const double> points, std::span<const double> heights) {
  int level = std::numeric_limits<int>::min();
  for (double p : points) {
    int e = 0;
    std::frexp(p, &e);  // 2^(e-1) <= p < 2^e
    level = std::max(level, e);
  }
  for (double h : heights) {
    int e = 0;
    const double mant = std::frexp(h, &e);
    level = std::max(level, mant == 0.5 ? e - 1 : e);
  }
  if (level == std::numeric_limits<int>::min()) throw InvalidParameter("engulfing_level needs at least one point");
  return level;
}

OpenSet::OpenSet(std::vector<Interval> parts) : parts_(std::move(parts)) {
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i].is_empty()) throw InvalidParameter("open set part " + std::to_string(i) + " is empty");
    if (i > 0 && parts_[i - 1].b > parts_[i].a) {
      throw InvalidParameter("open set parts must be sorted and pairwise disjoint");
    }
  }
}

OpenSet OpenSet::parse(const std::string& text) {
  std::vector<Interval> parts;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = item.find(',');
    if (comma == std::string::npos) throw InvalidParameter("expected 'a,b' in open set part '" + item + "'");
    try {
      std::size_t used = 0;
      const std::string lhs = item.substr(0, comma);
      const std::string rhs = item.substr(comma + 1);
      const double a = std::stod(lhs, &used);
      if (lhs.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(lhs);
      const double b = std::stod(rhs, &used);
      if (rhs.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(rhs);
      parts.emplace_back(a, b);
    } catch (const std::logic_error&) {
      throw InvalidParameter("cannot parse open set part '" + item + "'");
    }
  }
  std::sort(parts.begin(), parts.end(), [](const Interval& l, const Interval& r) { return l.a < r.a; });
  return OpenSet(std::move(parts));
}

double OpenSet::measure() const {
  double m = 0.0;
  for (const auto& p : parts_) m += p.length();
  return m;
}

bool OpenSet::contains(double x) const {
  auto it = std::upper_bound(parts_.begin(), parts_.end(), x, [](double v, const Interval& p) { return v < p.a; });
  if (it == parts_.begin()) return false;
  return std::prev(it)->contains(x);
}

bool OpenSet::contains(const Interval& interval) const {
  if (interval.is_empty()) return true;
  auto it = std::upper_bound(parts_.begin(), parts_.end(), interval.a,
                             [](double v, const Interval& p) { return v < p.a; });
  if (it == parts_.begin()) return false;
  return interval.subset_of(*std::prev(it));
}

const char* to_string(WhitneyMode mode) { return mode == WhitneyMode::Repaired ? "repaired" : "literal"; }

WhitneyMode parse_whitney_mode(const std::string& text) {
  if (text == "repaired") return WhitneyMode::Repaired;
  if (text == "literal" || text == "paper-literal") return WhitneyMode::Literal;
  throw InvalidParameter("unknown Whitney mode '" + text + "'");
}

namespace {

// floor(log2 len)
int floor_level(double len) {
  int e = 0;
  std::frexp(len, &e);
  return e - 1;
}

void check_decomposable(const OpenSet& omega) {
  for (const auto& p : omega.parts()) {
    if (p.a == 0.0 && std::isinf(p.b)) throw ComplementEmpty("the complement of the open set in (0, inf) is empty");
    if (std::isinf(p.b)) throw InvalidParameter("unbounded parts are not supported");
  }
}

struct Descent {
  const Interval& part;
  int min_level;
  std::vector<DyadicInterval>& members;
  double& tail;

  void visit(const DyadicInterval& d) {
    const Interval iv = d.interval();
    if (!iv.intersects(part)) return;
    if (dilate(iv, 3).subset_of(part)) {
      members.push_back(d);
      return;
    }
    if (d.level <= min_level) {
      tail += iv.intersection(part).length();
      return;
    }
    visit(d.child(0));
    visit(d.child(1));
  }
};

}  // namespace

int default_min_level(const OpenSet& omega) {
  check_decomposable(omega);
  if (omega.empty()) return 0;
  int smallest = std::numeric_limits<int>::max();
  for (const auto& p : omega.parts()) smallest = std::min(smallest, floor_level(p.length()));
  return smallest - 14;
}

WhitneyCollection whitney_decompose(const OpenSet& omega, int min_level, WhitneyMode mode) {
  check_decomposable(omega);
  WhitneyCollection w;
  w.omega = omega;
  w.mode = mode;
  w.min_level = min_level;
  for (const auto& part : omega.parts()) {
    const int top = floor_level(part.length());
    if (min_level > top) {
      throw ResolutionError("min_level " + std::to_string(min_level) + " is coarser than part (" +
                            std::to_string(part.a) + ", " + std::to_string(part.b) + ")");
    }
    // Every dyadic interval of length 2^top fails 3I inside the part, so
    // members found below are maximal.
    const DyadicInterval first = DyadicInterval::containing(part.a, top);
    const DyadicInterval last = DyadicInterval::containing(part.b, top);
    Descent descent{part, min_level, w.intervals, w.uncovered_tail};
    for (std::int64_t j = first.index; j <= last.index; ++j) descent.visit({top, j});
  }
  if (mode == WhitneyMode::Literal) {
    std::vector<DyadicInterval> kept;
    for (const auto& d : w.intervals) {
      if (omega.contains(dilate(d.interval(), 5))) {
        w.uncovered_tail += d.length();
      } else {
        kept.push_back(d);
      }
    }
    w.intervals = std::move(kept);
  }
  std::sort(w.intervals.begin(), w.intervals.end(),
            [](const DyadicInterval& l, const DyadicInterval& r) { return l.left() < r.left(); });
  return w;
}

WhitneyCollection whitney_decompose(const OpenSet& omega, WhitneyMode mode) {
  return whitney_decompose(omega, default_min_level(omega), mode);
}

int overlap_count(std::span<const Interval> intervals) {
  std::vector<double> points;
  points.reserve(2 * intervals.size());
  for (const auto& iv : intervals) {
    if (iv.is_empty()) continue;
    points.push_back(iv.a);
    points.push_back(iv.b);
  }
  if (points.empty()) return 0;
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  // Open intervals: the count is constant on each gap between consecutive
  // breakpoints, and the sup is attained on some gap.
  std::vector<int> diff(points.size() + 1, 0);
  auto index_of = [&](double v) {
    return static_cast<std::size_t>(std::lower_bound(points.begin(), points.end(), v) - points.begin());
  };
  for (const auto& iv : intervals) {
    if (iv.is_empty()) continue;
    ++diff[index_of(iv.a)];
    --diff[index_of(iv.b)];
  }
  int best = 0;
  int run = 0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    run += diff[i];
    best = std::max(best, run);
  }
  return best;
}

WhitneyProperties whitney_properties(const WhitneyCollection& w) {
  WhitneyProperties r;
  std::vector<Interval> members;
  members.reserve(w.intervals.size());
  for (const auto& d : w.intervals) members.push_back(d.interval());
  std::sort(members.begin(), members.end(), [](const Interval& l, const Interval& r) { return l.a < r.a; });

  r.disjoint = true;
  for (std::size_t i = 1; i < members.size(); ++i) {
    if (members[i - 1].b > members[i].a) r.disjoint = false;
  }

  // Union of the members, clipped to omega, measured independently of the tail bookkeeping.
  std::vector<Interval> merged;
  for (const auto& iv : members) {
    if (!merged.empty() && iv.a <= merged.back().b) {
      merged.back().b = std::max(merged.back().b, iv.b);
    } else {
      merged.push_back(iv);
    }
  }
  double covered = 0.0;
  for (const auto& seg : merged) {
    for (const auto& part : w.omega.parts()) covered += seg.intersection(part).length();
  }
  const double total = w.omega.measure();
  r.coverage_defect = std::max(0.0, total - covered);
  r.coverage_matches_tail = std::abs(r.coverage_defect - w.uncovered_tail) <= 1e-12 * std::max(total, 1e-300);

  r.dilates_inside = true;
  r.witness_ok = true;
  std::vector<Interval> triples;
  triples.reserve(w.intervals.size());
  for (const auto& d : w.intervals) {
    const Interval t = dilate(d.interval(), 3);
    triples.push_back(t);
    if (!w.omega.contains(t)) r.dilates_inside = false;
    if (w.omega.contains(dilate(d.parent().interval(), 3))) r.witness_ok = false;
  }
  r.overlap = overlap_count(triples);
  return r;
}

NestingReport nesting_check(std::span<const WhitneyCollection> families, std::span<const int> ks) {
  if (families.size() != ks.size()) throw InvalidParameter("nesting_check: one level per family required");
  std::map<DyadicInterval, std::vector<int>> owners;
  int top = std::numeric_limits<int>::min();
  for (std::size_t f = 0; f < families.size(); ++f) {
    for (const auto& d : families[f].intervals) {
      owners[d].push_back(ks[f]);
      top = std::max(top, d.level);
    }
  }
  NestingReport rep;
  for (std::size_t f = 0; f < families.size(); ++f) {
    for (const auto& d : families[f].intervals) {
      for (DyadicInterval a = d.parent(); a.level <= top; a = a.parent()) {
        auto it = owners.find(a);
        if (it == owners.end()) continue;
        for (int k_outer : it->second) {
          ++rep.pairs_checked;
          if (!(ks[f] > k_outer)) {
            ++rep.violations;
            rep.ok = false;
          }
        }
      }
    }
  }
  return rep;
}

}  // namespace besselp
