#include "besselp/geometry.hpp"

#include "besselp/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

namespace besselp {

Interval::Interval(double a_, double b_) : a(a_), b(b_) {
  if (!(a >= 0.0) || !(b >= a) || std::isnan(b)) {
    throw InvalidParameter("interval requires 0 <= a <= b, got (" + std::to_string(a) + ", " +
                           std::to_string(b) + ")");
  }
}

bool Interval::intersects(const Interval& other) const {
  return !is_empty() && !other.is_empty() && std::max(a, other.a) < std::min(b, other.b);
}

Interval Interval::intersection(const Interval& other) const {
  if (!intersects(other)) return Interval::empty();
  return Interval(std::max(a, other.a), std::min(b, other.b));
}

Interval general_interval(double x, double r) {
  if (!(x > 0.0) || !(r > 0.0)) throw InvalidParameter("general_interval requires x > 0 and r > 0");
  return Interval(std::max(x - r, 0.0), x + r);
}

Interval dilate(const Interval& interval, int n) {
  if (n < 1) throw InvalidParameter("dilation factor must be a positive integer");
  if (interval.is_empty()) return Interval::empty();
  const double c = interval.center();
  const double r = 0.5 * n * interval.length();
  return Interval(std::max(c - r, 0.0), c + r);
}

CarlesonBox hat(const Interval& interval) { return CarlesonBox{interval, interval.length()}; }

namespace {

void require_positive(double v, const char* what, std::size_t index) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidParameter(std::string("atom ") + std::to_string(index) + ": " + what +
                           " must be positive and finite");
  }
}

}  // namespace

DiscreteMeasure1D::DiscreteMeasure1D(std::vector<Atom1D> atoms) : atoms_(std::move(atoms)) {
  std::set<double> seen;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    require_positive(atoms_[i].y, "location", i);
    require_positive(atoms_[i].w, "weight", i);
    if (!seen.insert(atoms_[i].y).second) {
      throw InvalidParameter("atom " + std::to_string(i) + ": duplicate location " + std::to_string(atoms_[i].y));
    }
  }
}

double DiscreteMeasure1D::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.w;
  return m;
}

DiscreteMeasure2D::DiscreteMeasure2D(std::vector<Atom2D> atoms) : atoms_(std::move(atoms)) {
  std::set<std::pair<double, double>> seen;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    require_positive(atoms_[i].x, "x", i);
    require_positive(atoms_[i].t, "t", i);
    require_positive(atoms_[i].w, "weight", i);
    if (!seen.insert({atoms_[i].x, atoms_[i].t}).second) {
      throw InvalidParameter("atom " + std::to_string(i) + ": duplicate location");
    }
  }
}

double DiscreteMeasure2D::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.w;
  return m;
}

double mass(const DiscreteMeasure1D& sigma, const Interval& interval) {
  double m = 0.0;
  for (const auto& a : sigma.atoms()) {
    if (interval.contains(a.y)) m += a.w;
  }
  return m;
}

double mass(const DiscreteMeasure2D& mu, const CarlesonBox& box) {
  double m = 0.0;
  for (const auto& a : mu.atoms()) {
    if (box.contains(a.x, a.t)) m += a.w;
  }
  return m;
}

DiscreteMeasure2D tilde(const DiscreteMeasure2D& mu) {
  std::vector<Atom2D> out(mu.atoms().begin(), mu.atoms().end());
  for (auto& a : out) a.w *= a.t * a.t;
  return DiscreteMeasure2D(std::move(out));
}

}  // namespace besselp
