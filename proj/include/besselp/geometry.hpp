#pragma once

// Intervals on (0, inf), Carleson boxes in the upper quadrant, and finite
// atomic measures on both.
//
// Conventions: intervals are open, a box I x (0, |I|] is closed at the top
// and open at t = 0, and an atom sitting on an interval endpoint belongs to
// neither side.

#include <cstddef>
#include <span>
#include <vector>

namespace besselp {

struct Interval {
  double a = 0.0;
  double b = 0.0;

  Interval() = default;
  // Requires 0 <= a <= b; a == b denotes the empty interval.
  Interval(double a, double b);

  static Interval empty() { return Interval(); }

  bool is_empty() const { return !(a < b); }
  double length() const { return is_empty() ? 0.0 : b - a; }
  double center() const { return 0.5 * (a + b); }
  bool contains(double x) const { return a < x && x < b; }
  // Open-interval inclusion; the empty interval is a subset of everything.
  bool subset_of(const Interval& other) const { return is_empty() || (other.a <= a && b <= other.b); }
  bool intersects(const Interval& other) const;
  Interval intersection(const Interval& other) const;

  friend bool operator==(const Interval&, const Interval&) = default;
};

struct CarlesonBox {
  Interval base;
  double height = 0.0;

  bool contains(double x, double t) const { return base.contains(x) && t > 0.0 && t <= height; }
  friend bool operator==(const CarlesonBox&, const CarlesonBox&) = default;
};

// I(x, r) = (x - r, x + r) intersected with (0, inf).
Interval general_interval(double x, double r);

// nI: the interval with the same center and n times the length, truncated at 0.
Interval dilate(const Interval& interval, int n);

// I x (0, |I|], using the length of the (possibly truncated) interval itself.
CarlesonBox hat(const Interval& interval);

struct Atom1D {
  double y;
  double w;
};

struct Atom2D {
  double x;
  double t;
  double w;
};

class DiscreteMeasure1D {
 public:
  DiscreteMeasure1D() = default;
  // Throws InvalidParameter on duplicate locations or nonpositive entries.
  explicit DiscreteMeasure1D(std::vector<Atom1D> atoms);

  std::span<const Atom1D> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  const Atom1D& operator[](std::size_t i) const { return atoms_[i]; }
  double total_mass() const;

 private:
  std::vector<Atom1D> atoms_;
};

class DiscreteMeasure2D {
 public:
  DiscreteMeasure2D() = default;
  explicit DiscreteMeasure2D(std::vector<Atom2D> atoms);

  std::span<const Atom2D> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  const Atom2D& operator[](std::size_t i) const { return atoms_[i]; }
  double total_mass() const;

 private:
  std::vector<Atom2D> atoms_;
};

double mass(const DiscreteMeasure1D& sigma, const Interval& interval);
double mass(const DiscreteMeasure2D& mu, const CarlesonBox& box);

// d mu~ = t^2 d mu: same locations, weights scaled by t^2.
DiscreteMeasure2D tilde(const DiscreteMeasure2D& mu);

}  // namespace besselp
