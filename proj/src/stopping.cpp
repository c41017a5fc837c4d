#include "besselp/dyadic.hpp"

#include "besselp/error.hpp"

#include <cmath>

namespace besselp {

StoppingFamily::StoppingFamily(DyadicInterval root, std::map<DyadicInterval, double> alpha,
                               std::map<DyadicInterval, DyadicInterval> stopping_parent, bool root_covers_support)
    : root_(root), alpha_(std::move(alpha)), parent_(std::move(stopping_parent)),
      root_covers_support_(root_covers_support) {
  if (!alpha_.count(root_)) throw InvalidParameter("stopping family must contain its root");
}

std::vector<DyadicInterval> StoppingFamily::members() const {
  std::vector<DyadicInterval> out;
  out.reserve(alpha_.size());
  for (const auto& [d, a] : alpha_) out.push_back(d);
  return out;
}

double StoppingFamily::alpha(const DyadicInterval& member) const {
  auto it = alpha_.find(member);
  if (it == alpha_.end()) throw InvalidParameter(to_string(member) + " is not a principal interval");
  return it->second;
}

std::optional<DyadicInterval> StoppingFamily::stopping_parent(const DyadicInterval& member) const {
  auto it = parent_.find(member);
  if (it == parent_.end()) return std::nullopt;
  return it->second;
}

std::optional<DyadicInterval> StoppingFamily::project(const DyadicInterval& d) const {
  if (!d.within(root_)) return std::nullopt;
  for (DyadicInterval a = d; a.level <= root_.level; a = a.parent()) {
    if (alpha_.count(a)) return a;
  }
  return root_;
}

namespace {

void check_phi(const DiscreteMeasure2D& mu, std::span<const double> phi) {
  if (phi.size() != mu.size()) throw InvalidParameter("one phi value per atom required");
  for (double v : phi) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter("phi must be finite and nonnegative");
  }
}

struct Averages {
  double mass = 0.0;
  double alpha = 0.0;
};

Averages averages(const DiscreteMeasure2D& mu_tilde, std::span<const double> phi, std::span<const std::size_t> atoms,
                  const DyadicInterval& j, std::vector<std::size_t>& inside) {
  const CarlesonBox box = hat(j.interval());
  double mass = 0.0;
  double num = 0.0;
  inside.clear();
  for (std::size_t i : atoms) {
    const auto& a = mu_tilde[i];
    if (!box.contains(a.x, a.t)) continue;
    inside.push_back(i);
    mass += a.w;
    num += phi[i] / a.t * a.w;
  }
  return {mass, mass > 0.0 ? num / mass : 0.0};
}

struct Builder {
  const DiscreteMeasure2D& mu_tilde;
  std::span<const double> phi;
  std::map<DyadicInterval, double>& alpha;
  std::map<DyadicInterval, DyadicInterval>& parent;

  void descend(const DyadicInterval& j, const std::vector<std::size_t>& atoms, const DyadicInterval& stop) {
    for (int c = 0; c < 2; ++c) {
      const DyadicInterval child = j.child(c);
      std::vector<std::size_t> inside;
      const Averages av = averages(mu_tilde, phi, atoms, child, inside);
      if (av.mass <= 0.0) continue;
      // alpha > 0 keeps phi = 0 from stopping on every box (0 >= 10 * 0).
      if (av.alpha > 0.0 && av.alpha >= 10.0 * alpha.at(stop)) {
        alpha[child] = av.alpha;
        parent[child] = stop;
        descend(child, inside, child);
      } else {
        descend(child, inside, stop);
      }
    }
  }
};

}  // namespace

double box_alpha(const DiscreteMeasure2D& mu_tilde, std::span<const double> phi, const DyadicInterval& j) {
  check_phi(mu_tilde, phi);
  std::vector<std::size_t> all(mu_tilde.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<std::size_t> inside;
  return averages(mu_tilde, phi, all, j, inside).alpha;
}

StoppingFamily principal_intervals(const DiscreteMeasure2D& mu_tilde, std::span<const double> phi,
                                   const DyadicInterval& root) {
  check_phi(mu_tilde, phi);
  std::vector<std::size_t> all(mu_tilde.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<std::size_t> inside;
  const Averages top = averages(mu_tilde, phi, all, root, inside);
  if (top.mass <= 0.0) throw InvalidParameter("the root box carries no mass");
  const bool covers = inside.size() == all.size();

  std::map<DyadicInterval, double> alpha{{root, top.alpha}};
  std::map<DyadicInterval, DyadicInterval> parent;
  Builder b{mu_tilde, phi, alpha, parent};
  b.descend(root, inside, root);
  return StoppingFamily(root, std::move(alpha), std::move(parent), covers);
}

CarlesonReport carleson_packing_check(const StoppingFamily& g, const DiscreteMeasure2D& mu,
                                      std::span<const double> phi, double C) {
  check_phi(mu, phi);
  if (!(C > 0.0)) throw InvalidParameter("Carleson constant must be positive");
  CarlesonReport r;
  const DiscreteMeasure2D mt = tilde(mu);
  for (const auto& member : g.members()) {
    const double a = g.alpha(member);
    r.lhs += a * a * mass(mt, hat(member.interval()));
  }
  for (std::size_t i = 0; i < mu.size(); ++i) r.phi_norm_sq += phi[i] * phi[i] * mu[i].w;
  r.rhs = C * r.phi_norm_sq;
  r.ratio = r.phi_norm_sq > 0.0 ? r.lhs / r.phi_norm_sq : 0.0;
  // alpha(G) passes through a division by the box mass; allow roundoff only.
  r.ok = r.lhs <= r.rhs * (1.0 + 1e-12);
  return r;
}

}  // namespace besselp
