#include "besselp/error.hpp"
#include "besselp/harness.hpp"

#include <cmath>
#include <random>

namespace besselp::harness {

const char* to_string(MpConstantMode mode) { return mode == MpConstantMode::Paper19 ? "paper-19" : "repaired-33"; }

MpConstantMode parse_mp_mode(const std::string& text) {
  if (text == "paper-19" || text == "paper") return MpConstantMode::Paper19;
  if (text == "repaired-33" || text == "repaired") return MpConstantMode::Repaired33;
  throw InvalidParameter("unknown maximum-principle mode '" + text + "'");
}

void ExperimentConfig::validate() const {
  if (n_sigma == 0 || n_mu == 0) throw InvalidParameter("atom counts must be positive");
  if (lambda_set.empty()) throw InvalidParameter("lambda_set is empty");
  for (double l : lambda_set) BesselParam(l).validate();
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameter("delta must lie in (0, 1)");
  if (m < 0) throw InvalidParameter("m must be positive (0 selects the default)");
  if (instance_count == 0) throw InvalidParameter("instance_count must be positive");
  if (!(location_lo > 0.0 && location_hi > location_lo)) throw InvalidParameter("bad location window");
  if (!(weight_lo > 0.0 && weight_hi >= weight_lo)) throw InvalidParameter("bad weight window");
  if (!(min_separation >= 0.0)) throw InvalidParameter("min_separation must be nonnegative");
  if (grid_cells < 16) throw InvalidParameter("grid_cells must be at least 16");
  if (refine_depth < 1) throw InvalidParameter("refine_depth must be positive");
  for (double l : lambda_set) level_shift(*this, l);
}

double mp_constant(MpConstantMode mode, double lambda) {
  return std::pow(mode == MpConstantMode::Paper19 ? 19.0 : 33.0, lambda + 1.0);
}

int level_shift(const ExperimentConfig& cfg, double lambda) {
  const double c = mp_constant(cfg.mp_mode, lambda);
  const int m = cfg.m > 0 ? cfg.m : static_cast<int>(std::ceil(std::log2(c + 1.0))) + 1;
  if (!(std::ldexp(1.0, m) > c + 1.0)) {
    throw InvalidParameter("m = " + std::to_string(m) + " violates 2^m > C_MP + 1 (C_MP = " + std::to_string(c) + ")");
  }
  return m;
}

namespace {

class Sampler {
 public:
  Sampler(std::uint64_t seed, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    rng_.seed(seq);
  }

  double log_uniform(double lo, double hi) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    return lo * std::exp(u * std::log(hi / lo));
  }

 private:
  std::mt19937_64 rng_;
};

bool separated(double v, const std::vector<double>& taken, double sep) {
  for (double w : taken) {
    if (std::max(v, w) < (1.0 + sep) * std::min(v, w)) return false;
  }
  return true;
}

double draw_separated(Sampler& s, const ExperimentConfig& cfg, std::vector<double>& taken) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double v = s.log_uniform(cfg.location_lo, cfg.location_hi);
    if (separated(v, taken, cfg.min_separation)) {
      taken.push_back(v);
      return v;
    }
  }
  throw InvalidParameter("cannot place atoms with the requested separation; widen the window");
}

}  // namespace

GeneratedInstance gen_instance(const ExperimentConfig& cfg, std::size_t index, double lambda) {
  Sampler s(cfg.seed, index);
  std::vector<double> ys;
  std::vector<Atom1D> sigma;
  for (std::size_t i = 0; i < cfg.n_sigma; ++i) {
    const double y = draw_separated(s, cfg, ys);
    sigma.push_back({y, s.log_uniform(cfg.weight_lo, cfg.weight_hi)});
  }
  std::vector<double> xs;
  std::vector<Atom2D> mu;
  for (std::size_t j = 0; j < cfg.n_mu; ++j) {
    const double x = draw_separated(s, cfg, xs);
    const double t = s.log_uniform(cfg.location_lo, cfg.location_hi);
    mu.push_back({x, t, s.log_uniform(cfg.weight_lo, cfg.weight_hi)});
  }
  std::vector<double> phi(cfg.n_mu);
  for (double& v : phi) v = s.log_uniform(cfg.weight_lo, cfg.weight_hi);
  GeneratedInstance g{TwoWeightInstance{BesselParam(lambda), DiscreteMeasure1D(std::move(sigma)),
                                        DiscreteMeasure2D(std::move(mu))},
                      std::move(phi), index};
  return g;
}

double potential(const TwoWeightInstance& inst, std::span<const double> phi, double y) {
  double v = 0.0;
  for (std::size_t j = 0; j < inst.mu.size(); ++j) {
    const auto& m = inst.mu[j];
    v += eval_kernel(inst.p, {m.x, y, m.t}) * phi[j] * m.w;
  }
  return v;
}

int band_of(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter("band_of requires a positive finite value");
  int e = 0;
  const double mant = std::frexp(v, &e);  // 2^(e-1) <= v < 2^e
  return mant == 0.5 ? e - 2 : e - 1;
}

}  // namespace besselp::harness
