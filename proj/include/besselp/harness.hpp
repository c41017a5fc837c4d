#pragma once

// Random instances and the numerical checks of each step of the sufficiency
// argument: level sets of the adjoint potential, their Whitney families, the
// maximum principle, the energy split A + B and the terms B1, B21, B22, the
// counting lemmas, and the equivalence suite that ties them together.

#include "besselp/dyadic.hpp"
#include "besselp/operators.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace besselp::harness {

enum class MpConstantMode { Paper19, Repaired33 };

const char* to_string(MpConstantMode mode);
MpConstantMode parse_mp_mode(const std::string& text);

struct ExperimentConfig {
  std::uint64_t seed = 20240917;
  std::size_t n_sigma = 12;
  std::size_t n_mu = 12;
  std::vector<double> lambda_set{0.5, 1.0, 2.0};
  double delta = 0.25;
  int m = 0;  // 0 selects ceil(log2(C_MP + 1)) + 1 per lambda
  MpConstantMode mp_mode = MpConstantMode::Repaired33;
  std::size_t instance_count = 100;

  // Atom locations and heights are log-uniform in [location_lo, location_hi],
  // weights and phi log-uniform in [weight_lo, weight_hi].
  double location_lo = 0.125;
  double location_hi = 8.0;
  double weight_lo = 0.1;
  double weight_hi = 10.0;
  double min_separation = 0.01;  // relative gap between sigma locations, and between mu locations

  std::size_t grid_cells = 2048;
  int refine_depth = 48;

  double overlap_bound = 12.0;
  double carleson_C = 8.0;
  std::size_t lacey_bound = 8;
  std::size_t alpha_sweep = 33;
  std::size_t case_samples = 10000;

  void validate() const;
};

double mp_constant(MpConstantMode mode, double lambda);
// m for this lambda: cfg.m when set, otherwise ceil(log2(C_MP + 1)) + 1. Throws
// InvalidParameter when 2^m <= C_MP + 1.
int level_shift(const ExperimentConfig& cfg, double lambda);

struct GeneratedInstance {
  TwoWeightInstance inst;
  std::vector<double> phi;  // on mu-atoms
  std::size_t index = 0;
};

// Deterministic in (cfg.seed, index); lambda only sets the kernel order.
GeneratedInstance gen_instance(const ExperimentConfig& cfg, std::size_t index, double lambda);

// P*_mu(phi)(y) evaluated through the kernel, summing over mu-atoms in order.
double potential(const TwoWeightInstance& inst, std::span<const double> phi, double y);

// Band b of v > 0: 2^b < v <= 2^(b+1).
int band_of(double v);

// Grid model of Omega_k = {P*_mu phi > 2^k}. The window (0, X] is cut into
// cells of length 2^g; cells touching a sigma-atom are bisected until every
// atom in the cell closure lies in the band of the cell value. A cell value is
// the max of the potential at its endpoints and at atoms inside, and Omega_k
// is the union of the cells with value > 2^k.
class LevelSets {
 public:
  LevelSets(const TwoWeightInstance& inst, const KernelMatrix& k, std::span<const double> phi, int lowest_level,
            std::size_t grid_cells, int refine_depth);

  std::span<const double> atom_values() const { return values_; }
  // Band of each sigma-atom; nullopt when the potential vanishes there.
  const std::vector<std::optional<int>>& bands() const { return bands_; }
  double window() const { return window_; }
  double cell_length() const { return cell_; }
  std::size_t cell_count() const { return cells_.size(); }
  std::size_t potential_evaluations() const { return evaluations_; }

  OpenSet omega(int k) const;

 private:
  struct Cell {
    double a;
    double b;
    double value;
  };
  std::vector<double> values_;
  std::vector<std::optional<int>> bands_;
  std::vector<Cell> cells_;
  double window_ = 0.0;
  double cell_ = 0.0;
  std::size_t evaluations_ = 0;
};

struct MaxPrincipleReport {
  double constant = 0.0;  // C_MP
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max of lhs / (C_MP 2^k)
  std::optional<std::string> worst_witness;
  bool ok = true;
};

// For each member I of w and each sigma-atom y in I: P*_mu(phi 1_{(hat 3I)^c})(y) < C_MP 2^k.
void check_max_principle(const TwoWeightInstance& inst, const KernelMatrix& k, std::span<const double> phi, int level,
                         const WhitneyCollection& w, double constant, MaxPrincipleReport& report);

struct CaseSampleReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max of P(x, y, t) / (C P(z, y, t))
};

struct KernelCaseReport {
  CaseSampleReport case1;  // |I| < |z-x| < 3|I|, |x-y| > |I|, constant 16^(lambda+1)
  CaseSampleReport case2;  // y in 3I, t > |I|, |z-x| < 3|I|, constant 19^(lambda+1)
  bool ok() const { return case1.violations == 0 && case2.violations == 0; }
};

KernelCaseReport sample_kernel_cases(const BesselParam& p, std::uint64_t seed, std::size_t samples);

struct ComparabilityReport {
  double c_lo = 0.0;
  double c_hi = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::size_t samples = 0;
  std::size_t skipped = 0;  // samples failing |x - y| > |J| for some y in F
  bool ok = true;
};

// c_lo = (1/2)(1/2)^(lambda+1)(4/9)^(lambda+1), c_hi = 2 * 2^(lambda+1) * 4^(lambda+1).
std::pair<double, double> comparability_bracket(double lambda);

// Ratio P_sigma(1_F)(x, t) / ((t/|J|) P_sigma(1_F)(x_J, |J|)) over a fixed
// 3 x 3 pattern of (x, t) in hat J; F is a set of sigma-atom indices.
void check_box_comparability(const TwoWeightInstance& inst, std::span<const std::size_t> f_atoms,
                             const DyadicInterval& j, ComparabilityReport& report);

struct EnergyReport {
  int m = 0;
  double delta = 0.0;
  double total = 0.0;            // ||P*_mu phi||^2_{L^2(sigma)}
  double band_sum = 0.0;         // sum_k 4^k sigma(Omega_{k+m} \ Omega_{k+m+1}), by atom bands
  double A = 0.0;
  double B = 0.0;
  bool partition_ok = false;     // A + B equals band_sum
  double scaled_sum = 0.0;       // 4^m (A + B)
  bool bracket_ok = false;       // total / 4 <= scaled_sum <= total
  double a_intermediate = 0.0;   // delta sum_k 4^k sum_{I not heavy} sigma(I)
  double a_level_bound = 0.0;    // delta sum_k 4^k sigma(Omega_k), all k
  bool a_bound_ok = false;       // A <= a_intermediate <= a_level_bound <= (4/3) delta total
  double absorption_factor = 0.0;  // (4/3) delta 4^(m+1): A is absorbed when this is < 1

  std::size_t heavy_pairs = 0;   // (k, I) with sigma(F_k(I)) >= delta sigma(I) > 0
  bool lower_bound_ok = true;    // 2^k <= B1(k,I) + B2(k,I) for every heavy pair
  double duality_gap = 0.0;      // max relative gap between the two evaluations of B1 + B2
  double B1 = 0.0;
  double B2 = 0.0;
  bool b_split_ok = false;       // B <= B1 + B2
  double B21 = 0.0;
  double B22 = 0.0;
  double C_B1 = 0.0;   // B1 / (delta^-2 F^2 ||phi||^2)
  double C_B2 = 0.0;   // B2 / (B21 + B22)
  double C_B21 = 0.0;  // B21 / (delta^-2 B^2 ||phi||^2)
  double C_B22 = 0.0;  // B22 / (delta^-1 F^2 ||phi||^2)
};

struct WhitneySummary {
  std::size_t families = 0;
  std::size_t members = 0;
  bool disjoint = true;
  bool coverage_ok = true;     // defect equals the recorded tail
  bool tail_ok = true;         // tail <= 2^-12 |Omega|
  bool dilates_inside = true;
  bool witness_ok = true;
  int overlap = 0;
  bool overlap_ok = true;
  NestingReport nesting;
};

struct CountingReport {
  std::size_t max_count = 0;   // per dyadic I, number of k with I heavy in family k
  std::size_t bound = 0;       // ceil(1 / delta)
  bool consecutive = true;
  bool ok = true;
  std::size_t lacey_max = 0;   // per principal interval G, number of k contributing to B22 through G
  std::size_t lacey_bound = 0;
  bool lacey_ok = true;
};

struct DecompositionReport {
  double lambda = 0.0;
  double mp_constant = 0.0;
  bool repaired = true;  // repaired Whitney families; literal ones are not expected to cover
  double window = 0.0;
  double cell_length = 0.0;
  std::size_t cells = 0;
  std::vector<int> levels;  // k for which Omega_k and its Whitney family were built
  WhitneySummary whitney;
  MaxPrincipleReport max_principle;
  EnergyReport energy;
  CountingReport counting;
  ComparabilityReport comparability;
  std::size_t principal_intervals = 0;
  CarlesonReport carleson;
  double F = 0.0;
  double B = 0.0;

  bool ok() const;
};

DecompositionReport decompose_energy(const TwoWeightInstance& inst, const KernelMatrix& k, std::span<const double> phi,
                                     const ExperimentConfig& cfg, const TestingResult& testing);

struct InstanceRecord {
  std::size_t index = 0;
  double lambda = 0.0;
  double N = 0.0;
  double F = 0.0;
  double B = 0.0;
  double ratio = 0.0;
  double F_shift = 0.0;
  double B_shift = 0.0;
  double ratio_shift = 0.0;
  bool norm_converged = false;
  bool necessity_ok = false;
  double duality_gap = 0.0;
  bool weak11_ok = false;
  std::size_t weak11_checks = 0;
  std::optional<DecompositionReport> decomposition;
  std::optional<std::string> error;

  bool max_principle_ok() const;
  bool ok() const;
};

struct TestReport {
  ExperimentConfig config;
  std::vector<InstanceRecord> records;
  std::vector<std::pair<double, KernelCaseReport>> kernel_cases;  // per lambda
  std::string timestamp;

  double max_ratio() const;
  double max_ratio_shift() const;
  std::size_t failures() const;
  bool ok() const { return failures() == 0; }
};

InstanceRecord run_instance(const ExperimentConfig& cfg, std::size_t index, double lambda);
TestReport run_equivalence_suite(const ExperimentConfig& cfg);

nlohmann::json to_json(const DecompositionReport& r);
nlohmann::json to_json(const InstanceRecord& r);
nlohmann::json to_json(const TestReport& r);
std::string to_csv(const TestReport& r);

}  // namespace besselp::harness
