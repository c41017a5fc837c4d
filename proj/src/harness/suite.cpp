#include "besselp/error.hpp"
#include "besselp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <sstream>

namespace besselp::harness {

namespace {

constexpr double kNecessitySlack = 1e-8;
constexpr double kDualityTol = 1e-12;

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

bool InstanceRecord::max_principle_ok() const { return decomposition && decomposition->max_principle.ok; }

bool InstanceRecord::ok() const {
  return !error && norm_converged && necessity_ok && duality_gap <= kDualityTol && weak11_ok && decomposition &&
         decomposition->ok();
}

InstanceRecord run_instance(const ExperimentConfig& cfg, std::size_t index, double lambda) {
  InstanceRecord rec;
  rec.index = index;
  rec.lambda = lambda;
  try {
    const GeneratedInstance g = gen_instance(cfg, index, lambda);
    const TwoWeightInstance& inst = g.inst;
    const KernelMatrix k(inst);

    const TestingResult plain = run_testing(inst, k, false);
    const TestingResult shifted = run_testing(inst, k, true);
    rec.N = plain.N;
    rec.F = plain.F;
    rec.B = plain.B;
    rec.ratio = plain.ratio;
    rec.F_shift = shifted.F;
    rec.B_shift = shifted.B;
    rec.ratio_shift = shifted.ratio;
    rec.norm_converged = plain.norm_converged;
    const double cap = plain.N * (1.0 + kNecessitySlack);
    rec.necessity_ok = plain.F <= cap && plain.B <= cap && shifted.F <= cap && shifted.B <= cap;

    // <P_sigma 1, phi>_mu against <1, P*_mu phi>_sigma.
    const std::vector<double> ones(inst.sigma.size(), 1.0);
    const std::vector<double> fwd = apply_forward(k, inst, ones);
    const std::vector<double> adj = apply_adjoint(k, inst, g.phi);
    double lhs = 0.0;
    for (std::size_t j = 0; j < inst.mu.size(); ++j) lhs += fwd[j] * g.phi[j] * inst.mu[j].w;
    double rhs = 0.0;
    for (std::size_t i = 0; i < inst.sigma.size(); ++i) rhs += adj[i] * inst.sigma[i].w;
    rec.duality_gap = relative_gap(lhs, rhs);

    // Weak (1,1) for psi = phi / t over a geometric alpha sweep below max psi.
    const DiscreteMeasure2D mt = tilde(inst.mu);
    std::vector<double> psi(inst.mu.size());
    double top = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) {
      psi[j] = g.phi[j] / inst.mu[j].t;
      top = std::max(top, psi[j]);
    }
    rec.weak11_ok = true;
    for (std::size_t q = 0; q < cfg.alpha_sweep; ++q) {
      const double alpha = top * std::exp2(-0.5 * static_cast<double>(q));
      const Weak11Report w = weak_11_check(mt, psi, alpha);
      ++rec.weak11_checks;
      rec.weak11_ok = rec.weak11_ok && w.ok;
    }

    rec.decomposition = decompose_energy(inst, k, g.phi, cfg, plain);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

TestReport run_equivalence_suite(const ExperimentConfig& cfg) {
  cfg.validate();
  TestReport rep;
  rep.config = cfg;
  const std::size_t nl = cfg.lambda_set.size();
  const std::size_t total = cfg.instance_count * nl;
  rep.records.resize(total);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(total); ++q) {
    const auto u = static_cast<std::size_t>(q);
    rep.records[u] = run_instance(cfg, u / nl, cfg.lambda_set[u % nl]);
  }

  for (std::size_t l = 0; l < nl; ++l) {
    const double lambda = cfg.lambda_set[l];
    rep.kernel_cases.emplace_back(lambda, sample_kernel_cases(BesselParam(lambda), cfg.seed + l + 1, cfg.case_samples));
  }
  rep.timestamp = utc_timestamp();
  return rep;
}

double TestReport::max_ratio() const {
  double r = 0.0;
  for (const auto& rec : records) {
    if (!rec.error) r = std::max(r, rec.ratio);
  }
  return r;
}

double TestReport::max_ratio_shift() const {
  double r = 0.0;
  for (const auto& rec : records) {
    if (!rec.error) r = std::max(r, rec.ratio_shift);
  }
  return r;
}

std::size_t TestReport::failures() const {
  std::size_t n = 0;
  for (const auto& rec : records) n += rec.ok() ? 0 : 1;
  for (const auto& [lambda, c] : kernel_cases) n += c.ok() ? 0 : 1;
  return n;
}

using nlohmann::json;

namespace {

json case_json(const CaseSampleReport& c) {
  return {{"samples", c.samples}, {"violations", c.violations}, {"worst_ratio", c.worst_ratio}};
}

json config_json(const ExperimentConfig& c) {
  return {{"seed", c.seed},
          {"n_sigma", c.n_sigma},
          {"n_mu", c.n_mu},
          {"lambda_set", c.lambda_set},
          {"delta", c.delta},
          {"m", c.m},
          {"mp_constant_mode", to_string(c.mp_mode)},
          {"instance_count", c.instance_count},
          {"location_window", {c.location_lo, c.location_hi}},
          {"weight_window", {c.weight_lo, c.weight_hi}},
          {"min_separation", c.min_separation},
          {"grid_cells", c.grid_cells},
          {"refine_depth", c.refine_depth},
          {"overlap_bound", c.overlap_bound},
          {"carleson_C", c.carleson_C},
          {"lacey_bound", c.lacey_bound},
          {"alpha_sweep", c.alpha_sweep},
          {"case_samples", c.case_samples}};
}

}  // namespace

json to_json(const DecompositionReport& r) {
  const auto& w = r.whitney;
  const auto& e = r.energy;
  const auto& mp = r.max_principle;
  const auto& c = r.counting;
  const auto& cp = r.comparability;
  json out;
  out["lambda"] = r.lambda;
  out["mp_constant"] = r.mp_constant;
  out["whitney_mode"] = r.repaired ? "repaired" : "literal";
  out["window"] = r.window;
  out["cell_length"] = r.cell_length;
  out["cells"] = r.cells;
  out["levels"] = r.levels;
  out["whitney"] = {{"families", w.families},
                    {"members", w.members},
                    {"disjoint", w.disjoint},
                    {"coverage_ok", w.coverage_ok},
                    {"tail_ok", w.tail_ok},
                    {"dilates_inside", w.dilates_inside},
                    {"witness_ok", w.witness_ok},
                    {"overlap", w.overlap},
                    {"overlap_ok", w.overlap_ok},
                    {"nesting_ok", w.nesting.ok},
                    {"nesting_violations", w.nesting.violations},
                    {"nesting_pairs", w.nesting.pairs_checked}};
  out["max_principle"] = {{"constant", mp.constant},
                          {"checked", mp.checked},
                          {"violations", mp.violations},
                          {"worst_ratio", mp.worst_ratio},
                          {"worst_witness", mp.worst_witness ? json(*mp.worst_witness) : json(nullptr)},
                          {"ok", mp.ok}};
  out["energy"] = {{"m", e.m},
                   {"delta", e.delta},
                   {"total", e.total},
                   {"band_sum", e.band_sum},
                   {"A", e.A},
                   {"B", e.B},
                   {"partition_ok", e.partition_ok},
                   {"scaled_sum", e.scaled_sum},
                   {"bracket_ok", e.bracket_ok},
                   {"a_intermediate", e.a_intermediate},
                   {"a_level_bound", e.a_level_bound},
                   {"a_bound_ok", e.a_bound_ok},
                   {"absorption_factor", e.absorption_factor},
                   {"heavy_pairs", e.heavy_pairs},
                   {"lower_bound_ok", e.lower_bound_ok},
                   {"duality_gap", e.duality_gap},
                   {"B1", e.B1},
                   {"B2", e.B2},
                   {"b_split_ok", e.b_split_ok},
                   {"B21", e.B21},
                   {"B22", e.B22},
                   {"C_B1", e.C_B1},
                   {"C_B2", e.C_B2},
                   {"C_B21", e.C_B21},
                   {"C_B22", e.C_B22}};
  out["counting"] = {{"max_count", c.max_count}, {"bound", c.bound},         {"consecutive", c.consecutive},
                     {"ok", c.ok},               {"lacey_max", c.lacey_max}, {"lacey_bound", c.lacey_bound},
                     {"lacey_ok", c.lacey_ok}};
  out["comparability"] = {{"c_lo", cp.c_lo},         {"c_hi", cp.c_hi},       {"min_ratio", cp.min_ratio},
                          {"max_ratio", cp.max_ratio}, {"samples", cp.samples}, {"skipped", cp.skipped},
                          {"ok", cp.ok}};
  out["principal_intervals"] = r.principal_intervals;
  out["carleson"] = {{"lhs", r.carleson.lhs},
                     {"rhs", r.carleson.rhs},
                     {"phi_norm_sq", r.carleson.phi_norm_sq},
                     {"constant", r.carleson.ratio},
                     {"ok", r.carleson.ok}};
  out["F"] = r.F;
  out["B"] = r.B;
  out["ok"] = r.ok();
  return out;
}

json to_json(const InstanceRecord& r) {
  json out{{"index", r.index},
           {"lambda", r.lambda},
           {"N", r.N},
           {"F", r.F},
           {"B", r.B},
           {"ratio", r.ratio},
           {"F_shift", r.F_shift},
           {"B_shift", r.B_shift},
           {"ratio_shift", r.ratio_shift},
           {"norm_converged", r.norm_converged},
           {"necessity_ok", r.necessity_ok},
           {"duality_gap", r.duality_gap},
           {"weak11_ok", r.weak11_ok},
           {"weak11_checks", r.weak11_checks},
           {"max_principle_ok", r.max_principle_ok()},
           {"ok", r.ok()}};
  out["decomposition"] = r.decomposition ? to_json(*r.decomposition) : json(nullptr);
  out["error"] = r.error ? json(*r.error) : json(nullptr);
  return out;
}

namespace {

// Names of the checks a record fails, for the failures list.
json failed_checks(const InstanceRecord& rec) {
  json out = json::array();
  if (!rec.norm_converged) out.push_back("norm_converged");
  if (!rec.necessity_ok) out.push_back("necessity");
  if (!(rec.duality_gap <= kDualityTol)) out.push_back("duality");
  if (!rec.weak11_ok) out.push_back("weak11");
  if (!rec.decomposition) return out;
  const DecompositionReport& d = *rec.decomposition;
  const WhitneySummary& w = d.whitney;
  if (!w.disjoint) out.push_back("whitney_disjoint");
  if (!w.dilates_inside) out.push_back("whitney_dilates_inside");
  if (!w.overlap_ok) out.push_back("whitney_overlap");
  if (!w.nesting.ok) out.push_back("whitney_nesting");
  if (d.repaired) {
    if (!w.coverage_ok) out.push_back("whitney_coverage");
    if (!w.tail_ok) out.push_back("whitney_tail");
    if (!w.witness_ok) out.push_back("whitney_witness");
    if (!d.energy.partition_ok) out.push_back("energy_partition");
  }
  if (!d.max_principle.ok) out.push_back("max_principle");
  if (!d.energy.bracket_ok) out.push_back("energy_bracket");
  if (!d.energy.a_bound_ok) out.push_back("energy_a_bound");
  if (!d.energy.lower_bound_ok) out.push_back("energy_lower_bound");
  if (!d.energy.b_split_ok) out.push_back("energy_b_split");
  if (!d.counting.ok) out.push_back("counting");
  if (!d.counting.lacey_ok) out.push_back("lacey");
  if (!d.comparability.ok) out.push_back("comparability");
  if (!d.carleson.ok) out.push_back("carleson");
  return out;
}

}  // namespace

json to_json(const TestReport& r) {
  json out;
  out["config"] = config_json(r.config);
  out["timestamp"] = r.timestamp;
  out["records"] = json::array();
  json failures = json::array();
  for (const auto& rec : r.records) {
    out["records"].push_back(to_json(rec));
    if (!rec.ok()) {
      failures.push_back({{"seed", r.config.seed},
                          {"index", rec.index},
                          {"lambda", rec.lambda},
                          {"error", rec.error ? json(*rec.error) : json(nullptr)},
                          {"checks", failed_checks(rec)}});
    }
  }
  out["kernel_cases"] = json::array();
  for (const auto& [lambda, c] : r.kernel_cases) {
    out["kernel_cases"].push_back({{"lambda", lambda},
                                   {"case1_constant", std::pow(16.0, lambda + 1.0)},
                                   {"case2_constant", std::pow(19.0, lambda + 1.0)},
                                   {"case1", case_json(c.case1)},
                                   {"case2", case_json(c.case2)},
                                   {"ok", c.ok()}});
    if (!c.ok()) failures.push_back({{"seed", r.config.seed}, {"lambda", lambda}, {"error", "kernel case sampling"}});
  }

  double max_mp = 0.0;
  double max_cb1 = 0.0, max_cb2 = 0.0, max_cb21 = 0.0, max_cb22 = 0.0, max_carleson = 0.0;
  int max_overlap = 0;
  std::size_t max_lacey = 0, max_count = 0;
  for (const auto& rec : r.records) {
    if (!rec.decomposition) continue;
    const auto& d = *rec.decomposition;
    max_mp = std::max(max_mp, d.max_principle.worst_ratio);
    max_cb1 = std::max(max_cb1, d.energy.C_B1);
    max_cb2 = std::max(max_cb2, d.energy.C_B2);
    max_cb21 = std::max(max_cb21, d.energy.C_B21);
    max_cb22 = std::max(max_cb22, d.energy.C_B22);
    max_carleson = std::max(max_carleson, d.carleson.ratio);
    max_overlap = std::max(max_overlap, d.whitney.overlap);
    max_lacey = std::max(max_lacey, d.counting.lacey_max);
    max_count = std::max(max_count, d.counting.max_count);
  }
  out["aggregate"] = {{"records", r.records.size()},
                      {"failures", r.failures()},
                      {"max_ratio", r.max_ratio()},
                      {"max_ratio_shift", r.max_ratio_shift()},
                      {"max_principle_worst_ratio", max_mp},
                      {"max_C_B1", max_cb1},
                      {"max_C_B2", max_cb2},
                      {"max_C_B21", max_cb21},
                      {"max_C_B22", max_cb22},
                      {"max_carleson_constant", max_carleson},
                      {"max_whitney_overlap", max_overlap},
                      {"max_heavy_count", max_count},
                      {"max_lacey_count", max_lacey}};
  out["failures"] = std::move(failures);
  out["ok"] = r.ok();
  return out;
}

std::string to_csv(const TestReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "instance,lambda,N,F,B,ratio,max_principle_ok,weak11_ok,carleson_C,whitney_overlap\n";
  for (const auto& rec : r.records) {
    os << rec.index << ',' << rec.lambda << ',' << rec.N << ',' << rec.F << ',' << rec.B << ',' << rec.ratio << ','
       << (rec.max_principle_ok() ? "true" : "false") << ',' << (rec.weak11_ok ? "true" : "false") << ',';
    if (rec.decomposition) {
      os << rec.decomposition->carleson.ratio << ',' << rec.decomposition->whitney.overlap;
    } else {
      os << ',';
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace besselp::harness
