// besselp: command line front end for the kernel, Whitney, testing and
// verification routines.

#include "besselp/dyadic.hpp"
#include "besselp/error.hpp"
#include "besselp/harness.hpp"
#include "besselp/instance_io.hpp"
#include "besselp/kernel.hpp"
#include "besselp/operators.hpp"
#include "besselp/simd.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace besselp;
using nlohmann::json;

namespace {

json interval_json(const std::optional<Interval>& iv) {
  if (!iv) return nullptr;
  return json::array({iv->a, iv->b});
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

int cmd_kernel(double lambda, double x, double y, double t, double rel_tol) {
  BesselParam p(lambda);
  p.quad_rel_tol = rel_tol;
  std::printf("%.15g\n", eval_kernel(p, {x, y, t}));
  return 0;
}

int cmd_whitney(const std::string& omega_text, std::optional<int> min_level, const std::string& mode_text) {
  const OpenSet omega = OpenSet::parse(omega_text);
  const WhitneyMode mode = parse_whitney_mode(mode_text);
  const WhitneyCollection w = min_level ? whitney_decompose(omega, *min_level, mode) : whitney_decompose(omega, mode);
  const WhitneyProperties pr = whitney_properties(w);
  json out;
  out["mode"] = to_string(w.mode);
  out["min_level"] = w.min_level;
  out["omega_measure"] = omega.measure();
  out["uncovered_tail"] = w.uncovered_tail;
  out["intervals"] = json::array();
  for (const auto& d : w.intervals) {
    out["intervals"].push_back({{"level", d.level}, {"index", d.index}, {"a", d.left()}, {"b", d.right()}});
  }
  out["properties"] = {{"coverage_defect", pr.coverage_defect},
                       {"coverage_matches_tail", pr.coverage_matches_tail},
                       {"disjoint", pr.disjoint},
                       {"dilates_inside", pr.dilates_inside},
                       {"witness_ok", pr.witness_ok},
                       {"overlap", pr.overlap}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_testing(const std::string& input, bool shift) {
  const InstanceFile f = load_instance(input);
  const TestingResult r = run_testing(f.inst, shift);
  json out{{"F", r.F},
           {"B", r.B},
           {"N", r.N},
           {"ratio", r.ratio},
           {"witnesses", {{"F", interval_json(r.witness_F)}, {"B", interval_json(r.witness_B)}}},
           {"iterations", r.iterations},
           {"converged", r.norm_converged},
           {"family_size", r.family_size}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_norm(const std::string& input, double tol, std::size_t max_iters) {
  const InstanceFile f = load_instance(input);
  const KernelMatrix k(f.inst);
  const NormResult r = operator_norm(f.inst, k, tol, max_iters);
  json out{{"N", r.value}, {"iterations", r.iterations}, {"converged", r.converged}};
  std::cout << out.dump(2) << '\n';
  return r.converged ? 0 : 1;
}

int cmd_verify(const harness::ExperimentConfig& cfg, const std::string& out_path, const std::string& csv_path) {
  const harness::TestReport rep = harness::run_equivalence_suite(cfg);
  const json doc = harness::to_json(rep);
  if (!out_path.empty()) write_file(out_path, doc.dump(2) + "\n");
  if (!csv_path.empty()) write_file(csv_path, harness::to_csv(rep));
  std::printf("records %zu  failures %zu  max N/(F+B) %.6g  with shifts %.6g\n", rep.records.size(), rep.failures(),
              rep.max_ratio(), rep.max_ratio_shift());
  for (const auto& f : doc["failures"]) std::printf("  failure: %s\n", f.dump().c_str());
  return rep.ok() ? 0 : 1;
}

int cmd_decompose(const harness::ExperimentConfig& cfg, const std::string& input, std::size_t index,
                  const std::string& out_path) {
  TwoWeightInstance inst;
  std::vector<double> phi;
  if (!input.empty()) {
    InstanceFile f = load_instance(input);
    inst = std::move(f.inst);
    phi = f.phi ? *f.phi : std::vector<double>(inst.mu.size(), 1.0);
  } else {
    harness::GeneratedInstance g = harness::gen_instance(cfg, index, cfg.lambda_set.front());
    inst = std::move(g.inst);
    phi = std::move(g.phi);
  }
  harness::ExperimentConfig c = cfg;
  c.lambda_set = {inst.p.lambda};
  c.validate();
  const KernelMatrix k(inst);
  const TestingResult t = run_testing(inst, k, false);
  const harness::DecompositionReport rep = harness::decompose_energy(inst, k, phi, c, t);
  const std::string text = harness::to_json(rep).dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
  return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-weight inequalities for the Bessel-Poisson operator: numerical checks"};
  app.require_subcommand(1);
  std::string backend = "auto";
  app.add_option("--backend", backend, "SIMD backend: auto, scalar or avx2");

  auto* kernel = app.add_subcommand("kernel", "Evaluate P_t(x, y)");
  double lambda = 1.0, x = 0.0, y = 0.0, t = 0.0, rel_tol = 1e-12;
  kernel->add_option("--lambda", lambda)->required();
  kernel->add_option("--x", x)->required();
  kernel->add_option("--y", y)->required();
  kernel->add_option("--t", t)->required();
  kernel->add_option("--rel-tol", rel_tol);

  auto* whitney = app.add_subcommand("whitney", "Whitney decomposition of a finite union of intervals");
  std::string omega, mode = "repaired";
  std::optional<int> min_level;
  whitney->add_option("--omega", omega, "\"a1,b1;a2,b2\"")->required();
  whitney->add_option("--min-level", min_level);
  whitney->add_option("--mode", mode, "repaired | literal");

  auto* testing = app.add_subcommand("testing", "Testing constants F, B and the norm N");
  std::string input;
  bool shift = false;
  testing->add_option("--input", input)->required();
  testing->add_flag("--shift-thirds", shift);

  auto* norm = app.add_subcommand("norm", "Operator norm by power iteration");
  double tol = 1e-10;
  std::size_t max_iters = 10000;
  norm->add_option("--input", input)->required();
  norm->add_option("--tol", tol);
  norm->add_option("--max-iters", max_iters);

  harness::ExperimentConfig cfg;
  std::vector<double> lambdas;
  std::string mp_mode = "repaired-33", out_path, csv_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed);
    sub->add_option("--lambda", lambdas);
    sub->add_option("--delta", cfg.delta);
    sub->add_option("--m", cfg.m, "level shift; 0 selects the default");
    sub->add_option("--mp-mode", mp_mode, "repaired-33 | paper-19");
    sub->add_option("--n-sigma", cfg.n_sigma);
    sub->add_option("--n-mu", cfg.n_mu);
    sub->add_option("--grid-cells", cfg.grid_cells);
    sub->add_option("--out", out_path);
  };
  auto* verify = app.add_subcommand("verify", "Run the equivalence suite");
  add_config(verify);
  verify->add_option("--instances", cfg.instance_count);
  verify->add_option("--csv", csv_path);

  auto* decompose = app.add_subcommand("decompose", "Energy decomposition for one instance");
  add_config(decompose);
  std::size_t index = 0;
  decompose->add_option("--input", input, "measure file; phi defaults to 1");
  decompose->add_option("--index", index, "generated instance index when no input is given");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!simd::select(backend)) throw InvalidParameter("backend '" + backend + "' is not available");
    if (!lambdas.empty()) cfg.lambda_set = lambdas;
    cfg.mp_mode = harness::parse_mp_mode(mp_mode);

    if (*kernel) return cmd_kernel(lambda, x, y, t, rel_tol);
    if (*whitney) return cmd_whitney(omega, min_level, mode);
    if (*testing) return cmd_testing(input, shift);
    if (*norm) return cmd_norm(input, tol, max_iters);
    if (*verify) {
      cfg.validate();
      return cmd_verify(cfg, out_path, csv_path);
    }
    if (*decompose) return cmd_decompose(cfg, input, index, out_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "besselp: %s\n", e.what());
    return 2;
  }
  return 0;
}
