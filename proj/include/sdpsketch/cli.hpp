#pragma once
//
// Command-line front end: generate, sketch, solve, bounds, certify-lmi, bench.
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
//

#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sdpsketch/bounds.hpp"
#include "sdpsketch/certify.hpp"
#include "sdpsketch/error.hpp"
#include "sdpsketch/experiments.hpp"
#include "sdpsketch/generators.hpp"
#include "sdpsketch/io.hpp"
#include "sdpsketch/jlt.hpp"
#include "sdpsketch/sketch.hpp"
#include "sdpsketch/solver.hpp"

namespace sdpsketch {

namespace cli {

using io::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::NumericalFailure:
    case ErrorCode::DegenerateCertificate:
      return kExitNumerical;
    default:
      return kExitUsage;
  }
}

struct Output {
  std::ostream& out;
  std::string path;

  void write(const std::string& text) const {
    if (path.empty() || path == "-") {
      out << text;
    } else {
      io::write_text_file(path, text);
    }
  }
};

/// --timestamp wins, then SOURCE_DATE_EPOCH, then the epoch itself.
inline std::string certificate_timestamp(const std::string& flag) {
  if (!flag.empty()) return flag;
  std::time_t secs = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    require(end != env && *end == '\0' && v >= 0, ErrorCode::InvalidConfig,
            "SOURCE_DATE_EPOCH must be a nonnegative integer");
    secs = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::int64_t default_k_budget(int D, int m) { return static_cast<std::int64_t>(m + 2) * D; }

struct Flags {
  std::string input;
  std::string out;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  double delta = 0.05;
  double eta = 1.0;
  std::int64_t k_budget = 0;
  std::string ensemble = "gaussian";
  int sparsity = 0;
  double tol = 1e-8;
  bool dump = false;
  std::string sketch_path;
  std::string report_path;
  std::string x0_path;
  std::string timestamp;
  std::string family = "packing";
  int D = 64;
  int m = 5;
  int r = 2;
  int trials = 10;
  double tau = 0.5;
  int d = 0;
  bool timings = false;
  std::string summary_path;
};

inline int run_generate(const Flags& f, const Output& out) {
  json j;
  if (f.family == "packing") {
    const auto inst = generate_packing_instance(f.D, f.m, f.r, f.seed, f.eta);
    j = io::to_json(inst.problem);
    j["generator"] = json{{"family", "packing"}, {"D", f.D}, {"m", f.m}, {"r", f.r},
                          {"seed", f.seed}, {"eta", inst.eta}, {"k_budget", inst.k_budget},
                          {"slater_point", io::to_json(inst.slater_point)}};
  } else if (f.family == "infeasible-lmi") {
    const auto planted = generate_infeasible_lmi(f.D, f.m, f.tau, f.seed);
    j = io::to_json(planted.lmi);
    j["generator"] = json{{"family", "infeasible-lmi"}, {"D", f.D}, {"m", f.m}, {"seed", f.seed},
                          {"tau", f.tau}, {"b_margins", planted.b_margins},
                          {"a_margin", planted.a_margin}};
  } else if (f.family == "feasible-lmi") {
    const auto inst = generate_feasible_lmi(f.D, f.m, f.seed);
    j = io::to_json(inst.lmi);
    j["generator"] = json{{"family", "feasible-lmi"}, {"D", f.D}, {"m", f.m}, {"seed", f.seed},
                          {"witness_c", io::to_json(inst.c)}};
  } else {
    fail(ErrorCode::InvalidConfig, "unknown family '" + f.family + "'");
  }
  out.write(io::dump(j));
  return kExitOk;
}

inline SketchConfig sketch_config(const Flags& f, int D, int m) {
  SketchConfig sc;
  sc.epsilon = f.epsilon;
  sc.delta = f.delta;
  sc.eta = f.eta;
  sc.k = f.k_budget > 0 ? f.k_budget : default_k_budget(D, m);
  sc.ensemble = parse_ensemble(f.ensemble);
  sc.sparsity = f.sparsity;
  sc.seed = f.seed;
  sc.validate();
  return sc;
}

inline int run_sketch(const Flags& f, const Output& out) {
  const auto p = io::problem_from_json(io::read_json_file(f.input));
  const SketchConfig sc = sketch_config(f, p.dim(), p.num_constraints());
  const SketchMatrix s = make_sketch(sc, p.dim());
  const SketchedSdp sk = sketch_sdp(p, sc, s);
  out.write(io::dump(io::to_json(sk, sc)));
  return kExitOk;
}

inline int run_solve(const Flags& f, const Output& out) {
  const auto p = io::problem_from_json(io::read_json_file(f.input));
  const SolveReport rep = solve(p, {f.tol, 200});
  out.write(io::dump(io::to_json(rep, f.dump)));
  const bool numerical = rep.status == SolveStatus::NumericalFailure ||
                         rep.status == SolveStatus::IterationLimit;
  return numerical ? kExitNumerical : kExitOk;
}

inline int run_bounds(const Flags& f, const Output& out) {
  const auto p = io::problem_from_json(io::read_json_file(f.input));
  const auto skf = io::sketched_from_json(io::read_json_file(f.sketch_path));
  const json rep_json = io::read_json_file(f.report_path);
  const SolveReport rep = io::report_from_json(rep_json);
  require(static_cast<int>(skf.sketched.original_rhs.size()) == p.num_constraints(),
          ErrorCode::DimensionMismatch, "sketch and problem differ in constraint count");
  if (skf.sketched.sketch) {
    require(skf.sketched.sketch->D == p.dim(), ErrorCode::DimensionMismatch,
            "sketch and problem differ in dimension");
  }

  ValueBounds vb;
  json extra = json::object();
  if (is_normalized_packing(p) && rep.status == SolveStatus::Optimal) {
    vb = packing_bounds(p, skf.sketched, rep, skf.k);
    if (skf.sketched.sketch && rep_json.contains("primal")) {
      const SketchMatrix s = regenerate_sketch(*skf.sketched.sketch);
      const SymMatrix xhat = recover_packing_point(rep.primal, s, vb.lower_audit->nu);
      double viol = -min_eigenvalue(xhat);
      for (const auto& c : p.constraints) viol = std::max(viol, trace_product(c.matrix, xhat) - c.rhs);
      extra["recovered_point"] = json{{"max_violation", viol},
                                      {"objective", trace_product(p.objective, xhat)}};
    }
  } else {
    std::optional<SymMatrix> x0;
    if (!f.x0_path.empty()) x0 = io::matrix_from_json(io::read_json_file(f.x0_path));
    vb = value_bounds(p, skf.sketched, rep, skf.k, x0);
  }
  json j = io::to_json(vb);
  for (auto& [k, v] : extra.items()) j[k] = v;
  out.write(io::dump(j));
  return kExitOk;
}

inline int run_certify(const Flags& f, const Output& out, std::ostream& err) {
  const auto l = io::lmi_from_json(io::read_json_file(f.input));
  CertifyConfig cc;
  json separator = nullptr;
  double eps = f.epsilon;
  if (eps <= 0.0) {
    require(l.dim() <= kOracleMaxDimension, ErrorCode::InvalidConfig,
            "--epsilon is required above the separator-search dimension cap");
    if (auto sep = find_separator(l)) {
      eps = sep->certified_epsilon;
      cc.epsilon_certified = true;
      separator = json{{"certified_epsilon", sep->certified_epsilon},
                       {"a_margin", sep->a_margin},
                       {"b_margins", sep->b_margins}};
    } else {
      eps = 0.5;
      err << "warning: no separator found; using epsilon = 0.5\n";
    }
  }
  Flags g = f;
  g.epsilon = std::min(1.0, eps);
  cc.sketch = sketch_config(g, l.dim(), l.num_matrices());
  cc.sketch.eta = 1.0;
  if (f.k_budget <= 0) cc.sketch.k = default_k_budget(l.dim(), l.num_matrices());
  cc.timestamp = certificate_timestamp(f.timestamp);
  const CertifyOutcome outcome = certify_infeasible(l, cc);
  json j = io::to_json(outcome);
  if (!separator.is_null()) j["separator"] = separator;
  out.write(io::dump(j));
  return kExitOk;
}

inline int run_bench(const Flags& f, const Output& out, std::ostream& err) {
  json summary;
  std::string csv;
  const Ensemble ens = parse_ensemble(f.ensemble);
  if (f.family == "packing" || f.family == "packing-sdp") {
    ValueExperimentConfig cfg;
    cfg.D = f.D;
    cfg.m = f.m;
    cfg.r = f.r;
    cfg.trials = f.trials;
    cfg.epsilon = f.epsilon > 0.0 ? f.epsilon : 0.2;
    cfg.delta = f.delta;
    cfg.eta = f.eta;
    cfg.k_budget = f.k_budget;
    cfg.ensemble = ens;
    cfg.seed = f.seed;
    cfg.solver_tol = f.tol;
    cfg.timings = f.timings;
    const auto rows = run_value_experiment(cfg);
    csv = value_csv(rows);
    const auto s = summarize(rows, cfg.delta);
    summary = json{{"family", "packing"}, {"trials", s.trials}, {"aborted", s.aborted},
                   {"oracle_trials", s.oracle_trials}, {"bound_failures", s.bound_failures},
                   {"failure_rate", s.failure_rate}, {"allowed_failures", s.allowed_failures},
                   {"mean_relative_gap", io::number(s.mean_relative_gap)},
                   {"speedup", io::number(s.speedup)},
                   {"max_entries_stored", s.max_entries_stored}};
  } else if (f.family == "infeasible-lmi" || f.family == "feasible-lmi") {
    LmiExperimentConfig cfg;
    cfg.D = f.D;
    cfg.m = f.m;
    cfg.trials = f.trials;
    cfg.tau = f.tau;
    cfg.delta = f.delta;
    cfg.epsilon = f.epsilon;
    cfg.k_budget = f.k_budget;
    cfg.family = f.family == "infeasible-lmi" ? LmiFamily::PlantedInfeasible : LmiFamily::FeasibleControl;
    cfg.ensemble = ens;
    cfg.seed = f.seed;
    cfg.timings = f.timings;
    const auto rows = run_lmi_experiment(cfg);
    csv = lmi_csv(rows, cfg.family);
    const auto s = summarize(rows);
    summary = json{{"family", family_name(cfg.family)}, {"trials", s.trials}, {"aborted", s.aborted},
                   {"certified", s.certified}, {"sketch_feasible", s.sketch_feasible},
                   {"inconclusive", s.inconclusive}, {"unsound", s.unsound},
                   {"certification_rate", s.certification_rate}};
  } else if (f.family == "low-rank" || f.family == "coordinate") {
    DistortionExperimentConfig cfg;
    cfg.D = f.D;
    cfg.m = f.m;
    cfg.r = f.r;
    cfg.trials = f.trials;
    cfg.epsilon = f.epsilon > 0.0 ? f.epsilon : 0.25;
    cfg.delta = f.delta;
    cfg.k_budget = f.k_budget;
    cfg.family = f.family == "coordinate" ? DistortionFamily::Coordinate : DistortionFamily::LowRank;
    cfg.ensemble = ens;
    cfg.d_override = f.d;
    cfg.seed = f.seed;
    cfg.timings = f.timings;
    const auto rows = run_distortion_experiment(cfg);
    csv = distortion_csv(rows, cfg.family);
    const auto s = summarize(rows, cfg.delta);
    summary = json{{"family", f.family == "coordinate" ? "coordinate" : "low-rank"},
                   {"trials", s.trials}, {"aborted", s.aborted}, {"exceedances", s.exceedances},
                   {"exceedance_rate", s.exceedance_rate}, {"allowed_rate", s.allowed_rate},
                   {"exceedances_hs", s.exceedances_hs}, {"exceedance_rate_hs", s.exceedance_rate_hs}};
  } else {
    fail(ErrorCode::InvalidConfig, "unknown family '" + f.family + "'");
  }
  out.write(csv);
  std::string summary_path = f.summary_path;
  if (summary_path.empty() && !f.out.empty() && f.out != "-") summary_path = f.out + ".summary.json";
  if (summary_path.empty()) {
    err << io::dump(summary);
  } else {
    io::write_text_file(summary_path, io::dump(summary));
  }
  return kExitOk;
}

}  // namespace cli

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  using namespace cli;
  CLI::App app{"Sketching toolkit for semidefinite programs and LMIs", "sdpsketch"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&f](CLI::App* sub) {
    sub->add_option("--seed", f.seed, "Random seed");
    sub->add_option("--out", f.out, "Output path (default: standard output)");
  };
  auto add_sketch_flags = [&f](CLI::App* sub) {
    sub->add_option("--epsilon", f.epsilon, "Sketch accuracy in (0, 1]");
    sub->add_option("--delta", f.delta, "Failure probability in (0, 1)");
    sub->add_option("--k-budget", f.k_budget, "Declared rank budget k (default (m + 2) D)");
    sub->add_option("--ensemble", f.ensemble, "gaussian or sparse");
    sub->add_option("--sparsity", f.sparsity, "Nonzeros per column for the sparse ensemble");
  };
  auto add_instance_flags = [&f](CLI::App* sub) {
    sub->add_option("--family", f.family, "Instance family");
    sub->add_option("--D,-D", f.D, "Matrix dimension");
    sub->add_option("--m,-m", f.m, "Number of constraint matrices");
    sub->add_option("--r,-r", f.r, "Rank of random matrices");
    sub->add_option("--tau", f.tau, "Planted separation margin");
    sub->add_option("--eta", f.eta, "Trace bound");
  };

  auto* gen = app.add_subcommand("generate", "Generate a seeded instance");
  add_common(gen);
  add_instance_flags(gen);

  auto* sk = app.add_subcommand("sketch", "Sketch a problem JSON");
  add_common(sk);
  add_sketch_flags(sk);
  sk->add_option("input", f.input, "Problem JSON")->required();
  sk->add_option("--eta", f.eta, "Certified trace bound on an optimal solution")->required();
  sk->get_option("--epsilon")->required();

  auto* sol = app.add_subcommand("solve", "Solve a problem JSON");
  add_common(sol);
  sol->add_option("input", f.input, "Problem JSON")->required();
  sol->add_option("--tol", f.tol, "Solver tolerance");
  sol->add_flag("--dump", f.dump, "Include primal and dual solutions");

  auto* bnd = app.add_subcommand("bounds", "Bounds on the original value from a sketched solve");
  add_common(bnd);
  bnd->add_option("input", f.input, "Original problem JSON")->required();
  bnd->add_option("--sketch", f.sketch_path, "Sketched problem JSON")->required();
  bnd->add_option("--report", f.report_path, "Solve report of the sketched problem")->required();
  bnd->add_option("--x0", f.x0_path, "Strictly feasible point (matrix JSON)");

  auto* cert = app.add_subcommand("certify-lmi", "Certify infeasibility of an LMI by sketching");
  add_common(cert);
  add_sketch_flags(cert);
  cert->add_option("input", f.input, "LMI JSON")->required();
  cert->add_option("--timestamp", f.timestamp, "Certificate timestamp (default SOURCE_DATE_EPOCH)");

  auto* bench = app.add_subcommand("bench", "Seeded Monte-Carlo experiments (CSV + summary JSON)");
  add_common(bench);
  add_sketch_flags(bench);
  add_instance_flags(bench);
  bench->add_option("--trials", f.trials, "Number of trials");
  bench->add_option("--d", f.d, "Fixed sketch dimension (distortion families)");
  bench->add_option("--tol", f.tol, "Solver tolerance");
  bench->add_option("--summary", f.summary_path, "Summary JSON path (default <out>.summary.json)");
  bench->add_flag("--timings", f.timings, "Record wall-clock columns (not reproducible)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  const Output sink{out, f.out};
  try {
    if (gen->parsed()) return run_generate(f, sink);
    if (sk->parsed()) return run_sketch(f, sink);
    if (sol->parsed()) return run_solve(f, sink);
    if (bnd->parsed()) return run_bounds(f, sink);
    if (cert->parsed()) return run_certify(f, sink, err);
    if (bench->parsed()) return run_bench(f, sink, err);
  } catch (const SketchError& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace sdpsketch
