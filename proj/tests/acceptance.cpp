// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "cli_support.hpp"
#include "sdpsketch/sdpsketch.hpp"
#include "support.hpp"

using namespace sdpsketch;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Independent restatement of the dimension rule: ceil(8 ln(k / delta) / eps^2), at most D.
int expected_dimension(double eps, double delta, std::int64_t k, int D) {
  const double raw = 8.0 * std::log(static_cast<double>(k) / delta) / (eps * eps);
  return static_cast<int>(std::min<double>(D, std::ceil(raw - 1e-9)));
}

double allowed_rate(double delta, int trials) { return delta + 3.0 * std::sqrt(delta * (1.0 - delta) / trials); }

// 1. Pairwise distortion of ten rank-4 matrices stays below 3 eps ||B_i||_1 ||B_j||_1
//    except at a rate within the binomial margin of delta.
Outcome distortion_rate() {
  const auto start = std::chrono::steady_clock::now();
  DistortionExperimentConfig cfg;
  cfg.D = 512;
  cfg.m = 10;
  cfg.r = 4;
  cfg.k_budget = 40;
  cfg.epsilon = 0.25;
  cfg.delta = 0.05;
  cfg.trials = 200;
  cfg.seed = 1;
  const auto rows = run_distortion_experiment(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  int exceed = 0, aborted = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) ++aborted;
    else if (r.max_deviation > 3.0 * cfg.epsilon) ++exceed;
  }
  const double rate = static_cast<double>(exceed + aborted) / cfg.trials;
  const double allowed = allowed_rate(cfg.delta, cfg.trials);
  const int d = rows.front().d;
  const bool dim_ok = d == expected_dimension(cfg.epsilon, cfg.delta, cfg.k_budget, cfg.D);
  return {rate <= allowed && secs <= 300.0 && dim_ok,
          format("exceedance %d/%d = %.4f (allowed %.4f), d=%d, %.1f s (limit 300)", exceed + aborted,
                 cfg.trials, rate, allowed, d, secs)};
}

struct PackingRun {
  ValueExperimentConfig cfg;
  std::vector<ValueTrial> rows;
  double seconds = 0.0;
};

const PackingRun& packing_run() {
  static const PackingRun run = [] {
    PackingRun r;
    r.cfg.D = 256;
    r.cfg.m = 20;
    r.cfg.r = 4;
    r.cfg.trials = 200;
    r.cfg.epsilon = 0.2;
    r.cfg.delta = 0.05;
    r.cfg.eta = 1.0;
    r.cfg.seed = 2;
    const auto start = std::chrono::steady_clock::now();
    r.rows = run_value_experiment(r.cfg);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }();
  return run;
}

// 2. The sketched upper bound covers the oracle value in at least 90.4% of trials.
Outcome upper_bound_coverage() {
  const auto& run = packing_run();
  int held = 0, aborted = 0;
  for (const auto& r : run.rows) {
    if (!r.error.empty() || !r.oracle_solved) ++aborted;
    else if (r.upper >= r.alpha_orig) ++held;
  }
  const double rate = static_cast<double>(held) / run.cfg.trials;
  const double needed = 1.0 - allowed_rate(run.cfg.delta, run.cfg.trials);
  return {rate >= needed && run.seconds <= 900.0,
          format("upper >= alpha in %d/%d = %.4f (needed %.4f), %d aborted, d=%d, %.1f s (limit 900)", held,
                 run.cfg.trials, rate, needed, aborted, run.rows.front().d, run.seconds)};
}

// 3. The recovered point S^T Y* S / (1 + nu) is feasible and attains alpha_S / (1 + nu).
Outcome recovered_point() {
  const auto& run = packing_run();
  const double tol = 10.0 * run.cfg.solver_tol;
  int ok = 0;
  double worst_violation = -std::numeric_limits<double>::infinity();
  double worst_shortfall = -std::numeric_limits<double>::infinity();
  for (const auto& r : run.rows) {
    if (!r.error.empty()) continue;
    const double shortfall = r.lower - r.recovered_objective;
    worst_violation = std::max(worst_violation, r.recovered_violation);
    worst_shortfall = std::max(worst_shortfall, shortfall);
    if (r.recovered_violation <= tol && shortfall <= tol) ++ok;
  }
  return {ok == run.cfg.trials, format("%d/%d trials; worst violation %.3g, worst objective shortfall %.3g "
                                       "(tol %.1g)",
                                       ok, run.cfg.trials, worst_violation, worst_shortfall, tol)};
}

// 4. Planted infeasible LMIs are certified at the required rate, and no
//    feasible control is ever certified.
Outcome lmi_certification() {
  LmiExperimentConfig cfg;
  cfg.D = 128;
  cfg.m = 5;
  cfg.tau = 0.5;
  cfg.delta = 0.05;
  cfg.trials = 200;
  cfg.seed = 4;
  const auto planted = summarize(run_lmi_experiment(cfg));
  cfg.family = LmiFamily::FeasibleControl;
  cfg.epsilon = 0.5;
  cfg.seed = 40000;
  const auto controls_rows = run_lmi_experiment(cfg);
  const auto controls = summarize(controls_rows);
  int oracle_feasible = 0;
  for (const auto& r : controls_rows) oracle_feasible += r.oracle_solved && r.oracle_status == FeasibilityStatus::Feasible;
  const double needed = 1.0 - allowed_rate(cfg.delta, cfg.trials);
  const bool pass = planted.certification_rate >= needed && planted.unsound == 0 && controls.certified == 0 &&
                    controls.aborted == 0 && oracle_feasible == cfg.trials;
  return {pass, format("certified %d/%d = %.4f (needed %.4f), unsound %d; controls certified %d/%d, "
                       "oracle-feasible %d, aborted %d",
                       planted.certified, planted.trials, planted.certification_rate, needed, planted.unsound,
                       controls.certified, controls.trials, oracle_feasible, controls.aborted)};
}

// 5. Small diagonal instances match a vertex-enumeration oracle; Optimal
//    reports close the duality gap and weak duality holds on sampled pairs.
Outcome diagonal_oracle() {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> pos(0.1, 2.0), any(-1.5, 2.0), unit(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 3), cons(1, 2);
  double worst_err = 0.0, worst_gap = 0.0, worst_weak = std::numeric_limits<double>::infinity();
  int bad = 0;
  for (int t = 0; t < 50; ++t) {
    const int D = dim(g), m = cons(g);
    Vector a(D);
    for (int j = 0; j < D; ++j) a(j) = any(g);
    Matrix b(m, D);
    Vector gamma(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < D; ++j) b(i, j) = i == 0 ? pos(g) : any(g);
      gamma(i) = pos(g);
    }
    SketchableSdp p;
    p.objective = SymMatrix::diagonal(a);
    for (int i = 0; i < m; ++i) p.constraints.push_back({SymMatrix::diagonal(b.row(i).transpose()), gamma(i)});
    const auto rep = solve(p);
    if (rep.status != SolveStatus::Optimal) {
      ++bad;
      continue;
    }
    const double err = std::abs(rep.value - lp_vertex_oracle(a, b, gamma));
    worst_err = std::max(worst_err, err);
    worst_gap = std::max(worst_gap, rep.duality_gap);
    if (err > 1e-5 || rep.duality_gap > 1e-8) ++bad;
    // Weak duality on the report's own pair and on sampled feasible pairs.
    const auto dual = dualize(p);
    worst_weak = std::min(worst_weak, residuals(p, rep).weak_duality);
    for (int s = 0; s < 20; ++s) {
      Vector x(D);
      for (int j = 0; j < D; ++j) x(j) = unit(g);
      const double scale = (b * x).cwiseQuotient(gamma).maxCoeff();
      if (scale > 0.0) x /= scale;
      Vector y(m);
      for (int i = 0; i < m; ++i) y(i) = unit(g);
      // Raise y_1 until sum y_i B_i - A is PSD; B_1 is a positive diagonal.
      const Vector slack = b.transpose() * y - a;
      y(0) += std::max(0.0, (-slack.array() / b.row(0).transpose().array()).maxCoeff());
      if (!dual.is_feasible(y, 1e-12)) continue;
      const double w = dual.value(y) - a.dot(x);
      worst_weak = std::min(worst_weak, w);
      if (w < -1e-12) ++bad;
    }
  }
  if (worst_weak < -1e-8) ++bad;
  return {bad == 0, format("value error max %.3g (limit 1e-5), gap max %.3g (limit 1e-8), weak duality min %.3g, "
                           "%d failures",
                           worst_err, worst_gap, worst_weak, bad)};
}

// 6. Conjugation keeps PSD matrices PSD, and feasible points of the sketched
//    problem lift to feasible points of the relaxed problem.
Outcome transport() {
  std::mt19937_64 g(6);
  std::uniform_int_distribution<int> dims(2, 40);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_eig = 0.0, worst_lift = -std::numeric_limits<double>::infinity();
  int failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const int D = dims(g);
    const int d = 1 + static_cast<int>(unit(g) * D) % D;
    const SketchMatrix s = t % 2 == 0 ? sample_gaussian_jlt(d, D, t)
                                      : sample_sparse_jlt(d, D, 1 + t % d, t);
    Matrix mpsd = random_psd(D, 1 + t % D, g);
    mpsd /= mpsd.trace();
    const double eig = min_eigenvalue(conjugate(s, SymMatrix::dense(mpsd)));
    worst_eig = std::min(worst_eig, eig);
    if (eig < -1e-9) ++failures;

    SketchableSdp p;
    p.objective = SymMatrix::dense(random_symmetric(D, g));
    const int m = 1 + t % 4;
    for (int i = 0; i < m; ++i) {
      const SymMatrix b = t % 3 == 0 ? random_sparse(D, 2 * D, g) : SymMatrix::dense(random_symmetric(D, g));
      p.constraints.push_back({b, 0.5 + unit(g)});
    }
    const double eps = 0.05 + 0.9 * unit(g), eta = 2.0 * unit(g);
    const auto sk = sketch_sdp(p, eps, eta, s);
    const auto relaxed = build_relaxed_sdp(p, eps, eta);
    Matrix y = random_psd(d, 1 + t % d, g);
    double scale = 0.0;
    for (const auto& c : sk.problem.constraints) scale = std::max(scale, trace_product(c.matrix, y) / c.rhs);
    if (scale > 0.0) y /= scale;
    const SymMatrix x = lift(s, SymMatrix::dense(y));
    for (int i = 0; i < m; ++i) {
      const double excess = trace_product(relaxed.problem.constraints[i].matrix, x) - relaxed.problem.constraints[i].rhs;
      worst_lift = std::max(worst_lift, excess);
      if (excess > 1e-8) ++failures;
    }
  }
  return {failures == 0, format("1000 cases; min eigenvalue %.3g (limit -1e-9), max relaxed excess %.3g "
                                "(limit 1e-8), %d failures",
                                worst_eig, worst_lift, failures)};
}

// 7. Sketched problems store at most (m + 1) d^2 + m entries, with d from the
//    dimension rule.
Outcome storage() {
  int checked = 0, failures = 0;
  std::size_t worst = 0, worst_limit = 0;
  auto check = [&](std::size_t entries, int m, int d, int expected_d) {
    ++checked;
    const std::size_t limit = static_cast<std::size_t>(m + 1) * d * d + m;
    if (entries > limit || d != expected_d) ++failures;
    if (entries * 1.0 / limit >= worst * 1.0 / std::max<std::size_t>(1, worst_limit)) {
      worst = entries;
      worst_limit = limit;
    }
  };
  const auto& run = packing_run();
  for (const auto& r : run.rows) {
    const auto inst = generate_packing_instance(run.cfg.D, run.cfg.m, run.cfg.r, 0);
    check(r.entries_stored, r.m, r.d, expected_dimension(run.cfg.epsilon, run.cfg.delta, inst.k_budget, r.D));
  }
  // A grid where d falls well below D.
  for (int D : {256, 512, 1024}) {
    for (double eps : {0.5, 0.75, 1.0}) {
      for (auto ens : {Ensemble::Gaussian, Ensemble::Sparse}) {
        const auto inst = generate_packing_instance(D, 6, 3, D);
        SketchConfig sc;
        sc.epsilon = eps;
        sc.delta = 0.05;
        sc.k = inst.k_budget;
        sc.eta = inst.eta;
        sc.ensemble = ens;
        sc.seed = 7;
        const auto s = make_sketch(sc, D);
        const auto sk = sketch_sdp(inst.problem, sc, s);
        check(stored_entries(sk.problem), 6, sk.problem.dim(), expected_dimension(eps, sc.delta, sc.k, D));
      }
    }
  }
  return {failures == 0, format("%d sketched problems, %d failures; tightest %zu of %zu allowed", checked,
                                failures, worst, worst_limit)};
}

// 8. Every CLI pipeline rerun with identical flags writes byte-identical files.
Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / "sdpsketch_acceptance_repro";
  auto pipeline = [&](const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto at = [&](const char* name) { return (dir / name).string(); };
    const std::vector<std::vector<std::string>> steps = {
        {"generate", "--family", "packing", "-D", "48", "-m", "4", "-r", "2", "--seed", "11", "--out", at("p.json")},
        {"sketch", at("p.json"), "--epsilon", "0.5", "--eta", "1", "--seed", "7", "--out", at("sk.json")},
        {"sketch", at("p.json"), "--epsilon", "0.5", "--eta", "1", "--seed", "7", "--ensemble", "sparse", "--out",
         at("sk_sparse.json")},
        {"solve", at("sk.json"), "--dump", "--out", at("rep.json")},
        {"solve", at("p.json"), "--out", at("rep_orig.json")},
        {"bounds", at("p.json"), "--sketch", at("sk.json"), "--report", at("rep.json"), "--out", at("b.json")},
        {"generate", "--family", "infeasible-lmi", "-D", "24", "-m", "3", "--seed", "3", "--out", at("lmi.json")},
        {"certify-lmi", at("lmi.json"), "--delta", "0.05", "--seed", "3", "--out", at("cert.json")},
        {"generate", "--family", "feasible-lmi", "-D", "16", "-m", "2", "--seed", "5", "--out", at("flmi.json")},
        {"certify-lmi", at("flmi.json"), "--epsilon", "0.5", "--seed", "5", "--out", at("witness.json")},
        {"bench", "--family", "packing", "-D", "24", "-m", "3", "--trials", "6", "--epsilon", "0.5", "--seed", "42",
         "--out", at("bench_packing.csv")},
        {"bench", "--family", "infeasible-lmi", "-D", "16", "-m", "2", "--trials", "6", "--seed", "42", "--out",
         at("bench_lmi.csv")},
        {"bench", "--family", "low-rank", "-D", "64", "-m", "4", "--trials", "6", "--seed", "42", "--out",
         at("bench_low_rank.csv")},
        {"bench", "--family", "coordinate", "-D", "64", "-m", "4", "--trials", "6", "--d", "8", "--seed", "42",
         "--out", at("bench_coordinate.csv")},
    };
    int failures = 0;
    for (const auto& args : steps) failures += run_cli(args).code != 0;
    return failures;
  };
  const int fail_a = pipeline(root / "a");
  setenv("SDPSKETCH_THREADS", "3", 1);  // a different schedule must not change the bytes
  const int fail_b = pipeline(root / "b");
  unsetenv("SDPSKETCH_THREADS");
  int files = 0, differ = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    const auto name = entry.path().filename();
    if (slurp(entry.path().string()) != slurp((root / "b" / name).string())) ++differ;
  }
  fs::remove_all(root);
  return {fail_a == 0 && fail_b == 0 && differ == 0 && files > 0,
          format("%d files compared, %d differ; command failures %d + %d", files, differ, fail_a, fail_b)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"distortion exceedance rate", distortion_rate},
      {"upper bound coverage", upper_bound_coverage},
      {"recovered packing point", recovered_point},
      {"LMI certification rate and soundness", lmi_certification},
      {"solver against diagonal oracle", diagonal_oracle},
      {"transport invariants", transport},
      {"sketched storage", storage},
      {"CLI reproducibility", reproducibility},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
