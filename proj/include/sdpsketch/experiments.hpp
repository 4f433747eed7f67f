#pragma once
//
// Seeded Monte-Carlo experiment runners. Trial t uses seed base + t, with
// independent substreams for the instance and the sketch; trials run on a
// small work pool and rows come back in seed order, so reports do not
// depend on scheduling. Wall-clock columns are zero unless timings are
// requested, which keeps reports byte-reproducible by default.
//

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "sdpsketch/bounds.hpp"
#include "sdpsketch/certify.hpp"
#include "sdpsketch/error.hpp"
#include "sdpsketch/generators.hpp"
#include "sdpsketch/jlt.hpp"
#include "sdpsketch/rng.hpp"
#include "sdpsketch/sketch.hpp"
#include "sdpsketch/solver.hpp"

namespace sdpsketch {

inline constexpr int kOracleMaxDimension = 512;

/// Pool size: SDPSKETCH_THREADS if set and positive, else hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("SDPSKETCH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(t) for t in [0, trials) and returns the results indexed by t.
template <class Row>
std::vector<Row> run_pool(int trials, const std::function<Row(int)>& body) {
  std::vector<Row> rows(static_cast<std::size_t>(trials));
  const int workers = std::min(worker_count(), std::max(1, trials));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int t = next++; t < trials; t = next++) {
      try {
        rows[static_cast<std::size_t>(t)] = body(t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return rows;
}

/// Allowed failures out of T at nominal rate delta: delta T + 3 sqrt(delta (1 - delta) T).
inline double binomial_allowance(double delta, int trials) {
  return delta * trials + 3.0 * std::sqrt(delta * (1.0 - delta) * trials);
}

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  std::int64_t elapsed_ns() const {
    if (!enabled_) return 0;
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

inline std::uint64_t trial_stream(std::uint64_t trial_seed, const char* name) {
  return substream_seed(trial_seed, stream_tag(name));
}

}  // namespace detail

// ---- packing value experiment ----------------------------------------------

struct ValueExperimentConfig {
  int D = 64;
  int m = 5;
  int r = 2;
  int trials = 10;
  double epsilon = 0.2;
  double delta = 0.05;
  double eta = 1.0;          // trace bound enforced through the trace constraint
  std::int64_t k_budget = 0; // 0 uses the generator's budget
  Ensemble ensemble = Ensemble::Gaussian;
  std::uint64_t seed = 0;
  double solver_tol = 1e-8;
  bool timings = false;
};

struct ValueTrial {
  std::uint64_t seed = 0;
  int D = 0, d = 0, m = 0;
  double alpha_orig = std::numeric_limits<double>::quiet_NaN();
  double alpha_sketch = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  double lower = std::numeric_limits<double>::quiet_NaN();
  bool bound_held = false;  // upper >= alpha_orig (oracle solved)
  bool oracle_solved = false;
  double nu = 0.0;
  double recovered_violation = std::numeric_limits<double>::quiet_NaN();  // max_i Tr(B_i X^) - 1, -lambda_min
  double recovered_objective = std::numeric_limits<double>::quiet_NaN();  // Tr(A X^)
  std::int64_t t_sketch_ns = 0;
  std::int64_t t_solve_ns = 0;
  std::int64_t t_orig_solve_ns = 0;
  std::size_t entries_stored = 0;
  std::string error;  // nonempty when the trial aborted
};

inline ValueTrial run_value_trial(const ValueExperimentConfig& cfg, int t) {
  ValueTrial row;
  row.seed = cfg.seed + static_cast<std::uint64_t>(t);
  row.D = cfg.D;
  row.m = cfg.m;
  try {
    const auto inst = generate_packing_instance(cfg.D, cfg.m, cfg.r,
                                                detail::trial_stream(row.seed, "instance"), cfg.eta);
    SketchConfig sc;
    sc.epsilon = cfg.epsilon;
    sc.delta = cfg.delta;
    sc.eta = inst.eta;
    sc.k = cfg.k_budget > 0 ? cfg.k_budget : inst.k_budget;
    sc.ensemble = cfg.ensemble;
    sc.seed = detail::trial_stream(row.seed, "sketch");

    const detail::Stopwatch sketch_clock(cfg.timings);
    const SketchMatrix s = make_sketch(sc, cfg.D);
    const SketchedSdp sk = sketch_sdp(inst.problem, sc, s);
    row.t_sketch_ns = sketch_clock.elapsed_ns();
    row.d = s.rows();
    row.entries_stored = stored_entries(sk.problem);

    const SolverOptions opt{cfg.solver_tol, 200};
    const detail::Stopwatch solve_clock(cfg.timings);
    const SolveReport rep = solve(sk.problem, opt);
    row.t_solve_ns = solve_clock.elapsed_ns();
    if (rep.status != SolveStatus::Optimal) {
      row.error = std::string("sketched solve: ") + to_string(rep.status);
      return row;
    }
    row.alpha_sketch = rep.value;
    const ValueBounds vb = packing_bounds(inst.problem, sk, rep, sc.k);
    row.upper = vb.upper;
    row.lower = *vb.lower;
    row.nu = vb.lower_audit->nu;

    const SymMatrix xhat = recover_packing_point(rep.primal, s, row.nu);
    double viol = -min_eigenvalue(xhat);
    for (const auto& c : inst.problem.constraints) {
      viol = std::max(viol, trace_product(c.matrix, xhat) - c.rhs);
    }
    row.recovered_violation = viol;
    row.recovered_objective = trace_product(inst.problem.objective, xhat);

    if (cfg.D <= kOracleMaxDimension) {
      const detail::Stopwatch orig_clock(cfg.timings);
      const SolveReport orig = solve(inst.problem, opt);
      row.t_orig_solve_ns = orig_clock.elapsed_ns();
      if (orig.status != SolveStatus::Optimal) {
        row.error = std::string("oracle solve: ") + to_string(orig.status);
        return row;
      }
      row.oracle_solved = true;
      row.alpha_orig = orig.value;
      row.bound_held = row.upper >= row.alpha_orig - 10.0 * cfg.solver_tol * std::max(1.0, std::abs(row.alpha_orig));
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

inline std::vector<ValueTrial> run_value_experiment(const ValueExperimentConfig& cfg) {
  require(cfg.trials >= 1, ErrorCode::InvalidConfig, "trials must be >= 1");
  return run_pool<ValueTrial>(cfg.trials, [&](int t) { return run_value_trial(cfg, t); });
}

inline std::string value_csv(const std::vector<ValueTrial>& rows) {
  std::string out = "# schema: sdpsketch-packing/1\n";
  out += "seed,D,d,m,family,alpha_orig,alpha_sketch,upper,lower,bound_held,t_sketch_ns,t_solve_ns,entries_stored\n";
  for (const auto& r : rows) {
    out += std::to_string(r.seed) + "," + std::to_string(r.D) + "," + std::to_string(r.d) + "," +
           std::to_string(r.m) + ",packing," + detail::fmt(r.alpha_orig) + "," +
           detail::fmt(r.alpha_sketch) + "," + detail::fmt(r.upper) + "," + detail::fmt(r.lower) + "," +
           (r.oracle_solved ? (r.bound_held ? "1" : "0") : "") + "," + std::to_string(r.t_sketch_ns) +
           "," + std::to_string(r.t_solve_ns) + "," + std::to_string(r.entries_stored) + "\n";
  }
  return out;
}

struct ValueSummary {
  int trials = 0;
  int aborted = 0;
  int oracle_trials = 0;
  int bound_failures = 0;
  double failure_rate = 0.0;
  double allowed_failures = 0.0;
  double mean_relative_gap = std::numeric_limits<double>::quiet_NaN();  // (upper - lower) / |alpha|
  double speedup = std::numeric_limits<double>::quiet_NaN();            // t_orig / (t_sketch + t_solve)
  std::size_t max_entries_stored = 0;
};

inline ValueSummary summarize(const std::vector<ValueTrial>& rows, double delta) {
  ValueSummary s;
  s.trials = static_cast<int>(rows.size());
  double gap_sum = 0.0;
  int gap_n = 0;
  double t_orig = 0.0, t_sk = 0.0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++s.aborted;
      continue;
    }
    s.max_entries_stored = std::max(s.max_entries_stored, r.entries_stored);
    if (!r.oracle_solved) continue;
    ++s.oracle_trials;
    if (!r.bound_held) ++s.bound_failures;
    if (std::abs(r.alpha_orig) > 0.0) {
      gap_sum += (r.upper - r.lower) / std::abs(r.alpha_orig);
      ++gap_n;
    }
    t_orig += static_cast<double>(r.t_orig_solve_ns);
    t_sk += static_cast<double>(r.t_sketch_ns + r.t_solve_ns);
  }
  if (s.oracle_trials > 0) s.failure_rate = static_cast<double>(s.bound_failures) / s.oracle_trials;
  s.allowed_failures = binomial_allowance(delta, std::max(1, s.oracle_trials));
  if (gap_n > 0) s.mean_relative_gap = gap_sum / gap_n;
  if (t_sk > 0.0 && t_orig > 0.0) s.speedup = t_orig / t_sk;
  return s;
}

// ---- LMI certification experiment ------------------------------------------

enum class LmiFamily { PlantedInfeasible, FeasibleControl };

struct LmiExperimentConfig {
  int D = 32;
  int m = 3;
  int trials = 10;
  double tau = 0.5;
  double delta = 0.05;
  double epsilon = 0.0;        // 0 derives epsilon from the planted separator
  double epsilon_scale = 1.0;  // multiplies the derived epsilon
  std::int64_t k_budget = 0;   // 0 uses (m + 2) D
  LmiFamily family = LmiFamily::PlantedInfeasible;
  Ensemble ensemble = Ensemble::Gaussian;
  std::uint64_t seed = 0;
  bool oracle = true;  // phase-I on the original LMI when D <= 512
  bool timings = false;
};

struct LmiTrial {
  std::uint64_t seed = 0;
  int D = 0, d = 0, m = 0;
  double epsilon = 0.0;
  CertifyStatus status = CertifyStatus::Inconclusive;
  double t_star_sketch = std::numeric_limits<double>::quiet_NaN();
  double t_star_orig = std::numeric_limits<double>::quiet_NaN();
  bool oracle_solved = false;
  FeasibilityStatus oracle_status = FeasibilityStatus::Marginal;
  std::int64_t t_sketch_ns = 0;
  std::int64_t t_solve_ns = 0;
  std::size_t entries_stored = 0;
  std::string error;
};

inline LmiTrial run_lmi_trial(const LmiExperimentConfig& cfg, int t) {
  LmiTrial row;
  row.seed = cfg.seed + static_cast<std::uint64_t>(t);
  row.D = cfg.D;
  row.m = cfg.m;
  try {
    const std::uint64_t inst_seed = detail::trial_stream(row.seed, "instance");
    LmiProblem lmi;
    double eps = cfg.epsilon;
    if (cfg.family == LmiFamily::PlantedInfeasible) {
      auto planted = generate_infeasible_lmi(cfg.D, cfg.m, cfg.tau, inst_seed);
      if (eps <= 0.0) {
        SeparatorCertificate cert{planted.rho, planted.b_margins, planted.a_margin, 0.0};
        eps = certified_epsilon(cert, planted.lmi);
      }
      lmi = std::move(planted.lmi);
    } else {
      lmi = generate_feasible_lmi(cfg.D, cfg.m, inst_seed).lmi;
      if (eps <= 0.0) eps = 0.1;
    }
    row.epsilon = std::min(1.0, eps * cfg.epsilon_scale);

    CertifyConfig cc;
    cc.sketch.epsilon = row.epsilon;
    cc.sketch.delta = cfg.delta;
    cc.sketch.k = cfg.k_budget > 0 ? cfg.k_budget : static_cast<std::int64_t>(cfg.m + 2) * cfg.D;
    cc.sketch.ensemble = cfg.ensemble;
    cc.sketch.seed = detail::trial_stream(row.seed, "sketch");
    cc.epsilon_certified = cfg.family == LmiFamily::PlantedInfeasible && cfg.epsilon <= 0.0;

    const detail::Stopwatch sketch_clock(cfg.timings);
    const SketchMatrix s = make_sketch(cc.sketch, cfg.D);
    row.t_sketch_ns = sketch_clock.elapsed_ns();
    row.d = s.rows();
    row.entries_stored = static_cast<std::size_t>(cfg.m + 1) * row.d * row.d;

    const detail::Stopwatch solve_clock(cfg.timings);
    const CertifyOutcome outcome = certify_infeasible_with(lmi, s, cc);
    row.t_solve_ns = solve_clock.elapsed_ns();
    row.status = outcome.status;
    row.t_star_sketch = outcome.phase1.t_star;

    if (cfg.oracle && cfg.D <= kOracleMaxDimension) {
      const FeasibilityReport orig = solve_feasibility(lmi);
      row.oracle_solved = true;
      row.oracle_status = orig.status;
      row.t_star_orig = orig.t_star;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

inline std::vector<LmiTrial> run_lmi_experiment(const LmiExperimentConfig& cfg) {
  require(cfg.trials >= 1, ErrorCode::InvalidConfig, "trials must be >= 1");
  return run_pool<LmiTrial>(cfg.trials, [&](int t) { return run_lmi_trial(cfg, t); });
}

inline const char* family_name(LmiFamily f) {
  return f == LmiFamily::PlantedInfeasible ? "infeasible-lmi" : "feasible-lmi";
}

inline std::string lmi_csv(const std::vector<LmiTrial>& rows, LmiFamily family) {
  std::string out = "# schema: sdpsketch-lmi/1\n";
  out += "seed,D,d,m,family,epsilon,status,t_star_sketch,t_star_orig,oracle_status,t_sketch_ns,t_solve_ns,entries_stored\n";
  for (const auto& r : rows) {
    out += std::to_string(r.seed) + "," + std::to_string(r.D) + "," + std::to_string(r.d) + "," +
           std::to_string(r.m) + "," + family_name(family) + "," + detail::fmt(r.epsilon) + "," +
           (r.error.empty() ? to_string(r.status) : "Error") + "," + detail::fmt(r.t_star_sketch) + "," +
           detail::fmt(r.t_star_orig) + "," + (r.oracle_solved ? to_string(r.oracle_status) : "") + "," +
           std::to_string(r.t_sketch_ns) + "," + std::to_string(r.t_solve_ns) + "," +
           std::to_string(r.entries_stored) + "\n";
  }
  return out;
}

struct LmiSummary {
  int trials = 0;
  int aborted = 0;
  int certified = 0;
  int sketch_feasible = 0;
  int inconclusive = 0;
  int unsound = 0;  // certified although the oracle finds the original feasible
  double certification_rate = 0.0;
};

inline LmiSummary summarize(const std::vector<LmiTrial>& rows) {
  LmiSummary s;
  s.trials = static_cast<int>(rows.size());
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++s.aborted;
      continue;
    }
    switch (r.status) {
      case CertifyStatus::InfeasibleCertified: ++s.certified; break;
      case CertifyStatus::SketchFeasible: ++s.sketch_feasible; break;
      case CertifyStatus::Inconclusive: ++s.inconclusive; break;
    }
    if (r.status == CertifyStatus::InfeasibleCertified && r.oracle_solved &&
        r.oracle_status == FeasibilityStatus::Feasible) {
      ++s.unsound;
    }
  }
  s.certification_rate = static_cast<double>(s.certified) / std::max(1, s.trials);
  return s;
}

// ---- distortion experiment --------------------------------------------------

enum class DistortionFamily { LowRank, Coordinate };

struct DistortionExperimentConfig {
  int D = 128;
  int m = 10;
  int r = 4;
  int trials = 10;
  double epsilon = 0.25;
  double delta = 0.05;
  std::int64_t k_budget = 0;  // 0 uses m r (low-rank) or m - 1 + D (coordinate)
  DistortionFamily family = DistortionFamily::LowRank;
  Ensemble ensemble = Ensemble::Gaussian;
  int d_override = 0;  // fixed sketch dimension, 0 uses required_dimension
  std::uint64_t seed = 0;
  bool timings = false;
};

struct DistortionTrial {
  std::uint64_t seed = 0;
  int D = 0, d = 0, m = 0;
  double max_deviation = 0.0;     // normalized by Schatten-1 norms
  double max_deviation_hs = 0.0;  // normalized by Schatten-2 norms
  double threshold = 0.0;         // 3 epsilon
  std::int64_t t_sketch_ns = 0;
  std::string error;
};

inline std::vector<DistortionTrial> run_distortion_experiment(const DistortionExperimentConfig& cfg) {
  require(cfg.trials >= 1, ErrorCode::InvalidConfig, "trials must be >= 1");
  // One fixed matrix family; the randomness under test is the sketch.
  const auto mats = cfg.family == DistortionFamily::LowRank
                        ? generate_low_rank_matrices(cfg.D, cfg.m, cfg.r,
                                                    detail::trial_stream(cfg.seed, "instance"))
                        : coordinate_matrices(cfg.D, cfg.m);
  const HsDistortionHarness harness(mats);
  Vector hs(static_cast<Eigen::Index>(mats.size()));
  for (std::size_t i = 0; i < mats.size(); ++i) {
    hs(static_cast<Eigen::Index>(i)) = schatten_norm(mats[i], SchattenP::Two);
  }
  SketchConfig base;
  base.epsilon = cfg.epsilon;
  base.delta = cfg.delta;
  base.k = cfg.k_budget > 0 ? cfg.k_budget
                            : (cfg.family == DistortionFamily::LowRank
                                   ? static_cast<std::int64_t>(cfg.m) * cfg.r
                                   : static_cast<std::int64_t>(cfg.m - 1) + cfg.D);
  base.ensemble = cfg.ensemble;
  return run_pool<DistortionTrial>(cfg.trials, [&](int t) {
    DistortionTrial row;
    row.seed = cfg.seed + static_cast<std::uint64_t>(t);
    row.D = cfg.D;
    row.m = cfg.m;
    row.threshold = 3.0 * cfg.epsilon;
    try {
      SketchConfig sc = base;
      sc.seed = detail::trial_stream(row.seed, "sketch");
      const detail::Stopwatch clock(cfg.timings);
      SketchMatrix s = make_sketch(sc, cfg.D);
      if (cfg.d_override > 0) {
        require(cfg.d_override <= cfg.D, ErrorCode::InvalidConfig, "sketch dimension exceeds D");
        s = cfg.ensemble == Ensemble::Gaussian
                ? sample_gaussian_jlt(cfg.d_override, cfg.D, sc.seed)
                : sample_sparse_jlt(cfg.d_override, cfg.D,
                                    std::min(default_sparsity(sc), cfg.d_override), sc.seed);
      }
      row.t_sketch_ns = clock.elapsed_ns();
      row.d = s.rows();
      // Both normalizations from one pass over the pairs.
      const auto rep = harness.report(s, harness.norms());
      row.max_deviation = rep.max_normalized_deviation;
      const Vector& n1 = harness.norms();
      double hs_max = 0.0;
      for (Eigen::Index i = 0; i < rep.deviations.rows(); ++i) {
        for (Eigen::Index j = 0; j < rep.deviations.cols(); ++j) {
          const double scale = hs(i) * hs(j);
          if (scale > 0.0) hs_max = std::max(hs_max, rep.deviations(i, j) * n1(i) * n1(j) / scale);
        }
      }
      row.max_deviation_hs = hs_max;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    return row;
  });
}

inline std::string distortion_csv(const std::vector<DistortionTrial>& rows, DistortionFamily family) {
  std::string out = "# schema: sdpsketch-distortion/1\n";
  out += "seed,D,d,m,family,max_deviation,threshold,exceeded,max_deviation_hs,exceeded_hs,t_sketch_ns\n";
  const char* name = family == DistortionFamily::LowRank ? "low-rank" : "coordinate";
  for (const auto& r : rows) {
    out += std::to_string(r.seed) + "," + std::to_string(r.D) + "," + std::to_string(r.d) + "," +
           std::to_string(r.m) + "," + name + "," + detail::fmt(r.max_deviation) + "," +
           detail::fmt(r.threshold) + "," + (r.max_deviation > r.threshold ? "1" : "0") + "," +
           detail::fmt(r.max_deviation_hs) + "," + (r.max_deviation_hs > r.threshold ? "1" : "0") + "," +
           std::to_string(r.t_sketch_ns) + "\n";
  }
  return out;
}

struct DistortionSummary {
  int trials = 0;
  int aborted = 0;
  int exceedances = 0;
  int exceedances_hs = 0;
  double exceedance_rate = 0.0;
  double exceedance_rate_hs = 0.0;
  double allowed_rate = 0.0;
};

inline DistortionSummary summarize(const std::vector<DistortionTrial>& rows, double delta) {
  DistortionSummary s;
  s.trials = static_cast<int>(rows.size());
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++s.aborted;
      continue;
    }
    if (r.max_deviation > r.threshold) ++s.exceedances;
    if (r.max_deviation_hs > r.threshold) ++s.exceedances_hs;
  }
  const int n = std::max(1, s.trials);
  s.exceedance_rate = static_cast<double>(s.exceedances + s.aborted) / n;
  s.exceedance_rate_hs = static_cast<double>(s.exceedances_hs) / n;
  s.allowed_rate = binomial_allowance(delta, n) / n;
  return s;
}

}  // namespace sdpsketch
