#pragma once
//
// Guarantees about the original problem derived from a sketched solve:
// the upper bound alpha_S + 3 eps eta ||A||_1, the relaxed problem, the
// Slater-point lower bound and the packing lower bound with point recovery.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sdpsketch/error.hpp"
#include "sdpsketch/linalg.hpp"
#include "sdpsketch/model.hpp"
#include "sdpsketch/sketch.hpp"
#include "sdpsketch/solver.hpp"

namespace sdpsketch {

inline double upper_bound_on_original(double alpha_s, double epsilon, double eta, double norm1_a) {
  return alpha_s + 3.0 * epsilon * eta * norm1_a;
}

inline RelaxedSdp build_relaxed_sdp(const SketchableSdp& p, double epsilon, double eta) {
  p.validate();
  require(epsilon >= 0.0 && eta >= 0.0, ErrorCode::InvalidConfig, "epsilon and eta must be >= 0");
  RelaxedSdp out;
  out.factor = 3.0 * epsilon * eta;
  out.problem.objective = p.objective;
  for (const auto& c : p.constraints) {
    const double norm = schatten_norm(c.matrix, SchattenP::One);
    const double slack = out.factor * norm;
    out.constraint_norms.push_back(norm);
    out.slack.push_back(slack);
    out.problem.constraints.push_back({c.matrix, c.rhs + slack});
  }
  return out;
}

struct UpperBoundAudit {
  double alpha_s = 0.0;
  double epsilon = 0.0;
  double eta = 0.0;
  double norm1_a = 0.0;
};

struct LowerBoundAudit {
  std::string method;  // "packing" or "slater"
  double alpha_s = 0.0;
  double nu = 0.0;  // packing
  double c1 = 0.0;  // slater: max_i 3 eta ||B_i||_1
  double c2 = 0.0;  // slater: min_i (gamma_i - Tr(B_i X0))
  double kappa = 0.0;  // epsilon * c1 / c2
  double trace_a_x0 = 0.0;
  double dual_norm_bound = 0.0;  // bound on ||y*||_1
};

struct ValueBounds {
  double upper = std::numeric_limits<double>::infinity();
  UpperBoundAudit upper_audit;
  std::optional<double> lower;
  std::optional<LowerBoundAudit> lower_audit;
  std::vector<std::string> assumptions;
  std::vector<std::string> warnings;
};

struct DualNormLowerBound {
  double lower = 0.0;
  LowerBoundAudit audit;
};

/// From alpha_S <= alpha + eps C1 (alpha - Tr(A X0)) / C2, solved for alpha:
/// alpha >= (alpha_S + kappa Tr(A X0)) / (1 + kappa), kappa = eps C1 / C2.
/// Also reports ||y*||_1 <= (alpha_upper - Tr(A X0)) / C2.
inline DualNormLowerBound dual_norm_lower_bound(double alpha_s, double epsilon, double eta,
                                                double alpha_upper, const SketchableSdp& p,
                                                const SymMatrix& x0) {
  p.validate();
  require(x0.dim() == p.dim(), ErrorCode::DimensionMismatch, "X0 has wrong dimension");
  require(epsilon >= 0.0 && eta >= 0.0, ErrorCode::InvalidConfig, "epsilon and eta must be >= 0");
  require(min_eigenvalue(x0) > 0.0, ErrorCode::NotStrictlyFeasible, "X0 is not positive definite");
  DualNormLowerBound out;
  out.audit.method = "slater";
  out.audit.alpha_s = alpha_s;
  out.audit.c2 = std::numeric_limits<double>::infinity();
  for (const auto& c : p.constraints) {
    const double margin = c.rhs - trace_product(c.matrix, x0);
    require(margin > 0.0, ErrorCode::NotStrictlyFeasible, "X0 violates or touches a constraint");
    out.audit.c2 = std::min(out.audit.c2, margin);
    out.audit.c1 = std::max(out.audit.c1, 3.0 * eta * schatten_norm(c.matrix, SchattenP::One));
  }
  out.audit.trace_a_x0 = trace_product(p.objective, x0);
  out.audit.kappa = epsilon * out.audit.c1 / out.audit.c2;
  out.audit.dual_norm_bound = (alpha_upper - out.audit.trace_a_x0) / out.audit.c2;
  out.lower = (alpha_s + out.audit.kappa * out.audit.trace_a_x0) / (1.0 + out.audit.kappa);
  return out;
}

/// nu = 3 eps eta max_i ||B_i||_1.
inline double packing_nu(double epsilon, double eta, const std::vector<double>& norms) {
  double mx = 0.0;
  for (double n : norms) mx = std::max(mx, n);
  return 3.0 * epsilon * eta * mx;
}

inline bool is_normalized_packing(const SketchableSdp& p, double tol = 1e-9) {
  return is_packing(p, tol) &&
         std::all_of(p.constraints.begin(), p.constraints.end(),
                     [](const Constraint& c) { return std::abs(c.rhs - 1.0) <= 1e-12; });
}

namespace detail {

inline ValueBounds upper_bounds_from(const SketchedSdp& sk, const SolveReport& rep, std::int64_t k) {
  ValueBounds out;
  out.upper_audit = {rep.value, sk.epsilon, sk.eta, sk.objective_norm};
  out.assumptions.push_back("trace bound Tr(X*) <= eta = " + std::to_string(sk.eta) +
                            " supplied by caller (not verified)");
  out.assumptions.push_back("rank budget k = " + std::to_string(k) +
                            " >= rank(X*) + rank(A) + sum rank(B_i) declared (not verified)");
  out.assumptions.push_back("upper bound holds with probability >= 1 - delta over the sketch");
  switch (rep.status) {
    case SolveStatus::Optimal:
      out.upper = upper_bound_on_original(rep.value, sk.epsilon, sk.eta, sk.objective_norm);
      break;
    case SolveStatus::Unbounded:
      out.upper = std::numeric_limits<double>::infinity();
      out.upper_audit.alpha_s = std::numeric_limits<double>::infinity();
      out.warnings.push_back("sketched problem is unbounded; upper bound is vacuous");
      break;
    default:
      fail(ErrorCode::InvalidArgument,
           std::string("sketched solve has status ") + to_string(rep.status) + "; no bound available");
  }
  return out;
}

}  // namespace detail

/// Upper bound, and the Slater lower bound when X0 is given.
inline ValueBounds value_bounds(const SketchableSdp& p, const SketchedSdp& sk, const SolveReport& rep,
                                std::int64_t k, const std::optional<SymMatrix>& x0 = std::nullopt) {
  ValueBounds out = detail::upper_bounds_from(sk, rep, k);
  if (x0 && rep.status == SolveStatus::Optimal) {
    const auto lb = dual_norm_lower_bound(rep.value, sk.epsilon, sk.eta, out.upper, p, *x0);
    out.lower = lb.lower;
    out.lower_audit = lb.audit;
    out.assumptions.push_back("Slater point X0 verified strictly feasible (C2 = " +
                              std::to_string(lb.audit.c2) + ")");
  }
  return out;
}

/// Packing bounds: lower = alpha_S / (1 + nu), upper as usual.
inline ValueBounds packing_bounds(const SketchableSdp& p, const SketchedSdp& sk, const SolveReport& rep,
                                  std::int64_t k) {
  require(is_normalized_packing(p), ErrorCode::NotPacking,
          "packing bounds need PSD B_i and gamma_i = 1 for all i");
  require(rep.status == SolveStatus::Optimal, ErrorCode::InvalidArgument,
          "packing bounds need an Optimal sketched solve");
  ValueBounds out = detail::upper_bounds_from(sk, rep, k);
  LowerBoundAudit audit;
  audit.method = "packing";
  audit.alpha_s = rep.value;
  audit.nu = packing_nu(sk.epsilon, sk.eta, sk.constraint_norms);
  out.lower = rep.value / (1.0 + audit.nu);
  out.lower_audit = audit;
  out.assumptions.push_back("packing verified: B_i PSD, gamma_i = 1");
  return out;
}

/// S^T Y* S / (1 + nu), feasible for the original packing problem.
inline SymMatrix recover_packing_point(const SymMatrix& y_star, const SketchMatrix& s, double nu) {
  require(nu >= 0.0 && std::isfinite(nu), ErrorCode::InvalidArgument, "nu must be finite and >= 0");
  require(y_star.dim() == s.rows(), ErrorCode::DimensionMismatch, "Y* dimension differs from S.d");
  return lift(s, y_star).scaled(1.0 / (1.0 + nu));
}

}  // namespace sdpsketch
