#pragma once
//
// Reference solvers: sketchable SDPs (primal/dual optimal pair) and the
// phase-I feasibility problem for LMIs. Both are thin mappings onto the
// conic interior-point core in detail/conic.hpp.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sdpsketch/detail/conic.hpp"
#include "sdpsketch/error.hpp"
#include "sdpsketch/linalg.hpp"
#include "sdpsketch/model.hpp"

namespace sdpsketch {

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure, IterationLimit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
    case SolveStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

inline SolveStatus parse_solve_status(const std::string& s) {
  for (auto st : {SolveStatus::Optimal, SolveStatus::Infeasible, SolveStatus::Unbounded,
                  SolveStatus::NumericalFailure, SolveStatus::IterationLimit}) {
    if (s == to_string(st)) return st;
  }
  fail(ErrorCode::ParseError, "unknown solve status '" + s + "'");
}

struct SolverOptions {
  double tol = 1e-8;
  int max_iterations = 200;
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  double value = std::numeric_limits<double>::quiet_NaN();       // Tr(A X*)
  double dual_value = std::numeric_limits<double>::quiet_NaN();  // <y*, gamma>
  SymMatrix primal;
  Vector dual;  // y* >= 0
  double duality_gap = std::numeric_limits<double>::quiet_NaN();
  double primal_infeasibility = std::numeric_limits<double>::quiet_NaN();
  double dual_infeasibility = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double tolerance = 0.0;
};

namespace detail {

inline SolveStatus map_status(ConicStatus s) {
  switch (s) {
    case ConicStatus::Optimal: return SolveStatus::Optimal;
    case ConicStatus::PrimalInfeasible: return SolveStatus::Infeasible;
    case ConicStatus::DualInfeasible: return SolveStatus::Unbounded;
    case ConicStatus::IterationLimit: return SolveStatus::IterationLimit;
    case ConicStatus::NumericalFailure:
    case ConicStatus::Stopped: return SolveStatus::NumericalFailure;
  }
  return SolveStatus::NumericalFailure;
}

inline double max_abs_entry(const SymMatrix& m) {
  if (!m.is_sparse()) return m.dense_data().cwiseAbs().maxCoeff();
  double out = 0.0;
  for (const auto& e : m.entries()) out = std::max(out, std::abs(e.value));
  return out;
}

// R = M^{-1/2} for M = sum_i B_i, when M is positive definite with condition
// number above 1e4. Solving over W with X = R W R is then an exact
// reformulation whose feasible set is bounded in every direction on the same
// scale, e.g. after a square Gaussian sketch of a trace constraint.
inline std::optional<Matrix> balancing_congruence(const SketchableSdp& p) {
  const int n = p.dim();
  Matrix sum = Matrix::Zero(n, n);
  for (const auto& c : p.constraints) c.matrix.add_to(sum, 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sum + sum.transpose()));
  if (es.info() != Eigen::Success) return std::nullopt;
  const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(n - 1);
  if (!(lo > 0.0) || hi <= 1e4 * lo) return std::nullopt;
  return Matrix(es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                es.eigenvectors().transpose());
}

inline ConicIterate start_point(int n, int m, int p, double x_scale, double z_scale) {
  ConicIterate it;
  it.X = x_scale * Matrix::Identity(n, n);
  it.Z = z_scale * Matrix::Identity(n, n);
  it.y = Vector::Zero(m);
  it.u = Vector::Ones(p);
  it.z = Vector::Ones(p);
  return it;
}

}  // namespace detail

/// maximize Tr(AX) s.t. Tr(B_i X) <= gamma_i, X PSD.
inline SolveReport solve(const SketchableSdp& p, const SolverOptions& opt = {}) {
  p.validate();
  require(opt.tol > 0.0, ErrorCode::InvalidConfig, "solver tolerance must be positive");
  const int n = p.dim();
  const int m = p.num_constraints();

  const std::optional<Matrix> r = detail::balancing_congruence(p);
  auto data = [&](const SymMatrix& a) {
    return r ? SymMatrix::dense(*r * a.multiply(*r)) : a;
  };

  // minimize <-A, X>  s.t.  <B_i, X> + w_i = gamma_i,  X PSD, w >= 0.
  detail::ConicProblem cp;
  cp.n = n;
  const SymMatrix a = data(p.objective);
  cp.C = -a.to_dense();
  cp.c = Vector::Zero(m);
  cp.lin = Matrix::Identity(m, m);
  cp.b.resize(m);
  double gmax = 0.0, data_max = detail::max_abs_entry(a);
  for (int i = 0; i < m; ++i) {
    const SymMatrix b = data(p.constraints[i].matrix);
    cp.ops.emplace_back(b);
    cp.b(i) = p.constraints[i].rhs;
    gmax = std::max(gmax, std::abs(cp.b(i)));
    data_max = std::max(data_max, detail::max_abs_entry(b));
  }

  const double rho0 = std::max(1.0, gmax);
  auto it = detail::start_point(n, m, m, rho0, std::max(1.0, data_max * std::sqrt(double(n))));
  it.y = -Vector::Ones(m);  // multipliers y* = 1
  for (int i = 0; i < m; ++i) {
    it.u(i) = std::max(1.0, cp.b(i) - cp.ops[i].inner(it.X));
  }

  const auto res = detail::solve_conic(cp, std::move(it), {opt.tol, opt.max_iterations});
  SolveReport out;
  out.status = detail::map_status(res.status);
  out.iterations = res.iterations;
  out.tolerance = opt.tol;
  out.primal = SymMatrix::dense(r ? Matrix(*r * res.iterate.X * *r) : res.iterate.X);
  out.dual = (-res.iterate.y).cwiseMax(0.0);
  out.primal_infeasibility = res.primal_infeasibility;
  out.dual_infeasibility = res.dual_infeasibility;
  if (out.status == SolveStatus::Optimal) {
    out.value = -res.pobj;
    out.dual_value = -res.dobj;
    out.duality_gap = std::abs(out.value - out.dual_value);
  } else if (out.status == SolveStatus::Unbounded) {
    out.value = std::numeric_limits<double>::infinity();
  } else if (out.status == SolveStatus::Infeasible) {
    out.value = -std::numeric_limits<double>::infinity();
  }
  return out;
}

struct Residuals {
  double max_primal_violation = 0.0;  // max(0, max_i Tr(B_i X) - gamma_i, -lambda_min(X))
  double min_dual_slack_eigenvalue = 0.0;
  double min_dual_multiplier = 0.0;
  double complementarity = 0.0;  // Tr[(sum y_i B_i - A) X]
  double weak_duality = 0.0;     // <y, gamma> - Tr(A X)
};

inline Residuals residuals(const SketchableSdp& p, const SymMatrix& x, const Vector& y) {
  require(x.dim() == p.dim(), ErrorCode::DimensionMismatch, "residuals: X has wrong dimension");
  require(y.size() == p.num_constraints(), ErrorCode::DimensionMismatch,
          "residuals: y has wrong length");
  Residuals r;
  r.max_primal_violation = std::max(0.0, -min_eigenvalue(x));
  for (int i = 0; i < p.num_constraints(); ++i) {
    r.max_primal_violation = std::max(
        r.max_primal_violation, trace_product(p.constraints[i].matrix, x) - p.constraints[i].rhs);
  }
  const Matrix slack = dualize(p).slack(y);
  r.min_dual_slack_eigenvalue = min_eigenvalue(slack);
  r.min_dual_multiplier = y.size() ? y.minCoeff() : 0.0;
  r.complementarity = trace_product(x, slack);
  r.weak_duality = dualize(p).value(y) - trace_product(p.objective, x);
  return r;
}

inline Residuals residuals(const SketchableSdp& p, const SolveReport& report) {
  require(report.status == SolveStatus::Optimal, ErrorCode::InvalidArgument,
          "residuals need an Optimal report");
  return residuals(p, report.primal, report.dual);
}

enum class FeasibilityStatus { Feasible, Infeasible, Marginal };

inline const char* to_string(FeasibilityStatus s) {
  switch (s) {
    case FeasibilityStatus::Feasible: return "Feasible";
    case FeasibilityStatus::Infeasible: return "Infeasible";
    case FeasibilityStatus::Marginal: return "Marginal";
  }
  return "?";
}

struct FeasibilityOptions {
  double tol = 1e-8;
  double report_margin = 1e-6;  // t* at or above this is Infeasible
  int max_iterations = 200;
};

struct FeasibilityReport {
  FeasibilityStatus status = FeasibilityStatus::Marginal;
  double t_star = std::numeric_limits<double>::quiet_NaN();
  Vector witness_c;  // set when Feasible
  int iterations = 0;
};

/// Phase-I: minimize t s.t. sum c_i B_i - A + t I PSD, c >= 0.
///
/// Solved through its dual, maximize Tr(AX) s.t. Tr(B_i X) <= 0, Tr X = 1.
/// Every iterate yields candidate multipliers; the first candidate that makes
/// sum c_i B_i - A PSD (up to tol) ends the search, since t* may be -infinity
/// for strictly feasible systems.
inline FeasibilityReport solve_feasibility(const LmiProblem& l, const FeasibilityOptions& opt = {}) {
  l.validate();
  require(opt.tol > 0.0 && opt.report_margin > 0.0, ErrorCode::InvalidConfig,
          "feasibility tolerances must be positive");
  const int n = l.dim();
  const int m = l.num_matrices();
  const Matrix a = l.objective.to_dense();

  detail::ConicProblem cp;
  cp.n = n;
  cp.C = -a;
  cp.c = Vector::Zero(m);
  cp.lin = Matrix::Zero(m + 1, m);
  cp.lin.topRows(m).setIdentity();
  cp.b = Vector::Zero(m + 1);
  cp.b(m) = 1.0;
  double data_max = detail::max_abs_entry(l.objective);
  for (const auto& b : l.matrices) {
    cp.ops.emplace_back(b);
    data_max = std::max(data_max, detail::max_abs_entry(b));
  }
  cp.ops.emplace_back(SymMatrix::identity(n));

  auto it = detail::start_point(n, m + 1, m, 1.0 / n, std::max(1.0, data_max * std::sqrt(double(n))));
  it.y.head(m).setConstant(-1.0);

  auto multipliers = [m](const detail::ConicIterate& x) -> Vector {
    return (-x.y.head(m)).cwiseMax(0.0);
  };
  auto slack_min = [&](const Vector& c) {
    Matrix s = -a;
    for (int i = 0; i < m; ++i) l.matrices[i].add_to(s, c(i));
    return min_eigenvalue(s);
  };

  FeasibilityReport out;
  double witness_min = 0.0;
  Vector witness;
  // A = 0 needs no search.
  if (min_eigenvalue(-a) >= 0.0) {
    out.status = FeasibilityStatus::Feasible;
    out.witness_c = Vector::Zero(m);
    out.t_star = -min_eigenvalue(-a);
    return out;
  }
  auto hook = [&](const detail::ConicIterate& x) {
    Vector c = multipliers(x);
    const double lo = slack_min(c);
    if (lo >= -opt.tol) {
      witness = std::move(c);
      witness_min = lo;
      return true;
    }
    return false;
  };

  const auto res = detail::solve_conic(cp, std::move(it), {opt.tol, opt.max_iterations}, hook);
  out.iterations = res.iterations;
  switch (res.status) {
    case detail::ConicStatus::Stopped:
      out.status = FeasibilityStatus::Feasible;
      out.witness_c = witness;
      out.t_star = -witness_min;
      return out;
    case detail::ConicStatus::Optimal: {
      // -pobj = Tr(A X) and -dobj = t are both estimates of t*; Infeasible
      // needs both above the reporting margin.
      const double primal_t = -res.pobj;
      const double dual_t = -res.dobj;
      out.t_star = dual_t;
      const Vector c = multipliers(res.iterate);
      const double lo = slack_min(c);
      if (lo >= -10.0 * opt.tol) {
        out.status = FeasibilityStatus::Feasible;
        out.witness_c = c;
      } else if (std::min(primal_t, dual_t) >= opt.report_margin) {
        out.status = FeasibilityStatus::Infeasible;
      } else {
        out.status = FeasibilityStatus::Marginal;
      }
      return out;
    }
    case detail::ConicStatus::PrimalInfeasible: {
      // No unit-trace X with Tr(B_i X) <= 0: the LMI is strictly feasible
      // along the dual ray. Recover a witness by scaling the ray.
      const Vector c = multipliers(res.iterate);
      const double lo = slack_min(c);
      out.t_star = -std::numeric_limits<double>::infinity();
      if (lo >= -10.0 * opt.tol) {
        out.status = FeasibilityStatus::Feasible;
        out.witness_c = c;
      } else {
        out.status = FeasibilityStatus::Marginal;
      }
      return out;
    }
    case detail::ConicStatus::DualInfeasible:
    case detail::ConicStatus::IterationLimit:
    case detail::ConicStatus::NumericalFailure:
      break;
  }
  fail(ErrorCode::NumericalFailure, "phase-I solve failed after " + std::to_string(res.iterations) +
                                        " iterations");
}

}  // namespace sdpsketch
