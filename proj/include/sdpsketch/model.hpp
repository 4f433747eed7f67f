#pragma once
//
// Problem data: sketchable SDPs (maximize Tr(AX) s.t. Tr(B_i X) <= gamma_i,
// X PSD), their duals, LMIs, and the derived sketched / relaxed problems.
//

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sdpsketch/error.hpp"
#include "sdpsketch/jlt.hpp"
#include "sdpsketch/linalg.hpp"

namespace sdpsketch {

struct Constraint {
  SymMatrix matrix;
  double rhs = 0.0;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct SketchableSdp {
  SymMatrix objective;
  std::vector<Constraint> constraints;

  int dim() const { return objective.dim(); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }

  std::vector<double> rhs() const {
    std::vector<double> out;
    out.reserve(constraints.size());
    for (const auto& c : constraints) out.push_back(c.rhs);
    return out;
  }

  void validate() const {
    require(!constraints.empty(), ErrorCode::InvalidArgument, "problem needs at least one constraint");
    require(objective.all_finite(), ErrorCode::NonFinite, "objective has NaN/Inf");
    for (const auto& c : constraints) {
      require(c.matrix.dim() == dim(), ErrorCode::DimensionMismatch,
              "constraint dimension differs from objective");
      require(c.matrix.all_finite() && std::isfinite(c.rhs), ErrorCode::NonFinite,
              "constraint has NaN/Inf");
    }
  }

  friend bool operator==(const SketchableSdp&, const SketchableSdp&) = default;
};

/// sum_i c_i B_i - A >= 0 over c >= 0.
struct LmiProblem {
  SymMatrix objective;
  std::vector<SymMatrix> matrices;

  int dim() const { return objective.dim(); }
  int num_matrices() const { return static_cast<int>(matrices.size()); }

  void validate() const {
    require(!matrices.empty(), ErrorCode::InvalidArgument, "LMI needs at least one matrix");
    require(objective.all_finite(), ErrorCode::NonFinite, "LMI matrix A has NaN/Inf");
    for (const auto& b : matrices) {
      require(b.dim() == dim(), ErrorCode::DimensionMismatch, "LMI matrices differ in dimension");
      require(b.all_finite(), ErrorCode::NonFinite, "LMI matrix has NaN/Inf");
    }
  }

  friend bool operator==(const LmiProblem&, const LmiProblem&) = default;
};

/// Reduced problem over d x d matrices with right-hand sides inflated by
/// mu * ||B_i||_1, mu = 3 * epsilon * eta.
struct SketchedSdp {
  SketchableSdp problem;
  double epsilon = 0.0;
  double eta = 0.0;
  double mu = 0.0;
  std::vector<double> original_rhs;
  std::vector<double> constraint_norms;  // ||B_i||_1 of the original matrices
  double objective_norm = 0.0;           // ||A||_1
  std::optional<SketchProvenance> sketch;
};

/// Original-dimension problem with gamma_i replaced by gamma_i + slack_i,
/// slack_i = 3 * epsilon * eta * ||B_i||_1.
struct RelaxedSdp {
  SketchableSdp problem;
  double factor = 0.0;  // 3 * epsilon * eta
  std::vector<double> slack;
  std::vector<double> constraint_norms;
};

struct DualData {
  Vector c;
  double value = 0.0;
};

/// minimize <c, gamma> s.t. sum_i c_i B_i - A >= 0, c >= 0. A distinct type
/// from SketchableSdp, so it cannot be dualized again.
struct DualProgram {
  SymMatrix objective;
  std::vector<SymMatrix> matrices;
  Vector gamma;

  double value(const Vector& c) const {
    require(c.size() == gamma.size(), ErrorCode::DimensionMismatch, "dual vector length mismatch");
    return c.dot(gamma);
  }

  /// sum_i c_i B_i - A.
  Matrix slack(const Vector& c) const {
    require(c.size() == gamma.size(), ErrorCode::DimensionMismatch, "dual vector length mismatch");
    Matrix z = -objective.to_dense();
    for (Eigen::Index i = 0; i < c.size(); ++i) matrices[i].add_to(z, c(i));
    return z;
  }

  bool is_feasible(const Vector& c, double tol) const {
    return (c.array() >= -tol).all() && min_eigenvalue(slack(c)) >= -tol;
  }
};

inline DualProgram dualize(const SketchableSdp& p) {
  p.validate();
  DualProgram out;
  out.objective = p.objective;
  out.gamma.resize(p.num_constraints());
  for (int i = 0; i < p.num_constraints(); ++i) {
    out.matrices.push_back(p.constraints[i].matrix);
    out.gamma(i) = p.constraints[i].rhs;
  }
  return out;
}

/// All B_i PSD at `tol` and all gamma_i > 0.
inline bool is_packing(const SketchableSdp& p, double tol = 1e-9) {
  for (const auto& c : p.constraints) {
    if (!(c.rhs > 0.0)) return false;
    if (!is_psd(c.matrix, tol)) return false;
  }
  return true;
}

/// B_i <- B_i / gamma_i, gamma_i <- 1.
inline SketchableSdp normalize_packing(const SketchableSdp& p, double tol = 1e-9) {
  require(is_packing(p, tol), ErrorCode::NotPacking, "normalize_packing: problem is not packing");
  SketchableSdp out;
  out.objective = p.objective;
  for (const auto& c : p.constraints) {
    if (c.rhs == 1.0) {
      out.constraints.push_back(c);
    } else {
      out.constraints.push_back({c.matrix.scaled(1.0 / c.rhs), 1.0});
    }
  }
  return out;
}

}  // namespace sdpsketch
