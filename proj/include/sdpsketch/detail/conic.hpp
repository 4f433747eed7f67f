#pragma once
//
// Primal-dual path-following interior-point method for
//
//   (P)  minimize <C, X> + c^T u   s.t.  <A_i, X> + (L u)_i = b_i,  X PSD, u >= 0
//   (D)  maximize b^T y            s.t.  sum_i y_i A_i + Z = C,  L^T y + z = c,
//                                        Z PSD, z >= 0
//
// with Nesterov-Todd scaling on the PSD block and Mehrotra predictor-corrector
// steps. All public solvers reduce to this form.
//

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sdpsketch/error.hpp"
#include "sdpsketch/linalg.hpp"

namespace sdpsketch::detail {

/// Solver-side view of one constraint matrix. Dense inputs that are
/// numerically low-rank semidefinite are stored as U diag(w) U^T.
class ConstraintOperator {
 public:
  enum class Kind { Zero, LowRank, Sparse, Dense };

  explicit ConstraintOperator(const SymMatrix& m) : n_(m.dim()) {
    if (m.is_sparse()) {
      auto list = m.entries();
      if (list.empty()) {
        kind_ = Kind::Zero;
        return;
      }
      kind_ = Kind::Sparse;
      entries_.assign(list.begin(), list.end());
      return;
    }
    const Matrix& a = m.dense_data();
    const double amax = a.cwiseAbs().maxCoeff();
    if (amax == 0.0) {
      kind_ = Kind::Zero;
      return;
    }
    const int max_rank = std::max(1, n_ / 8);
    if (n_ >= 16) {
      if (auto f = semidefinite_factor(a, max_rank, amax)) {
        kind_ = Kind::LowRank;
        factor_ = std::move(*f);
        weights_ = Vector::Ones(factor_.cols());
        return;
      }
      if (auto f = semidefinite_factor(-a, max_rank, amax)) {
        kind_ = Kind::LowRank;
        factor_ = std::move(*f);
        weights_ = -Vector::Ones(factor_.cols());
        return;
      }
    }
    kind_ = Kind::Dense;
    dense_ = a;
  }

  Kind kind() const { return kind_; }

  /// <A, X> for symmetric X.
  double inner(const Matrix& x) const {
    switch (kind_) {
      case Kind::Zero: return 0.0;
      case Kind::Dense: return (dense_.array() * x.array()).sum();
      case Kind::Sparse: {
        double s = 0.0;
        for (const auto& e : entries_) {
          s += e.row == e.col ? e.value * x(e.row, e.col) : 2.0 * e.value * x(e.row, e.col);
        }
        return s;
      }
      case Kind::LowRank: {
        const Matrix xu = x * factor_;
        return ((xu.array() * factor_.array()).colwise().sum().matrix() * weights_)(0);
      }
    }
    return 0.0;
  }

  /// target += f * A.
  void add_to(Matrix& target, double f) const {
    switch (kind_) {
      case Kind::Zero: return;
      case Kind::Dense: target += f * dense_; return;
      case Kind::Sparse:
        for (const auto& e : entries_) {
          target(e.row, e.col) += f * e.value;
          if (e.row != e.col) target(e.col, e.row) += f * e.value;
        }
        return;
      case Kind::LowRank:
        target.noalias() += factor_ * (f * weights_).asDiagonal() * factor_.transpose();
        return;
    }
  }

  /// G^T A G, kept factored when A is low-rank.
  struct Scaled {
    bool low_rank = false;
    bool zero = false;
    Matrix dense;
    Matrix factor;
    Vector weights;
  };

  Scaled congruence(const Matrix& g) const {
    Scaled out;
    switch (kind_) {
      case Kind::Zero: out.zero = true; break;
      case Kind::LowRank:
        out.low_rank = true;
        out.factor.noalias() = g.transpose() * factor_;
        out.weights = weights_;
        break;
      case Kind::Dense: {
        const Matrix ag = dense_ * g;
        out.dense.noalias() = g.transpose() * ag;
        break;
      }
      case Kind::Sparse: {
        Matrix ag = Matrix::Zero(n_, g.cols());
        for (const auto& e : entries_) {
          ag.row(e.row) += e.value * g.row(e.col);
          if (e.row != e.col) ag.row(e.col) += e.value * g.row(e.row);
        }
        out.dense.noalias() = g.transpose() * ag;
        break;
      }
    }
    return out;
  }

  static double inner(const Scaled& a, const Matrix& r) {
    if (a.zero) return 0.0;
    if (!a.low_rank) return (a.dense.array() * r.array()).sum();
    const Matrix rp = r * a.factor;
    return ((rp.array() * a.factor.array()).colwise().sum().matrix() * a.weights)(0);
  }

  static double inner(const Scaled& a, const Scaled& b) {
    if (a.zero || b.zero) return 0.0;
    if (a.low_rank && b.low_rank) {
      const Matrix k = a.factor.transpose() * b.factor;
      return (a.weights.transpose() * k.array().square().matrix() * b.weights)(0);
    }
    if (a.low_rank) return inner(a, b.dense);
    return inner(b, a.dense);
  }

  static void accumulate(const Scaled& a, double f, Matrix& target) {
    if (a.zero || f == 0.0) return;
    if (!a.low_rank) {
      target += f * a.dense;
      return;
    }
    target.noalias() += a.factor * (f * a.weights).asDiagonal() * a.factor.transpose();
  }

 private:
  // Pivoted Cholesky that succeeds only when `a` is PSD with rank <= max_rank.
  static std::optional<Matrix> semidefinite_factor(const Matrix& a, int max_rank, double amax) {
    const int n = static_cast<int>(a.rows());
    Vector diag = a.diagonal();
    const double scale = diag.maxCoeff();
    if (!(scale > 0.0)) return std::nullopt;
    Matrix l(n, max_rank);
    int rank = 0;
    bool exhausted = false;
    for (; rank <= max_rank; ++rank) {
      Eigen::Index idx = 0;
      const double pivot = diag.maxCoeff(&idx);
      if (pivot <= 1e-13 * scale) {
        exhausted = true;
        break;
      }
      if (rank == max_rank) break;
      Vector col = a.col(idx);
      if (rank > 0) col.noalias() -= l.leftCols(rank) * l.row(idx).head(rank).transpose();
      col /= std::sqrt(pivot);
      l.col(rank) = col;
      diag.array() -= col.array().square();
    }
    if (!exhausted || rank == 0) return std::nullopt;
    Matrix f = l.leftCols(rank);
    const double err = (a - f * f.transpose()).cwiseAbs().maxCoeff();
    if (err > 1e-12 * amax) return std::nullopt;
    return f;
  }

  int n_ = 0;
  Kind kind_ = Kind::Zero;
  Matrix dense_;
  Matrix factor_;
  Vector weights_;
  std::vector<UpperEntry> entries_;
};

struct ConicProblem {
  int n = 0;  // PSD block order
  std::vector<ConstraintOperator> ops;
  Matrix lin;  // m x p
  Vector b;
  Matrix C;    // n x n
  Vector c;    // p

  int m() const { return static_cast<int>(b.size()); }
  int p() const { return static_cast<int>(c.size()); }
};

struct ConicIterate {
  Matrix X;
  Vector u;
  Vector y;
  Matrix Z;
  Vector z;
};

enum class ConicStatus { Optimal, PrimalInfeasible, DualInfeasible, NumericalFailure, IterationLimit, Stopped };

struct ConicResult {
  ConicStatus status = ConicStatus::NumericalFailure;
  ConicIterate iterate;
  double pobj = 0.0;  // <C, X> + c^T u
  double dobj = 0.0;  // b^T y
  double relative_gap = std::numeric_limits<double>::infinity();
  double complementarity = 0.0;
  double primal_infeasibility = std::numeric_limits<double>::infinity();
  double dual_infeasibility = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

struct ConicOptions {
  double tol = 1e-8;
  int max_iterations = 200;
};

/// Called after every iteration; returning true stops with status Stopped.
using StopHook = std::function<bool(const ConicIterate&)>;

namespace conic {

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Largest step t <= infinity keeping diag(lambda) + t * dm PSD.
inline double max_step_psd(const Vector& lambda, const Matrix& dm) {
  const Vector s = lambda.cwiseSqrt().cwiseInverse();
  const Matrix h = s.asDiagonal() * dm * s.asDiagonal();
  const double lo = Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(h), Eigen::EigenvaluesOnly)
                        .eigenvalues()(0);
  return lo < 0.0 ? -1.0 / lo : std::numeric_limits<double>::infinity();
}

// Raises eigenvalues of a symmetric m to at least 1e-12 * max(1, lambda_max).
// Returns false when m is not finite or has no positive spectrum at all.
inline bool lift_spectrum(Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  if (es.info() != Eigen::Success) return false;
  const double top = es.eigenvalues().maxCoeff();
  if (!(top > 0.0)) return false;
  const double floor = 1e-12 * std::max(1.0, top);
  const Vector lam = es.eigenvalues().cwiseMax(floor);
  m = symmetrized(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose());
  return true;
}

inline double max_step_lin(const Vector& v, const Vector& dv) {
  double t = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) t = std::min(t, -v(i) / dv(i));
  }
  return t;
}

}  // namespace conic

inline ConicResult solve_conic(const ConicProblem& prob, ConicIterate it, const ConicOptions& opt,
                               const StopHook& stop = {}) {
  using conic::symmetrized;
  const int n = prob.n;
  const int m = prob.m();
  const int p = prob.p();
  const double nu = static_cast<double>(n + p);
  const double norm_b = prob.b.size() ? prob.b.cwiseAbs().maxCoeff() : 0.0;
  const double norm_C = prob.C.norm();
  const double norm_c = prob.c.size() ? prob.c.cwiseAbs().maxCoeff() : 0.0;

  ConicResult res;
  double prev_pstep = 1.0, prev_dstep = 1.0;
  const double primal_scale0 = it.X.trace() + it.u.sum();
  const double dual_scale0 = it.Z.trace() + it.z.sum() + it.y.lpNorm<1>();
  int stalled = 0;
  // Once the relative tests pass, a few more steps close the absolute gap
  // when |objective| > 1; any later trouble falls back to the settled iterate.
  std::optional<ConicResult> settled;
  int polish = 0;
  auto finish = [&](ConicStatus s) {
    if (settled) return *settled;
    res.status = s;
    return res;
  };

  for (int iter = 0;; ++iter) {
    // Residuals and objectives.
    Vector ax(m);
    for (int i = 0; i < m; ++i) ax(i) = prob.ops[i].inner(it.X);
    if (p > 0) ax.noalias() += prob.lin * it.u;
    const Vector rp = prob.b - ax;
    Matrix rd = prob.C - it.Z;
    for (int i = 0; i < m; ++i) prob.ops[i].add_to(rd, -it.y(i));
    const Vector rdl = p > 0 ? Vector(prob.c - it.z - prob.lin.transpose() * it.y) : Vector();

    const double pobj = (prob.C.array() * it.X.array()).sum() + (p > 0 ? prob.c.dot(it.u) : 0.0);
    const double dobj = prob.b.dot(it.y);
    const double compl_gap = (it.X.array() * it.Z.array()).sum() + (p > 0 ? it.u.dot(it.z) : 0.0);
    const double pinf = (m > 0 ? rp.cwiseAbs().maxCoeff() : 0.0) / (1.0 + norm_b);
    const double dinf = std::max(rd.norm() / (1.0 + norm_C),
                                 p > 0 ? rdl.cwiseAbs().maxCoeff() / (1.0 + norm_c) : 0.0);
    const double scale = std::max(1.0, std::abs(pobj));
    const double relgap = std::abs(pobj - dobj) / scale;

    res.iterate = it;
    res.pobj = pobj;
    res.dobj = dobj;
    res.relative_gap = relgap;
    res.complementarity = compl_gap;
    res.primal_infeasibility = pinf;
    res.dual_infeasibility = dinf;
    res.iterations = iter;

    if (relgap <= opt.tol && compl_gap <= opt.tol * scale && pinf <= opt.tol && dinf <= opt.tol) {
      res.status = ConicStatus::Optimal;
      const double abs_gap = std::abs(pobj - dobj);
      if (settled && abs_gap >= std::abs(settled->pobj - settled->dobj)) return *settled;
      if (abs_gap <= opt.tol || polish >= 5 || iter >= opt.max_iterations) return res;
      settled = res;
      ++polish;
    } else if (settled) {
      return *settled;
    }
    if (stop && stop(it)) return finish(ConicStatus::Stopped);

    // Improving primal ray: the dual is infeasible.
    {
      const double t = it.X.trace() + (p > 0 ? it.u.sum() : 0.0);
      if (t > 1e8 * std::max(1.0, primal_scale0) && pobj < 0.0) {
        const double ray_obj = -pobj / t;
        const double ray_res = (m > 0 ? ax.cwiseAbs().maxCoeff() : 0.0) / t;
        if (ray_res <= 1e-6 * ray_obj) {
          return finish(ConicStatus::DualInfeasible);
        }
      }
    }
    // Improving dual ray: the primal is infeasible.
    {
      const double t = it.Z.trace() + (p > 0 ? it.z.sum() : 0.0) + it.y.lpNorm<1>();
      if (t > 1e8 * std::max(1.0, dual_scale0) && dobj > 0.0) {
        const double ray_obj = dobj / t;
        const double ray_res = ((prob.C - rd).norm() + (p > 0 ? (prob.c - rdl).norm() : 0.0)) / t;
        if (ray_res <= 1e-6 * ray_obj) {
          return finish(ConicStatus::PrimalInfeasible);
        }
      }
    }
    if (iter >= opt.max_iterations) {
      return finish(ConicStatus::IterationLimit);
    }

    const double mu = compl_gap / nu;

    // Nesterov-Todd scaling: X = L L^T, L^T Z L = Q diag(lambda^2) Q^T,
    // G = L Q diag(lambda^-1/2). Then G^-1 X G^-T = G^T Z G = diag(lambda).
    // Near a low-rank optimum rounding can push X or Z off the cone; lift the
    // offending eigenvalues to a tiny floor once before giving up.
    Eigen::LLT<Matrix> chol_x(it.X);
    if (chol_x.info() != Eigen::Success) {
      if (!conic::lift_spectrum(it.X)) return finish(ConicStatus::NumericalFailure);
      chol_x.compute(it.X);
      if (chol_x.info() != Eigen::Success) return finish(ConicStatus::NumericalFailure);
    }
    const Matrix lx = chol_x.matrixL();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(lx.transpose() * (it.Z * lx)));
    if (eig.info() == Eigen::Success && eig.eigenvalues()(0) <= 0.0 && conic::lift_spectrum(it.Z)) {
      eig.compute(symmetrized(lx.transpose() * (it.Z * lx)));
    }
    if (eig.info() != Eigen::Success || eig.eigenvalues()(0) <= 0.0) {
      return finish(ConicStatus::NumericalFailure);
    }
    const Vector lambda = eig.eigenvalues().cwiseSqrt();
    const Matrix g = (lx * eig.eigenvectors()) * lambda.cwiseSqrt().cwiseInverse().asDiagonal();

    std::vector<ConstraintOperator::Scaled> scaled;
    scaled.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) scaled.push_back(prob.ops[i].congruence(g));
    const Matrix rd_s = g.transpose() * rd * g;

    // Schur complement M_ij = <A~_i, A~_j> + L_i diag(u/z) L_j^T.
    Matrix schur(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        schur(i, j) = schur(j, i) = ConstraintOperator::inner(scaled[i], scaled[j]);
      }
    }
    Vector uz;
    if (p > 0) {
      uz = it.u.cwiseQuotient(it.z);
      schur.noalias() += prob.lin * uz.asDiagonal() * prob.lin.transpose();
    }
    Eigen::LLT<Matrix> chol_m(schur);
    Eigen::LDLT<Matrix> ldlt_m;
    bool use_ldlt = chol_m.info() != Eigen::Success;
    if (use_ldlt) {
      ldlt_m.compute(schur);
      if (ldlt_m.info() != Eigen::Success) {
        return finish(ConicStatus::NumericalFailure);
      }
    }
    auto solve_schur = [&](const Vector& rhs) {
      Vector x = use_ldlt ? Vector(ldlt_m.solve(rhs)) : Vector(chol_m.solve(rhs));
      for (int refine = 0; refine < 2; ++refine) {
        const Vector r = rhs - schur * x;
        x += use_ldlt ? Vector(ldlt_m.solve(r)) : Vector(chol_m.solve(r));
      }
      return x;
    };

    struct Direction {
      Matrix dx;  // scaled
      Matrix dz;  // scaled
      Vector dy;
      Vector du;
      Vector dzl;
    };
    // Solves  dX + dZ = rc (scaled), du + (u/z) dz = rcl  with the feasibility
    // equations linearized around the current iterate.
    auto direction = [&](const Matrix& rc, const Vector& rcl) {
      Direction dir;
      const Matrix t = rc - rd_s;
      Vector rhs = rp;
      for (int i = 0; i < m; ++i) rhs(i) -= ConstraintOperator::inner(scaled[i], t);
      if (p > 0) rhs.noalias() -= prob.lin * (rcl - uz.cwiseProduct(rdl));
      dir.dy = solve_schur(rhs);
      Matrix aty = Matrix::Zero(n, n);
      for (int i = 0; i < m; ++i) ConstraintOperator::accumulate(scaled[i], dir.dy(i), aty);
      dir.dx = t + aty;
      dir.dz = rc - dir.dx;
      if (p > 0) {
        dir.dzl = rdl - prob.lin.transpose() * dir.dy;
        dir.du = rcl - uz.cwiseProduct(dir.dzl);
      }
      return dir;
    };
    auto step_lengths = [&](const Direction& dir) {
      double a = conic::max_step_psd(lambda, dir.dx);
      double b = conic::max_step_psd(lambda, dir.dz);
      if (p > 0) {
        a = std::min(a, conic::max_step_lin(it.u, dir.du));
        b = std::min(b, conic::max_step_lin(it.z, dir.dzl));
      }
      return std::pair{a, b};
    };

    // Predictor.
    const Matrix lam = lambda.asDiagonal();
    const Direction pred = direction(-lam, p > 0 ? Vector(-it.u) : Vector());
    auto [ap_max, bp_max] = step_lengths(pred);
    const double ap = std::min(1.0, ap_max);
    const double bp = std::min(1.0, bp_max);
    double gap_aff = ((lam + ap * pred.dx).array() * (lam + bp * pred.dz).array()).sum();
    if (p > 0) gap_aff += (it.u + ap * pred.du).dot(it.z + bp * pred.dzl);
    const double mu_aff = std::max(0.0, gap_aff) / nu;
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // Corrector: V o (dX + dZ) = sigma mu I - V^2 - dXp o dZp, solved
    // entrywise in the eigenbasis of V = diag(lambda).
    Matrix rhs_c = -symmetrized(pred.dx * pred.dz);
    rhs_c.diagonal().array() += sigma * mu;
    rhs_c.diagonal().array() -= lambda.array().square();
    Matrix rc(n, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) rc(i, j) = 2.0 * rhs_c(i, j) / (lambda(i) + lambda(j));
    }
    Vector rcl;
    if (p > 0) {
      rcl = ((sigma * mu) - pred.du.cwiseProduct(pred.dzl).array()).matrix().cwiseQuotient(it.z) - it.u;
    }
    const Direction corr = direction(rc, rcl);
    auto [a_max, b_max] = step_lengths(corr);
    const double gamma = 0.9 + 0.09 * std::min(prev_pstep, prev_dstep);
    const double alpha = std::min(1.0, gamma * a_max);
    const double beta = std::min(1.0, gamma * b_max);
    prev_pstep = alpha;
    prev_dstep = beta;
    if (alpha < 1e-10 && beta < 1e-10) {
      if (++stalled >= 3) {
        return finish(ConicStatus::NumericalFailure);
      }
    } else {
      stalled = 0;
    }

    // Primal update in the original space; dual slack from the exact linear
    // relation dZ = R_d - sum dy_i A_i.
    it.X = symmetrized(it.X + alpha * (g * corr.dx * g.transpose()));
    Matrix dzfull = rd;
    for (int i = 0; i < m; ++i) prob.ops[i].add_to(dzfull, -corr.dy(i));
    it.Z = symmetrized(it.Z + beta * dzfull);
    it.y += beta * corr.dy;
    if (p > 0) {
      it.u += alpha * corr.du;
      it.z += beta * corr.dzl;
    }
  }
}

}  // namespace sdpsketch::detail
