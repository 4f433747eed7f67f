#pragma once
//
// The positive map X -> S X S^T applied to matrices, SDPs and LMIs, and the
// Hilbert-Schmidt distortion harness.
//

#include <cmath>
#include <vector>

#include "sdpsketch/error.hpp"
#include "sdpsketch/jlt.hpp"
#include "sdpsketch/linalg.hpp"
#include "sdpsketch/model.hpp"

namespace sdpsketch {

/// S M S^T, formed in two phases through a d x D buffer; no D x D
/// intermediate is ever built.
inline SymMatrix conjugate(const SketchMatrix& s, const SymMatrix& m) {
  require(m.dim() == s.cols(), ErrorCode::DimensionMismatch, "conjugate: M.dim differs from S.D");
  const int d = s.rows();
  const int D = s.cols();
  Matrix sm;  // S M, d x D
  if (m.is_sparse()) {
    sm = Matrix::Zero(d, D);
    if (s.is_sparse()) {
      for (const auto& e : m.entries()) {
        auto rr = s.column_rows(e.row);
        auto rv = s.column_values(e.row);
        for (int t = 0; t < s.sparsity(); ++t) sm(rr[t], e.col) += e.value * rv[t];
        if (e.row != e.col) {
          auto cr = s.column_rows(e.col);
          auto cv = s.column_values(e.col);
          for (int t = 0; t < s.sparsity(); ++t) sm(cr[t], e.row) += e.value * cv[t];
        }
      }
    } else {
      const Matrix& sd = s.dense_data();
      for (const auto& e : m.entries()) {
        sm.col(e.col) += e.value * sd.col(e.row);
        if (e.row != e.col) sm.col(e.row) += e.value * sd.col(e.col);
      }
    }
  } else {
    // M is symmetric, so S M = (M S^T)^T.
    sm = s.apply_right_transpose(m.dense_data()).transpose();
  }
  return SymMatrix::dense(s.apply_right_transpose(sm));
}

/// S^T Y S, the adjoint map back to dimension D.
inline SymMatrix lift(const SketchMatrix& s, const SymMatrix& y) {
  require(y.dim() == s.rows(), ErrorCode::DimensionMismatch, "lift: Y.dim differs from S.d");
  const Matrix sty = s.apply_transpose(y.to_dense());       // D x d
  const Matrix full = s.apply_transpose(sty.transpose());   // S^T (S^T Y)^T = S^T Y S
  return SymMatrix::dense(full);
}

inline SketchedSdp sketch_sdp(const SketchableSdp& p, double epsilon, double eta,
                              const SketchMatrix& s) {
  p.validate();
  require(epsilon >= 0.0 && epsilon <= 1.0, ErrorCode::InvalidConfig, "epsilon must lie in [0, 1]");
  require(eta >= 0.0 && std::isfinite(eta), ErrorCode::InvalidConfig, "eta must be finite and >= 0");
  require(p.dim() == s.cols(), ErrorCode::DimensionMismatch, "sketch_sdp: S.D differs from problem");
  SketchedSdp out;
  out.epsilon = epsilon;
  out.eta = eta;
  out.mu = 3.0 * epsilon * eta;
  out.sketch = s.provenance();
  out.objective_norm = schatten_norm(p.objective, SchattenP::One);
  out.problem.objective = conjugate(s, p.objective);
  for (const auto& c : p.constraints) {
    const double norm = schatten_norm(c.matrix, SchattenP::One);
    out.constraint_norms.push_back(norm);
    out.original_rhs.push_back(c.rhs);
    out.problem.constraints.push_back({conjugate(s, c.matrix), c.rhs + out.mu * norm});
  }
  return out;
}

inline SketchedSdp sketch_sdp(const SketchableSdp& p, const SketchConfig& config,
                              const SketchMatrix& s) {
  require(config.eta >= 0.0, ErrorCode::InvalidConfig, "eta must be >= 0");
  return sketch_sdp(p, config.epsilon, config.eta, s);
}

inline LmiProblem sketch_lmi(const LmiProblem& l, const SketchMatrix& s) {
  l.validate();
  LmiProblem out;
  out.objective = conjugate(s, l.objective);
  for (const auto& b : l.matrices) out.matrices.push_back(conjugate(s, b));
  return out;
}

/// Entries stored by a (sketched) problem: every matrix plus one float per rhs.
inline std::size_t stored_entries(const SketchableSdp& p) {
  std::size_t total = p.objective.stored_entries() + p.constraints.size();
  for (const auto& c : p.constraints) total += c.matrix.stored_entries();
  return total;
}

struct HsDistortionReport {
  double max_normalized_deviation = 0.0;
  Matrix deviations;  // ordered pairs (i, j)
};

/// Caches ||B_i||_1 and Tr(B_i B_j) so that many sketches of one matrix
/// family can be scored cheaply.
class HsDistortionHarness {
 public:
  explicit HsDistortionHarness(std::vector<SymMatrix> mats) : mats_(std::move(mats)) {
    require(!mats_.empty(), ErrorCode::InvalidArgument, "distortion harness needs matrices");
    const int D = mats_.front().dim();
    const auto m = static_cast<Eigen::Index>(mats_.size());
    norms_.resize(m);
    base_.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      require(mats_[i].dim() == D, ErrorCode::DimensionMismatch, "matrices differ in dimension");
      norms_(i) = schatten_norm(mats_[i], SchattenP::One);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i; j < m; ++j) {
        base_(i, j) = base_(j, i) = trace_product(mats_[i], mats_[j]);
      }
    }
  }

  const Vector& norms() const { return norms_; }
  const std::vector<SymMatrix>& matrices() const { return mats_; }

  /// Deviation normalized by a per-matrix scale (Schatten-1 by default).
  HsDistortionReport report(const SketchMatrix& s) const { return report(s, norms_); }

  HsDistortionReport report(const SketchMatrix& s, const Vector& scales) const {
    require(s.cols() == mats_.front().dim(), ErrorCode::DimensionMismatch,
            "distortion: S.D differs from matrix dimension");
    const auto m = static_cast<Eigen::Index>(mats_.size());
    std::vector<SymMatrix> sketched;
    sketched.reserve(mats_.size());
    for (const auto& b : mats_) sketched.push_back(conjugate(s, b));
    HsDistortionReport out;
    out.deviations = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i; j < m; ++j) {
        const double scale = scales(i) * scales(j);
        double dev = 0.0;
        if (scale > 0.0) {
          dev = std::abs(trace_product(sketched[i], sketched[j]) - base_(i, j)) / scale;
        }
        out.deviations(i, j) = out.deviations(j, i) = dev;
      }
    }
    out.max_normalized_deviation = out.deviations.maxCoeff();
    return out;
  }

 private:
  std::vector<SymMatrix> mats_;
  Vector norms_;
  Matrix base_;
};

/// max over ordered pairs of |Tr(S B_i S^T S B_j S^T) - Tr(B_i B_j)| / (||B_i||_1 ||B_j||_1).
inline HsDistortionReport hs_distortion_report(const std::vector<SymMatrix>& mats,
                                               const SketchMatrix& s) {
  return HsDistortionHarness(mats).report(s);
}

}  // namespace sdpsketch
