#pragma once
//
// Symmetric matrix storage and the spectral primitives every other module
// builds on: eigendecomposition, Schatten norms, PSD tests, trace products.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sdpsketch/error.hpp"

namespace sdpsketch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One stored entry of the upper triangle (row <= col).
struct UpperEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;

  friend bool operator==(const UpperEntry&, const UpperEntry&) = default;
};

/// Real symmetric D x D matrix. Dense storage keeps the full array and is
/// exactly symmetric; sparse storage keeps the upper triangle as a sorted
/// coordinate list with implicit symmetry.
class SymMatrix {
 public:
  /// 1 x 1 zero matrix.
  SymMatrix() : dim_(1), storage_(Matrix::Zero(1, 1)) {}

  /// Symmetrizes the input as (M + M^T) / 2.
  static SymMatrix dense(const Matrix& m) {
    require(m.rows() == m.cols(), ErrorCode::InvalidShape, "symmetric matrix must be square");
    require(m.rows() >= 1, ErrorCode::InvalidShape, "matrix dimension must be at least 1");
    Matrix sym(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) sym(i, j) = 0.5 * (m(i, j) + m(j, i));
    }
    SymMatrix out;
    out.dim_ = static_cast<int>(m.rows());
    out.storage_ = std::move(sym);
    return out;
  }

  /// Builds sparse-upper storage. Entries below the diagonal are mirrored into
  /// the upper triangle, duplicates are summed and exact zeros dropped.
  static SymMatrix sparse_upper(int dim, std::vector<UpperEntry> entries) {
    require(dim >= 1, ErrorCode::InvalidShape, "matrix dimension must be at least 1");
    for (auto& e : entries) {
      require(e.row >= 0 && e.col >= 0 && e.row < dim && e.col < dim, ErrorCode::InvalidShape,
              "sparse entry index out of range");
      if (e.row > e.col) std::swap(e.row, e.col);
    }
    std::sort(entries.begin(), entries.end(), [](const UpperEntry& a, const UpperEntry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<UpperEntry> merged;
    merged.reserve(entries.size());
    for (const auto& e : entries) {
      if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col) {
        merged.back().value += e.value;
      } else {
        merged.push_back(e);
      }
    }
    std::erase_if(merged, [](const UpperEntry& e) { return e.value == 0.0; });
    SymMatrix out;
    out.dim_ = dim;
    out.storage_ = std::move(merged);
    return out;
  }

  static SymMatrix zeros(int dim) { return sparse_upper(dim, {}); }

  static SymMatrix identity(int dim, double scale = 1.0) {
    std::vector<UpperEntry> diag;
    diag.reserve(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) diag.push_back({i, i, scale});
    return sparse_upper(dim, std::move(diag));
  }

  static SymMatrix diagonal(const Vector& d) {
    std::vector<UpperEntry> diag;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      diag.push_back({static_cast<int>(i), static_cast<int>(i), d(i)});
    }
    return sparse_upper(static_cast<int>(d.size()), std::move(diag));
  }

  int dim() const { return dim_; }
  bool is_sparse() const { return std::holds_alternative<std::vector<UpperEntry>>(storage_); }

  /// Full array; only valid for dense storage.
  const Matrix& dense_data() const { return std::get<Matrix>(storage_); }

  /// Upper-triangle entries; only valid for sparse storage.
  std::span<const UpperEntry> entries() const {
    return std::get<std::vector<UpperEntry>>(storage_);
  }

  Matrix to_dense() const {
    if (!is_sparse()) return dense_data();
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const auto& e : entries()) {
      out(e.row, e.col) = e.value;
      out(e.col, e.row) = e.value;
    }
    return out;
  }

  double operator()(int i, int j) const {
    if (!is_sparse()) return dense_data()(i, j);
    if (i > j) std::swap(i, j);
    auto list = entries();
    auto it = std::lower_bound(list.begin(), list.end(), UpperEntry{i, j, 0.0},
                               [](const UpperEntry& a, const UpperEntry& b) {
                                 return a.row != b.row ? a.row < b.row : a.col < b.col;
                               });
    return (it != list.end() && it->row == i && it->col == j) ? it->value : 0.0;
  }

  /// Number of floats held by the storage (D^2 for dense, nnz for sparse).
  std::size_t stored_entries() const {
    if (is_sparse()) return entries().size();
    return static_cast<std::size_t>(dim_) * static_cast<std::size_t>(dim_);
  }

  /// Nonzeros of the full symmetric matrix.
  std::size_t nnz() const {
    if (!is_sparse()) return static_cast<std::size_t>((dense_data().array() != 0.0).count());
    std::size_t count = 0;
    for (const auto& e : entries()) count += (e.row == e.col) ? 1 : 2;
    return count;
  }

  bool all_finite() const {
    if (!is_sparse()) return dense_data().allFinite();
    return std::all_of(entries().begin(), entries().end(),
                       [](const UpperEntry& e) { return std::isfinite(e.value); });
  }

  SymMatrix scaled(double factor) const {
    if (!is_sparse()) return dense(dense_data() * factor);
    std::vector<UpperEntry> list(entries().begin(), entries().end());
    for (auto& e : list) e.value *= factor;
    return sparse_upper(dim_, std::move(list));
  }

  /// this * right for a dense right-hand side with dim() rows.
  Matrix multiply(const Matrix& right) const {
    require(right.rows() == dim_, ErrorCode::DimensionMismatch, "multiply: row count mismatch");
    if (!is_sparse()) return dense_data() * right;
    Matrix out = Matrix::Zero(dim_, right.cols());
    for (const auto& e : entries()) {
      out.row(e.row) += e.value * right.row(e.col);
      if (e.row != e.col) out.row(e.col) += e.value * right.row(e.row);
    }
    return out;
  }

  /// Adds factor * this into a dense accumulator.
  void add_to(Matrix& target, double factor = 1.0) const {
    require(target.rows() == dim_ && target.cols() == dim_, ErrorCode::DimensionMismatch,
            "add_to: shape mismatch");
    if (!is_sparse()) {
      target += factor * dense_data();
      return;
    }
    for (const auto& e : entries()) {
      target(e.row, e.col) += factor * e.value;
      if (e.row != e.col) target(e.col, e.row) += factor * e.value;
    }
  }

  /// Bitwise equality of storage kind, dimension and values.
  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    if (a.dim_ != b.dim_ || a.is_sparse() != b.is_sparse()) return false;
    if (a.is_sparse()) {
      return std::equal(a.entries().begin(), a.entries().end(), b.entries().begin(),
                        b.entries().end());
    }
    return a.dense_data() == b.dense_data();
  }

 private:
  int dim_;
  std::variant<Matrix, std::vector<UpperEntry>> storage_;
};

/// Eigenvalues in nonincreasing order with matching orthonormal eigenvectors.
struct Spectrum {
  Vector eigenvalues;
  Matrix eigenvectors;
};

enum class SchattenP { One, Two, Infinity };

namespace detail {

inline void require_finite(const SymMatrix& m, const char* where) {
  require(m.all_finite(), ErrorCode::NonFinite, std::string(where) + ": matrix has NaN/Inf");
}

// Householder tridiagonalization followed by implicit symmetric QR with
// Wilkinson shifts; Eigen caps the sweep count at 30 per eigenvalue.
inline Eigen::SelfAdjointEigenSolver<Matrix> symmetric_solver(const Matrix& m, bool vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(
      m, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, ErrorCode::ConvergenceFailure,
          "symmetric eigensolver exceeded its iteration cap");
  return solver;
}

}  // namespace detail

inline Spectrum eigendecomp_sym(const SymMatrix& m) {
  detail::require_finite(m, "eigendecomp_sym");
  auto solver = detail::symmetric_solver(m.to_dense(), true);
  Spectrum out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

/// Eigenvalues only, nonincreasing.
inline Vector eigenvalues(const SymMatrix& m) {
  detail::require_finite(m, "eigenvalues");
  return detail::symmetric_solver(m.to_dense(), false).eigenvalues().reverse();
}

inline double min_eigenvalue(const Matrix& m) {
  return detail::symmetric_solver(m, false).eigenvalues()(0);
}

inline double min_eigenvalue(const SymMatrix& m) {
  detail::require_finite(m, "min_eigenvalue");
  return min_eigenvalue(m.to_dense());
}

inline double schatten_norm(const SymMatrix& m, SchattenP p) {
  const Vector lambda = eigenvalues(m);
  switch (p) {
    case SchattenP::One: return lambda.cwiseAbs().sum();
    case SchattenP::Two: return lambda.norm();
    case SchattenP::Infinity: return lambda.cwiseAbs().maxCoeff();
  }
  return 0.0;
}

inline bool is_psd(const SymMatrix& m, double tol) {
  return min_eigenvalue(m) >= -tol;
}

/// Tr(MN). Sparse operands are walked entry by entry; off-diagonal upper
/// entries count twice.
inline double trace_product(const SymMatrix& m, const SymMatrix& n) {
  require(m.dim() == n.dim(), ErrorCode::DimensionMismatch, "trace_product: dimension mismatch");
  if (!m.is_sparse() && !n.is_sparse()) {
    return (m.dense_data().array() * n.dense_data().array()).sum();
  }
  if (m.is_sparse() && n.is_sparse()) {
    auto a = m.entries();
    auto b = n.entries();
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i].row == b[j].row && a[i].col == b[j].col) {
        sum += (a[i].row == a[i].col ? 1.0 : 2.0) * a[i].value * b[j].value;
        ++i;
        ++j;
      } else if (a[i].row < b[j].row || (a[i].row == b[j].row && a[i].col < b[j].col)) {
        ++i;
      } else {
        ++j;
      }
    }
    return sum;
  }
  const SymMatrix& sparse = m.is_sparse() ? m : n;
  const Matrix& full = m.is_sparse() ? n.dense_data() : m.dense_data();
  double sum = 0.0;
  for (const auto& e : sparse.entries()) {
    sum += (e.row == e.col ? 1.0 : 2.0) * e.value * full(e.row, e.col);
  }
  return sum;
}

/// Tr(M X) for a dense symmetric X.
inline double trace_product(const SymMatrix& m, const Matrix& x) {
  require(m.dim() == x.rows() && x.rows() == x.cols(), ErrorCode::DimensionMismatch,
          "trace_product: dimension mismatch");
  if (!m.is_sparse()) return (m.dense_data().array() * x.array()).sum();
  double sum = 0.0;
  for (const auto& e : m.entries()) {
    sum += e.row == e.col ? e.value * x(e.row, e.col)
                          : e.value * (x(e.row, e.col) + x(e.col, e.row));
  }
  return sum;
}

inline double trace(const SymMatrix& m) {
  if (!m.is_sparse()) return m.dense_data().trace();
  double sum = 0.0;
  for (const auto& e : m.entries()) {
    if (e.row == e.col) sum += e.value;
  }
  return sum;
}

}  // namespace sdpsketch
