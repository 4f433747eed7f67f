#pragma once
// Test-side helpers. Random data comes from std::mt19937_64 so the oracles
// never share a generator with the code under test.

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sdpsketch/error.hpp"
#include "sdpsketch/linalg.hpp"

namespace testing_support {

using sdpsketch::Matrix;
using sdpsketch::SymMatrix;
using sdpsketch::Vector;

inline Matrix random_matrix(int rows, int cols, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = nd(g);
  return m;
}

inline Matrix random_symmetric(int n, std::mt19937_64& g) {
  const Matrix a = random_matrix(n, n, g);
  return 0.5 * (a + a.transpose());
}

inline Matrix random_psd(int n, int rank, std::mt19937_64& g) {
  const Matrix a = random_matrix(n, rank, g);
  return a * a.transpose();
}

inline SymMatrix random_sparse(int n, int count, std::mt19937_64& g) {
  std::uniform_int_distribution<int> idx(0, n - 1);
  std::normal_distribution<double> nd;
  std::vector<sdpsketch::UpperEntry> e;
  for (int t = 0; t < count; ++t) {
    int i = idx(g), j = idx(g);
    if (i > j) std::swap(i, j);
    e.push_back({i, j, nd(g)});
  }
  return SymMatrix::sparse_upper(n, std::move(e));
}

// Schatten-1 norm through singular values, independent of the eigensolver.
inline double nuclear_norm(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues().sum();
}

inline Matrix orthogonal(int n, std::mt19937_64& g) {
  return Eigen::HouseholderQR<Matrix>(random_matrix(n, n, g)).householderQ() * Matrix::Identity(n, n);
}

// max a.x s.t. B x <= g, x >= 0 by enumerating every vertex of the
// polyhedron (feasible only for a handful of variables). Returns NaN when no
// vertex is feasible; callers only pass bounded, nonempty instances.
inline double lp_vertex_oracle(const Vector& a, const Matrix& b, const Vector& g) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.rows());
  Matrix rows(m + n, n);
  Vector rhs(m + n);
  rows.topRows(m) = b;
  rhs.head(m) = g;
  rows.bottomRows(n) = -Matrix::Identity(n, n);
  rhs.tail(n).setZero();
  const int total = m + n;
  double best = std::numeric_limits<double>::quiet_NaN();
  for (unsigned mask = 0; mask < (1u << total); ++mask) {
    if (__builtin_popcount(mask) != n) continue;
    Matrix sys(n, n);
    Vector r(n);
    int k = 0;
    for (int i = 0; i < total; ++i) {
      if (mask & (1u << i)) {
        sys.row(k) = rows.row(i);
        r(k) = rhs(i);
        ++k;
      }
    }
    Eigen::FullPivLU<Matrix> lu(sys);
    if (lu.rank() < n) continue;
    const Vector x = lu.solve(r);
    if (((rows * x - rhs).array() > 1e-10).any()) continue;
    const double v = a.dot(x);
    if (std::isnan(best) || v > best) best = v;
  }
  return best;
}

// Runs fn and reports the error code it raised, or nullopt.
template <class F>
std::optional<sdpsketch::ErrorCode> error_code_of(F&& fn) {
  try {
    fn();
  } catch (const sdpsketch::SketchError& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testing_support
