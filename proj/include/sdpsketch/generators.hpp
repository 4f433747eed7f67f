#pragma once
//
// Seeded instance families with planted structure: packing SDPs with a
// trace bound and a Slater point, planted infeasible LMIs, feasible LMI
// controls, and random low-rank matrices for distortion tests.
//

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/QR>

#include "sdpsketch/error.hpp"
#include "sdpsketch/linalg.hpp"
#include "sdpsketch/model.hpp"
#include "sdpsketch/rng.hpp"

namespace sdpsketch {

namespace detail {

inline Matrix gaussian_matrix(int rows, int cols, StreamEngine& eng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix g(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) g(i, j) = scale * nd(eng);
  }
  return g;
}

// G G^T / Tr(G G^T): PSD, rank min(r, D), unit trace (= unit Schatten-1 norm).
inline SymMatrix unit_trace_psd(int D, int r, StreamEngine& eng) {
  const Matrix g = gaussian_matrix(D, r, eng);
  const Matrix b = g * g.transpose();
  return SymMatrix::dense(b / b.trace());
}

inline Matrix symmetric_gaussian(int D, StreamEngine& eng) {
  const Matrix g = gaussian_matrix(D, D, eng, 1.0 / std::sqrt(static_cast<double>(D)));
  return 0.5 * (g + g.transpose());
}

}  // namespace detail

struct PackingInstance {
  SketchableSdp problem;
  double eta = 1.0;          // Tr(X) <= eta for every feasible X
  std::int64_t k_budget = 1; // sum rank(B_i) + rank(A) + rank budget for X*
  SymMatrix slater_point;    // X0, strictly feasible
  int rank = 1;
};

/// m - 1 random B_i = G G^T / Tr(G G^T) (G is D x r), gamma_i = 1, plus the
/// trace constraint Tr(X / theta) <= 1 as the last constraint; A is a random
/// unit-trace PSD matrix of rank r.
inline PackingInstance generate_packing_instance(int D, int m, int r, std::uint64_t seed,
                                                 double theta = 1.0) {
  require(D >= 1 && m >= 1, ErrorCode::InvalidShape, "packing instance needs D >= 1, m >= 1");
  require(r >= 1 && r <= D, ErrorCode::InvalidShape, "rank must satisfy 1 <= r <= D");
  require(theta > 0.0 && std::isfinite(theta), ErrorCode::InvalidConfig, "theta must be positive");
  StreamEngine eng(seed, stream_tag("packing"));
  PackingInstance out;
  out.rank = r;
  out.eta = theta;
  out.problem.objective = detail::unit_trace_psd(D, r, eng);
  for (int i = 0; i + 1 < m; ++i) {
    out.problem.constraints.push_back({detail::unit_trace_psd(D, r, eng), 1.0});
  }
  out.problem.constraints.push_back({SymMatrix::identity(D, 1.0 / theta), 1.0});
  out.k_budget = static_cast<std::int64_t>(m - 1) * r + D + r + D;
  const double x0 = std::min(1.0, theta) / (2.0 * D * m);
  out.slater_point = SymMatrix::identity(D, x0);
  return out;
}

struct PlantedLmi {
  LmiProblem lmi;
  SymMatrix rho;
  std::vector<double> b_margins;  // Tr(rho B_i) = -tau
  double a_margin = 0.0;          // Tr(rho A) = +tau
  double tau = 0.0;
};

/// B_i <- raw_B_i - (Tr(rho raw_B_i) + tau) I and A <- raw_A - (Tr(rho raw_A) - tau) I,
/// so Tr(rho B_i) = -tau and Tr(rho A) = tau for unit-trace rho.
inline PlantedLmi plant_infeasible_lmi(const Matrix& raw_a, const std::vector<Matrix>& raw_b,
                                       const SymMatrix& rho, double tau) {
  require(tau > 0.0, ErrorCode::InvalidConfig, "tau must be positive");
  require(!raw_b.empty(), ErrorCode::InvalidArgument, "need at least one B_i");
  const int D = rho.dim();
  require(std::abs(trace(rho) - 1.0) <= 1e-12, ErrorCode::InvalidArgument, "rho must have unit trace");
  auto shifted = [&](const Matrix& raw, double target) {
    require(raw.rows() == D && raw.cols() == D, ErrorCode::DimensionMismatch, "raw matrix has wrong shape");
    const SymMatrix sym = SymMatrix::dense(raw);
    Matrix out = sym.dense_data();
    out.diagonal().array() -= trace_product(rho, sym) - target;
    return SymMatrix::dense(out);
  };
  PlantedLmi out;
  out.rho = rho;
  out.tau = tau;
  out.lmi.objective = shifted(raw_a, tau);
  out.a_margin = trace_product(rho, out.lmi.objective);
  for (const auto& raw : raw_b) {
    out.lmi.matrices.push_back(shifted(raw, -tau));
    out.b_margins.push_back(trace_product(rho, out.lmi.matrices.back()));
  }
  return out;
}

/// Planted infeasible LMI with a full-rank random separator rho.
inline PlantedLmi generate_infeasible_lmi(int D, int m, double tau, std::uint64_t seed) {
  require(D >= 1 && m >= 1, ErrorCode::InvalidShape, "LMI instance needs D >= 1, m >= 1");
  StreamEngine eng(seed, stream_tag("infeasible-lmi"));
  const SymMatrix rho = detail::unit_trace_psd(D, D, eng);
  const Matrix raw_a = detail::symmetric_gaussian(D, eng);
  std::vector<Matrix> raw_b;
  for (int i = 0; i < m; ++i) raw_b.push_back(detail::symmetric_gaussian(D, eng));
  return plant_infeasible_lmi(raw_a, raw_b, rho, tau);
}

struct FeasibleLmi {
  LmiProblem lmi;
  Vector c;  // sum c_i B_i - A = P, P positive definite
};

/// Control family: random symmetric B_i, c_i in [0.5, 1.5], and
/// A = sum c_i B_i - P with P = G G^T / (2D) + 0.1 I.
inline FeasibleLmi generate_feasible_lmi(int D, int m, std::uint64_t seed) {
  require(D >= 1 && m >= 1, ErrorCode::InvalidShape, "LMI instance needs D >= 1, m >= 1");
  StreamEngine eng(seed, stream_tag("feasible-lmi"));
  std::uniform_real_distribution<double> ud(0.5, 1.5);
  FeasibleLmi out;
  out.c.resize(m);
  Matrix a = Matrix::Zero(D, D);
  for (int i = 0; i < m; ++i) {
    const Matrix b = detail::symmetric_gaussian(D, eng);
    out.c(i) = ud(eng);
    a += out.c(i) * b;
    out.lmi.matrices.push_back(SymMatrix::dense(b));
  }
  const Matrix g = detail::gaussian_matrix(D, D, eng);
  Matrix pmat = g * g.transpose() / (2.0 * D);
  pmat.diagonal().array() += 0.1;
  out.lmi.objective = SymMatrix::dense(a - pmat);
  return out;
}

/// U diag(lambda) U^T with U a random D x r orthonormal frame and
/// lambda_j ~ N(0, 1).
inline std::vector<SymMatrix> generate_low_rank_matrices(int D, int m, int r, std::uint64_t seed) {
  require(D >= 1 && m >= 1, ErrorCode::InvalidShape, "need D >= 1, m >= 1");
  require(r >= 1 && r <= D, ErrorCode::InvalidShape, "rank must satisfy 1 <= r <= D");
  StreamEngine eng(seed, stream_tag("low-rank"));
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<SymMatrix> out;
  for (int i = 0; i < m; ++i) {
    const Matrix g = detail::gaussian_matrix(D, r, eng);
    const Matrix u = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(D, r);
    Vector lam(r);
    for (int j = 0; j < r; ++j) lam(j) = nd(eng);
    out.push_back(SymMatrix::dense(u * lam.asDiagonal() * u.transpose()));
  }
  return out;
}

/// e_i e_i^T for i < m - 1 together with the identity. Under Schatten-2
/// scaling the identity's self-pair is badly distorted unless d ~ D.
inline std::vector<SymMatrix> coordinate_matrices(int D, int m) {
  require(D >= 1 && m >= 2 && m - 1 <= D, ErrorCode::InvalidShape, "need 2 <= m <= D + 1");
  std::vector<SymMatrix> out;
  for (int i = 0; i + 1 < m; ++i) out.push_back(SymMatrix::sparse_upper(D, {{i, i, 1.0}}));
  out.push_back(SymMatrix::identity(D));
  return out;
}

}  // namespace sdpsketch
