#include <gtest/gtest.h>

#include <cmath>

#include "sdpsketch/sketch.hpp"
#include "support.hpp"

using namespace sdpsketch;
using namespace testing_support;

namespace {

SketchMatrix explicit_sketch(const Matrix& s) { return SketchMatrix::explicit_matrix(s); }

Matrix dense_oracle(const Matrix& s, const Matrix& m) { return s * m * s.transpose(); }

}  // namespace

TEST(Conjugate, HandExamples) {
  const SymMatrix m = SymMatrix::diagonal(Vector{{1.0, 2.0}});
  EXPECT_EQ(conjugate(explicit_sketch(Matrix::Identity(2, 2)), m).to_dense(), m.to_dense());

  const SymMatrix m35 = SymMatrix::diagonal(Vector{{3.0, 5.0}});
  const SymMatrix proj = conjugate(explicit_sketch(Matrix{{1.0, 0.0}}), m35);
  ASSERT_EQ(proj.dim(), 1);
  EXPECT_EQ(proj(0, 0), 3.0);

  const SymMatrix perm = conjugate(explicit_sketch(Matrix{{0.0, 1.0}, {1.0, 0.0}}), m);
  EXPECT_EQ(perm.to_dense(), SymMatrix::diagonal(Vector{{2.0, 1.0}}).to_dense());
}

TEST(Conjugate, DimensionMismatch) {
  const auto s = sample_gaussian_jlt(2, 4, 1);
  EXPECT_EQ(error_code_of([&] { conjugate(s, SymMatrix::identity(3)); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(error_code_of([&] { lift(s, SymMatrix::identity(3)); }), ErrorCode::DimensionMismatch);
}

// Every storage pairing (dense/sparse M against Gaussian/sparse S) agrees
// with the plain triple product and comes back exactly symmetric.
TEST(Conjugate, MatchesDenseTripleProductForAllStorage) {
  std::mt19937_64 g(17);
  for (int t = 0; t < 20; ++t) {
    const int D = 30, d = 7;
    const SketchMatrix sketches[] = {sample_gaussian_jlt(d, D, t), sample_sparse_jlt(d, D, 3, t)};
    const SymMatrix mats[] = {SymMatrix::dense(random_symmetric(D, g)), random_sparse(D, 40, g)};
    for (const auto& s : sketches) {
      for (const auto& m : mats) {
        const SymMatrix out = conjugate(s, m);
        const Matrix ref = dense_oracle(s.to_dense(), m.to_dense());
        EXPECT_LE((out.to_dense() - ref).cwiseAbs().maxCoeff(), 1e-11 * (1.0 + ref.cwiseAbs().maxCoeff()));
        const Matrix o = out.to_dense();
        EXPECT_EQ(o, o.transpose());
      }
    }
  }
}

TEST(Conjugate, PreservesPositiveSemidefiniteness) {
  std::mt19937_64 g(23);
  for (int t = 0; t < 30; ++t) {
    const SymMatrix m = SymMatrix::dense(random_psd(40, 1 + t % 5, g));
    const SymMatrix out = conjugate(sample_gaussian_jlt(10, 40, t), m);
    EXPECT_GE(min_eigenvalue(out), -1e-9 * schatten_norm(out, SchattenP::Infinity));
  }
}

// Tr(Y S M S^T) = Tr(S^T Y S M): lift is the adjoint of conjugate.
TEST(Lift, IsAdjointOfConjugate) {
  std::mt19937_64 g(29);
  for (int t = 0; t < 10; ++t) {
    const auto s = sample_sparse_jlt(6, 25, 2, t);
    const SymMatrix m = SymMatrix::dense(random_symmetric(25, g));
    const SymMatrix y = SymMatrix::dense(random_symmetric(6, g));
    const double lhs = trace_product(y, conjugate(s, m));
    const double rhs = trace_product(lift(s, y), m);
    EXPECT_NEAR(lhs, rhs, 1e-10 * (1.0 + std::abs(lhs)));
    const Matrix sd = s.to_dense();
    EXPECT_LE((lift(s, y).to_dense() - sd.transpose() * y.to_dense() * sd).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SketchSdp, ZeroEpsilonIdentitySketchReproducesProblem) {
  std::mt19937_64 g(31);
  SketchableSdp p;
  p.objective = SymMatrix::dense(random_symmetric(4, g));
  p.constraints.push_back({SymMatrix::dense(random_psd(4, 2, g)), 1.5});
  p.constraints.push_back({SymMatrix::dense(random_symmetric(4, g)), -0.5});
  const auto sk = sketch_sdp(p, 0.0, 3.0, explicit_sketch(Matrix::Identity(4, 4)));
  EXPECT_EQ(sk.mu, 0.0);
  EXPECT_LE((sk.problem.objective.to_dense() - p.objective.to_dense()).cwiseAbs().maxCoeff(), 1e-15);
  ASSERT_EQ(sk.problem.num_constraints(), 2);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(sk.problem.constraints[i].rhs, p.constraints[i].rhs);
    EXPECT_LE((sk.problem.constraints[i].matrix.to_dense() - p.constraints[i].matrix.to_dense())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-15);
  }
}

TEST(SketchSdp, InflatesRightHandSides) {
  SketchableSdp p;
  p.objective = SymMatrix::identity(2);
  p.constraints.push_back({SymMatrix::diagonal(Vector{{1.0, -1.0}}), 1.0});  // ||B||_1 = 2
  p.constraints.push_back({SymMatrix::zeros(2), 4.0});
  p.constraints.push_back({SymMatrix::identity(2, 3.0), 2.0});               // ||B||_1 = 6
  const auto sk = sketch_sdp(p, 0.1, 1.0, sample_gaussian_jlt(1, 2, 5));
  EXPECT_NEAR(sk.mu, 0.3, 1e-16);
  EXPECT_NEAR(sk.problem.constraints[0].rhs, 1.6, 1e-15);
  EXPECT_EQ(sk.problem.constraints[1].rhs, 4.0);
  EXPECT_NEAR(sk.problem.constraints[2].rhs, 2.0 + 0.3 * 6.0, 1e-15);
  EXPECT_EQ(sk.constraint_norms, (std::vector<double>{2.0, 0.0, 6.0}));
  EXPECT_EQ(sk.original_rhs, (std::vector<double>{1.0, 4.0, 2.0}));
  EXPECT_DOUBLE_EQ(sk.objective_norm, 2.0);
  ASSERT_TRUE(sk.sketch.has_value());
  EXPECT_EQ(sk.sketch->seed, 5u);
  EXPECT_EQ(sk.problem.dim(), 1);
}

TEST(SketchSdp, ConfigValidation) {
  SketchableSdp p;
  p.objective = SymMatrix::identity(2);
  p.constraints.push_back({SymMatrix::identity(2), 1.0});
  const auto s = sample_gaussian_jlt(1, 2, 5);
  EXPECT_EQ(error_code_of([&] { sketch_sdp(p, 1.5, 1.0, s); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(error_code_of([&] { sketch_sdp(p, 0.5, -1.0, s); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(error_code_of([&] { sketch_sdp(p, 0.5, 1.0, sample_gaussian_jlt(1, 3, 5)); }),
            ErrorCode::DimensionMismatch);
}

// Y feasible for the sketched problem lifts to S^T Y S feasible for the
// relaxed problem, and the objective transports by cyclicity of the trace.
TEST(SketchSdp, FeasibilityAndObjectiveTransport) {
  std::mt19937_64 g(37);
  for (int t = 0; t < 25; ++t) {
    const int D = 20, d = 5, m = 4;
    SketchableSdp p;
    p.objective = SymMatrix::dense(random_symmetric(D, g));
    for (int i = 0; i < m; ++i) p.constraints.push_back({SymMatrix::dense(random_symmetric(D, g)), 1.0});
    const auto s = sample_gaussian_jlt(d, D, 100 + t);
    const auto sk = sketch_sdp(p, 0.3, 1.0, s);
    Matrix y = random_psd(d, 2, g);
    double worst = 0.0;
    for (const auto& c : sk.problem.constraints) worst = std::max(worst, trace_product(c.matrix, y) / c.rhs);
    if (worst > 0.0) y /= worst;
    const SymMatrix x = lift(s, SymMatrix::dense(y));
    for (int i = 0; i < m; ++i) {
      EXPECT_LE(trace_product(p.constraints[i].matrix, x), sk.problem.constraints[i].rhs + 1e-8);
    }
    const double a_hat = trace_product(sk.problem.objective, y);
    EXPECT_NEAR(a_hat, trace_product(p.objective, x), 1e-8 * std::max(1.0, std::abs(a_hat)));
  }
}

TEST(SketchLmi, ExamplesAndTransport) {
  LmiProblem l;
  l.objective = SymMatrix::identity(2);
  l.matrices.push_back(SymMatrix::diagonal(Vector{{1.0, -1.0}}));
  const auto id = sketch_lmi(l, explicit_sketch(Matrix::Identity(2, 2)));
  EXPECT_EQ(id.matrices[0].to_dense(), l.matrices[0].to_dense());
  const auto proj = sketch_lmi(l, explicit_sketch(Matrix{{1.0, 0.0}}));
  EXPECT_EQ(proj.matrices[0](0, 0), 1.0);

  std::mt19937_64 g(41);
  for (int t = 0; t < 20; ++t) {
    const int D = 15;
    LmiProblem r;
    Matrix sum = Matrix::Zero(D, D);
    Vector c(3);
    for (int i = 0; i < 3; ++i) {
      r.matrices.push_back(SymMatrix::dense(random_symmetric(D, g)));
      c(i) = 0.5 + 0.1 * i;
      sum += c(i) * r.matrices.back().to_dense();
    }
    r.objective = SymMatrix::dense(sum - random_psd(D, 3, g));
    const auto s = sample_sparse_jlt(4, D, 2, t);
    const auto sk = sketch_lmi(r, s);
    Matrix slack = -sk.objective.to_dense();
    for (int i = 0; i < 3; ++i) slack += c(i) * sk.matrices[i].to_dense();
    EXPECT_GE(min_eigenvalue(slack), -1e-9);
  }
}

TEST(StoredEntries, CountsMatricesAndRhs) {
  SketchableSdp p;
  p.objective = SymMatrix::dense(Matrix::Identity(3, 3));
  p.constraints.push_back({SymMatrix::identity(3), 1.0});
  p.constraints.push_back({SymMatrix::dense(Matrix::Ones(3, 3)), 1.0});
  EXPECT_EQ(stored_entries(p), p.objective.stored_entries() + p.constraints[0].matrix.stored_entries() +
                                   p.constraints[1].matrix.stored_entries() + 2);
  const auto sk = sketch_sdp(p, 0.5, 1.0, sample_gaussian_jlt(2, 3, 1));
  EXPECT_LE(stored_entries(sk.problem), 3u * 2 * 2 + 2);
}

TEST(HsDistortion, IdentityAndOrthogonalSketchesAreExact) {
  std::mt19937_64 g(43);
  std::vector<SymMatrix> mats;
  for (int i = 0; i < 4; ++i) mats.push_back(SymMatrix::dense(random_symmetric(6, g)));
  mats.push_back(SymMatrix::zeros(6));
  EXPECT_LE(hs_distortion_report(mats, explicit_sketch(Matrix::Identity(6, 6))).max_normalized_deviation,
            1e-14);
  const auto rep = hs_distortion_report(mats, explicit_sketch(orthogonal(6, g)));
  EXPECT_LE(rep.max_normalized_deviation, 1e-13);
  EXPECT_EQ(rep.deviations.rows(), 5);
  EXPECT_EQ(rep.deviations(4, 4), 0.0);
}

TEST(HsDistortion, CoordinateProjectorMatchesFourthPowerOfColumnNorm) {
  std::vector<SymMatrix> mats{SymMatrix::sparse_upper(10, {{0, 0, 1.0}})};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = sample_gaussian_jlt(3, 10, seed);
    const double n2 = s.to_dense().col(0).squaredNorm();
    EXPECT_NEAR(hs_distortion_report(mats, s).max_normalized_deviation, std::abs(n2 * n2 - 1.0), 1e-13);
  }
}

TEST(HsDistortion, TableIsSymmetricAndCustomScalesApply) {
  std::mt19937_64 g(47);
  std::vector<SymMatrix> mats;
  for (int i = 0; i < 3; ++i) mats.push_back(SymMatrix::dense(random_psd(12, 2, g)));
  const HsDistortionHarness h(mats);
  const auto s = sample_gaussian_jlt(4, 12, 3);
  const auto a = h.report(s);
  EXPECT_EQ(a.deviations, a.deviations.transpose());
  const auto b = h.report(s, 2.0 * h.norms());
  EXPECT_NEAR(b.max_normalized_deviation, a.max_normalized_deviation / 4.0, 1e-14);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(h.norms()(i), nuclear_norm(mats[i].to_dense()), 1e-10);
}
