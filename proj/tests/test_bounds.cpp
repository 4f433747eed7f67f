#include <gtest/gtest.h>

#include <cmath>

#include "sdpsketch/bounds.hpp"
#include "sdpsketch/generators.hpp"
#include "support.hpp"

using namespace sdpsketch;
using namespace testing_support;

namespace {

SketchableSdp trace_problem() {
  SketchableSdp p;
  p.objective = SymMatrix::identity(2);
  p.constraints.push_back({SymMatrix::identity(2), 1.0});
  return p;
}

SolveReport optimal_report(double value) {
  SolveReport r;
  r.status = SolveStatus::Optimal;
  r.value = value;
  return r;
}

}  // namespace

TEST(UpperBound, HandExamples) {
  EXPECT_NEAR(upper_bound_on_original(5.0, 0.1, 2.0, 3.0), 6.8, 1e-15);
  EXPECT_EQ(upper_bound_on_original(5.0, 0.0, 2.0, 3.0), 5.0);
  EXPECT_EQ(upper_bound_on_original(5.0, 0.1, 0.0, 3.0), 5.0);
}

TEST(RelaxedSdp, SlackPerConstraint) {
  SketchableSdp p;
  p.objective = SymMatrix::identity(2);
  p.constraints.push_back({SymMatrix::diagonal(Vector{{1.0, -1.0}}), 1.0});
  const auto r = build_relaxed_sdp(p, 0.1, 1.0);
  EXPECT_NEAR(r.slack[0], 0.6, 1e-15);
  EXPECT_NEAR(r.problem.constraints[0].rhs, 1.6, 1e-15);
  EXPECT_EQ(r.constraint_norms[0], 2.0);
  EXPECT_EQ(build_relaxed_sdp(p, 0.0, 1.0).problem, p);
  EXPECT_EQ(error_code_of([&] { build_relaxed_sdp(p, -0.1, 1.0); }), ErrorCode::InvalidConfig);
}

TEST(RelaxedSdp, ValueIsNondecreasingInEpsilon) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto inst = generate_packing_instance(10, 4, 2, seed);
    double prev = -std::numeric_limits<double>::infinity();
    for (double eps : {0.0, 0.05, 0.2}) {
      const auto r = solve(build_relaxed_sdp(inst.problem, eps, inst.eta).problem);
      ASSERT_EQ(r.status, SolveStatus::Optimal);
      EXPECT_GE(r.value, prev - 1e-7);
      prev = r.value;
    }
  }
}

TEST(DualNormLowerBound, HandExamples) {
  // A = I2, B = I2, gamma = 1, X0 = diag(0.25, 0.25): Tr(A X0) = 0.5, C2 = 0.5,
  // C1 = 3 eta ||B||_1 = 6 eta. eps = 1/12 and eta = 1 give kappa = 1.
  const auto p = trace_problem();
  const SymMatrix x0 = SymMatrix::identity(2, 0.25);
  const auto lb = dual_norm_lower_bound(2.0, 1.0 / 12.0, 1.0, 2.0, p, x0);
  EXPECT_NEAR(lb.audit.kappa, 1.0, 1e-15);
  EXPECT_NEAR(lb.lower, 1.25, 1e-15);
  EXPECT_NEAR(lb.audit.dual_norm_bound, 3.0, 1e-15);
  EXPECT_NEAR(lb.audit.c2, 0.5, 1e-15);
  EXPECT_NEAR(lb.audit.c1, 6.0, 1e-15);

  EXPECT_EQ(dual_norm_lower_bound(1.7, 0.0, 1.0, 2.0, p, x0).lower, 1.7);
}

TEST(DualNormLowerBound, RejectsPointsThatAreNotStrictlyFeasible) {
  const auto p = trace_problem();
  EXPECT_EQ(error_code_of([&] { dual_norm_lower_bound(1, 0.1, 1, 2, p, SymMatrix::identity(2, 0.5)); }),
            ErrorCode::NotStrictlyFeasible);
  EXPECT_EQ(error_code_of([&] {
              dual_norm_lower_bound(1, 0.1, 1, 2, p, SymMatrix::diagonal(Vector{{0.3, 0.0}}));
            }),
            ErrorCode::NotStrictlyFeasible);
}

TEST(PackingBounds, HandExamples) {
  EXPECT_NEAR(1.2 / (1.0 + 0.2), 1.0, 1e-15);
  EXPECT_NEAR(packing_nu(0.1, 2.0, {0.5, 1.0 / 3.0}), 0.3, 1e-15);
  EXPECT_EQ(packing_nu(0.0, 2.0, {1.0}), 0.0);

  SketchedSdp sk;
  sk.epsilon = 0.1;
  sk.eta = 2.0 / 3.0;
  sk.constraint_norms = {1.0};
  sk.objective_norm = 1.0;
  const auto vb = packing_bounds(trace_problem(), sk, optimal_report(1.2), 3);
  ASSERT_TRUE(vb.lower.has_value());
  EXPECT_NEAR(vb.lower_audit->nu, 0.2, 1e-15);
  EXPECT_NEAR(*vb.lower, 1.0, 1e-15);
  EXPECT_NEAR(vb.upper, 1.4, 1e-15);
  EXPECT_EQ(vb.lower_audit->method, "packing");
}

TEST(PackingBounds, IdentitySketchAtZeroEpsilonIsExact) {
  const auto p = trace_problem();
  const auto s = SketchMatrix::explicit_matrix(Matrix::Identity(2, 2));
  const auto sk = sketch_sdp(p, 0.0, 1.0, s);
  const auto rep = solve(sk.problem);
  const auto vb = packing_bounds(p, sk, rep, 3);
  EXPECT_NEAR(vb.upper, 1.0, 1e-7);
  EXPECT_NEAR(*vb.lower, 1.0, 1e-7);
  EXPECT_NEAR(solve(p).value, 1.0, 1e-7);
}

TEST(PackingBounds, RejectsNonPackingAndFailedSolves) {
  SketchedSdp sk;
  sk.constraint_norms = {2.0};
  auto p = trace_problem();
  p.constraints[0].rhs = 2.0;
  EXPECT_EQ(error_code_of([&] { packing_bounds(p, sk, optimal_report(1.0), 1); }), ErrorCode::NotPacking);
  p.constraints[0] = {SymMatrix::diagonal(Vector{{1.0, -1.0}}), 1.0};
  EXPECT_EQ(error_code_of([&] { packing_bounds(p, sk, optimal_report(1.0), 1); }), ErrorCode::NotPacking);
  SolveReport failed;
  EXPECT_EQ(error_code_of([&] { packing_bounds(trace_problem(), sk, failed, 1); }),
            ErrorCode::InvalidArgument);
}

TEST(ValueBounds, UnboundedSketchGivesVacuousUpperBound) {
  SketchedSdp sk;
  sk.epsilon = 0.1;
  sk.eta = 1.0;
  SolveReport rep;
  rep.status = SolveStatus::Unbounded;
  const auto vb = value_bounds(trace_problem(), sk, rep, 1);
  EXPECT_EQ(vb.upper, std::numeric_limits<double>::infinity());
  EXPECT_FALSE(vb.warnings.empty());
  rep.status = SolveStatus::NumericalFailure;
  EXPECT_EQ(error_code_of([&] { value_bounds(trace_problem(), sk, rep, 1); }), ErrorCode::InvalidArgument);
}

TEST(RecoverPackingPoint, HandExamples) {
  const auto s = SketchMatrix::explicit_matrix(Matrix{{1.0, 0.0}});
  const SymMatrix y = SymMatrix::identity(1);
  EXPECT_EQ(recover_packing_point(y, s, 0.0).to_dense(), SymMatrix::diagonal(Vector{{1.0, 0.0}}).to_dense());
  const Matrix scaled = recover_packing_point(y, s, 0.5).to_dense();
  EXPECT_NEAR(scaled(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(scaled(1, 1), 0.0);
  EXPECT_EQ(error_code_of([&] { recover_packing_point(SymMatrix::identity(2), s, 0.0); }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(error_code_of([&] { recover_packing_point(y, s, -1.0); }), ErrorCode::InvalidArgument);
}

// Deterministic chain on generated packing instances: the recovered point is
// feasible, its value sits between alpha_S / (1 + nu) and alpha, and the
// Slater lower bound never exceeds alpha.
TEST(PackingChain, HoldsOnEverySeed) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto inst = generate_packing_instance(24, 4, 2, seed);
    SketchConfig sc;
    sc.epsilon = 0.5;
    sc.delta = 0.1;
    sc.k = inst.k_budget;
    sc.eta = inst.eta;
    sc.seed = seed;
    sc.dim_constant = 0.05;  // keeps d well below D so the chain is not trivial
    const auto s = make_sketch(sc, 24);
    ASSERT_LT(s.rows(), 24);
    const auto sk = sketch_sdp(inst.problem, sc, s);
    const auto rep = solve(sk.problem);
    ASSERT_EQ(rep.status, SolveStatus::Optimal);
    const auto vb = packing_bounds(inst.problem, sk, rep, sc.k);
    const double tol = 10.0 * rep.tolerance;
    const SymMatrix x = recover_packing_point(rep.primal, s, vb.lower_audit->nu);
    for (const auto& c : inst.problem.constraints) EXPECT_LE(trace_product(c.matrix, x), c.rhs + tol);
    EXPECT_GE(min_eigenvalue(x), -tol);
    const double alpha = solve(inst.problem).value;
    const double value = trace_product(inst.problem.objective, x);
    EXPECT_GE(value, *vb.lower - tol);
    EXPECT_LE(value, alpha + tol);

    const auto slater = value_bounds(inst.problem, sk, rep, sc.k, inst.slater_point);
    ASSERT_TRUE(slater.lower.has_value());
    EXPECT_LE(*slater.lower, alpha + 1e-6);
    EXPECT_EQ(slater.lower_audit->method, "slater");
  }
}
