#pragma once
//
// LMI infeasibility certification: separator search, the certified sketch
// accuracy, and the sketch-then-phase-I pipeline. Sketched infeasibility
// refutes the original LMI deterministically, because conjugation by S maps
// every feasible c of the original to a feasible c of the sketch.
//

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sdpsketch/detail/conic.hpp"
#include "sdpsketch/error.hpp"
#include "sdpsketch/jlt.hpp"
#include "sdpsketch/linalg.hpp"
#include "sdpsketch/model.hpp"
#include "sdpsketch/sketch.hpp"
#include "sdpsketch/solver.hpp"

namespace sdpsketch {

struct SeparatorCertificate {
  SymMatrix rho;                   // PSD, unit trace
  std::vector<double> b_margins;   // Tr(rho B_i), all < 0
  double a_margin = 0.0;           // Tr(rho A) > 0
  double certified_epsilon = 0.0;
};

inline constexpr double kSeparatorMargin = 1e-9;

/// (1/6) min{ |Tr(rho B_i)| / ||B_i||_1, |Tr(rho A)| / ||A||_1 }.
inline double certified_epsilon(const SeparatorCertificate& cert, const LmiProblem& l) {
  l.validate();
  require(cert.rho.dim() == l.dim(), ErrorCode::DimensionMismatch, "rho has wrong dimension");
  const double na = schatten_norm(l.objective, SchattenP::One);
  require(na > 0.0, ErrorCode::DegenerateCertificate, "||A||_1 = 0");
  const double ta = trace_product(cert.rho, l.objective);
  require(ta > 0.0, ErrorCode::InvalidArgument, "separator margin Tr(rho A) is not positive");
  double ratio = std::abs(ta) / na;
  for (const auto& b : l.matrices) {
    const double nb = schatten_norm(b, SchattenP::One);
    require(nb > 0.0, ErrorCode::DegenerateCertificate, "||B_i||_1 = 0");
    const double tb = trace_product(cert.rho, b);
    require(tb < 0.0, ErrorCode::InvalidArgument, "separator margin Tr(rho B_i) is not negative");
    ratio = std::min(ratio, std::abs(tb) / nb);
  }
  return ratio / 6.0;
}

/// Tr(rho B_i) <= -tau for every i. Then every nonzero X in cone{B_i} has
/// Tr(rho X) < 0, so the cone is pointed and meets the PSD cone only at 0.
inline bool check_sufficient_cone_conditions(const LmiProblem& l, const SymMatrix& rho, double tau) {
  require(rho.dim() == l.dim(), ErrorCode::DimensionMismatch, "rho has wrong dimension");
  if (!(tau > 0.0)) return false;
  return std::all_of(l.matrices.begin(), l.matrices.end(),
                     [&](const SymMatrix& b) { return trace_product(rho, b) <= -tau; });
}

/// maximize s s.t. Tr(rho B_i) <= -s, Tr(rho A) >= s, Tr(rho) = 1, rho PSD.
/// Returns nothing unless s* > tol and every margin is strict.
inline std::optional<SeparatorCertificate> find_separator(const LmiProblem& l, double tol = 1e-8) {
  l.validate();
  require(tol > 0.0, ErrorCode::InvalidConfig, "tolerance must be positive");
  const int n = l.dim();
  const int m = l.num_matrices();

  // s = s' - L with s' >= 0; L bounds |Tr(rho M)| for every data matrix.
  double bound = schatten_norm(l.objective, SchattenP::Infinity);
  for (const auto& b : l.matrices) bound = std::max(bound, schatten_norm(b, SchattenP::Infinity));
  const double shift = bound + 1.0;

  detail::ConicProblem cp;
  cp.n = n;
  cp.C = Matrix::Zero(n, n);
  cp.c = Vector::Zero(m + 2);
  cp.c(0) = -1.0;
  cp.lin = Matrix::Zero(m + 2, m + 2);
  cp.b = Vector::Constant(m + 2, shift);
  cp.b(m + 1) = 1.0;
  for (int i = 0; i < m; ++i) {
    cp.ops.emplace_back(l.matrices[i]);
    cp.lin(i, 0) = 1.0;
    cp.lin(i, i + 1) = 1.0;
  }
  cp.ops.emplace_back(l.objective.scaled(-1.0));
  cp.lin(m, 0) = 1.0;
  cp.lin(m, m + 1) = 1.0;
  cp.ops.emplace_back(SymMatrix::identity(n));

  auto it = detail::start_point(n, m + 2, m + 2, 1.0 / n, 1.0);
  it.u(0) = shift;

  const auto res = detail::solve_conic(cp, std::move(it), {tol, 200});
  if (res.status == detail::ConicStatus::NumericalFailure ||
      res.status == detail::ConicStatus::IterationLimit) {
    fail(ErrorCode::NumericalFailure, "separator search did not converge");
  }
  if (res.status != detail::ConicStatus::Optimal) return std::nullopt;
  const double s_star = res.iterate.u(0) - shift;
  if (!(s_star > tol)) return std::nullopt;

  const Matrix x = res.iterate.X;
  SeparatorCertificate cert;
  cert.rho = SymMatrix::dense(x / x.trace());
  cert.a_margin = trace_product(cert.rho, l.objective);
  if (cert.a_margin < kSeparatorMargin) return std::nullopt;
  for (const auto& b : l.matrices) {
    const double t = trace_product(cert.rho, b);
    if (t > -kSeparatorMargin) return std::nullopt;
    cert.b_margins.push_back(t);
  }
  cert.certified_epsilon = certified_epsilon(cert, l);
  return cert;
}

/// Order-independent 64-bit FNV-1a over the dimensions and the upper
/// triangles of A, B_1, ..., B_m (dense and sparse storage hash alike).
inline std::string content_hash(const LmiProblem& l) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  auto mix_matrix = [&](const SymMatrix& mat) {
    const Matrix dense = mat.to_dense();
    for (int i = 0; i < mat.dim(); ++i) {
      for (int j = i; j < mat.dim(); ++j) {
        const double v = dense(i, j) == 0.0 ? 0.0 : dense(i, j);
        mix(std::bit_cast<std::uint64_t>(v));
      }
    }
  };
  mix(static_cast<std::uint64_t>(l.dim()));
  mix(static_cast<std::uint64_t>(l.num_matrices()));
  mix_matrix(l.objective);
  for (const auto& b : l.matrices) mix_matrix(b);
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct InfeasibilityCertificate {
  SketchProvenance sketch;
  double epsilon = 0.0;
  double delta = 0.0;
  std::int64_t k = 0;
  double t_star = 0.0;  // phase-I value of the sketched LMI, > 0
  std::string timestamp;
  std::string problem_hash;
};

enum class CertifyStatus { InfeasibleCertified, SketchFeasible, Inconclusive };

inline const char* to_string(CertifyStatus s) {
  switch (s) {
    case CertifyStatus::InfeasibleCertified: return "InfeasibleCertified";
    case CertifyStatus::SketchFeasible: return "SketchFeasible";
    case CertifyStatus::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct CertifyConfig {
  SketchConfig sketch;
  FeasibilityOptions phase1;
  bool epsilon_certified = false;  // epsilon came from certified_epsilon
  std::string timestamp = "1970-01-01T00:00:00Z";
};

struct CertifyOutcome {
  CertifyStatus status = CertifyStatus::Inconclusive;
  std::optional<InfeasibilityCertificate> certificate;
  Vector witness_c;  // SketchFeasible only
  FeasibilityReport phase1;
  SketchProvenance sketch;
  std::vector<std::string> warnings;
};

inline CertifyOutcome certify_infeasible_with(const LmiProblem& l, const SketchMatrix& s,
                                              const CertifyConfig& config) {
  l.validate();
  CertifyOutcome out;
  out.sketch = s.provenance().value_or(SketchProvenance{s.rows(), s.cols()});
  if (!config.epsilon_certified) {
    out.warnings.push_back(
        "epsilon was chosen by the caller; the detection guarantee is conditional on it");
  }
  out.phase1 = solve_feasibility(sketch_lmi(l, s), config.phase1);
  switch (out.phase1.status) {
    case FeasibilityStatus::Infeasible: {
      out.status = CertifyStatus::InfeasibleCertified;
      InfeasibilityCertificate cert;
      cert.sketch = out.sketch;
      cert.epsilon = config.sketch.epsilon;
      cert.delta = config.sketch.delta;
      cert.k = config.sketch.k;
      cert.t_star = out.phase1.t_star;
      cert.timestamp = config.timestamp;
      cert.problem_hash = content_hash(l);
      out.certificate = std::move(cert);
      break;
    }
    case FeasibilityStatus::Feasible:
      out.status = CertifyStatus::SketchFeasible;
      out.witness_c = out.phase1.witness_c;
      out.warnings.push_back(
          "sketched LMI is feasible; the original is feasible or close to feasible (not quantified)");
      break;
    case FeasibilityStatus::Marginal:
      out.status = CertifyStatus::Inconclusive;
      out.warnings.push_back("phase-I value is within the reporting margin; no claim is made");
      break;
  }
  return out;
}

/// Samples S from the config, sketches the LMI and runs phase-I on it.
inline CertifyOutcome certify_infeasible(const LmiProblem& l, const CertifyConfig& config) {
  l.validate();
  const SketchMatrix s = make_sketch(config.sketch, l.dim());
  return certify_infeasible_with(l, s, config);
}

}  // namespace sdpsketch
