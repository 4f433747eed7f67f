#pragma once
//
// JSON encodings for matrices, problems, sketches, reports and certificates.
// Doubles are written with round-trip precision, so read(write(x)) == x.
// Non-finite values are written as the strings "inf", "-inf" and "nan".
//

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sdpsketch/bounds.hpp"
#include "sdpsketch/certify.hpp"
#include "sdpsketch/error.hpp"
#include "sdpsketch/jlt.hpp"
#include "sdpsketch/linalg.hpp"
#include "sdpsketch/model.hpp"
#include "sdpsketch/solver.hpp"

namespace sdpsketch::io {

using json = nlohmann::ordered_json;

inline json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double to_number(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  fail(ErrorCode::ParseError, what + ": expected a number");
}

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

inline double number_field(const json& j, const char* key) { return to_number(field(j, key), key); }

template <class T>
T get_field(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

// ---- matrices -------------------------------------------------------------

inline json to_json(const SymMatrix& m) {
  json j;
  if (m.is_sparse()) {
    j["format"] = "coo-upper";
    j["dim"] = m.dim();
    json rows = json::array(), cols = json::array(), vals = json::array();
    for (const auto& e : m.entries()) {
      rows.push_back(e.row);
      cols.push_back(e.col);
      vals.push_back(e.value);
    }
    j["rows"] = std::move(rows);
    j["cols"] = std::move(cols);
    j["vals"] = std::move(vals);
  } else {
    j["dim"] = m.dim();
    j["format"] = "dense";
    const Matrix& a = m.dense_data();
    json data = json::array();
    for (int i = 0; i < m.dim(); ++i) {
      for (int k = 0; k < m.dim(); ++k) data.push_back(a(i, k));
    }
    j["data"] = std::move(data);
  }
  return j;
}

inline SymMatrix matrix_from_json(const json& j) {
  const int dim = get_field<int>(j, "dim");
  require(dim >= 1, ErrorCode::ParseError, "matrix dim must be positive");
  const auto format = get_field<std::string>(j, "format");
  if (format == "dense") {
    const auto data = get_field<std::vector<double>>(j, "data");
    require(data.size() == static_cast<std::size_t>(dim) * dim, ErrorCode::ParseError,
            "dense matrix data has wrong length");
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int k = 0; k < dim; ++k) a(i, k) = data[static_cast<std::size_t>(i) * dim + k];
    }
    require(a.allFinite(), ErrorCode::NonFinite, "matrix has NaN/Inf");
    const double scale = a.cwiseAbs().maxCoeff();
    require((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, ErrorCode::ParseError,
            "dense matrix is not symmetric");
    return SymMatrix::dense(a);
  }
  if (format == "coo-upper") {
    const auto rows = get_field<std::vector<int>>(j, "rows");
    const auto cols = get_field<std::vector<int>>(j, "cols");
    const auto vals = get_field<std::vector<double>>(j, "vals");
    require(rows.size() == cols.size() && rows.size() == vals.size(), ErrorCode::ParseError,
            "coo arrays differ in length");
    std::vector<UpperEntry> entries;
    for (std::size_t t = 0; t < rows.size(); ++t) {
      require(rows[t] >= 0 && cols[t] < dim && rows[t] <= cols[t], ErrorCode::ParseError,
              "coo-upper entry outside the upper triangle");
      require(std::isfinite(vals[t]), ErrorCode::NonFinite, "matrix has NaN/Inf");
      entries.push_back({rows[t], cols[t], vals[t]});
    }
    return SymMatrix::sparse_upper(dim, std::move(entries));
  }
  fail(ErrorCode::ParseError, "unknown matrix format '" + format + "'");
}

inline json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

inline Vector vector_from_json(const json& j, const std::string& what) {
  require(j.is_array(), ErrorCode::ParseError, what + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = to_number(j[i], what);
  return v;
}

// ---- problems -------------------------------------------------------------

inline json to_json(const SketchableSdp& p) {
  json j;
  j["dim"] = p.dim();
  j["objective"] = to_json(p.objective);
  json cons = json::array();
  for (const auto& c : p.constraints) {
    json cj;
    cj["matrix"] = to_json(c.matrix);
    cj["rhs"] = c.rhs;
    cons.push_back(std::move(cj));
  }
  j["constraints"] = std::move(cons);
  return j;
}

inline SketchableSdp problem_from_json(const json& j) {
  SketchableSdp p;
  const int dim = get_field<int>(j, "dim");
  p.objective = matrix_from_json(field(j, "objective"));
  const auto& cons = field(j, "constraints");
  require(cons.is_array(), ErrorCode::ParseError, "constraints must be an array");
  for (const auto& cj : cons) {
    p.constraints.push_back({matrix_from_json(field(cj, "matrix")), number_field(cj, "rhs")});
  }
  require(p.objective.dim() == dim, ErrorCode::ParseError, "objective dim differs from 'dim'");
  p.validate();
  return p;
}

inline json to_json(const LmiProblem& l) {
  json j;
  j["dim"] = l.dim();
  j["objective"] = to_json(l.objective);
  json cons = json::array();
  for (const auto& b : l.matrices) cons.push_back(json{{"matrix", to_json(b)}});
  j["constraints"] = std::move(cons);
  return j;
}

inline LmiProblem lmi_from_json(const json& j) {
  LmiProblem l;
  const int dim = get_field<int>(j, "dim");
  l.objective = matrix_from_json(field(j, "objective"));
  const auto& cons = field(j, "constraints");
  require(cons.is_array(), ErrorCode::ParseError, "constraints must be an array");
  for (const auto& cj : cons) l.matrices.push_back(matrix_from_json(field(cj, "matrix")));
  require(l.objective.dim() == dim, ErrorCode::ParseError, "objective dim differs from 'dim'");
  l.validate();
  return l;
}

// ---- sketches -------------------------------------------------------------

inline json to_json(const SketchProvenance& p) {
  return json{{"d", p.d},
              {"D", p.D},
              {"ensemble", std::string(to_string(p.ensemble))},
              {"seed", p.seed},
              {"s", p.sparsity},
              {"c", p.dim_constant}};
}

inline SketchProvenance provenance_from_json(const json& j) {
  SketchProvenance p;
  p.d = get_field<int>(j, "d");
  p.D = get_field<int>(j, "D");
  p.ensemble = parse_ensemble(get_field<std::string>(j, "ensemble"));
  p.seed = get_field<std::uint64_t>(j, "seed");
  p.sparsity = get_field<int>(j, "s");
  p.dim_constant = number_field(j, "c");
  require(p.d >= 1 && p.D >= 1 && p.d <= p.D, ErrorCode::ParseError, "sketch shape is invalid");
  require(p.ensemble == Ensemble::Gaussian || (p.sparsity >= 1 && p.sparsity <= p.d),
          ErrorCode::ParseError, "sparse sketch needs 1 <= s <= d");
  return p;
}

/// Sketched problem: problem JSON over dimension d plus "sketch" and
/// "provenance" records.
inline json to_json(const SketchedSdp& sk, const SketchConfig& config) {
  json j = to_json(sk.problem);
  if (sk.sketch) j["sketch"] = to_json(*sk.sketch);
  json prov;
  prov["epsilon"] = sk.epsilon;
  prov["delta"] = config.delta;
  prov["k"] = config.k;
  prov["eta"] = sk.eta;
  prov["mu"] = sk.mu;
  prov["objective_norm1"] = sk.objective_norm;
  prov["constraint_norms1"] = sk.constraint_norms;
  prov["original_rhs"] = sk.original_rhs;
  j["provenance"] = std::move(prov);
  return j;
}

struct SketchedFile {
  SketchedSdp sketched;
  double delta = 0.0;
  std::int64_t k = 0;
};

inline SketchedFile sketched_from_json(const json& j) {
  SketchedFile f;
  f.sketched.problem = problem_from_json(j);
  if (j.contains("sketch")) f.sketched.sketch = provenance_from_json(j.at("sketch"));
  const auto& prov = field(j, "provenance");
  f.sketched.epsilon = number_field(prov, "epsilon");
  f.sketched.eta = number_field(prov, "eta");
  f.sketched.mu = number_field(prov, "mu");
  f.sketched.objective_norm = number_field(prov, "objective_norm1");
  f.sketched.constraint_norms = get_field<std::vector<double>>(prov, "constraint_norms1");
  f.sketched.original_rhs = get_field<std::vector<double>>(prov, "original_rhs");
  f.delta = number_field(prov, "delta");
  f.k = get_field<std::int64_t>(prov, "k");
  require(f.sketched.constraint_norms.size() == f.sketched.problem.constraints.size() &&
              f.sketched.original_rhs.size() == f.sketched.problem.constraints.size(),
          ErrorCode::ParseError, "provenance arrays differ from the constraint count");
  return f;
}

// ---- reports --------------------------------------------------------------

inline json to_json(const SolveReport& r, bool dump) {
  json j;
  j["status"] = to_string(r.status);
  j["value"] = number(r.value);
  j["dual_value"] = number(r.dual_value);
  j["duality_gap"] = number(r.duality_gap);
  j["primal_infeasibility"] = number(r.primal_infeasibility);
  j["dual_infeasibility"] = number(r.dual_infeasibility);
  j["iterations"] = r.iterations;
  j["tolerance"] = r.tolerance;
  if (dump) {
    j["primal"] = to_json(r.primal);
    j["dual"] = to_json(r.dual);
  }
  return j;
}

inline SolveReport report_from_json(const json& j) {
  SolveReport r;
  r.status = parse_solve_status(get_field<std::string>(j, "status"));
  r.value = number_field(j, "value");
  r.dual_value = number_field(j, "dual_value");
  r.duality_gap = number_field(j, "duality_gap");
  r.primal_infeasibility = number_field(j, "primal_infeasibility");
  r.dual_infeasibility = number_field(j, "dual_infeasibility");
  r.iterations = get_field<int>(j, "iterations");
  r.tolerance = number_field(j, "tolerance");
  if (j.contains("primal")) r.primal = matrix_from_json(j.at("primal"));
  if (j.contains("dual")) r.dual = vector_from_json(j.at("dual"), "dual");
  return r;
}

inline json to_json(const ValueBounds& b) {
  json j;
  j["upper"] = number(b.upper);
  j["upper_audit"] = json{{"formula", "alpha_S + 3 * epsilon * eta * norm1_A"},
                          {"alpha_S", number(b.upper_audit.alpha_s)},
                          {"epsilon", b.upper_audit.epsilon},
                          {"eta", b.upper_audit.eta},
                          {"norm1_A", b.upper_audit.norm1_a}};
  j["lower"] = b.lower ? number(*b.lower) : json(nullptr);
  if (b.lower_audit) {
    const auto& a = *b.lower_audit;
    json la;
    la["method"] = a.method;
    la["alpha_S"] = number(a.alpha_s);
    if (a.method == "packing") {
      la["formula"] = "alpha_S / (1 + nu)";
      la["nu"] = a.nu;
    } else {
      la["formula"] = "(alpha_S + kappa * Tr(A X0)) / (1 + kappa), kappa = epsilon * C1 / C2";
      la["C1"] = a.c1;
      la["C2"] = a.c2;
      la["kappa"] = a.kappa;
      la["trace_A_X0"] = a.trace_a_x0;
      la["dual_norm1_bound"] = number(a.dual_norm_bound);
    }
    j["lower_audit"] = std::move(la);
  }
  j["assumptions"] = b.assumptions;
  j["warnings"] = b.warnings;
  return j;
}

inline json to_json(const FeasibilityReport& r) {
  json j;
  j["status"] = to_string(r.status);
  j["t_star"] = number(r.t_star);
  j["iterations"] = r.iterations;
  if (r.status == FeasibilityStatus::Feasible) j["witness_c"] = to_json(r.witness_c);
  return j;
}

inline json to_json(const InfeasibilityCertificate& c) {
  json j;
  j["kind"] = "lmi-infeasibility";
  j["sketch"] = to_json(c.sketch);
  j["epsilon"] = c.epsilon;
  j["delta"] = c.delta;
  j["k"] = c.k;
  j["t_star"] = c.t_star;
  j["timestamp"] = c.timestamp;
  j["problem_hash"] = c.problem_hash;
  return j;
}

inline InfeasibilityCertificate certificate_from_json(const json& j) {
  InfeasibilityCertificate c;
  c.sketch = provenance_from_json(field(j, "sketch"));
  c.epsilon = number_field(j, "epsilon");
  c.delta = number_field(j, "delta");
  c.k = get_field<std::int64_t>(j, "k");
  c.t_star = number_field(j, "t_star");
  c.timestamp = get_field<std::string>(j, "timestamp");
  c.problem_hash = get_field<std::string>(j, "problem_hash");
  return c;
}

inline json to_json(const CertifyOutcome& o) {
  json j;
  j["status"] = to_string(o.status);
  if (o.certificate) j["certificate"] = to_json(*o.certificate);
  if (o.status == CertifyStatus::SketchFeasible) {
    j["witness_c"] = to_json(o.witness_c);
    j["sketch"] = to_json(o.sketch);
  }
  j["phase1"] = to_json(o.phase1);
  j["warnings"] = o.warnings;
  return j;
}

inline json to_json(const SeparatorCertificate& s) {
  json j;
  j["b_margins"] = s.b_margins;
  j["a_margin"] = s.a_margin;
  j["certified_epsilon"] = s.certified_epsilon;
  j["rho"] = to_json(s.rho);
  return j;
}

// ---- files ----------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::ParseError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, "'" + path + "': " + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << text;
  require(static_cast<bool>(out), ErrorCode::InvalidArgument, "write to '" + path + "' failed");
}

}  // namespace sdpsketch::io
