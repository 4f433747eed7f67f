// Sketch a packing SDP and bracket its value, then certify a planted
// infeasible LMI. Build target: sdpsketch_quickstart.

#include <algorithm>
#include <cstdio>

#include "sdpsketch/sdpsketch.hpp"

using namespace sdpsketch;

int main() {
  // max Tr(AX) s.t. Tr(B_i X) <= 1, Tr(X) <= 1, X PSD, with rank-2 data.
  const PackingInstance inst = generate_packing_instance(300, 5, 2, /*seed=*/7);

  SketchConfig cfg;
  cfg.epsilon = 0.75;
  cfg.delta = 0.05;
  cfg.k = inst.k_budget;
  cfg.eta = inst.eta;
  cfg.seed = 11;
  const SketchMatrix s = make_sketch(cfg, inst.problem.dim());
  const SketchedSdp sk = sketch_sdp(inst.problem, cfg, s);
  std::printf("sketch %d -> %d (%zu -> %zu stored entries)\n", s.cols(), s.rows(),
              stored_entries(inst.problem), stored_entries(sk.problem));

  const SolveReport rep = solve(sk.problem);
  if (rep.status != SolveStatus::Optimal) {
    std::printf("sketched solve ended with %s\n", to_string(rep.status));
    return 1;
  }
  const ValueBounds b = packing_bounds(inst.problem, sk, rep, cfg.k);
  const double alpha = solve(inst.problem).value;
  std::printf("sketched value %.6f\n", rep.value);
  std::printf("bracket [%.6f, %.6f], full solve %.6f\n", *b.lower, b.upper, alpha);

  const SymMatrix x = recover_packing_point(rep.primal, s, b.lower_audit->nu);
  double worst = 0.0;
  for (const auto& c : inst.problem.constraints) worst = std::max(worst, trace_product(c.matrix, x) - c.rhs);
  std::printf("recovered point: value %.6f, worst constraint excess %.2e\n",
              trace_product(inst.problem.objective, x), worst);

  // An LMI with a planted separator: no c >= 0 makes sum c_i B_i - A PSD.
  const PlantedLmi planted = generate_infeasible_lmi(96, 4, 0.5, /*seed=*/3);
  const auto sep = find_separator(planted.lmi);
  if (!sep) {
    std::printf("no separator found\n");
    return 1;
  }
  CertifyConfig cc;
  cc.sketch.epsilon = sep->certified_epsilon;
  cc.sketch.k = planted.lmi.dim();
  cc.sketch.seed = 5;
  cc.epsilon_certified = true;
  const CertifyOutcome out = certify_infeasible(planted.lmi, cc);
  std::printf("LMI: certified epsilon %.4f, sketch %d -> %d, %s (t* = %.4g)\n", sep->certified_epsilon,
              out.sketch.D, out.sketch.d, to_string(out.status), out.phase1.t_star);
  return out.status == CertifyStatus::InfeasibleCertified ? 0 : 1;
}
