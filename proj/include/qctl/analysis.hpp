#pragma once

// Optimality report for a candidate control: first-order conditions, arc
// structure, strict complementarity, R on singular arcs and at bang-bang
// junctions, and a PC2 probe of the Goh form.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qctl/arcs.hpp"
#include "qctl/objective.hpp"
#include "qctl/second_order.hpp"

namespace qctl {

struct AnalysisOptions {
  ArcOptions arcs;
  int n_probe = 100;
  unsigned long long seed = 7;
  double first_order_tol = 1e-3;   // fraction of T
  double unresolved_tol = 0.05;    // fraction of T
  double R_rel_tol = 1e-6;         // times max |R|
  double pc2_tol = 1e-6;           // on Qhat / (|w|^2 + h^2)
  double junction_window = 2.0;    // in units of dt
  CommutatorScheme scheme = CommutatorScheme::assembled;
};

struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
};

struct OptimalityReport {
  double cost = 0.0;
  std::vector<double> lambda;
  ArcStructure arc_structure;
  double eps_u = 0.0;
  double eps_lambda = 0.0;
  double first_order_violation = 0.0;
  double strict_complementarity_margin = std::numeric_limits<double>::infinity();
  bool has_boundary_arcs = false;
  std::vector<double> R_nodes;
  double R_scale = 1.0;
  double R_on_singular_min = std::numeric_limits<double>::infinity();
  double R_at_bb_junctions_min = std::numeric_limits<double>::infinity();
  std::vector<double> pc2_ratios;
  double pc2_probe_min_ratio = std::numeric_limits<double>::infinity();
  std::vector<Verdict> verdicts;

  bool all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
  }
  const Verdict* find(const std::string& name) const {
    for (const auto& v : verdicts) {
      if (v.name == name) return &v;
    }
    return nullptr;
  }
};

inline OptimalityReport full_report(const ProblemSpec& spec, const Control& u,
                                    const AnalysisOptions& opts = {}) {
  spec.validate();
  spec.check_control(u);
  if (!Control(u.values, spec.bounds).admissible()) {
    throw std::invalid_argument("full_report: control violates the bounds");
  }
  const TimeGrid& tg = spec.tgrid;
  const double dt = tg.dt();
  OptimalityReport rep;

  GradientResult gr = gradient_with_state(spec, u);
  rep.cost = gr.cost;
  rep.lambda = gr.lambda;

  ArcOptions ao = opts.arcs;
  ao.alpha2 = spec.alpha2;
  rep.eps_u = ao.resolved_eps_u(spec.bounds);
  rep.eps_lambda = ao.resolved_eps_lambda(rep.lambda);
  ao.eps_u = rep.eps_u;
  ao.eps_lambda = rep.eps_lambda;
  rep.arc_structure = detect_arcs(u.values, spec.bounds, rep.lambda, tg, ao);

  rep.first_order_violation =
      check_first_order(u.values, spec.bounds, rep.lambda, tg, {rep.eps_lambda, rep.eps_u});
  const auto sc = check_strict_complementarity(rep.arc_structure, rep.lambda);
  rep.strict_complementarity_margin = sc.margin;
  rep.has_boundary_arcs = sc.has_boundary_arcs;

  rep.R_nodes = singular_residual_R(spec, gr.psi, gr.p, opts.scheme);
  double rmax = 0.0;
  for (double r : rep.R_nodes) rmax = std::max(rmax, std::abs(r));
  rep.R_scale = rmax > 0.0 ? rmax : 1.0;
  const auto R_int = interval_means(rep.R_nodes);
  for (const Arc& a : rep.arc_structure.arcs) {
    if (a.kind != ArcKind::singular) continue;
    for (std::size_t k = a.first; k <= a.last; ++k) {
      rep.R_on_singular_min = std::min(rep.R_on_singular_min, R_int[k]);
    }
  }
  const double window = opts.junction_window * dt;
  for (double tj : rep.arc_structure.bang_bang_junctions) {
    for (std::size_t k = 0; k < rep.R_nodes.size(); ++k) {
      if (std::abs(tg.node(k) - tj) <= window + 1e-12 * tg.T) {
        rep.R_at_bb_junctions_min = std::min(rep.R_at_bb_junctions_min, rep.R_nodes[k]);
      }
    }
  }

  for (int i = 0; i < opts.n_probe; ++i) {
    const GohDirection d = sample_PC2_direction(rep.arc_structure, tg, opts.seed + i);
    const double nrm = goh_norm_sq(d, tg);
    if (nrm == 0.0) continue;
    const QuadFormReport q = evaluate_direction(spec, u, gr.psi, gr.p, d, opts.scheme);
    rep.pc2_ratios.push_back(q.Qhat_value / nrm);
    rep.pc2_probe_min_ratio = std::min(rep.pc2_probe_min_ratio, rep.pc2_ratios.back());
  }

  const double R_tol = -opts.R_rel_tol * rep.R_scale;
  rep.verdicts.push_back({"first_order", rep.first_order_violation < opts.first_order_tol * tg.T,
                          rep.first_order_violation, opts.first_order_tol * tg.T});
  rep.verdicts.push_back({"arc_resolution",
                          rep.arc_structure.unresolved_measure < opts.unresolved_tol * tg.T,
                          rep.arc_structure.unresolved_measure, opts.unresolved_tol * tg.T});
  rep.verdicts.push_back({"strict_complementarity",
                          !rep.has_boundary_arcs || rep.strict_complementarity_margin > rep.eps_lambda,
                          rep.strict_complementarity_margin, rep.eps_lambda});
  rep.verdicts.push_back({"R_on_singular_arcs", rep.R_on_singular_min >= R_tol,
                          rep.R_on_singular_min, R_tol});
  rep.verdicts.push_back({"R_at_bang_bang_junctions", rep.R_at_bb_junctions_min > 0.0,
                          rep.R_at_bb_junctions_min, 0.0});
  rep.verdicts.push_back({"pc2_probe", rep.pc2_probe_min_ratio >= -opts.pc2_tol,
                          rep.pc2_probe_min_ratio, -opts.pc2_tol});
  return rep;
}

}  // namespace qctl
