#pragma once

// Reduced cost F(u) = J(u, Psi[u]), switching function and exact discrete
// gradient.
//
//   J = dt sum_k (alpha1 u_k + alpha2/2 u_k^2)
//     + 1/2 dt sum_k w_k |Psi^k - Psi_d^k|^2 + 1/2 |Psi^N - Psi_dT|^2
//
// Control terms are integrated exactly (piecewise constant), tracking terms
// by the trapezoid rule on nodes.

#include <vector>

#include "qctl/adjoint.hpp"
#include "qctl/dynamics.hpp"

namespace qctl {

struct CostBreakdown {
  double total = 0.0;
  double tracking_running = 0.0;
  double tracking_final = 0.0;
  double control_linear = 0.0;
  double control_quadratic = 0.0;
};

inline CostBreakdown evaluate_cost(const ProblemSpec& spec, const Control& u, const Trajectory& psi) {
  spec.check_control(u);
  psi.check(spec.grid, spec.tgrid, "evaluate_cost: psi");
  const TimeGrid& tg = spec.tgrid;
  const double dt = tg.dt();
  CostBreakdown c;
  for (std::size_t k = 0; k < tg.intervals(); ++k) {
    c.control_linear += dt * spec.alpha1 * u[k];
    c.control_quadratic += 0.5 * dt * spec.alpha2 * u[k] * u[k];
  }
  for (std::size_t k = 0; k < tg.nodes(); ++k) {
    c.tracking_running +=
        0.5 * dt * tg.trapezoid_weight(k) * norm_sq(psi[k] - spec.psi_d.at_node(spec.grid, k));
  }
  c.tracking_final = 0.5 * norm_sq(psi.final() - spec.psi_dT);
  c.total = c.control_linear + c.control_quadratic + c.tracking_running + c.tracking_final;
  if (!std::isfinite(c.total)) throw DivergenceError("evaluate_cost: non-finite cost");
  return c;
}

inline double reduced_cost(const ProblemSpec& spec, const Control& u) {
  return evaluate_cost(spec, u, propagate_forward(spec, u)).total;
}

/// Lambda_k = alpha1 + alpha2 u_k + Re <lambda_k, B2hat Psibar^k> on each interval.
inline std::vector<double> switching_function(const ProblemSpec& spec, const Control& u,
                                              const Trajectory& psi, const CostateTrajectory& p) {
  spec.check_control(u);
  psi.check(spec.grid, spec.tgrid, "switching_function: psi");
  require_same(p.interval.size(), spec.tgrid.intervals(), "switching_function: costate");
  std::vector<double> lambda(spec.tgrid.intervals());
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const ComplexField b = apply_B2hat(spec.pot, psi.interval_mean(k));
    lambda[k] = spec.alpha1 + spec.alpha2 * u[k] + inner(p.interval[k], b).real();
  }
  return lambda;
}

struct GradientResult {
  double cost = 0.0;
  std::vector<double> gradient;  // dF/du_k
  std::vector<double> lambda;    // switching function on intervals
  Trajectory psi;
  CostateTrajectory p;
};

/// One forward and one costate solve. The gradient is assembled as the
/// derivative of the Lagrangian with respect to u_k: the step operator
/// depends on u_k through +-i dt/2 u_k b2, so
///   dF/du_k = dt (alpha1 + alpha2 u_k) - Re <lambda_k, i dt/2 b2 (Psi^k + Psi^{k+1})>.
inline GradientResult gradient_with_state(const ProblemSpec& spec, const Control& u) {
  GradientResult r;
  r.psi = propagate_forward(spec, u);
  r.cost = evaluate_cost(spec, u, r.psi).total;
  r.p = propagate_costate(spec, u, r.psi);
  r.lambda = switching_function(spec, u, r.psi, r.p);
  const double dt = spec.tgrid.dt();
  r.gradient.resize(spec.tgrid.intervals());
  for (std::size_t k = 0; k < r.gradient.size(); ++k) {
    ComplexField dstep = multiply(spec.pot.b2, r.psi[k] + r.psi[k + 1]);
    dstep *= kI * (0.5 * dt);
    r.gradient[k] = dt * (spec.alpha1 + spec.alpha2 * u[k]) - inner(r.p.interval[k], dstep).real();
  }
  return r;
}

inline std::vector<double> reduced_gradient(const ProblemSpec& spec, const Control& u) {
  return gradient_with_state(spec, u).gradient;
}

}  // namespace qctl
