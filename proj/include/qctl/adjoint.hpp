#pragma once

// Costate as the exact conjugate transpose of the forward CN recursion.
//
// With A_k^{+-} = I +- i dt/2 H_k the forward step is
//   A_k^+ z^{k+1} = A_k^- z^k + dt b_k.
// Pairing with interval multipliers lambda_k and node sources g^k gives the
// backward recursion
//   A_k^- lambda_k = p^{k+1} + dt/2 g^{k+1},
//   p^k            = A_k^+ lambda_k + dt/2 g^k,
// from which the discrete duality
//   <p^N, z^N> + dt sum_k w_k <g^k, z^k> = <p^0, z^0> + dt sum_k <lambda_k, b_k>
// holds exactly (w_k are trapezoid weights). lambda_k is the costate value
// paired with interval quantities; it equals (p^k + p^{k+1})/2 up to
// dt/4 (g^{k+1} - g^k).

#include <cmath>
#include <span>
#include <vector>

#include "qctl/dynamics.hpp"

namespace qctl {

struct CostateTrajectory {
  TimeGrid tgrid;
  std::vector<ComplexField> states;    // p at the n_t + 1 nodes
  std::vector<ComplexField> interval;  // lambda_k, one per interval

  const ComplexField& operator[](std::size_t k) const { return states[k]; }
};

/// Backward recursion for terminal value p_T and node sources g (length n_t + 1,
/// or empty for g = 0).
inline CostateTrajectory propagate_adjoint_cn(const Potential& pot, const TimeGrid& tgrid,
                                              std::span<const double> u,
                                              const ComplexField& p_terminal,
                                              std::span<const ComplexField> g) {
  require_same(u.size(), tgrid.intervals(), "propagate_adjoint_cn: control length");
  if (!g.empty()) require_same(g.size(), tgrid.nodes(), "propagate_adjoint_cn: source length");
  check_grid(pot, p_terminal);
  const double dt = tgrid.dt();
  const CnOperator cn(pot, dt);
  const std::size_t n = tgrid.intervals();

  CostateTrajectory out{tgrid, std::vector<ComplexField>(n + 1), std::vector<ComplexField>(n)};
  out.states[n] = p_terminal;
  for (std::size_t k = n; k-- > 0;) {
    ComplexField rhs = out.states[k + 1];
    if (!g.empty()) rhs.axpy(0.5 * dt, g[k + 1]);
    out.interval[k] = cn.solve(-1, u[k], rhs);
    ComplexField pk = cn.apply(+1, u[k], out.interval[k]);
    if (!g.empty()) pk.axpy(0.5 * dt, g[k]);
    require_finite(pk, k, "propagate_adjoint_cn");
    out.states[k] = std::move(pk);
  }
  return out;
}

/// Tracking residuals Psi^k - Psi_d^k on the nodes.
inline std::vector<ComplexField> tracking_residuals(const ProblemSpec& spec, const Trajectory& psi) {
  std::vector<ComplexField> g;
  g.reserve(psi.size());
  for (std::size_t k = 0; k < psi.size(); ++k) g.push_back(psi[k] - spec.psi_d.at_node(spec.grid, k));
  return g;
}

/// Costate of the tracking problem: p(T) = Psi(T) - Psi_dT, source Psi - Psi_d.
inline CostateTrajectory propagate_costate(const ProblemSpec& spec, const Control& u,
                                           const Trajectory& psi) {
  spec.check_control(u);
  psi.check(spec.grid, spec.tgrid, "propagate_costate: psi");
  const auto g = tracking_residuals(spec, psi);
  return propagate_adjoint_cn(spec.pot, spec.tgrid, u.values, psi.final() - spec.psi_dT, g);
}

/// Crank-Nicolson applied directly to the continuous costate equation
///   -dp/dt + i Lap p = g + i u b2 p
/// with lambda_k = (p^k + p^{k+1})/2. Consistent but not the transpose of the
/// forward scheme; kept to compare duality residuals against the exact pair.
inline CostateTrajectory propagate_adjoint_cn_direct(const Potential& pot, const TimeGrid& tgrid,
                                                     std::span<const double> u,
                                                     const ComplexField& p_terminal,
                                                     std::span<const ComplexField> g) {
  require_same(u.size(), tgrid.intervals(), "propagate_adjoint_cn_direct: control length");
  if (!g.empty()) require_same(g.size(), tgrid.nodes(), "propagate_adjoint_cn_direct: source");
  const double dt = tgrid.dt();
  const CnOperator cn(pot, dt);
  const std::size_t n = tgrid.intervals();
  CostateTrajectory out{tgrid, std::vector<ComplexField>(n + 1), std::vector<ComplexField>(n)};
  out.states[n] = p_terminal;
  for (std::size_t k = n; k-- > 0;) {
    // (I - i dt/2 H) p^k = (I + i dt/2 H) p^{k+1} + dt (g^k + g^{k+1})/2
    ComplexField rhs = cn.apply(+1, u[k], out.states[k + 1]);
    if (!g.empty()) rhs.axpy(dt, midpoint(g[k], g[k + 1]));
    out.states[k] = cn.solve(-1, u[k], rhs);
    out.interval[k] = midpoint(out.states[k], out.states[k + 1]);
  }
  return out;
}

struct DualityTerms {
  cplx terminal;        // <p^N, z^N>
  cplx initial;         // <p^0, z^0>
  cplx node_source;     // dt sum_k w_k <g^k, z^k>
  cplx interval_source; // dt sum_k <lambda_k, b_k>

  double residual() const { return std::abs(terminal + node_source - initial - interval_source); }
  double scale() const {
    return std::abs(terminal) + std::abs(initial) + std::abs(node_source) + std::abs(interval_source);
  }
};

inline DualityTerms duality_terms(const CostateTrajectory& p, const Trajectory& z,
                                  std::span<const ComplexField> b,
                                  std::span<const ComplexField> g) {
  if (!(p.tgrid == z.tgrid)) throw DimensionError("ibp_residual: time grid mismatch");
  const TimeGrid& tg = z.tgrid;
  require_same(p.states.size(), tg.nodes(), "ibp_residual: costate length");
  require_same(z.states.size(), tg.nodes(), "ibp_residual: state length");
  if (!b.empty()) require_same(b.size(), tg.intervals(), "ibp_residual: interval source");
  if (!g.empty()) require_same(g.size(), tg.nodes(), "ibp_residual: node source");
  const double dt = tg.dt();
  DualityTerms t{inner(p.states.back(), z.final()), inner(p.states.front(), z[0]), {}, {}};
  for (std::size_t k = 0; k < g.size(); ++k) t.node_source += dt * tg.trapezoid_weight(k) * inner(g[k], z[k]);
  for (std::size_t k = 0; k < b.size(); ++k) t.interval_source += dt * inner(p.interval[k], b[k]);
  return t;
}

/// |LHS - RHS| of the discrete integration-by-parts identity. Empty spans
/// stand for zero sources.
inline double ibp_residual(const CostateTrajectory& p, const Trajectory& z,
                           std::span<const ComplexField> b, std::span<const ComplexField> g) {
  return duality_terms(p, z, b, g).residual();
}

}  // namespace qctl
