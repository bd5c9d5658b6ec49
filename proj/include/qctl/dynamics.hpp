#pragma once

// Crank-Nicolson propagation of the controlled Schroedinger equation
//
//   dPsi/dt = i Lap Psi - i u b2 Psi + f,   Psi(0) = Psi0,
//
// i.e. i dPsi/dt = H(u) Psi + i f with H(u) = -Lap_h + u diag(b2), and of the
// linearized and Goh-transformed states, which share the same step operator.
// Controls are frozen on each interval; sources enter as interval averages.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qctl/field.hpp"
#include "qctl/problem.hpp"
#include "qctl/tridiag.hpp"

namespace qctl {

struct Trajectory {
  TimeGrid tgrid;
  std::vector<ComplexField> states;  // n_t + 1 node values

  std::size_t size() const { return states.size(); }
  const ComplexField& operator[](std::size_t k) const { return states[k]; }
  const ComplexField& final() const { return states.back(); }
  ComplexField interval_mean(std::size_t k) const { return midpoint(states[k], states[k + 1]); }

  void check(const SpatialGrid& grid, const TimeGrid& tg, const char* what) const {
    if (!(tgrid == tg)) throw DimensionError(std::string(what) + ": time grid mismatch");
    require_same(states.size(), tg.nodes(), what);
    for (const auto& s : states) {
      if (!(s.grid() == grid)) throw DimensionError(std::string(what) + ": spatial grid mismatch");
    }
  }
};

/// Applies and inverts I + sign * i (dt/2) H(u) for one frozen control value.
class CnOperator {
 public:
  CnOperator(const Potential& pot, double dt) : pot_(pot), dt_(dt) {}

  /// (I + sign i dt/2 H(u)) x
  ComplexField apply(int sign, double u, const ComplexField& x) const {
    check_grid(pot_, x);
    const std::size_t n = x.size();
    const double h = x.grid().h();
    const cplx c = static_cast<double>(sign) * kI * (0.5 * dt_);
    const double inv_h2 = 1.0 / (h * h);
    ComplexField out(x.grid());
    for (std::size_t j = 0; j < n; ++j) {
      const cplx left = j == 0 ? cplx{} : x[j - 1];
      const cplx right = j + 1 == n ? cplx{} : x[j + 1];
      const cplx hx = (2.0 * x[j] - left - right) * inv_h2 + u * pot_.b2[j] * x[j];
      out[j] = x[j] + c * hx;
    }
    return out;
  }

  /// (I + sign i dt/2 H(u))^{-1} rhs
  ComplexField solve(int sign, double u, const ComplexField& rhs) const {
    check_grid(pot_, rhs);
    const std::size_t n = rhs.size();
    const double h = rhs.grid().h();
    const cplx c = static_cast<double>(sign) * kI * (0.5 * dt_);
    const double inv_h2 = 1.0 / (h * h);
    std::vector<cplx> diag(n), off(n, -c * inv_h2);
    for (std::size_t j = 0; j < n; ++j) diag[j] = 1.0 + c * (2.0 * inv_h2 + u * pot_.b2[j]);
    return ComplexField(rhs.grid(), solve_tridiagonal(off, diag, off, rhs.values()));
  }

 private:
  const Potential& pot_;
  double dt_;
};

inline void require_finite(const ComplexField& x, std::size_t step, const char* what) {
  if (!x.all_finite()) {
    throw DivergenceError(std::string(what) + ": non-finite state at step " + std::to_string(step));
  }
}

/// Interval source term s_k used as dt * s_k in step k.
using IntervalSource = std::function<ComplexField(std::size_t)>;

/// Generic forward CN recursion
///   (I + i dt/2 H_k) x^{k+1} = (I - i dt/2 H_k) x^k + dt s_k.
/// An empty source means s_k = 0.
inline Trajectory propagate_cn(const Potential& pot, const TimeGrid& tgrid,
                               std::span<const double> u, const ComplexField& x0,
                               const IntervalSource& source) {
  require_same(u.size(), tgrid.intervals(), "propagate_cn: control length");
  check_grid(pot, x0);
  const double dt = tgrid.dt();
  const CnOperator cn(pot, dt);
  Trajectory traj{tgrid, {}};
  traj.states.reserve(tgrid.nodes());
  traj.states.push_back(x0);
  for (std::size_t k = 0; k < tgrid.intervals(); ++k) {
    ComplexField rhs = cn.apply(-1, u[k], traj.states.back());
    if (source) rhs.axpy(dt, source(k));
    ComplexField next = cn.solve(+1, u[k], rhs);
    require_finite(next, k + 1, "propagate_cn");
    traj.states.push_back(std::move(next));
  }
  return traj;
}

inline Trajectory propagate_forward(const ProblemSpec& spec, const Control& u) {
  spec.check_control(u);
  IntervalSource src;
  if (!spec.f.is_zero()) {
    src = [&](std::size_t k) { return spec.f.at_interval(spec.grid, k); };
  }
  return propagate_cn(spec.pot, spec.tgrid, u.values, spec.psi0, src);
}

/// z[v]: linearization of the control-to-state map at (u_ref, psi_ref).
inline Trajectory propagate_linearized(const ProblemSpec& spec, const Control& u_ref,
                                       const Trajectory& psi_ref, const Control& v) {
  spec.check_control(u_ref);
  spec.check_control(v);
  psi_ref.check(spec.grid, spec.tgrid, "propagate_linearized: psi_ref");
  auto src = [&](std::size_t k) {
    ComplexField s = apply_B2hat(spec.pot, psi_ref.interval_mean(k));
    s *= v[k];
    return s;
  };
  return propagate_cn(spec.pot, spec.tgrid, u_ref.values, ComplexField(spec.grid), src);
}

/// Node values of the Goh source direction b1 = i b2 f - M1 Psi.
inline ComplexField goh_source_at_node(const ProblemSpec& spec, const Trajectory& psi_ref,
                                       std::size_t k, CommutatorScheme scheme) {
  ComplexField b1 = apply_M1(spec.pot, psi_ref[k], scheme);
  b1 *= -1.0;
  if (!spec.f.is_zero()) {
    const ComplexField fk = spec.f.at_node(spec.grid, k);
    for (std::size_t j = 0; j < b1.size(); ++j) b1[j] += kI * spec.pot.b2[j] * fk[j];
  }
  return b1;
}

/// xi[w] for a primitive w given on the time nodes (length n_t + 1).
inline Trajectory propagate_goh_xi(const ProblemSpec& spec, const Control& u_ref,
                                   const Trajectory& psi_ref, std::span<const double> w_nodes,
                                   CommutatorScheme scheme = CommutatorScheme::assembled) {
  spec.check_control(u_ref);
  psi_ref.check(spec.grid, spec.tgrid, "propagate_goh_xi: psi_ref");
  require_same(w_nodes.size(), spec.tgrid.nodes(), "propagate_goh_xi: w length");
  std::vector<ComplexField> b1;
  b1.reserve(spec.tgrid.nodes());
  for (std::size_t k = 0; k < spec.tgrid.nodes(); ++k) {
    b1.push_back(goh_source_at_node(spec, psi_ref, k, scheme));
  }
  auto src = [&](std::size_t k) {
    ComplexField s = midpoint(b1[k], b1[k + 1]);
    s *= 0.5 * (w_nodes[k] + w_nodes[k + 1]);
    return s;
  };
  return propagate_cn(spec.pot, spec.tgrid, u_ref.values, ComplexField(spec.grid), src);
}

}  // namespace qctl
