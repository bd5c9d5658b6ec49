#pragma once

// Second variation Q(z, v), its Goh transform Qhat(xi, w, h) and the
// singular residual R(t).
//
// With B = B2hat Psi (no affine control term), xi = z - w B satisfies
//   dxi/dt + A xi = u B2hat xi + w b1,   b1 = -B2hat f - M1 Psi,
// and, for w = int v, Q(z[v], v) - alpha2 |v|^2 = Qhat(xi[w], w, w(T)) with
//   Qhat_T = |xi(T) + h B(T)|^2 + h^2 Re<p(T), B2hat^2 Psi(T)>
//            + 2 h Re<p(T), B2hat xi(T)>
//   Qhat_a = int |xi|^2 + 2 w Re(<xi, B> + <Psi - Psi_d, B2hat xi> - <M1^H p, xi>)
//   Qhat_b = int w^2 R,
//   R      = |B|^2 + Re<Psi - Psi_d, B2hat B> + Re<p, B2hat^2 f - [M1, B2hat] Psi>.
// All time integrals of node quantities use the trapezoid rule.

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "qctl/adjoint.hpp"
#include "qctl/arcs.hpp"
#include "qctl/dynamics.hpp"
#include "qctl/objective.hpp"

namespace qctl {

struct GohDirection {
  Control v;                   // per-interval direction
  std::vector<double> w;       // primitive on the n_t + 1 nodes, w[0] = 0 for true primitives
  double h = 0.0;              // free terminal value
};

/// w^k = dt sum_{j<k} v_j, h = w^N.
inline GohDirection goh_primitive(const Control& v, const TimeGrid& tgrid) {
  require_same(v.size(), tgrid.intervals(), "goh_primitive");
  GohDirection d;
  d.v = v;
  d.w.assign(tgrid.nodes(), 0.0);
  for (std::size_t k = 0; k < v.size(); ++k) d.w[k + 1] = d.w[k] + tgrid.dt() * v[k];
  d.h = d.w.back();
  return d;
}

/// dt sum w_k |z^k|^2 + alpha2 dt sum v_k^2 + 2 dt sum v_k Re<lambda_k, B2hat zbar^k> + |z^N|^2
inline double quad_form_Q(const ProblemSpec& spec, const Control& u, const Trajectory& psi,
                          const CostateTrajectory& p, const Control& v, const Trajectory& z) {
  spec.check_control(u);
  spec.check_control(v);
  psi.check(spec.grid, spec.tgrid, "quad_form_Q: psi");
  z.check(spec.grid, spec.tgrid, "quad_form_Q: z");
  const TimeGrid& tg = spec.tgrid;
  const double dt = tg.dt();
  double q = norm_sq(z.final());
  for (std::size_t k = 0; k < tg.nodes(); ++k) q += dt * tg.trapezoid_weight(k) * norm_sq(z[k]);
  for (std::size_t k = 0; k < tg.intervals(); ++k) {
    q += dt * spec.alpha2 * v[k] * v[k];
    q += 2.0 * dt * v[k] * inner(p.interval[k], apply_B2hat(spec.pot, z.interval_mean(k))).real();
  }
  return q;
}

/// R on the time nodes.
inline std::vector<double> singular_residual_R(const ProblemSpec& spec, const Trajectory& psi,
                                               const CostateTrajectory& p,
                                               CommutatorScheme scheme = CommutatorScheme::assembled) {
  psi.check(spec.grid, spec.tgrid, "singular_residual_R: psi");
  require_same(p.states.size(), spec.tgrid.nodes(), "singular_residual_R: costate");
  std::vector<double> R(spec.tgrid.nodes());
  for (std::size_t k = 0; k < R.size(); ++k) {
    const ComplexField B = apply_B2hat(spec.pot, psi[k]);
    const ComplexField B2B = apply_B2hat(spec.pot, B);
    const ComplexField resid = psi[k] - spec.psi_d.at_node(spec.grid, k);
    ComplexField r = apply_M1_B2_commutator(spec.pot, psi[k], scheme);
    r *= -1.0;
    if (!spec.f.is_zero()) {
      const ComplexField fk = spec.f.at_node(spec.grid, k);
      r += apply_B2hat(spec.pot, apply_B2hat(spec.pot, fk));
    }
    R[k] = norm_sq(B) + inner(resid, B2B).real() + inner(p[k], r).real();
  }
  return R;
}

/// Interval values (node averages) of a node-sampled quantity.
inline std::vector<double> interval_means(std::span<const double> node_values) {
  std::vector<double> out(node_values.empty() ? 0 : node_values.size() - 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = 0.5 * (node_values[k] + node_values[k + 1]);
  return out;
}

struct QuadFormReport {
  double Q_value = 0.0;
  double Qhat_value = 0.0;
  double Qhat_T = 0.0;
  double Qhat_a = 0.0;
  double Qhat_b = 0.0;
  double goh_identity_gap = 0.0;
  std::vector<double> R_samples;  // on nodes
};

inline QuadFormReport quad_form_Qhat(const ProblemSpec& spec, const Control& u,
                                     const Trajectory& psi, const CostateTrajectory& p,
                                     std::span<const double> w, double h, const Trajectory& xi,
                                     CommutatorScheme scheme = CommutatorScheme::assembled) {
  spec.check_control(u);
  psi.check(spec.grid, spec.tgrid, "quad_form_Qhat: psi");
  xi.check(spec.grid, spec.tgrid, "quad_form_Qhat: xi");
  require_same(w.size(), spec.tgrid.nodes(), "quad_form_Qhat: w length");
  const TimeGrid& tg = spec.tgrid;
  const double dt = tg.dt();
  const std::size_t N = tg.intervals();

  QuadFormReport rep;
  rep.R_samples = singular_residual_R(spec, psi, p, scheme);

  {
    const ComplexField BT = apply_B2hat(spec.pot, psi[N]);
    ComplexField lead = xi[N];
    lead.axpy(h, BT);
    rep.Qhat_T = norm_sq(lead) + h * h * inner(p[N], apply_B2hat(spec.pot, BT)).real() +
                 2.0 * h * inner(p[N], apply_B2hat(spec.pot, xi[N])).real();
  }
  for (std::size_t k = 0; k < tg.nodes(); ++k) {
    const double wt = dt * tg.trapezoid_weight(k);
    const ComplexField B = apply_B2hat(spec.pot, psi[k]);
    const ComplexField resid = psi[k] - spec.psi_d.at_node(spec.grid, k);
    const double cross = (inner(xi[k], B) + inner(resid, apply_B2hat(spec.pot, xi[k])) -
                          inner(apply_M1_adjoint(spec.pot, p[k], scheme), xi[k]))
                             .real();
    rep.Qhat_a += wt * (norm_sq(xi[k]) + 2.0 * w[k] * cross);
    rep.Qhat_b += wt * w[k] * w[k] * rep.R_samples[k];
  }
  rep.Qhat_value = rep.Qhat_T + rep.Qhat_a + rep.Qhat_b;
  return rep;
}

/// Both sides of the Goh identity through independent pipelines.
inline QuadFormReport goh_identity_report(const ProblemSpec& spec, const Control& u,
                                          const Control& v,
                                          CommutatorScheme scheme = CommutatorScheme::assembled) {
  const Trajectory psi = propagate_forward(spec, u);
  const CostateTrajectory p = propagate_costate(spec, u, psi);
  const Trajectory z = propagate_linearized(spec, u, psi, v);
  const GohDirection d = goh_primitive(v, spec.tgrid);
  const Trajectory xi = propagate_goh_xi(spec, u, psi, d.w, scheme);
  QuadFormReport rep = quad_form_Qhat(spec, u, psi, p, d.w, d.h, xi, scheme);
  rep.Q_value = quad_form_Q(spec, u, psi, p, v, z);
  double v2 = 0.0;
  for (double x : v.values) v2 += x * x;
  // Qhat carries no control-cost term; compare against Q without alpha2 |v|^2.
  const double q_no_control = rep.Q_value - spec.alpha2 * spec.tgrid.dt() * v2;
  rep.goh_identity_gap = std::abs(q_no_control - rep.Qhat_value) / (1.0 + std::abs(rep.Q_value));
  return rep;
}

/// |Q - Qhat| / (1 + |Q|) for w = int v.
inline double goh_identity_check(const ProblemSpec& spec, const Control& u, const Control& v,
                                 CommutatorScheme scheme = CommutatorScheme::assembled) {
  return goh_identity_report(spec, u, v, scheme).goh_identity_gap;
}

/// Random element of PC2: constant on boundary arcs, zero on an initial
/// boundary arc, equal to h on a final one, and a smooth random Fourier
/// profile on every other arc.
inline GohDirection sample_PC2_direction(const ArcStructure& arcs, const TimeGrid& tgrid,
                                         unsigned long long seed, int n_modes = 6) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t N = tgrid.intervals();
  GohDirection d;
  d.w.assign(tgrid.nodes(), 0.0);
  d.h = normal(rng);

  if (arcs.arcs.empty()) {
    // unconstrained smooth sample over [0, T]
    std::vector<double> a(n_modes), b(n_modes);
    for (int m = 0; m < n_modes; ++m) {
      a[m] = normal(rng) / (1.0 + m);
      b[m] = normal(rng) / (1.0 + m);
    }
    for (std::size_t k = 0; k < d.w.size(); ++k) {
      const double s = M_PI * tgrid.node(k) / tgrid.T;
      for (int m = 0; m < n_modes; ++m) d.w[k] += a[m] * std::cos(m * s) + b[m] * std::sin(m * s);
    }
  } else {
    require_same(arcs.interval_kind.size(), N, "sample_PC2_direction: arc structure");
    // per-arc profile as a function of the node time
    std::vector<std::function<double(double)>> profile;
    for (const Arc& a : arcs.arcs) {
      if (is_boundary(a.kind)) {
        double c = normal(rng);
        if (a.first == 0 && a.last + 1 == N) {
          c = 0.0;
          d.h = 0.0;
        } else if (a.first == 0) {
          c = 0.0;
        } else if (a.last + 1 == N) {
          c = d.h;
        }
        profile.emplace_back([c](double) { return c; });
      } else {
        std::vector<double> ca(n_modes), cb(n_modes);
        for (int m = 0; m < n_modes; ++m) {
          ca[m] = normal(rng) / (1.0 + m);
          cb[m] = normal(rng) / (1.0 + m);
        }
        const double t0 = a.t_start, len = a.t_end - a.t_start;
        profile.emplace_back([ca, cb, t0, len](double t) {
          const double s = M_PI * (t - t0) / len;
          double acc = 0.0;
          for (std::size_t m = 0; m < ca.size(); ++m) {
            acc += ca[m] * std::cos(m * s) + cb[m] * std::sin(m * s);
          }
          return acc;
        });
      }
    }
    std::vector<std::size_t> arc_of(N);
    for (std::size_t a = 0; a < arcs.arcs.size(); ++a) {
      for (std::size_t k = arcs.arcs[a].first; k <= arcs.arcs[a].last; ++k) arc_of[k] = a;
    }
    for (std::size_t k = 0; k < d.w.size(); ++k) {
      // node k touches intervals k-1 and k; boundary arcs take precedence
      std::size_t a = arc_of[std::min(k, N - 1)];
      if (k > 0 && k < N && !is_boundary(arcs.arcs[a].kind) &&
          is_boundary(arcs.arcs[arc_of[k - 1]].kind)) {
        a = arc_of[k - 1];
      }
      d.w[k] = profile[a](tgrid.node(k));
    }
  }
  std::vector<double> v(N);
  for (std::size_t k = 0; k < N; ++k) v[k] = (d.w[k + 1] - d.w[k]) / tgrid.dt();
  d.v = Control(std::move(v));
  return d;
}

/// Qhat(xi[w], w, h) for a given direction at (u, psi, p).
inline QuadFormReport evaluate_direction(const ProblemSpec& spec, const Control& u,
                                         const Trajectory& psi, const CostateTrajectory& p,
                                         const GohDirection& d,
                                         CommutatorScheme scheme = CommutatorScheme::assembled) {
  const Trajectory xi = propagate_goh_xi(spec, u, psi, d.w, scheme);
  return quad_form_Qhat(spec, u, psi, p, d.w, d.h, xi, scheme);
}

/// |w|_2^2 + h^2 with the trapezoid rule for the L2 norm.
inline double goh_norm_sq(const GohDirection& d, const TimeGrid& tgrid) {
  double s = d.h * d.h;
  for (std::size_t k = 0; k < d.w.size(); ++k) {
    s += tgrid.dt() * tgrid.trapezoid_weight(k) * d.w[k] * d.w[k];
  }
  return s;
}

}  // namespace qctl
