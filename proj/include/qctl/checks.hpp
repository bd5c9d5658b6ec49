#pragma once

// Verification suites shared by the `check` command and the acceptance
// binary: gradient vs central differences, discrete duality, unitarity and
// the Goh identity under time refinement.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qctl/objective.hpp"
#include "qctl/second_order.hpp"

namespace qctl {

/// Smooth random function of t on [0, T]: a short Fourier sum with decaying
/// N(0,1) coefficients. Independent of the time grid, so refinement studies
/// see the same profile.
inline std::function<double(double)> smooth_profile(double T, unsigned long long seed,
                                                    int n_modes = 6) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<double> a(n_modes), b(n_modes);
  for (int m = 0; m < n_modes; ++m) {
    a[m] = N(rng) / (1.0 + m);
    b[m] = N(rng) / (1.0 + m);
  }
  return [=](double t) {
    const double x = std::numbers::pi * t / T;
    double s = 0.0;
    for (int m = 0; m < n_modes; ++m) s += a[m] * std::cos(m * x) + b[m] * std::sin(m * x);
    return s;
  };
}

inline Control sample_on_intervals(const TimeGrid& tg, const std::function<double(double)>& fn) {
  std::vector<double> v(tg.intervals());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(tg.mid(k));
  return Control(std::move(v));
}

/// Uniform random admissible control.
inline Control random_control(const ProblemSpec& spec, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(spec.bounds.lower, spec.bounds.upper);
  std::vector<double> v(spec.tgrid.intervals());
  for (double& x : v) x = U(rng);
  return Control(std::move(v), spec.bounds);
}

inline ComplexField random_field(const SpatialGrid& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  ComplexField x(grid);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = {N(rng), N(rng)};
  return x;
}

/// Least-squares slope of -log(err) against log(n).
inline double observed_order(const std::vector<double>& n, const std::vector<double>& err) {
  const std::size_t m = n.size();
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(n[i]), y = -std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

struct CheckLine {
  int n_t = 0;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string what;
};

struct SuiteResult {
  std::string name;
  std::vector<CheckLine> lines;
  double order = std::numeric_limits<double>::quiet_NaN();
  double order_tolerance = std::numeric_limits<double>::quiet_NaN();
  bool pass = true;
};

/// Spec builder indexed by refinement level (n_t doubled per level).
using SpecLadder = std::function<ProblemSpec(int level)>;

/// Independent extended-precision evaluation of F(u): its own Crank-Nicolson
/// recursion and quadrature in long double, sharing no code with the solver.
/// Used as the finite-difference oracle so that a fixed step of 1e-5 measures
/// truncation rather than double round-off in F.
inline long double reference_cost(const ProblemSpec& spec, std::span<const double> u) {
  using C = std::complex<long double>;
  const std::size_t n = spec.grid.size();
  const long double h = static_cast<long double>(spec.grid.x_hi - spec.grid.x_lo) / spec.grid.n_x;
  const long double dt = static_cast<long double>(spec.tgrid.T) / spec.tgrid.n_t;
  const long double ih2 = 1.0L / (h * h);
  auto to_ld = [&](const ComplexField& f) {
    std::vector<C> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = C(f[j].real(), f[j].imag());
    return v;
  };
  auto dist2 = [&](const std::vector<C>& a, const std::vector<C>& b) {
    long double s = 0.0L;
    for (std::size_t j = 0; j < n; ++j) s += std::norm(a[j] - b[j]);
    return h * s;
  };
  std::vector<C> x = to_ld(spec.psi0), rhs(n), cs(n), diag(n);
  const std::size_t N = spec.tgrid.intervals();
  long double J = 0.0L;
  J += 0.5L * dt * 0.5L * dist2(x, to_ld(spec.psi_d.at_node(spec.grid, 0)));
  for (std::size_t k = 0; k < N; ++k) {
    const long double uk = u[k];
    J += dt * (spec.alpha1 * uk + 0.5L * spec.alpha2 * uk * uk);
    const C c = C(0.0L, 0.5L * dt);
    // rhs = (I - c H) x + dt f_mid
    for (std::size_t j = 0; j < n; ++j) {
      const C l = j == 0 ? C(0) : x[j - 1], r = j + 1 == n ? C(0) : x[j + 1];
      const C hx = (2.0L * x[j] - l - r) * ih2 + uk * static_cast<long double>(spec.pot.b2[j]) * x[j];
      rhs[j] = x[j] - c * hx;
    }
    if (!spec.f.is_zero()) {
      const auto fa = to_ld(spec.f.at_node(spec.grid, k)), fb = to_ld(spec.f.at_node(spec.grid, k + 1));
      for (std::size_t j = 0; j < n; ++j) rhs[j] += dt * 0.5L * (fa[j] + fb[j]);
    }
    // (I + c H) x_new = rhs, Thomas elimination
    const C off = -c * ih2;
    for (std::size_t j = 0; j < n; ++j) {
      diag[j] = 1.0L + c * (2.0L * ih2 + uk * static_cast<long double>(spec.pot.b2[j]));
    }
    C piv = diag[0];
    cs[0] = off / piv;
    x[0] = rhs[0] / piv;
    for (std::size_t j = 1; j < n; ++j) {
      piv = diag[j] - off * cs[j - 1];
      cs[j] = off / piv;
      x[j] = (rhs[j] - off * x[j - 1]) / piv;
    }
    for (std::size_t j = n - 1; j-- > 0;) x[j] -= cs[j] * x[j + 1];
    const long double w = k + 1 == N ? 0.5L : 1.0L;
    J += 0.5L * dt * w * dist2(x, to_ld(spec.psi_d.at_node(spec.grid, k + 1)));
  }
  J += 0.5L * dist2(x, to_ld(spec.psi_dT));
  return J;
}

struct GradientGap {
  double max_relative = 0.0;   // |g_k - fd_k| / max(|fd_k|, floor)
  double max_exactness = 0.0;  // |g_k - dt Lambda_k| / max(1, |g_k|)
};

/// Central differences of the extended-precision reference cost with step s
/// on every component. The relative-error floor 1e-8 max|fd| only guards
/// components that vanish identically.
inline GradientGap gradient_gap(const ProblemSpec& spec, const Control& u, double step = 1e-5) {
  const GradientResult gr = gradient_with_state(spec, u);
  std::vector<double> fd(u.size());
  double fdmax = 0.0;
  std::vector<double> up = u.values, um = u.values;
  for (std::size_t k = 0; k < u.size(); ++k) {
    up[k] = u[k] + step;
    um[k] = u[k] - step;
    fd[k] = static_cast<double>((reference_cost(spec, up) - reference_cost(spec, um)) / (2.0L * step));
    up[k] = um[k] = u[k];
    fdmax = std::max(fdmax, std::abs(fd[k]));
  }
  GradientGap gap;
  const double floor = std::max(1e-8 * fdmax, 1e-300);
  const double dt = spec.tgrid.dt();
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double g = gr.gradient[k];
    gap.max_relative = std::max(gap.max_relative, std::abs(g - fd[k]) / std::max(std::abs(fd[k]), floor));
    gap.max_exactness =
        std::max(gap.max_exactness, std::abs(g - dt * gr.lambda[k]) / std::max(1.0, std::abs(g)));
  }
  return gap;
}

inline SuiteResult check_gradient(const SpecLadder& ladder, int levels, unsigned long long seed) {
  SuiteResult r{"grad", {}};
  for (int l = 0; l <= levels; ++l) {
    const ProblemSpec spec = ladder(l);
    const GradientGap g = gradient_gap(spec, random_control(spec, seed + l));
    r.lines.push_back({spec.tgrid.n_t, g.max_relative, 1e-6, g.max_relative < 1e-6,
                       "max relative error vs central differences (step 1e-5)"});
    r.lines.push_back({spec.tgrid.n_t, g.max_exactness, 1e-12, g.max_exactness < 1e-12,
                       "max |g - dt Lambda| / max(1,|g|)"});
  }
  for (const auto& line : r.lines) r.pass = r.pass && line.pass;
  return r;
}

/// Relative duality residual for random sources, terminal and initial data.
inline double ibp_relative_residual(const ProblemSpec& spec, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  const TimeGrid& tg = spec.tgrid;
  const Control u = random_control(spec, seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<ComplexField> b, g;
  for (std::size_t k = 0; k < tg.intervals(); ++k) b.push_back(random_field(spec.grid, rng));
  for (std::size_t k = 0; k < tg.nodes(); ++k) g.push_back(random_field(spec.grid, rng));
  const ComplexField z0 = random_field(spec.grid, rng);
  const ComplexField pT = random_field(spec.grid, rng);
  const Trajectory z =
      propagate_cn(spec.pot, tg, u.values, z0, [&](std::size_t k) { return b[k]; });
  const CostateTrajectory p = propagate_adjoint_cn(spec.pot, tg, u.values, pT, g);
  const DualityTerms t = duality_terms(p, z, b, g);
  return t.residual() / t.scale();
}

inline SuiteResult check_ibp(const SpecLadder& ladder, int levels, unsigned long long seed) {
  SuiteResult r{"ibp", {}};
  for (int l = 0; l <= levels; ++l) {
    const ProblemSpec spec = ladder(l);
    const double res = ibp_relative_residual(spec, seed + l);
    r.lines.push_back({spec.tgrid.n_t, res, 1e-11, res < 1e-11, "duality residual / term scale"});
    r.pass = r.pass && r.lines.back().pass;
  }
  return r;
}

/// max_k | |Psi^k| - |Psi^0| | / |Psi^0| with the source switched off.
inline double unitarity_drift(ProblemSpec spec, const Control& u) {
  spec.f = TimeField::zero();
  const Trajectory psi = propagate_forward(spec, u);
  const double n0 = norm(psi[0]);
  double drift = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) drift = std::max(drift, std::abs(norm(psi[k]) - n0) / n0);
  return drift;
}

inline SuiteResult check_unitary(const SpecLadder& ladder, int levels, unsigned long long seed) {
  SuiteResult r{"unitary", {}};
  for (int l = 0; l <= levels; ++l) {
    const ProblemSpec spec = ladder(l);
    const double d = unitarity_drift(spec, random_control(spec, seed + l));
    r.lines.push_back({spec.tgrid.n_t, d, 1e-10, d < 1e-10, "norm drift with f = 0"});
    r.pass = r.pass && r.lines.back().pass;
  }
  return r;
}

/// Goh identity gap at a smooth admissible reference control for a smooth
/// random direction; both are grid-independent functions of t.
inline SuiteResult check_goh(const SpecLadder& ladder, int levels, unsigned long long seed,
                             CommutatorScheme scheme = CommutatorScheme::assembled,
                             double final_tol = 1e-3, double order_tol = 0.9) {
  SuiteResult r{"goh", {}};
  std::vector<double> ns, gaps;
  for (int l = 0; l <= levels; ++l) {
    const ProblemSpec spec = ladder(l);
    const double mid = 0.5 * (spec.bounds.lower + spec.bounds.upper);
    const double amp = 0.25 * spec.bounds.width();
    const Control u = sample_on_intervals(spec.tgrid, [&](double t) { return mid + amp * std::sin(0.7 * t); });
    const Control v = sample_on_intervals(spec.tgrid, smooth_profile(spec.tgrid.T, seed));
    const double gap = goh_identity_check(spec, u, v, scheme);
    ns.push_back(spec.tgrid.n_t);
    gaps.push_back(gap);
    r.lines.push_back({spec.tgrid.n_t, gap, std::numeric_limits<double>::quiet_NaN(), true, "|Q - alpha2|v|^2 - Qhat| / (1 + |Q|)"});
  }
  const bool negligible = std::all_of(gaps.begin(), gaps.end(), [](double g) { return g < 1e-10; });
  r.lines.back().tolerance = final_tol;
  r.lines.back().pass = gaps.back() < final_tol;
  r.pass = r.lines.back().pass;
  if (!negligible && ns.size() >= 2) {
    r.order = observed_order(ns, gaps);
    r.order_tolerance = order_tol;
    r.pass = r.pass && r.order >= order_tol;
  }
  return r;
}

}  // namespace qctl
