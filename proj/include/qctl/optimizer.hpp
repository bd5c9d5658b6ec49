#pragma once

// Projected gradient with Armijo backtracking for min F(u), u_m <= u <= u_M.
// The trial step of each iteration is the Barzilai-Borwein quotient of the
// previous step; acceptance is the monotone Armijo test along the projection
// arc, so the cost history never increases.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qctl/arcs.hpp"
#include "qctl/objective.hpp"

namespace qctl {

struct SolverOptions {
  int max_iters = 20000;
  double grad_tol = -1.0;  // < 0: 1e-8 sqrt(n_t) dt
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double initial_step = 1.0;
  int max_backtracks = 60;
  bool barzilai_borwein = true;
  std::optional<Control> initial;

  double resolved_grad_tol(const TimeGrid& tg) const {
    return grad_tol >= 0.0 ? grad_tol : 1e-8 * std::sqrt(static_cast<double>(tg.n_t)) * tg.dt();
  }
};

enum class SolveStatus { converged, max_iters, line_search_failure };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::line_search_failure: return "line_search_failure";
  }
  return "unknown";
}

struct SolveResult {
  Control u_opt;
  std::vector<double> cost_history;
  std::vector<double> projected_grad_norms;
  int iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::max_iters;
  std::string diagnostics;
  double first_order_violation = 0.0;
  std::vector<double> start_costs;  // multistart only

  double final_cost() const { return cost_history.empty() ? NAN : cost_history.back(); }
};

inline std::vector<double> project_box(std::span<const double> u, const Bounds& b) {
  std::vector<double> out(u.begin(), u.end());
  for (double& v : out) v = b.clamp(v);
  return out;
}

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double projected_gradient_norm(std::span<const double> u, std::span<const double> g,
                                      const Bounds& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - b.clamp(u[i] - g[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace detail

inline SolveResult solve(const ProblemSpec& spec, const SolverOptions& opts) {
  spec.validate();
  const Bounds& box = spec.bounds;
  const std::size_t n = spec.tgrid.intervals();
  const double tol = opts.resolved_grad_tol(spec.tgrid);

  std::vector<double> u;
  if (opts.initial) {
    spec.check_control(*opts.initial);
    u = project_box(opts.initial->values, box);
  } else {
    u.assign(n, 0.5 * (box.lower + box.upper));
  }

  SolveResult res;
  GradientResult cur = gradient_with_state(spec, Control(u, box));
  res.cost_history.push_back(cur.cost);
  double step = opts.initial_step;
  std::vector<double> u_prev, g_prev;

  for (int it = 0;; ++it) {
    const double pg = detail::projected_gradient_norm(u, cur.gradient, box);
    res.projected_grad_norms.push_back(pg);
    res.iterations = it;
    if (pg <= tol) {
      res.converged = true;
      res.status = SolveStatus::converged;
      break;
    }
    if (it >= opts.max_iters) {
      res.status = SolveStatus::max_iters;
      break;
    }
    if (opts.barzilai_borwein && !u_prev.empty()) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = u[i] - u_prev[i];
        const double y = cur.gradient[i] - g_prev[i];
        ss += s * s;
        sy += s * y;
      }
      step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : opts.initial_step;
    }

    bool accepted = false;
    std::vector<double> trial(n);
    GradientResult next;
    double s = step;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt, s *= opts.backtrack_factor) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = box.clamp(u[i] - s * cur.gradient[i]);
      double decrease = 0.0;
      for (std::size_t i = 0; i < n; ++i) decrease += cur.gradient[i] * (trial[i] - u[i]);
      if (decrease >= 0.0) break;  // projection arc exhausted
      const Control trial_u(trial, box);
      const double f_trial = reduced_cost(spec, trial_u);
      if (f_trial <= cur.cost + opts.armijo_c * decrease) {
        next = gradient_with_state(spec, trial_u);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.status = SolveStatus::line_search_failure;
      res.diagnostics = "Armijo backtracking failed at iteration " + std::to_string(it) +
                        " (projected gradient norm " + std::to_string(pg) + ", trial step " +
                        std::to_string(step) + ")";
      break;
    }
    u_prev = std::move(u);
    g_prev = std::move(cur.gradient);
    u = trial;
    cur = std::move(next);
    res.cost_history.push_back(cur.cost);
  }

  res.u_opt = Control(u, box);
  FirstOrderOptions fo;
  double lmax = 0.0;
  for (double l : cur.lambda) lmax = std::max(lmax, std::abs(l));
  fo.tol_lambda = 1e-4 * lmax;
  fo.tol_u = 1e-6 * box.width();
  res.first_order_violation = check_first_order(u, box, cur.lambda, spec.tgrid, fo);
  return res;
}

/// Deterministic seeded starting controls: start 0 is the configured initial
/// control (or the box midpoint), later ones are uniform samples in the box.
inline std::vector<Control> multistart_seeds(const ProblemSpec& spec, const SolverOptions& opts,
                                             int n_starts, unsigned seed = 1) {
  std::vector<Control> seeds;
  const std::size_t n = spec.tgrid.intervals();
  seeds.push_back(opts.initial ? *opts.initial
                               : Control::constant(n, 0.5 * (spec.bounds.lower + spec.bounds.upper),
                                                   spec.bounds));
  std::minstd_rand rng(seed);
  std::uniform_real_distribution<double> dist(spec.bounds.lower, spec.bounds.upper);
  for (int s = 1; s < n_starts; ++s) {
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    seeds.emplace_back(std::move(v), spec.bounds);
  }
  return seeds;
}

inline SolveResult multistart(const ProblemSpec& spec, const SolverOptions& opts, int n_starts,
                              unsigned seed = 1) {
  if (n_starts < 1) throw std::invalid_argument("multistart: n_starts must be >= 1");
  const auto seeds = multistart_seeds(spec, opts, n_starts, seed);
  std::optional<SolveResult> best;
  std::vector<double> costs;
  std::string failures;
  for (const Control& start : seeds) {
    SolverOptions o = opts;
    o.initial = start;
    try {
      SolveResult r = solve(spec, o);
      costs.push_back(r.final_cost());
      if (!best || r.final_cost() < best->final_cost()) best = std::move(r);
    } catch (const std::exception& e) {
      costs.push_back(std::numeric_limits<double>::quiet_NaN());
      failures += std::string(e.what()) + "; ";
    }
  }
  if (!best) throw DivergenceError("multistart: all starts failed: " + failures);
  best->start_costs = std::move(costs);
  if (!failures.empty()) best->diagnostics += " failed starts: " + failures;
  return *best;
}

}  // namespace qctl
