#pragma once

// Classification of a piecewise-constant control into boundary, singular and
// regular interior arcs, plus the first-order and strict-complementarity
// measures built on it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qctl/errors.hpp"
#include "qctl/problem.hpp"

namespace qctl {

enum class ArcKind { lower_boundary, upper_boundary, singular, regular_interior, unresolved };

inline std::string_view to_string(ArcKind k) {
  switch (k) {
    case ArcKind::lower_boundary: return "lower_boundary";
    case ArcKind::upper_boundary: return "upper_boundary";
    case ArcKind::singular: return "singular";
    case ArcKind::regular_interior: return "regular_interior";
    case ArcKind::unresolved: return "unresolved";
  }
  return "unknown";
}

inline bool is_boundary(ArcKind k) {
  return k == ArcKind::lower_boundary || k == ArcKind::upper_boundary;
}

/// Maximal run of same-kind intervals [first, last] (inclusive interval indices).
struct Arc {
  ArcKind kind;
  std::size_t first;
  std::size_t last;
  double t_start;
  double t_end;

  std::size_t length() const { return last - first + 1; }
};

struct ArcStructure {
  std::vector<Arc> arcs;
  std::vector<double> junction_times;     // every boundary between consecutive arcs
  std::vector<double> bang_bang_junctions; // direct lower <-> upper switches
  std::vector<ArcKind> interval_kind;      // per-interval classification
  double unresolved_measure = 0.0;
  double T = 0.0;

  std::size_t count(ArcKind k) const {
    return static_cast<std::size_t>(
        std::count_if(arcs.begin(), arcs.end(), [k](const Arc& a) { return a.kind == k; }));
  }
};

struct ArcOptions {
  double eps_u = -1.0;       // < 0: 1e-6 (u_M - u_m)
  double eps_lambda = -1.0;  // < 0: 1e-4 max |Lambda|
  // With alpha2 > 0 an interior stationary interval is a regular arc (the
  // control is fixed by Lambda = 0), not a singular one.
  double alpha2 = 0.0;

  double resolved_eps_u(const Bounds& b) const { return eps_u >= 0.0 ? eps_u : 1e-6 * b.width(); }
  double resolved_eps_lambda(std::span<const double> lambda) const {
    if (eps_lambda >= 0.0) return eps_lambda;
    double m = 0.0;
    for (double l : lambda) m = std::max(m, std::abs(l));
    return 1e-4 * m;
  }
};

inline ArcStructure detect_arcs(std::span<const double> u, const Bounds& bounds,
                                std::span<const double> lambda, const TimeGrid& tgrid,
                                const ArcOptions& opts = {}) {
  require_same(u.size(), tgrid.intervals(), "detect_arcs: control length");
  require_same(lambda.size(), u.size(), "detect_arcs: lambda length");
  const double eps_u = opts.resolved_eps_u(bounds);
  const double eps_l = opts.resolved_eps_lambda(lambda);
  const double dt = tgrid.dt();

  ArcStructure s;
  s.T = tgrid.T;
  s.interval_kind.resize(u.size());
  std::size_t unresolved = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    ArcKind kind;
    if (u[k] <= bounds.lower + eps_u) {
      kind = ArcKind::lower_boundary;
    } else if (u[k] >= bounds.upper - eps_u) {
      kind = ArcKind::upper_boundary;
    } else if (std::abs(lambda[k]) <= eps_l) {
      kind = opts.alpha2 > 0.0 ? ArcKind::regular_interior : ArcKind::singular;
    } else {
      kind = ArcKind::unresolved;
      ++unresolved;
    }
    s.interval_kind[k] = kind;
  }
  if (!u.empty() && unresolved == u.size()) {
    throw StructureError("detect_arcs: no interval could be classified");
  }
  s.unresolved_measure = static_cast<double>(unresolved) * dt;

  for (std::size_t k = 0; k < u.size();) {
    std::size_t end = k;
    while (end + 1 < u.size() && s.interval_kind[end + 1] == s.interval_kind[k]) ++end;
    s.arcs.push_back({s.interval_kind[k], k, end, tgrid.node(k), tgrid.node(end + 1)});
    k = end + 1;
  }
  for (std::size_t a = 1; a < s.arcs.size(); ++a) {
    const double t = s.arcs[a].t_start;
    s.junction_times.push_back(t);
    if (is_boundary(s.arcs[a - 1].kind) && is_boundary(s.arcs[a].kind)) {
      s.bang_bang_junctions.push_back(t);
    }
  }
  return s;
}

struct FirstOrderOptions {
  double tol_lambda = 0.0;
  double tol_u = 0.0;
};

/// dt * #{k : (Lambda_k > tol and u_k > u_m + tol_u) or (Lambda_k < -tol and u_k < u_M - tol_u)}
inline double check_first_order(std::span<const double> u, const Bounds& bounds,
                                std::span<const double> lambda, const TimeGrid& tgrid,
                                const FirstOrderOptions& opts = {}) {
  require_same(u.size(), lambda.size(), "check_first_order");
  std::size_t bad = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const bool push_down = lambda[k] > opts.tol_lambda && u[k] > bounds.lower + opts.tol_u;
    const bool push_up = lambda[k] < -opts.tol_lambda && u[k] < bounds.upper - opts.tol_u;
    if (push_down || push_up) ++bad;
  }
  return static_cast<double>(bad) * tgrid.dt();
}

struct ComplementarityMargin {
  double margin = std::numeric_limits<double>::infinity();
  bool has_boundary_arcs = false;
};

/// Smallest |Lambda| over the interiors of the boundary arcs (each arc shrunk
/// by one interval per side), plus the endpoint values for initial and
/// final boundary arcs.
inline ComplementarityMargin check_strict_complementarity(const ArcStructure& arcs,
                                                          std::span<const double> lambda) {
  ComplementarityMargin out;
  for (const Arc& a : arcs.arcs) {
    if (!is_boundary(a.kind)) continue;
    out.has_boundary_arcs = true;
    for (std::size_t k = a.first + 1; k + 1 <= a.last; ++k) {
      out.margin = std::min(out.margin, std::abs(lambda[k]));
    }
    if (a.first == 0) out.margin = std::min(out.margin, std::abs(lambda.front()));
    if (a.last + 1 == lambda.size()) out.margin = std::min(out.margin, std::abs(lambda.back()));
  }
  return out;
}

}  // namespace qctl
