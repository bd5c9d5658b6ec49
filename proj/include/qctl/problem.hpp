#pragma once

// Time grid, controls, time-dependent fields and the full problem instance.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qctl/field.hpp"

namespace qctl {

struct TimeGrid {
  double T = 10.0;
  int n_t = 200;

  TimeGrid() = default;
  TimeGrid(double horizon, int steps) : T(horizon), n_t(steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: T must be positive");
    if (steps < 1) throw std::invalid_argument("TimeGrid: n_t must be positive");
  }

  double dt() const { return T / n_t; }
  std::size_t intervals() const { return static_cast<std::size_t>(n_t); }
  std::size_t nodes() const { return static_cast<std::size_t>(n_t) + 1; }
  double node(std::size_t k) const { return static_cast<double>(k) * dt(); }
  double mid(std::size_t k) const { return (static_cast<double>(k) + 0.5) * dt(); }
  /// Trapezoid weight of node k (in units of dt).
  double trapezoid_weight(std::size_t k) const {
    return (k == 0 || k == nodes() - 1) ? 0.5 : 1.0;
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

struct Bounds {
  double lower = 0.0;
  double upper = 1.0;

  Bounds() = default;
  Bounds(double lo, double hi) : lower(lo), upper(hi) {
    if (!(lo < hi)) throw std::invalid_argument("Bounds: require u_m < u_M");
  }
  double clamp(double v) const { return std::min(std::max(v, lower), upper); }
  bool contains(double v) const { return v >= lower && v <= upper; }
  double width() const { return upper - lower; }
};

/// Piecewise-constant control, one value per time interval.
struct Control {
  std::vector<double> values;
  std::optional<Bounds> bounds;

  Control() = default;
  explicit Control(std::vector<double> v, std::optional<Bounds> b = std::nullopt)
      : values(std::move(v)), bounds(b) {}
  static Control constant(std::size_t n, double value, std::optional<Bounds> b = std::nullopt) {
    return Control(std::vector<double>(n, value), b);
  }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }
  double& operator[](std::size_t k) { return values[k]; }

  bool admissible() const {
    if (!bounds) return true;
    for (double v : values) {
      if (!bounds->contains(v)) return false;
    }
    return true;
  }
};

/// A complex field that may vary in time: identically zero, static, or
/// sampled on the time nodes. Interval values are averages of node values.
class TimeField {
 public:
  enum class Kind { zero, constant, nodes };

  TimeField() = default;
  static TimeField zero() { return TimeField(); }
  static TimeField constant(ComplexField value) {
    TimeField tf;
    tf.kind_ = Kind::constant;
    tf.samples_.push_back(std::move(value));
    return tf;
  }
  static TimeField sampled(std::vector<ComplexField> node_values) {
    if (node_values.empty()) throw std::invalid_argument("TimeField: no samples");
    TimeField tf;
    tf.kind_ = Kind::nodes;
    tf.samples_ = std::move(node_values);
    return tf;
  }

  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::zero; }
  const std::vector<ComplexField>& samples() const { return samples_; }

  void check(const SpatialGrid& grid, const TimeGrid& tgrid, const char* what) const {
    for (const auto& s : samples_) {
      if (!(s.grid() == grid)) throw DimensionError(std::string(what) + ": spatial grid mismatch");
    }
    if (kind_ == Kind::nodes) require_same(samples_.size(), tgrid.nodes(), what);
  }

  ComplexField at_node(const SpatialGrid& grid, std::size_t k) const {
    switch (kind_) {
      case Kind::zero: return ComplexField(grid);
      case Kind::constant: return samples_.front();
      case Kind::nodes: return samples_.at(k);
    }
    return ComplexField(grid);
  }

  ComplexField at_interval(const SpatialGrid& grid, std::size_t k) const {
    switch (kind_) {
      case Kind::zero: return ComplexField(grid);
      case Kind::constant: return samples_.front();
      case Kind::nodes: return midpoint(samples_.at(k), samples_.at(k + 1));
    }
    return ComplexField(grid);
  }

  /// Multiplies every sample by a unit phase (used for invariance checks).
  TimeField rotated(cplx phase) const {
    TimeField out = *this;
    for (auto& s : out.samples_) s *= phase;
    return out;
  }

 private:
  Kind kind_ = Kind::zero;
  std::vector<ComplexField> samples_;
};

/// Full problem instance. The tracking weights Q and Q_T are the identity.
struct ProblemSpec {
  SpatialGrid grid;
  TimeGrid tgrid;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  Bounds bounds;
  Potential pot;
  TimeField f;
  ComplexField psi0;
  TimeField psi_d;
  ComplexField psi_dT;

  void validate() const {
    if (alpha2 < 0.0) throw std::invalid_argument("ProblemSpec: alpha2 must be >= 0");
    if (!(bounds.lower < bounds.upper)) throw std::invalid_argument("ProblemSpec: u_m < u_M");
    if (!(pot.grid == grid)) throw DimensionError("ProblemSpec: potential grid mismatch");
    if (!(psi0.grid() == grid)) throw DimensionError("ProblemSpec: psi0 grid mismatch");
    if (!(psi_dT.grid() == grid)) throw DimensionError("ProblemSpec: psi_dT grid mismatch");
    f.check(grid, tgrid, "ProblemSpec.f");
    psi_d.check(grid, tgrid, "ProblemSpec.psi_d");
    if (!psi0.all_finite()) throw std::invalid_argument("ProblemSpec: psi0 not finite");
    if (norm(psi0) == 0.0) throw std::invalid_argument("ProblemSpec: psi0 must be nonzero");
  }

  void check_control(const Control& u) const {
    require_same(u.size(), tgrid.intervals(), "control length vs n_t");
  }
};

}  // namespace qctl
