#pragma once

// Spatial discretization of a 1-D interval with homogeneous Dirichlet
// boundary. All vectors hold interior nodes only; boundary values are zero.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qctl/errors.hpp"

namespace qctl {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

struct SpatialGrid {
  double x_lo = 0.0;
  double x_hi = 1.0;
  int n_x = 40;  // number of spatial steps

  SpatialGrid() = default;
  SpatialGrid(double lo, double hi, int steps) : x_lo(lo), x_hi(hi), n_x(steps) {
    if (!(hi > lo)) throw std::invalid_argument("SpatialGrid: x_hi must exceed x_lo");
    if (steps < 3) throw std::invalid_argument("SpatialGrid: n_x must be >= 3");
  }

  double h() const { return (x_hi - x_lo) / n_x; }
  std::size_t size() const { return static_cast<std::size_t>(n_x - 1); }
  /// Coordinate of interior node j (0-based, i.e. x_{j+1}).
  double node(std::size_t j) const { return x_lo + static_cast<double>(j + 1) * h(); }

  std::vector<double> nodes() const {
    std::vector<double> xs(size());
    for (std::size_t j = 0; j < xs.size(); ++j) xs[j] = node(j);
    return xs;
  }

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;
};

/// Complex-valued samples on the interior nodes of a SpatialGrid.
class ComplexField {
 public:
  ComplexField() = default;
  explicit ComplexField(const SpatialGrid& grid) : grid_(grid), values_(grid.size()) {}
  ComplexField(const SpatialGrid& grid, std::vector<cplx> values)
      : grid_(grid), values_(std::move(values)) {
    require_same(values_.size(), grid_.size(), "ComplexField");
  }

  static ComplexField sample(const SpatialGrid& grid,
                             const std::function<cplx(double)>& fn) {
    ComplexField out(grid);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = fn(grid.node(j));
    return out;
  }

  const SpatialGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  cplx& operator[](std::size_t j) { return values_[j]; }
  const cplx& operator[](std::size_t j) const { return values_[j]; }
  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }

  bool all_finite() const {
    for (const auto& v : values_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
  }

  ComplexField& operator+=(const ComplexField& o) {
    check_compatible(o);
    for (std::size_t j = 0; j < size(); ++j) values_[j] += o.values_[j];
    return *this;
  }
  ComplexField& operator-=(const ComplexField& o) {
    check_compatible(o);
    for (std::size_t j = 0; j < size(); ++j) values_[j] -= o.values_[j];
    return *this;
  }
  ComplexField& operator*=(cplx s) {
    for (auto& v : values_) v *= s;
    return *this;
  }
  /// this += a * x
  ComplexField& axpy(cplx a, const ComplexField& x) {
    check_compatible(x);
    for (std::size_t j = 0; j < size(); ++j) values_[j] += a * x.values_[j];
    return *this;
  }

  friend ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
  friend ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
  friend ComplexField operator*(cplx s, ComplexField a) { return a *= s; }
  friend ComplexField operator*(ComplexField a, cplx s) { return a *= s; }

  void check_compatible(const ComplexField& o) const {
    if (!(grid_ == o.grid_) || values_.size() != o.values_.size()) {
      throw DimensionError("ComplexField: grid mismatch");
    }
  }

 private:
  SpatialGrid grid_;
  std::vector<cplx> values_;
};

inline ComplexField midpoint(const ComplexField& a, const ComplexField& b) {
  ComplexField out = a;
  out += b;
  out *= 0.5;
  return out;
}

/// Samples of the real coupling profile b2 and its first two derivatives.
struct Potential {
  SpatialGrid grid;
  std::vector<double> b2;
  std::vector<double> grad_b2;
  std::vector<double> lap_b2;
  // Values of b2 at x_lo and x_hi; they enter the assembled commutator only
  // through products with Dirichlet zeros, kept for the difference stencils.
  double b2_lo = 0.0;
  double b2_hi = 0.0;

  static Potential zero(const SpatialGrid& grid) {
    Potential pot;
    pot.grid = grid;
    pot.b2.assign(grid.size(), 0.0);
    pot.grad_b2.assign(grid.size(), 0.0);
    pot.lap_b2.assign(grid.size(), 0.0);
    return pot;
  }

  /// Closed-form profile with analytic derivatives.
  static Potential analytic(const SpatialGrid& grid, const std::function<double(double)>& b,
                            const std::function<double(double)>& db,
                            const std::function<double(double)>& d2b) {
    Potential pot;
    pot.grid = grid;
    const std::size_t n = grid.size();
    pot.b2.resize(n);
    pot.grad_b2.resize(n);
    pot.lap_b2.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = grid.node(j);
      pot.b2[j] = b(x);
      pot.grad_b2[j] = db(x);
      pot.lap_b2[j] = d2b(x);
    }
    pot.b2_lo = b(grid.x_lo);
    pot.b2_hi = b(grid.x_hi);
    return pot;
  }

  /// Interior samples only; derivatives by central differences.
  static Potential from_samples(const SpatialGrid& grid, std::vector<double> samples,
                                double lo = 0.0, double hi = 0.0) {
    require_same(samples.size(), grid.size(), "Potential::from_samples");
    Potential pot;
    pot.grid = grid;
    pot.b2 = std::move(samples);
    pot.b2_lo = lo;
    pot.b2_hi = hi;
    const std::size_t n = grid.size();
    const double h = grid.h();
    pot.grad_b2.resize(n);
    pot.lap_b2.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double left = j == 0 ? lo : pot.b2[j - 1];
      const double right = j + 1 == n ? hi : pot.b2[j + 1];
      pot.grad_b2[j] = (right - left) / (2.0 * h);
      pot.lap_b2[j] = (left - 2.0 * pot.b2[j] + right) / (h * h);
    }
    return pot;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : b2) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_constant() const {
    for (double v : b2) {
      if (v != b2.front()) return false;
    }
    return b2_lo == b2_hi && (b2.empty() || b2_lo == b2.front());
  }
};

// b2 at the neighbours of interior node j, boundary values included
inline double left_b(const Potential& p, std::size_t j) { return j == 0 ? p.b2_lo : p.b2[j - 1]; }
inline double right_b(const Potential& p, std::size_t j) {
  return j + 1 == p.b2.size() ? p.b2_hi : p.b2[j + 1];
}

inline void check_grid(const Potential& pot, const ComplexField& x) {
  if (!(pot.grid == x.grid()) || pot.b2.size() != x.size()) {
    throw DimensionError("Potential/ComplexField grid mismatch");
  }
}

/// h * sum_j x_j * conj(y_j); linear in x, antilinear in y.
inline cplx inner(const ComplexField& x, const ComplexField& y) {
  x.check_compatible(y);
  cplx acc{0.0, 0.0};
  for (std::size_t j = 0; j < x.size(); ++j) acc += x[j] * std::conj(y[j]);
  return acc * x.grid().h();
}

inline double norm_sq(const ComplexField& x) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) acc += std::norm(x[j]);
  return acc * x.grid().h();
}

inline double norm(const ComplexField& x) { return std::sqrt(norm_sq(x)); }

/// Three-point Laplacian with zero Dirichlet ghost values.
inline ComplexField apply_laplacian(const ComplexField& x) {
  const std::size_t n = x.size();
  const double inv_h2 = 1.0 / (x.grid().h() * x.grid().h());
  ComplexField out(x.grid());
  for (std::size_t j = 0; j < n; ++j) {
    const cplx left = j == 0 ? cplx{} : x[j - 1];
    const cplx right = j + 1 == n ? cplx{} : x[j + 1];
    out[j] = (left - 2.0 * x[j] + right) * inv_h2;
  }
  return out;
}

/// Central first difference with zero Dirichlet ghost values.
inline ComplexField apply_gradient(const ComplexField& x) {
  const std::size_t n = x.size();
  const double inv_2h = 0.5 / x.grid().h();
  ComplexField out(x.grid());
  for (std::size_t j = 0; j < n; ++j) {
    const cplx left = j == 0 ? cplx{} : x[j - 1];
    const cplx right = j + 1 == n ? cplx{} : x[j + 1];
    out[j] = (right - left) * inv_2h;
  }
  return out;
}

/// Pointwise multiplication by a real profile.
inline ComplexField multiply(std::span<const double> weights, const ComplexField& x) {
  require_same(weights.size(), x.size(), "multiply");
  ComplexField out(x.grid());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = weights[j] * x[j];
  return out;
}

/// (B2hat x)_j = -i b2_j x_j.
inline ComplexField apply_B2hat(const Potential& pot, const ComplexField& x) {
  check_grid(pot, x);
  ComplexField out(x.grid());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = -kI * pot.b2[j] * x[j];
  return out;
}

/// Closed-form commutator M1 x = -2 b2' Dx - b2'' x.
inline ComplexField apply_M1(const Potential& pot, const ComplexField& x) {
  check_grid(pot, x);
  const ComplexField dx = apply_gradient(x);
  ComplexField out(x.grid());
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = -2.0 * pot.grad_b2[j] * dx[j] - pot.lap_b2[j] * x[j];
  }
  return out;
}

/// Closed-form Hilbert adjoint of M1: M1^H p = 2 b2' Dp + b2'' p (= -M1 p).
inline ComplexField apply_M1_adjoint(const Potential& pot, const ComplexField& p) {
  check_grid(pot, p);
  const ComplexField dp = apply_gradient(p);
  ComplexField out(p.grid());
  for (std::size_t j = 0; j < p.size(); ++j) {
    out[j] = 2.0 * pot.grad_b2[j] * dp[j] + pot.lap_b2[j] * p[j];
  }
  return out;
}

/// Closed-form [M1, B2hat] x = 2 i |b2'|^2 x.
inline ComplexField apply_M1_B2_commutator(const Potential& pot, const ComplexField& x) {
  check_grid(pot, x);
  ComplexField out(x.grid());
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = 2.0 * kI * pot.grad_b2[j] * pot.grad_b2[j] * x[j];
  }
  return out;
}

// Assembled commutators. With A_h = -i Delta_h and B = -i diag(b2) the
// matrix [A_h, B] is real and skew-symmetric:
//   ([A_h, B] x)_j = -((b_{j-1} - b_j) x_{j-1} + (b_{j+1} - b_j) x_{j+1}) / h^2
// and [[A_h, B], B] is
//   i ((b_{j-1} - b_j)^2 x_{j-1} + (b_{j+1} - b_j)^2 x_{j+1}) / h^2.

inline ComplexField apply_M1_assembled(const Potential& pot, const ComplexField& x) {
  check_grid(pot, x);
  const std::size_t n = x.size();
  const double inv_h2 = 1.0 / (x.grid().h() * x.grid().h());
  ComplexField out(x.grid());
  for (std::size_t j = 0; j < n; ++j) {
    const cplx left = j == 0 ? cplx{} : x[j - 1];
    const cplx right = j + 1 == n ? cplx{} : x[j + 1];
    out[j] = -((left_b(pot, j) - pot.b2[j]) * left + (right_b(pot, j) - pot.b2[j]) * right) * inv_h2;
  }
  return out;
}

/// Conjugate transpose of the assembled M1 (the matrix is real skew-symmetric).
inline ComplexField apply_M1_assembled_adjoint(const Potential& pot, const ComplexField& p) {
  ComplexField out = apply_M1_assembled(pot, p);
  out *= -1.0;
  return out;
}

inline ComplexField apply_M1_B2_commutator_assembled(const Potential& pot, const ComplexField& x) {
  check_grid(pot, x);
  const std::size_t n = x.size();
  const double inv_h2 = 1.0 / (x.grid().h() * x.grid().h());
  ComplexField out(x.grid());
  for (std::size_t j = 0; j < n; ++j) {
    const cplx left = j == 0 ? cplx{} : x[j - 1];
    const cplx right = j + 1 == n ? cplx{} : x[j + 1];
    const double dl = left_b(pot, j) - pot.b2[j];
    const double dr = right_b(pot, j) - pot.b2[j];
    out[j] = kI * (dl * dl * left + dr * dr * right) * inv_h2;
  }
  return out;
}

/// Which realisation of the commutators the second-order machinery uses.
/// `assembled` is exact for the space-discrete system, so the Goh identity
/// holds up to time discretization only; `analytic` differs by O(h^2).
enum class CommutatorScheme { assembled, analytic };

inline ComplexField apply_M1(const Potential& pot, const ComplexField& x, CommutatorScheme s) {
  return s == CommutatorScheme::assembled ? apply_M1_assembled(pot, x) : apply_M1(pot, x);
}

inline ComplexField apply_M1_adjoint(const Potential& pot, const ComplexField& p,
                                     CommutatorScheme s) {
  return s == CommutatorScheme::assembled ? apply_M1_assembled_adjoint(pot, p)
                                          : apply_M1_adjoint(pot, p);
}

inline ComplexField apply_M1_B2_commutator(const Potential& pot, const ComplexField& x,
                                           CommutatorScheme s) {
  return s == CommutatorScheme::assembled ? apply_M1_B2_commutator_assembled(pot, x)
                                          : apply_M1_B2_commutator(pot, x);
}

}  // namespace qctl
