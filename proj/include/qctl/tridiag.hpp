#pragma once

#include <algorithm>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "qctl/errors.hpp"

namespace qctl {

/// Thomas elimination for a complex tridiagonal system, no pivoting.
/// sub[0] and sup[n-1] are ignored. Throws NumericalError on a vanishing pivot.
inline std::vector<std::complex<double>> solve_tridiagonal(
    std::span<const std::complex<double>> sub, std::span<const std::complex<double>> diag,
    std::span<const std::complex<double>> sup, std::span<const std::complex<double>> rhs) {
  using C = std::complex<double>;
  const std::size_t n = diag.size();
  require_same(sub.size(), n, "solve_tridiagonal(sub)");
  require_same(sup.size(), n, "solve_tridiagonal(sup)");
  require_same(rhs.size(), n, "solve_tridiagonal(rhs)");
  std::vector<C> c_star(n);
  std::vector<C> x(n);
  if (n == 0) return x;

  constexpr double kTiny = 1e-300;
  C pivot = diag[0];
  if (std::abs(pivot) < kTiny) throw NumericalError("solve_tridiagonal: zero pivot at row 0");
  c_star[0] = sup[0] / pivot;
  x[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - sub[i] * c_star[i - 1];
    if (std::abs(pivot) < kTiny) {
      throw NumericalError("solve_tridiagonal: zero pivot at row " + std::to_string(i));
    }
    c_star[i] = sup[i] / pivot;
    x[i] = (rhs[i] - sub[i] * x[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c_star[i] * x[i + 1];
  return x;
}

/// Max-norm residual |A x - rhs| of a tridiagonal system.
inline double tridiagonal_residual(std::span<const std::complex<double>> sub,
                                   std::span<const std::complex<double>> diag,
                                   std::span<const std::complex<double>> sup,
                                   std::span<const std::complex<double>> x,
                                   std::span<const std::complex<double>> rhs) {
  const std::size_t n = diag.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::complex<double> ax = diag[i] * x[i];
    if (i > 0) ax += sub[i] * x[i - 1];
    if (i + 1 < n) ax += sup[i] * x[i + 1];
    worst = std::max(worst, std::abs(ax - rhs[i]));
  }
  return worst;
}

}  // namespace qctl
