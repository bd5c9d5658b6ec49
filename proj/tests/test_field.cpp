#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qctl/field.hpp"
#include "qctl/tridiag.hpp"

using namespace qctl;

namespace {

constexpr double kPi = std::numbers::pi;

ComplexField random_field(const SpatialGrid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> N;
  ComplexField x(g);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = {N(rng), N(rng)};
  return x;
}

// smooth, vanishing with its slope at both ends of (0,1)
Potential bump(const SpatialGrid& g, double c = 3.0) {
  return Potential::analytic(
      g, [=](double x) { return c * x * x * (1 - x) * (1 - x); },
      [=](double x) { return 2 * c * x * (1 - x) * (1 - 2 * x); },
      [=](double x) { return 2 * c * (1 - 6 * x + 6 * x * x); });
}

ComplexField smooth_state(const SpatialGrid& g) {
  return ComplexField::sample(g, [](double x) {
    return std::sin(kPi * x) * std::exp(cplx(0.0, 2.0 * x));
  });
}

// Dense Hermitian eigen-solve of the real symmetric tridiagonal -Delta_h by
// Jacobi rotations; an oracle that knows nothing about the sine formula.
std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-22) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1 : -1) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace

TEST(SpatialGrid, InteriorNodes) {
  const SpatialGrid g(0.0, 1.0, 40);
  EXPECT_DOUBLE_EQ(g.h(), 0.025);
  EXPECT_EQ(g.size(), 39u);
  EXPECT_DOUBLE_EQ(g.node(0), 0.025);
  EXPECT_DOUBLE_EQ(g.node(38), 0.975);
  EXPECT_THROW(SpatialGrid(0.0, 1.0, 2), std::invalid_argument);
  EXPECT_THROW(SpatialGrid(1.0, 0.0, 10), std::invalid_argument);
}

TEST(Inner, SesquilinearAndPositive) {
  const SpatialGrid g(0.0, 1.0, 40);
  const auto x = random_field(g, 1), y = random_field(g, 2);
  EXPECT_GE(inner(x, x).real(), 0.0);
  EXPECT_EQ(inner(x, x).imag(), 0.0);
  const cplx a = inner(x, y), b = inner(y, x);
  EXPECT_NEAR(std::abs(a - std::conj(b)), 0.0, 1e-14);
  ComplexField ix = x;
  ix *= kI;
  EXPECT_NEAR(std::abs(inner(ix, y) - kI * a), 0.0, 1e-13);
  ComplexField iy = y;
  iy *= kI;
  EXPECT_NEAR(std::abs(inner(x, iy) + kI * a), 0.0, 1e-13);
}

TEST(Inner, SineSquaredIntegral) {
  // integral of sin^2(pi x) over (0,1) is 1/2; the rectangle rule on interior
  // nodes is exact up to round-off for this trigonometric polynomial
  const SpatialGrid g(0.0, 1.0, 40);
  const auto s = ComplexField::sample(g, [](double x) { return cplx(std::sin(kPi * x)); });
  EXPECT_NEAR(inner(s, s).real(), 0.5, 1e-12);
}

TEST(Inner, GridMismatchThrows) {
  const SpatialGrid g1(0.0, 1.0, 40), g2(0.0, 1.0, 20);
  EXPECT_THROW(inner(ComplexField(g1), ComplexField(g2)), DimensionError);
}

TEST(Laplacian, ZeroAndLinearity) {
  const SpatialGrid g(0.0, 1.0, 40);
  EXPECT_EQ(norm(apply_laplacian(ComplexField(g))), 0.0);
  const auto x = random_field(g, 3), y = random_field(g, 4);
  const cplx a{1.5, -0.5}, b{-2.0, 0.25};
  ComplexField comb = x;
  comb *= a;
  comb.axpy(b, y);
  ComplexField ref = apply_laplacian(x);
  ref *= a;
  ref.axpy(b, apply_laplacian(y));
  EXPECT_LT(norm(apply_laplacian(comb) - ref), 1e-10 * norm(ref));
}

TEST(Laplacian, SineEigenvectorsMatchDenseEigenvalues) {
  const int nx = 40;
  const SpatialGrid g(0.0, 1.0, nx);
  const double h = g.h();
  const std::size_t n = g.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    a[j][j] = 2 / (h * h);
    if (j + 1 < n) a[j][j + 1] = a[j + 1][j] = -1 / (h * h);
  }
  const auto ev = jacobi_eigenvalues(a);
  for (int k : {1, 2, 5, 17}) {
    const auto s = ComplexField::sample(g, [=](double x) { return cplx(std::sin(k * kPi * x)); });
    const auto ls = apply_laplacian(s);
    const double mu = -4.0 / (h * h) * std::pow(std::sin(k * kPi * h / 2), 2);
    ComplexField r = ls;
    r.axpy(-mu, s);
    EXPECT_LT(norm(r), 1e-9 * norm(ls)) << "k = " << k;
    EXPECT_NEAR(-mu, ev[k - 1], 1e-9 * ev[k - 1]) << "k = " << k;
  }
}

TEST(Laplacian, SymmetricNegativeDefinite) {
  const SpatialGrid g(-1.0, 2.0, 33);
  for (unsigned s = 0; s < 5; ++s) {
    const auto x = random_field(g, 10 + s), y = random_field(g, 20 + s);
    const cplx q = inner(apply_laplacian(x), x);
    EXPECT_LT(std::abs(q.imag()), 1e-12 * norm_sq(x) / (g.h() * g.h()));
    EXPECT_LE(q.real(), 0.0);
    const cplx l = inner(apply_laplacian(x), y), r = inner(x, apply_laplacian(y));
    EXPECT_LT(std::abs(l - r), 1e-12 * std::abs(l));
  }
}

TEST(B2hat, ElementaryProperties) {
  const SpatialGrid g(0.0, 1.0, 40);
  const Potential pot = bump(g);
  const auto real_x = ComplexField::sample(g, [](double x) { return cplx(x * (1 - x)); });
  const auto y = apply_B2hat(pot, real_x);
  for (std::size_t j = 0; j < y.size(); ++j) EXPECT_EQ(y[j].real(), 0.0);
  const auto x = random_field(g, 5);
  const auto yy = apply_B2hat(pot, apply_B2hat(pot, x));
  for (std::size_t j = 0; j < x.size(); ++j) {
    EXPECT_NEAR(std::abs(yy[j] + pot.b2[j] * pot.b2[j] * x[j]), 0.0, 1e-14);
  }
  EXPECT_LE(norm(apply_B2hat(pot, x)), pot.max_abs() * norm(x) * (1 + 1e-14));
  const auto z = random_field(g, 6);
  EXPECT_LT(std::abs(inner(apply_B2hat(pot, x), z) + inner(x, apply_B2hat(pot, z))), 1e-12 * norm(x) * norm(z));
}

TEST(M1, VanishesForConstantPotentialAndZeroInput) {
  const SpatialGrid g(0.0, 1.0, 40);
  const Potential c = Potential::analytic(
      g, [](double) { return 2.5; }, [](double) { return 0.0; }, [](double) { return 0.0; });
  const auto x = random_field(g, 7);
  EXPECT_EQ(norm(apply_M1(c, x)), 0.0);
  EXPECT_EQ(norm(apply_M1_assembled(c, x)), 0.0);
  EXPECT_EQ(norm(apply_M1_B2_commutator(c, x)), 0.0);
  EXPECT_LT(norm(apply_M1_B2_commutator_assembled(c, x)), 1e-12);
  EXPECT_EQ(norm(apply_M1(bump(g), ComplexField(g))), 0.0);
}

TEST(M1, AssembledIsMatrixCommutator) {
  // Ahat = -i Delta_h, B2hat = -i b2: [Ahat, B2hat] x computed by composition
  const SpatialGrid g(0.0, 1.0, 40);
  const Potential pot = bump(g);
  const auto x = random_field(g, 8);
  ComplexField ab = apply_laplacian(apply_B2hat(pot, x));
  ab *= -kI;
  ComplexField ba = apply_laplacian(x);
  ba *= -kI;
  ba = apply_B2hat(pot, ba);
  const ComplexField comm = ab - ba;
  EXPECT_LT(norm(apply_M1_assembled(pot, x) - comm), 1e-12 * norm(comm));
  // its adjoint is the conjugate transpose
  const auto y = random_field(g, 9);
  EXPECT_LT(std::abs(inner(apply_M1_assembled(pot, x), y) - inner(x, apply_M1_assembled_adjoint(pot, y))),
            1e-12 * norm(comm) * norm(y));
}

TEST(M1, ClosedFormConvergesToMatrixCommutator) {
  std::vector<double> err;
  for (int nx : {40, 80, 160}) {
    const SpatialGrid g(0.0, 1.0, nx);
    const Potential pot = bump(g);
    const auto x = smooth_state(g);
    err.push_back(norm(apply_M1(pot, x) - apply_M1_assembled(pot, x)));
  }
  const double order = std::log2(err[0] / err[2]) / 2.0;
  EXPECT_GE(order, 1.8) << err[0] << " " << err[1] << " " << err[2];
}

TEST(M1, AdjointClosedFormMatchesTranspose) {
  std::vector<double> err;
  for (int nx : {40, 80, 160}) {
    const SpatialGrid g(0.0, 1.0, nx);
    const Potential pot = bump(g);
    const auto p = smooth_state(g);
    err.push_back(norm(apply_M1_adjoint(pot, p) - apply_M1_assembled_adjoint(pot, p)));
  }
  EXPECT_GE(std::log2(err[0] / err[2]) / 2.0, 1.8);
}

TEST(M1B2Commutator, ImaginaryNonnegative) {
  const SpatialGrid g(0.0, 1.0, 40);
  const Potential pot = bump(g);
  const auto one = ComplexField::sample(g, [](double) { return cplx(1.0); });
  const auto c = apply_M1_B2_commutator(pot, one);
  for (std::size_t j = 0; j < c.size(); ++j) {
    EXPECT_EQ(c[j].real(), 0.0);
    EXPECT_GE(c[j].imag(), 0.0);
  }
}

TEST(M1B2Commutator, MatchesCompositionToSecondOrder) {
  std::vector<double> err_closed, err_assembled;
  for (int nx : {40, 80, 160}) {
    const SpatialGrid g(0.0, 1.0, nx);
    const Potential pot = bump(g);
    const auto x = smooth_state(g);
    const ComplexField comp =
        apply_M1(pot, apply_B2hat(pot, x)) - apply_B2hat(pot, apply_M1(pot, x));
    err_closed.push_back(norm(apply_M1_B2_commutator(pot, x) - comp));
    const ComplexField comp_a =
        apply_M1_assembled(pot, apply_B2hat(pot, x)) - apply_B2hat(pot, apply_M1_assembled(pot, x));
    err_assembled.push_back(norm(apply_M1_B2_commutator_assembled(pot, x) - comp_a));
  }
  EXPECT_GE(std::log2(err_closed[0] / err_closed[2]) / 2.0, 1.8);
  for (double e : err_assembled) EXPECT_LT(e, 1e-10);
}

TEST(Potential, FromSamplesDerivativesSecondOrder) {
  std::vector<double> e1, e2;
  for (int nx : {40, 80, 160}) {
    const SpatialGrid g(0.0, 1.0, nx);
    const Potential exact = bump(g);
    const Potential fd = Potential::from_samples(g, exact.b2);
    double m1 = 0, m2 = 0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      m1 = std::max(m1, std::abs(fd.grad_b2[j] - exact.grad_b2[j]));
      m2 = std::max(m2, std::abs(fd.lap_b2[j] - exact.lap_b2[j]));
    }
    e1.push_back(m1);
    e2.push_back(m2);
  }
  EXPECT_GE(std::log2(e1[0] / e1[2]) / 2.0, 1.8);
  EXPECT_GE(std::log2(e2[0] / e2[2]) / 2.0, 1.8);
  EXPECT_THROW(Potential::from_samples(SpatialGrid(0, 1, 10), std::vector<double>(5)), DimensionError);
}

TEST(Tridiagonal, SolvesComplexSystem) {
  const std::size_t n = 25;
  std::mt19937 rng(11);
  std::normal_distribution<double> N;
  std::vector<cplx> sub(n), diag(n), sup(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    sub[i] = {N(rng), N(rng)};
    sup[i] = {N(rng), N(rng)};
    diag[i] = cplx(4.0 + N(rng), N(rng));
    rhs[i] = {N(rng), N(rng)};
  }
  sub[0] = sup[n - 1] = 0.0;
  const auto x = solve_tridiagonal(sub, diag, sup, rhs);
  EXPECT_LT(tridiagonal_residual(sub, diag, sup, x, rhs), 1e-12);
  std::vector<cplx> zero_diag(n, 0.0), z(n, 0.0);
  EXPECT_THROW(solve_tridiagonal(z, zero_diag, z, rhs), NumericalError);
}
