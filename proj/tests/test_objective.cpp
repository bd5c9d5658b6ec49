#include <cmath>

#include <gtest/gtest.h>

#include "qctl/checks.hpp"
#include "qctl/objective.hpp"
#include "qctl/second_order.hpp"
#include "test_support.hpp"

using namespace qctl;
using namespace qctl::testing;

namespace {

Control shifted(const Control& u, const Control& v, double s) {
  std::vector<double> out(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = u[k] + s * v[k];
  return Control(out);
}

double dot(const std::vector<double>& a, const Control& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

Trajectory difference(const Trajectory& a, const Trajectory& b) {
  Trajectory d{a.tgrid, {}};
  for (std::size_t k = 0; k < a.size(); ++k) d.states.push_back(a[k] - b[k]);
  return d;
}

// F(u+v) - F(u) - DF(u)v - Q/2 with either delta Psi or z[v] in Q
struct TaylorResiduals {
  double exact;
  double linearized;
};

TaylorResiduals taylor(const ProblemSpec& s, const Control& u, const Control& v) {
  const GradientResult g = gradient_with_state(s, u);
  const Control uv = shifted(u, v, 1.0);
  const Trajectory psi_v = propagate_forward(s, uv);
  const double Fv = evaluate_cost(s, uv, psi_v).total;
  const double lin = dot(g.gradient, v);
  const Trajectory dpsi = difference(psi_v, g.psi);
  const Trajectory z = propagate_linearized(s, u, g.psi, v);
  const double q_exact = quad_form_Q(s, u, g.psi, g.p, v, dpsi);
  const double q_lin = quad_form_Q(s, u, g.psi, g.p, v, z);
  return {Fv - g.cost - lin - 0.5 * q_exact, Fv - g.cost - lin - 0.5 * q_lin};
}

}  // namespace

TEST(Cost, ZeroWhenTrackingIsPerfectAndControlVanishes) {
  ProblemSpec s = tracking_spec();
  const Control u = Control::constant(200, 0.0);
  const Trajectory psi = propagate_forward(s, u);
  s.psi_d = TimeField::sampled(psi.states);
  s.psi_dT = psi.final();
  EXPECT_EQ(evaluate_cost(s, u, psi).total, 0.0);
}

TEST(Cost, ControlTermsExactOnConstants) {
  ProblemSpec s = tracking_spec();
  s.alpha1 = 0.3;
  s.alpha2 = 0.7;
  const double c = 0.4;
  const Control u = Control::constant(200, c);
  const CostBreakdown cb = evaluate_cost(s, u, propagate_forward(s, u));
  EXPECT_NEAR(cb.control_linear, 0.3 * c * 10.0, 1e-12);
  EXPECT_NEAR(cb.control_quadratic, 0.5 * 0.7 * c * c * 10.0, 1e-12);
  const double sum = cb.control_linear + cb.control_quadratic + cb.tracking_running + cb.tracking_final;
  EXPECT_NEAR(cb.total, sum, 1e-12 * std::abs(sum));
}

TEST(Cost, SecondOrderAgainstRefinedQuadrature) {
  // smooth data only: white-noise fields put energy in modes that CN does not
  // resolve at these steps, hiding the asymptotic rate
  auto cost_at = [](int nt) {
    ProblemSpec s = random_spec(21, nt, 24, 1.0);
    s.pot = bump_on(s.grid, 8.0);
    s.psi0 = sine_mode(s.grid, 1);
    s.psi0.axpy(cplx(0.3, 0.2), sine_mode(s.grid, 2));
    ComplexField f = sine_mode(s.grid, 1);
    f *= cplx(0.1, -0.2);
    s.f = TimeField::constant(f);
    s.psi_d = TimeField::constant(sine_mode(s.grid, 2));
    s.psi_dT = sine_mode(s.grid, 1);
    std::vector<double> u(nt);
    for (int k = 0; k < nt; ++k) u[k] = 0.3 * std::cos(3.0 * s.tgrid.mid(k));
    return reduced_cost(s, Control(u));
  };
  const double ref = cost_at(8 * 320);
  const double e1 = std::abs(cost_at(80) - ref), e2 = std::abs(cost_at(160) - ref),
               e3 = std::abs(cost_at(320) - ref);
  EXPECT_GE(std::log2(e1 / e2), 1.8) << e1 << " " << e2 << " " << e3;
  EXPECT_GE(std::log2(e2 / e3), 1.8);
}

TEST(Cost, GlobalPhaseInvariance) {
  const ProblemSpec s = random_spec(5);
  ProblemSpec r = s;
  const cplx ph = std::exp(kI * 0.77);
  r.psi0 *= ph;
  r.psi_dT *= ph;
  r.psi_d = s.psi_d.rotated(ph);
  r.f = s.f.rotated(ph);
  const Control u = random_admissible(s, 6);
  EXPECT_NEAR(reduced_cost(r, u), reduced_cost(s, u), 1e-12 * std::abs(reduced_cost(s, u)));
}

TEST(Cost, NonFiniteIsDivergence) {
  const ProblemSpec s = tracking_spec();
  Trajectory psi = propagate_forward(s, Control::constant(200, 0.5));
  psi.states[5][3] = cplx(NAN, 0.0);
  EXPECT_THROW(evaluate_cost(s, Control::constant(200, 0.5), psi), DivergenceError);
}

TEST(SwitchingFunction, TrivialCases) {
  ProblemSpec s = tracking_spec();
  s.alpha2 = 0.2;
  const Control u = random_admissible(s, 2);
  const Trajectory psi = propagate_forward(s, u);
  CostateTrajectory zero{s.tgrid, std::vector<ComplexField>(201, ComplexField(s.grid)),
                         std::vector<ComplexField>(200, ComplexField(s.grid))};
  const auto lam = switching_function(s, u, psi, zero);
  for (std::size_t k = 0; k < 200; ++k) EXPECT_DOUBLE_EQ(lam[k], s.alpha1 + s.alpha2 * u[k]);

  ProblemSpec f = s;
  f.alpha2 = 0.0;
  f.pot = Potential::zero(f.grid);
  const GradientResult g = gradient_with_state(f, u);
  for (std::size_t k = 0; k < 200; ++k) {
    EXPECT_EQ(g.lambda[k], f.alpha1);
    EXPECT_NEAR(g.gradient[k], f.tgrid.dt() * f.alpha1, 1e-18);
  }
}

TEST(Gradient, MatchesCentralDifferences) {
  for (unsigned seed : {1u, 2u, 3u}) {
    const ProblemSpec s = random_spec(seed);
    const GradientGap gap = gradient_gap(s, random_admissible(s, seed + 10));
    EXPECT_LT(gap.max_relative, 1e-6) << "seed " << seed;
    EXPECT_LT(gap.max_exactness, 1e-12) << "seed " << seed;
  }
}

TEST(Gradient, ReferenceCostAgreesWithSolver) {
  for (unsigned seed : {1u, 2u}) {
    const ProblemSpec s = random_spec(seed);
    const Control u = random_admissible(s, seed);
    const double F = reduced_cost(s, u);
    EXPECT_NEAR(static_cast<double>(reference_cost(s, u.values)), F, 1e-12 * std::abs(F));
  }
  const ProblemSpec s7 = tracking_spec();
  const Control u = random_admissible(s7, 4);
  EXPECT_NEAR(static_cast<double>(reference_cost(s7, u.values)), reduced_cost(s7, u), 1e-12);
}

TEST(Gradient, DirectionalDerivativeSecondOrder) {
  const ProblemSpec s = random_spec(8);
  const Control u = random_admissible(s, 9);
  const Control v = smooth_direction(s.tgrid, 10);
  const double dF = dot(reduced_gradient(s, u), v);
  std::vector<double> err;
  for (double h : {0.2, 0.1, 0.05, 0.025}) {
    const double q = (reduced_cost(s, shifted(u, v, h)) - reduced_cost(s, shifted(u, v, -h))) / (2 * h);
    err.push_back(std::abs(q - dF));
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) EXPECT_NEAR(err[i] / err[i + 1], 4.0, 0.3);
}

TEST(Taylor, ExactWithStateDifference) {
  const ProblemSpec s = random_spec(11);
  const Control u = random_admissible(s, 12);
  const Control v = smooth_direction(s.tgrid, 13);
  const TaylorResiduals r = taylor(s, u, shifted(Control::constant(v.size(), 0.0), v, 0.3));
  EXPECT_LT(std::abs(r.exact), 1e-12 * (1.0 + std::abs(reduced_cost(s, u))));
}

TEST(Taylor, CubicWithLinearizedState) {
  const ProblemSpec s = tracking_spec();
  const Control u = Control::constant(200, 0.5);
  const Control v = smooth_direction(s.tgrid, 14);
  std::vector<double> res;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    res.push_back(std::abs(taylor(s, u, shifted(Control::constant(200, 0.0), v, eps)).linearized));
  }
  for (std::size_t i = 0; i + 1 < res.size(); ++i) {
    EXPECT_GE(std::log2(res[i] / res[i + 1]), 2.7) << res[i] << " -> " << res[i + 1];
  }
}
