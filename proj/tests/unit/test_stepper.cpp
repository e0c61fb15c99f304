#include "helpers.hpp"

#include "vdfem/scenarios.hpp"
#include "vdfem/stepper.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vdfem;
using namespace vdfem::test;

namespace {

Discretization disc(int n, int s, int m) { return make_discretization(rect_mesh(-1, 1, n), SpaceKind::RT, s, m); }

StepConfig config(double dt, double c) {
  StepConfig cfg;
  cfg.dt = dt;
  cfg.upwind = {c, c};
  return cfg;
}

} // namespace

TEST(Stepper, ConfigValidation) {
  StepConfig cfg;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.dt = 0.1;
  EXPECT_NO_THROW(cfg.validate());
  cfg.picard_tol = 1e-15;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.picard_tol = 1e-13;
  cfg.picard_max = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.picard_max = 5;
  cfg.upwind = {0.7, 0.0};
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Stepper, RestStateUnchanged) {
  const Discretization d = disc(4, 1, 1);
  const Stepper stepper(d);
  const DiscreteField rho = l2_project_scalar(analytic(vortex_density, *d.mesh, *d.quad), d.density, *d.quad);
  const State s0 = stepper.make_state(DiscreteField(d.velocity), rho);
  const auto [s1, report] = stepper.step(s0, config(0.01, 0.5));
  EXPECT_EQ(report.iterations, 1);
  EXPECT_EQ(s1.u.coeffs().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s1.p.coeffs().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE((s1.rho.coeffs() - s0.rho.coeffs()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_DOUBLE_EQ(s1.t, 0.01);
}

TEST(Stepper, ConstantDensityStaysConstant) {
  std::mt19937 gen(1);
  const Discretization d = disc(4, 1, 1);
  const Stepper stepper(d);
  const DiscreteField rho = l2_project_scalar(analytic([](const Vec2&) { return 1.5; }, *d.mesh, *d.quad), d.density,
                                              *d.quad);
  const State s0 = stepper.make_state(random_divfree(gen, d), rho);
  for (double c : {0.0, 0.5}) {
    const auto [s1, report] = stepper.step(s0, config(0.01, c));
    EXPECT_LE((s1.rho.coeffs() - s0.rho.coeffs()).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_GT(report.iterations, 1);
  }
}

TEST(Stepper, PicardFailureIsAnError) {
  const Discretization d = disc(4, 1, 1);
  const Stepper stepper(d);
  const State s0 = initial_state(d, "vortex");
  StepConfig cfg = config(0.05, 0.5);
  cfg.picard_max = 2;
  try {
    stepper.step(s0, cfg);
    FAIL() << "expected PicardError";
  } catch (const PicardError& e) {
    EXPECT_EQ(e.iterations, 2);
    EXPECT_GT(e.increment, cfg.picard_tol);
  }
}

// The discrete equations hold at the returned state: density equation and
// divergence constraint are checked directly, and the identities they imply.
TEST(Stepper, StepConservesAndStaysSolenoidal) {
  for (int s = 0; s <= 1; ++s)
    for (double c : {0.0, 0.5}) {
      const Discretization d = disc(4, s, s + 1);
      const Stepper stepper(d);
      const State s0 = initial_state(d, "vortex");
      const auto [s1, report] = stepper.step(s0, config(0.02, c));
      const Conserved q0 = conserved_quantities(s0, *d.quad), q1 = conserved_quantities(s1, *d.quad);
      EXPECT_NEAR(q1.mass / q0.mass, 1.0, 1e-12);
      EXPECT_NEAR(q1.energy / q0.energy, 1.0, 1e-12);
      if (c == 0.0)
        EXPECT_NEAR(q1.squared_density / q0.squared_density, 1.0, 1e-12);
      else
        EXPECT_LE(q1.squared_density, q0.squared_density + 1e-13 * q0.squared_density);
      EXPECT_LE(max_divergence(s1.u, *d.quad), 1e-10 * l2_norm(s1.u, *d.quad));
      EXPECT_NEAR(mean_value(s1.p, *d.quad), 0.0, 1e-12);
      EXPECT_LE(report.increment, 1e-13);
    }
}

TEST(Stepper, GravityDoesWorkButMassIsKept) {
  RunConfig rc = rayleigh_taylor_config();
  rc.nx = 4;
  rc.ny = 16;
  const Discretization d = discretization_for(rc);
  const Stepper stepper(d);
  const State s0 = initial_state(d, rc.initial_condition);
  RunResult r = run(stepper, s0, step_config(rc), 3);
  const auto& rec = r.series.records;
  ASSERT_EQ(rec.size(), 4u);
  EXPECT_NEAR(rec.back().mass / rec.front().mass, 1.0, 1e-12);
  EXPECT_GT(rec.back().energy, 0.0);
  EXPECT_EQ(rec.front().energy, 0.0);
}

TEST(Stepper, RunSeries) {
  const Discretization d = disc(2, 0, 0);
  const Stepper stepper(d);
  const State s0 = initial_state(d, "vortex");
  int calls = 0;
  RunResult r0 = run(stepper, s0, config(0.01, 0.0), 0, [&](int, const State&, const StepRecord&) { ++calls; });
  EXPECT_EQ(r0.series.records.size(), 1u);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(r0.final_state.u.coeffs(), s0.u.coeffs());
  RunResult r = run(stepper, s0, config(0.01, 0.0), 5);
  EXPECT_EQ(r.series.records.size(), 6u);
  EXPECT_NEAR(r.final_state.t, 0.05, 1e-15);
  for (std::size_t i = 1; i < r.series.records.size(); ++i)
    EXPECT_GE(r.series.records[i].picard_iterations, 1);
}

TEST(Stepper, ProductOfMeansConserves) {
  const Discretization d = disc(4, 1, 1);
  const Stepper stepper(d);
  const State s0 = initial_state(d, "vortex");
  StepConfig cfg = config(0.02, 0.5);
  cfg.momentum_average = MomentumAverage::ProductOfMeans;
  const auto [s1, report] = stepper.step(s0, cfg);
  const Conserved q0 = conserved_quantities(s0, *d.quad), q1 = conserved_quantities(s1, *d.quad);
  EXPECT_NEAR(q1.mass / q0.mass, 1.0, 1e-12);
  EXPECT_NEAR(q1.energy / q0.energy, 1.0, 1e-12);
  EXPECT_LE(q1.squared_density, q0.squared_density * (1 + 1e-13));
}

TEST(Stepper, Deterministic) {
  const Discretization d = disc(4, 1, 1);
  const Stepper a(d), b(d);
  const State s0 = initial_state(d, "vortex");
  const auto ra = a.step(s0, config(0.02, 0.5)).first;
  const auto rb = b.step(s0, config(0.02, 0.5)).first;
  EXPECT_EQ(ra.u.coeffs(), rb.u.coeffs());
  EXPECT_EQ(ra.rho.coeffs(), rb.rho.coeffs());
}

// Both linearizations solve the same discrete equations.
TEST(Stepper, NewtonReachesSameState) {
  const Discretization d = disc(4, 1, 1);
  const Stepper stepper(d);
  const State s0 = initial_state(d, "vortex");
  for (double c : {0.0, 0.5})
    for (MomentumAverage avg : {MomentumAverage::MeanOfProducts, MomentumAverage::ProductOfMeans}) {
      StepConfig picard = config(0.02, c), newton = config(0.02, c);
      picard.momentum_average = newton.momentum_average = avg;
      picard.linearization = Linearization::Picard;
      const auto [a, ra] = stepper.step(s0, picard);
      const auto [b, rb] = stepper.step(s0, newton);
      EXPECT_LE((a.u.coeffs() - b.u.coeffs()).norm(), 1e-11 * a.u.coeffs().norm());
      EXPECT_LE((a.rho.coeffs() - b.rho.coeffs()).norm(), 1e-11 * a.rho.coeffs().norm());
      EXPECT_LT(rb.iterations, ra.iterations);
      const Conserved q0 = conserved_quantities(s0, *d.quad), q1 = conserved_quantities(b, *d.quad);
      EXPECT_NEAR(q1.mass / q0.mass, 1.0, 1e-12);
      EXPECT_NEAR(q1.energy / q0.energy, 1.0, 1e-12);
      EXPECT_LE(max_divergence(b.u, *d.quad), 1e-10 * l2_norm(b.u, *d.quad));
    }
}

// A step several cells long: the frozen iteration diverges, the linearized one converges.
TEST(Stepper, LargeStepNeedsNewton) {
  const Discretization d = disc(4, 1, 1);
  const Stepper stepper(d);
  const State s0 = initial_state(d, "vortex");
  StepConfig cfg = config(0.5, 0.5);
  cfg.linearization = Linearization::Picard;
  EXPECT_THROW(stepper.step(s0, cfg), PicardError);
  cfg.linearization = Linearization::Newton;
  const auto [s1, report] = stepper.step(s0, cfg);
  const Conserved q0 = conserved_quantities(s0, *d.quad), q1 = conserved_quantities(s1, *d.quad);
  EXPECT_NEAR(q1.energy / q0.energy, 1.0, 1e-12);
}
