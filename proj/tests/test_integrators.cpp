#include <chrono>
#include <cmath>

#include <gtest/gtest.h>

#include "pint/integrators.hpp"
#include "support/oracles.hpp"

using namespace pint;

namespace {

ProblemSpec dahlquist(double lambda = -1.0, double y0 = 1.0)
{
  ProblemSpec p;
  p.params = DahlquistParams{lambda, y0};
  return p;
}

ProblemSpec heat(double nu, std::size_t n)
{
  ProblemSpec p;
  Heat1DParams h;
  h.nu = nu;
  p.params = h;
  p.mesh_n = n;
  return p;
}

} // namespace

TEST(ThetaSettings, EffectiveTheta)
{
  EXPECT_DOUBLE_EQ((ThetaSettings{0.0, 0.1, {}}).theta(), 0.5);
  EXPECT_DOUBLE_EQ((ThetaSettings{2.0, 0.1, {}}).theta(), 0.7);
  EXPECT_DOUBLE_EQ(theta_settings_for(1.0, 0.1).theta(), 1.0);
  EXPECT_THROW((ThetaSettings{-1.0, 0.1, {}}).validate(), InvalidArgument);
  EXPECT_THROW((ThetaSettings{6.0, 0.1, {}}).validate(), InvalidArgument);
  EXPECT_THROW((ThetaSettings{0.0, 0.0, {}}).validate(), InvalidArgument);
  EXPECT_NO_THROW((ThetaSettings{5.0, 0.1, {}}).validate());
}

TEST(ThetaStep, BackwardEulerClosedForm)
{
  const State s = theta_step(dahlquist(), initial_state(dahlquist()), theta_settings_for(1.0, 0.1));
  EXPECT_NEAR(s.values[0], 1.0 / 1.1, 1e-14);
  EXPECT_DOUBLE_EQ(s.time, 0.1);
}

TEST(ThetaStep, TrapezoidalClosedForm)
{
  const State s = theta_step(dahlquist(), initial_state(dahlquist()), ThetaSettings{0.0, 0.1, {}});
  EXPECT_NEAR(s.values[0], 0.95 / 1.05, 1e-14);
}

TEST(ThetaStep, SteadyStateStays)
{
  ProblemSpec p = heat(0.1, 15);
  auto h = p.as<Heat1DParams>();
  h.init = ZeroInit{};
  p.params = h;
  const State s0 = initial_state(p);
  const State s1 = theta_step(p, s0, ThetaSettings{0.0, 0.2, {}});
  EXPECT_EQ(s1.values, s0.values);
  EXPECT_DOUBLE_EQ(s1.time, 0.2);

  ProblemSpec a;
  AlePistonParams off;
  off.v_in = 0.0;
  a.params = off;
  a.mesh_n = 15;
  const State r0 = initial_state(a);
  const State r1 = theta_step(a, r0, ThetaSettings{0.0, 0.1, {}});
  EXPECT_EQ(r1.values, r0.values);
}

TEST(ThetaStep, NewtonFailureIsAnnotated)
{
  ProblemSpec p;
  AlePistonParams a;
  a.v_in = 5.0;
  p.params = a;
  p.mesh_n = 15;
  ThetaSettings s{0.0, 0.1, {}};
  s.newton.max_iters = 1;
  s.newton.abs_tol = 1e-15;
  try {
    (void)theta_step(p, initial_state(p), s);
    FAIL() << "expected MaxItersExceeded";
  } catch (const MaxItersExceeded& e) {
    EXPECT_NE(std::string(e.what()).find("t="), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("k="), std::string::npos);
  }
}

TEST(Propagator, ZeroWindowReturnsInput)
{
  const auto prop = make_propagator(dahlquist(), ThetaSettings{0.0, 0.1, {}});
  const State s0 = initial_state(dahlquist());
  const State s = prop.advance(s0, 0.0);
  EXPECT_EQ(s.values, s0.values);
  EXPECT_EQ(s.time, s0.time);
}

TEST(Propagator, BackwardEulerComposition)
{
  const auto prop = make_propagator(dahlquist(), theta_settings_for(1.0, 0.1));
  const State s = prop.advance(initial_state(dahlquist()), 0.4);
  EXPECT_NEAR(s.values[0], 1.0 / std::pow(1.1, 4), 1e-14);
  EXPECT_EQ(s.time, 0.4);
  EXPECT_EQ(prop.stats().steps.load(), 4u);
}

TEST(Propagator, HeatSineModeDecaysByScalarFactor)
{
  const double nu = 0.05;
  const std::size_t n = 31;
  const ProblemSpec p = heat(nu, n);
  const double mu = oracle::heat_sine_eigenvalue(nu, 1.0, n, 1);
  for (double theta : {0.5, 0.75, 1.0}) {
    const double k = 0.05;
    const auto prop = make_propagator(p, theta_settings_for(theta, k));
    const State s0 = initial_state(p);
    const State s = prop.advance(s0, 10 * k);
    const double g = (1.0 + (1.0 - theta) * k * mu) / (1.0 - theta * k * mu);
    const double factor = std::pow(g, 10);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(s.values[i], factor * s0.values[i], 1e-13) << "theta " << theta << " node " << i;
    }
  }
}

TEST(Propagator, RejectsNonDivisibleWindow)
{
  const auto prop = make_propagator(dahlquist(), ThetaSettings{0.0, 0.1, {}});
  EXPECT_THROW((void)prop.advance(initial_state(dahlquist()), 0.25), NonDivisibleWindow);
  EXPECT_THROW((void)prop.advance(initial_state(dahlquist()), -0.1), InvalidArgument);
}

TEST(Propagator, AbsorbsTinyMismatch)
{
  const auto prop = make_propagator(dahlquist(), ThetaSettings{0.0, 0.1, {}});
  const double t_end = 0.3 * (1.0 + 1e-12);
  const State s = prop.advance(initial_state(dahlquist()), t_end);
  EXPECT_EQ(s.time, t_end);
  EXPECT_EQ(prop.stats().steps.load(), 3u);
}

TEST(Propagator, Deterministic)
{
  ProblemSpec p;
  p.params = AlePistonParams{};
  p.mesh_n = 31;
  const auto prop = make_propagator(p, ThetaSettings{0.0, 0.01, {}});
  const State a = prop.advance(initial_state(p), 0.5);
  const State b = prop.advance(initial_state(p), 0.5);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.time, b.time);
}

TEST(Propagator, TimeBookkeeping)
{
  for (double k : {0.1, 0.01, 0.003}) {
    const auto prop = make_propagator(dahlquist(), ThetaSettings{0.0, k, {}});
    State s = initial_state(dahlquist());
    for (int j = 1; j <= 30; ++j) {
      const double t_end = j * 30 * k;
      s = prop.advance(s, t_end);
      EXPECT_LE(std::abs(s.time - t_end), 1e-12 * std::abs(t_end));
    }
  }
}

TEST(Propagator, StepCostWrapperSleeps)
{
  using namespace std::chrono_literals;
  const auto prop = with_step_cost(make_propagator(dahlquist(), ThetaSettings{0.0, 0.1, {}}), 2ms);
  const auto start = std::chrono::steady_clock::now();
  const State s = prop.advance(initial_state(dahlquist()), 1.0);
  EXPECT_GE(std::chrono::steady_clock::now() - start, 20ms);
  EXPECT_NEAR(s.values[0], std::pow(0.95 / 1.05, 10), 1e-13);
  EXPECT_DOUBLE_EQ(prop.cost_hint(), 0.002);
}

TEST(Stability, AStable)
{
  for (double theta : {0.5, 0.6, 0.75, 1.0}) {
    for (double lk : {-1e-3, -0.1, -1.0, -10.0, -1e3, -1e6}) {
      const double k = 0.1;
      const ProblemSpec p = dahlquist(lk / k);
      const State s = theta_step(p, initial_state(p), theta_settings_for(theta, k));
      EXPECT_LE(std::abs(s.values[0]), 1.0 + 1e-12) << "theta " << theta << " lambda k " << lk;
    }
  }
}

TEST(Order, CrankNicolsonIsSecondOrder)
{
  const double steps[] = {0.1, 0.05, 0.025, 0.0125};
  EXPECT_NEAR(convergence_order(dahlquist(), 0.0, steps), 2.0, 0.15);
}

TEST(Order, BackwardEulerIsFirstOrder)
{
  const double steps[] = {0.1, 0.05, 0.025, 0.0125};
  const double order = convergence_order(
    dahlquist(), [](double k) { return theta_settings_for(1.0, k); }, steps);
  EXPECT_NEAR(order, 1.0, 0.15);
}

TEST(Order, ShiftKeepsSecondOrder)
{
  const double steps[] = {0.1, 0.05, 0.025, 0.0125};
  EXPECT_NEAR(convergence_order(dahlquist(), 0.5, steps), 2.0, 0.2);
}

TEST(Order, NeedsThreeSteps)
{
  const double steps[] = {0.1, 0.05};
  EXPECT_THROW((void)convergence_order(dahlquist(), 0.0, steps), InvalidArgument);
}

TEST(Reference, DahlquistIsAnalytic)
{
  const State s = reference_solution(dahlquist(), 1.0, ThetaSettings{0.0, 0.1, {}}, 4);
  EXPECT_NEAR(s.values[0], 0.36787944117144233, 1e-15);
}

TEST(Reference, ZeroTimeIsInitialState)
{
  const ProblemSpec p = heat(0.02, 15);
  const State s = reference_solution(p, 0.0, ThetaSettings{0.0, 0.1, {}}, 4);
  EXPECT_EQ(s.values, initial_state(p).values);
  EXPECT_THROW((void)reference_solution(p, 1.0, ThetaSettings{0.0, 0.1, {}}, 1), InvalidArgument);
}

TEST(Reference, HeatCloseToEigenDecay)
{
  const double nu = 0.02;
  const std::size_t n = 31;
  const ProblemSpec p = heat(nu, n);
  const double mu = oracle::heat_sine_eigenvalue(nu, 1.0, n, 1);
  const State s0 = initial_state(p);
  const double t = 2.0;
  const State ref = reference_solution(p, t, ThetaSettings{0.0, 0.1, {}}, 4);
  // Crank-Nicolson with k = 0.025 on a smooth mode: error ~ (mu k)^2 t |mu| / 12.
  State exact = s0;
  for (double& v : exact.values) {
    v *= std::exp(mu * t);
  }
  EXPECT_LE(relative_distance(ref, exact), 1e-6);
  EXPECT_DOUBLE_EQ(ref.time, t);
}

TEST(LogLogSlope, ExactPowerLaw)
{
  const double x[] = {1.0, 2.0, 4.0, 8.0};
  const double y[] = {3.0, 12.0, 48.0, 192.0};
  EXPECT_NEAR(fit_loglog_slope(x, y), 2.0, 1e-14);
}
