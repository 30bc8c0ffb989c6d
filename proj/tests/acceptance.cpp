// Acceptance suite: one check per release criterion, each printed as a PASS/FAIL line at the end.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "pint/bench/experiment.hpp"
#include "pint/bench/report.hpp"
#include "pint/pint.hpp"
#include "support/oracles.hpp"

using namespace pint;
using namespace std::chrono_literals;

namespace {

ProblemSpec dahlquist()
{
  ProblemSpec p;
  p.params = DahlquistParams{-1.0, 1.0};
  return p;
}

ProblemSpec heat(std::size_t n = 63)
{
  ProblemSpec p;
  p.params = Heat1DParams{};
  p.mesh_n = n;
  return p;
}

ProblemSpec advection(std::size_t n = 63)
{
  ProblemSpec p;
  Advection1DParams a;
  a.periodic = true;
  a.init = GaussianBump{};
  p.params = a;
  p.mesh_n = n;
  return p;
}

ProblemSpec ale(std::size_t n, double v_in)
{
  ProblemSpec p;
  AlePistonParams a;
  a.v_in = v_in;
  p.params = a;
  p.mesh_n = n;
  return p;
}

PararealConfig config(std::size_t L, std::size_t iters, PararealVariant v, std::size_t workers)
{
  PararealConfig cfg;
  cfg.intervals = L;
  cfg.max_iters = iters;
  cfg.tol = std::numeric_limits<double>::min();
  cfg.variant = v;
  if (workers > 1) {
    cfg.scheduler = PipelinedScheduler{workers};
  }
  return cfg;
}

/// Fails the current test when the body outlives its time budget.
class Budget
{
public:
  explicit Budget(double seconds) : limit_(seconds), start_(std::chrono::steady_clock::now()) {}
  ~Budget()
  {
    const double used = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    EXPECT_LT(used, limit_) << "time budget exceeded";
  }

private:
  double limit_;
  std::chrono::steady_clock::time_point start_;
};

/// Final-boundary error per iteration of one run with the given settings.
std::vector<double> final_boundary_errors(const ProblemSpec& p, double T, std::size_t L, double K, double k,
                                          std::size_t iters, double* disc = nullptr)
{
  const auto coarse = make_propagator(p, ThetaSettings{0.0, K, {}});
  const auto fine = make_propagator(p, ThetaSettings{0.0, k, {}});
  const State s0 = initial_state(p);
  const RealVector grid = uniform_grid(0.0, T, L);
  const auto seq = sequential_solve(fine, s0, grid);
  if (disc != nullptr) {
    const auto ref = sequential_solve(make_propagator(p, ThetaSettings{0.0, k / 4.0, {}}), s0, grid);
    *disc = relative_distance(seq[L], ref[L]);
  }
  const auto res = run_parareal(coarse, fine, s0, T, config(L, iters, PararealVariant::Classic, 1), &seq);
  std::vector<double> out;
  for (const auto& rec : res.trace.iterations) {
    out.push_back(rec.boundary_errors[L]);
  }
  return out;
}

struct Outcome
{
  std::string name;
  bool passed;
};

class CriterionListener : public testing::EmptyTestEventListener
{
public:
  void OnTestEnd(const testing::TestInfo& info) override
  {
    outcomes_.push_back({info.name(), info.result()->Passed()});
  }

  void OnTestProgramEnd(const testing::UnitTest&) override
  {
    std::printf("\n");
    for (const Outcome& o : outcomes_) {
      std::printf("%s  %s\n", o.passed ? "PASS" : "FAIL", o.name.c_str());
    }
    std::fflush(stdout);
  }

private:
  std::vector<Outcome> outcomes_;
};

} // namespace

TEST(Acceptance, ExactnessForEveryProblemVariantAndScheduler)
{
  Budget budget(30.0);
  const std::size_t L = 8;
  for (const ProblemSpec& p : {dahlquist(), heat(31), advection(31), ale(15, 0.5)}) {
    const double T = 2.0;
    const auto coarse = make_propagator(p, ThetaSettings{0.0, 0.05, {}});
    const auto fine = make_propagator(p, ThetaSettings{0.0, 0.01, {}});
    const State s0 = initial_state(p);
    const auto seq = sequential_solve(fine, s0, uniform_grid(0.0, T, L));
    for (auto v : {PararealVariant::Classic, PararealVariant::ThetaLeastSquares, PararealVariant::ThetaAnglePenalized}) {
      for (std::size_t workers : {1u, 4u}) {
        const auto res = run_parareal(coarse, fine, s0, T, config(L, L, v, workers), &seq);
        for (const auto& rec : res.trace.iterations) {
          for (std::size_t l = 0; l <= rec.iteration; ++l) {
            EXPECT_LE(rec.boundary_errors[l], 1e-12)
              << to_string(p.kind()) << " " << to_string(v) << " workers " << workers << " iter " << rec.iteration;
          }
        }
      }
    }
  }
}

TEST(Acceptance, ThetaSchemeOrders)
{
  Budget budget(1.0);
  const double steps[] = {0.1, 0.05, 0.025, 0.0125};
  EXPECT_NEAR(convergence_order(dahlquist(), 0.0, steps), 2.0, 0.15);
  const double backward = convergence_order(
    dahlquist(), [](double k) { return theta_settings_for(1.0, k); }, steps);
  EXPECT_NEAR(backward, 1.0, 0.15);
}

TEST(Acceptance, SpeedupFormula)
{
  EXPECT_NEAR(theoretical_speedup({0.02, 3, 20}), 5.78, 0.005);
}

TEST(Acceptance, PipelinedSchedulerReachesModelSpeedup)
{
  Budget budget(60.0);
  const std::size_t L = 20;
  const std::size_t iters = 3;
  const std::size_t workers = L;
  const ProblemSpec p = dahlquist();
  // Same 5 ms per step on both levels: one coarse step and fifty fine steps per interval give r = 0.02.
  const auto coarse = with_step_cost(make_propagator(p, ThetaSettings{0.0, 1.0, {}}), 5ms);
  const auto fine = with_step_cost(make_propagator(p, ThetaSettings{0.0, 0.02, {}}), 5ms);
  const State s0 = initial_state(p);
  const double T = static_cast<double>(L);

  auto t0 = std::chrono::steady_clock::now();
  (void)sequential_solve(fine, s0, uniform_grid(0.0, T, L));
  const double t_seq = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  t0 = std::chrono::steady_clock::now();
  (void)run_parareal(coarse, fine, s0, T, config(L, iters, PararealVariant::Classic, workers));
  const double t_par = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  bench::ResultRow row;
  row.problem = "dahlquist";
  row.K = 1.0;
  row.k = 0.02;
  row.variant = "classic";
  row.iter = static_cast<std::int64_t>(iters);
  row.boundary = -1;
  row.t_seq_s = t_seq;
  row.t_par_s = t_par;
  row.speedup_meas = t_seq / t_par;
  row.speedup_theory = theoretical_speedup({0.02, iters, L});
  const auto report = bench::speedup_report({row});
  ASSERT_EQ(report.entries.size(), 1u);
  const auto& e = report.entries[0];
  std::printf("%s", report.text().c_str());
  EXPECT_NEAR(e.theoretical, 5.78, 0.005);
  EXPECT_GE(e.efficiency, 0.6) << "measured " << e.measured << " theoretical " << e.theoretical;
}

TEST(Acceptance, HeatConvergesWithinThreeIterations)
{
  Budget budget(60.0);
  double disc = 0.0;
  const auto err = final_boundary_errors(heat(), 8.0, 20, 0.05, 0.005, 3, &disc);
  std::size_t reached = err.size();
  for (std::size_t i = 0; i < err.size(); ++i) {
    if (err[i] <= disc) {
      reached = i;
      break;
    }
  }
  EXPECT_LE(reached, 3u) << "discretization error " << disc;
  EXPECT_GE(reached, 1u);
}

TEST(Acceptance, AdvectionDegrades)
{
  Budget budget(60.0);
  const auto heat_err = final_boundary_errors(heat(), 8.0, 20, 0.05, 0.005, 3);
  const auto adv_err = final_boundary_errors(advection(), 8.0, 20, 0.05, 0.005, 5);
  EXPECT_GE(adv_err[3], 10.0 * heat_err[3]) << "advection " << adv_err[3] << " heat " << heat_err[3];
  // Stagnation: an iteration that fails to at least halve the error, growth included.
  bool stalls = false;
  for (std::size_t i = 0; i < 5; ++i) {
    stalls = stalls || adv_err[i + 1] >= 0.5 * adv_err[i];
  }
  EXPECT_TRUE(stalls);
}

TEST(Acceptance, AlePistonSanity)
{
  Budget budget(20.0);
  const ProblemSpec rest = ale(31, 0.0);
  for (double t : {0.0, 0.5, 3.0}) {
    EXPECT_EQ(rhs(rest, initial_state(rest), t), RealVector(33, 0.0));
  }

  const ProblemSpec p = ale(31, 0.5);
  State s = initial_state(p);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    s.values[i] = 0.05 * std::sin(1.0 + 0.7 * static_cast<double>(i));
  }
  const ThetaSettings settings{0.0, 0.05, {}};
  const StepResult r = theta_step_sized(p, s, settings, settings.step);
  EXPECT_LE(r.newton_iterations, 6u);
  const double th = settings.theta();
  const RealVector f_old = rhs(p, s, s.time);
  const RealVector f_new = rhs(p, r.state, r.state.time);
  double residual = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double ri = r.state.values[i] - s.values[i] - settings.step * (th * f_new[i] + (1.0 - th) * f_old[i]);
    residual = std::max(residual, std::abs(ri));
  }
  EXPECT_LE(residual, 1e-10);

  State q = s;
  double energy = ale_energy(rest, q);
  for (int j = 0; j < 100; ++j) {
    q = theta_step(rest, q, ThetaSettings{0.0, 0.01, {}});
    const double now = ale_energy(rest, q);
    EXPECT_LE(now, energy) << "step " << j;
    energy = now;
  }
}

TEST(Acceptance, DeterministicAcrossWorkerCounts)
{
  Budget budget(60.0);
  const ProblemSpec p = heat();
  const auto coarse = make_propagator(p, ThetaSettings{0.0, 0.05, {}});
  const auto fine = make_propagator(p, ThetaSettings{0.0, 0.005, {}});
  const State s0 = initial_state(p);
  const auto seq = sequential_solve(fine, s0, uniform_grid(0.0, 8.0, 20));
  const auto a = run_parareal(coarse, fine, s0, 8.0, config(20, 5, PararealVariant::ThetaLeastSquares, 2), &seq);
  const auto b = run_parareal(coarse, fine, s0, 8.0, config(20, 5, PararealVariant::ThetaLeastSquares, 8), &seq);
  for (std::size_t l = 0; l <= 20; ++l) {
    EXPECT_LE(relative_distance(a.boundaries[l], b.boundaries[l]), 1e-12);
  }
  ASSERT_EQ(a.trace.iterations.size(), b.trace.iterations.size());
  for (std::size_t i = 0; i < a.trace.iterations.size(); ++i) {
    for (std::size_t l = 0; l <= 20; ++l) {
      const double x = a.trace.iterations[i].boundary_errors[l];
      const double y = b.trace.iterations[i].boundary_errors[l];
      EXPECT_LE(std::abs(x - y), 1e-12 * std::max(std::abs(x), std::abs(y)));
      EXPECT_EQ(a.trace.iterations[i].theta_values[l], b.trace.iterations[i].theta_values[l]);
    }
  }
}

TEST(Acceptance, ThetaWeightExamples)
{
  auto vec = [](std::initializer_list<double> v) { return State(RealVector(v), 0.0, Layout::single("x", v.size())); };
  const State c = vec({0.3, -1.2, 2.0});
  EXPECT_DOUBLE_EQ(theta_weight(c, c, PararealVariant::ThetaLeastSquares), 1.0);
  EXPECT_EQ(theta_weight(vec({1.0, 0.0}), vec({0.0, 1.0}), PararealVariant::ThetaLeastSquares), 0.0);
  EXPECT_EQ(theta_weight(vec({1.0, 0.0}), vec({0.0, 1.0}), PararealVariant::ThetaAnglePenalized), 0.0);
  EXPECT_DOUBLE_EQ(theta_weight(vec({2.0}), vec({1.0}), PararealVariant::ThetaAnglePenalized), 0.5);
  EXPECT_EQ(theta_weight(vec({2.0}), vec({1.0}), PararealVariant::ThetaLeastSquares), 1.0);
}

TEST(Acceptance, MatchesTextbookParareal)
{
  Budget budget(60.0);
  for (const ProblemSpec& p : {dahlquist(), heat()}) {
    for (std::size_t L : {4u, 20u}) {
      const double T = 0.4 * static_cast<double>(L);
      const auto coarse = make_propagator(p, ThetaSettings{0.0, 0.05, {}});
      const auto fine = make_propagator(p, ThetaSettings{0.0, 0.005, {}});
      const State s0 = initial_state(p);
      for (auto v : {PararealVariant::Classic, PararealVariant::ThetaLeastSquares}) {
        const auto tb = oracle::textbook_parareal(coarse, fine, s0, T, L, L, v);
        for (std::size_t workers : {1u, 4u}) {
          for (std::size_t it = 1; it <= L; ++it) {
            const auto res = run_parareal(coarse, fine, s0, T, config(L, it, v, workers));
            for (std::size_t l = 0; l <= L; ++l) {
              EXPECT_LE(oracle::rel_diff(res.boundaries[l], tb.iterates[it][l]), 1e-12)
                << to_string(p.kind()) << " L " << L << " " << to_string(v) << " workers " << workers << " iter " << it
                << " boundary " << l;
            }
          }
        }
      }
    }
  }
}

int main(int argc, char** argv)
{
  testing::InitGoogleTest(&argc, argv);
  testing::UnitTest::GetInstance()->listeners().Append(new CriterionListener);
  return RUN_ALL_TESTS();
}
