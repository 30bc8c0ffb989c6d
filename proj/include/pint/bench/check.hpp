#ifndef PINT_BENCH_CHECK_HPP
#define PINT_BENCH_CHECK_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "pint/integrators.hpp"
#include "pint/parareal.hpp"
#include "pint/problems.hpp"

namespace pint::bench {

struct CheckResult
{
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant checks run by `pint-bench check`. Each takes well under a second.
[[nodiscard]] inline std::vector<CheckResult> run_smoke_checks()
{
  std::vector<CheckResult> out;
  auto check = [&out](std::string name, const std::function<std::string()>& body) {
    CheckResult r{std::move(name), false, {}};
    try {
      r.detail = body();
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = std::string("threw: ") + e.what();
    }
    out.push_back(std::move(r));
  };

  check("newton finds sqrt(4)", [] {
    const NewtonSettings s{1e-12, 0.0, 25, 1.0 / 64.0, 1e-7};
    const auto r = newton_solve([](std::span<const double> x) { return RealVector{x[0] * x[0] - 4.0}; },
                                RealVector{3.0}, s);
    return std::abs(r.x[0] - 2.0) < 1e-10 && r.iterations <= 8 ? "" : "root " + std::to_string(r.x[0]);
  });

  check("theta weights", [] {
    const auto layout = Layout::single("y", 1);
    const State two({2.0}, 0.0, layout);
    const State one({1.0}, 0.0, layout);
    const double angle = theta_weight(two, one, PararealVariant::ThetaAnglePenalized, {});
    const double lsq = theta_weight(two, one, PararealVariant::ThetaLeastSquares, {});
    const double same = theta_weight(one, one, PararealVariant::ThetaLeastSquares, {});
    if (std::abs(angle - 0.5) > 1e-15 || lsq != 1.0 || std::abs(same - 1.0) > 1e-15) {
      return std::string("unexpected weights");
    }
    return std::string();
  });

  check("speedup model", [] {
    const double s = theoretical_speedup(SpeedupModel{0.02, 3, 20});
    return std::abs(s - 5.78) <= 0.005 ? "" : "S = " + std::to_string(s);
  });

  check("parareal exactness", [] {
    ProblemSpec p;
    p.params = Heat1DParams{};
    p.mesh_n = 15;
    const auto coarse = make_propagator(p, ThetaSettings{0.0, 0.25, {}});
    const auto fine = make_propagator(p, ThetaSettings{0.0, 0.025, {}});
    const State s0 = initial_state(p);
    const auto grid = uniform_grid(0.0, 2.0, 4);
    const auto seq = sequential_solve(fine, s0, grid);
    for (std::size_t it = 1; it <= 3; ++it) {
      PararealConfig cfg;
      cfg.intervals = 4;
      cfg.max_iters = it;
      cfg.tol = 1e-300;
      const auto res = run_parareal(coarse, fine, s0, 2.0, cfg);
      for (std::size_t l = 0; l <= it; ++l) {
        if (relative_distance(res.boundaries[l], seq[l]) > 1e-12) {
          return "boundary " + std::to_string(l) + " after iteration " + std::to_string(it);
        }
      }
    }
    return std::string();
  });

  check("crank-nicolson order", [] {
    ProblemSpec p;
    p.params = DahlquistParams{};
    const double steps[] = {0.1, 0.05, 0.025, 0.0125};
    const double order = convergence_order(p, 0.0, steps);
    return std::abs(order - 2.0) <= 0.15 ? "" : "order " + std::to_string(order);
  });

  check("alepiston rest state", [] {
    ProblemSpec p;
    p.params = AlePistonParams{};
    p.mesh_n = 15;
    return norm_inf(rhs(p, initial_state(p), 0.0)) == 0.0 ? "" : "rhs does not vanish at rest";
  });

  return out;
}

} // namespace pint::bench

#endif // PINT_BENCH_CHECK_HPP
