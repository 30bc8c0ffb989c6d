#ifndef PINT_INTEGRATORS_HPP
#define PINT_INTEGRATORS_HPP

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pint/error.hpp"
#include "pint/linalg.hpp"
#include "pint/problems.hpp"
#include "pint/state.hpp"

namespace pint {

/// Shifted Crank-Nicolson: theta = 1/2 + theta0 * step.
struct ThetaSettings
{
  double theta0 = 0.0; // 1/s
  double step = 0.1;   // s
  NewtonSettings newton{};

  [[nodiscard]] double theta() const noexcept { return 0.5 + theta0 * step; }

  void validate() const
  {
    if (!(step > 0.0) || !std::isfinite(step)) {
      throw InvalidArgument("ThetaSettings: step must be positive");
    }
    const double th = theta();
    if (!(th >= 0.5) || !(th <= 1.0)) {
      throw InvalidArgument("ThetaSettings: theta = " + std::to_string(th) + " outside [1/2, 1]");
    }
    newton.validate();
  }
};

/// theta0 giving exactly theta at step k (theta0 = (theta - 1/2) / k).
[[nodiscard]] inline ThetaSettings theta_settings_for(double theta, double step, NewtonSettings newton = {})
{
  return ThetaSettings{(theta - 0.5) / step, step, newton};
}

struct StepResult
{
  State state;
  std::size_t newton_iterations = 0;
};

/// One theta step of size h. Solves y - y_prev - h (theta f(y, t+h) + (1 - theta) f(y_prev, t)) = 0.
[[nodiscard]] inline StepResult theta_step_sized(const ProblemSpec& problem, const State& s, const ThetaSettings& settings,
                                                 double h)
{
  const double theta = settings.theta();
  const double t_prev = s.time;
  const double t_new = s.time + h;
  const RealVector f_prev = rhs(problem, s, t_prev);

  RealVector explicit_part(s.values);
  for (std::size_t i = 0; i < explicit_part.size(); ++i) {
    explicit_part[i] += h * (1.0 - theta) * f_prev[i];
  }

  State trial(s.values, t_new, s.layout);
  const ResidualFn residual = [&](std::span<const double> y) {
    trial.values.assign(y.begin(), y.end());
    RealVector r = rhs(problem, trial, t_new);
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] = y[i] - explicit_part[i] - h * theta * r[i];
    }
    return r;
  };

  // Linear kinds get the exact Jacobian I - h theta A, so each step is solved to roundoff
  // instead of to the finite-difference accuracy.
  std::optional<JacobianFn> jacobian;
  if (std::optional<Jacobian> a = rhs_jacobian(problem)) {
    if (auto* tri = std::get_if<Tridiagonal>(&*a)) {
      for (std::size_t i = 0; i < tri->diag.size(); ++i) {
        tri->diag[i] = 1.0 - h * theta * tri->diag[i];
        if (i + 1 < tri->diag.size()) {
          tri->lower[i] *= -h * theta;
          tri->upper[i] *= -h * theta;
        }
      }
    } else {
      auto& m = std::get<DenseMatrix>(*a);
      for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
          m(i, j) = (i == j ? 1.0 : 0.0) - h * theta * m(i, j);
        }
      }
    }
    jacobian = [j = std::move(*a)](std::span<const double>) { return j; };
  }

  try {
    NewtonResult nr = newton_solve(residual, s.values, settings.newton, jacobian_structure(problem), jacobian);
    return StepResult{State(std::move(nr.x), t_new, s.layout), nr.iterations};
  } catch (const Error& e) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "theta_step at t=" << t_new << " (k=" << h << "): " << e.what();
    if (dynamic_cast<const MaxItersExceeded*>(&e) != nullptr) {
      throw MaxItersExceeded(msg.str());
    }
    if (dynamic_cast<const MeshDegenerate*>(&e) != nullptr) {
      throw MeshDegenerate(msg.str());
    }
    throw NumericBreakdown(msg.str());
  }
}

[[nodiscard]] inline State theta_step(const ProblemSpec& problem, const State& s, const ThetaSettings& settings)
{
  settings.validate();
  return theta_step_sized(problem, s, settings, settings.step).state;
}

/// Counters shared by all copies of a propagator; updated from any worker.
struct PropagatorStats
{
  std::atomic<std::uint64_t> advances{0};
  std::atomic<std::uint64_t> steps{0};
  std::atomic<std::uint64_t> newton_iterations{0};
  std::atomic<std::uint64_t> newton_nanoseconds{0};
};

/// Number of steps of size `step` covering [t0, t_end]; throws if the window is not a multiple.
[[nodiscard]] inline std::size_t window_steps(double t0, double t_end, double step)
{
  const double window = t_end - t0;
  if (window < 0.0) {
    throw InvalidArgument("advance: t_end precedes the state time");
  }
  if (window == 0.0) {
    return 0;
  }
  const double ratio = window / step;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(n * step - window) > 1e-9 * window) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "window [" << t0 << ", " << t_end << "] is not a multiple of step " << step;
    throw NonDivisibleWindow(msg.str());
  }
  return static_cast<std::size_t>(n);
}

/// Advances a state over a time window with a fixed internal step (the coarse or fine
/// solver of a parallel-in-time iteration). Copies share statistics and are safe to use
/// concurrently.
class Propagator
{
public:
  using AdvanceFn = std::function<State(const State&, double, PropagatorStats&)>;

  Propagator(AdvanceFn fn, double step, double cost_hint)
    : fn_(std::move(fn)), step_(step), cost_hint_(cost_hint), stats_(std::make_shared<PropagatorStats>())
  {
  }

  [[nodiscard]] State advance(const State& s, double t_end) const
  {
    if (t_end == s.time) {
      return s;
    }
    stats_->advances.fetch_add(1, std::memory_order_relaxed);
    return fn_(s, t_end, *stats_);
  }

  [[nodiscard]] double step() const noexcept { return step_; }
  /// Estimated seconds per internal step.
  [[nodiscard]] double cost_hint() const noexcept { return cost_hint_; }
  [[nodiscard]] const PropagatorStats& stats() const noexcept { return *stats_; }

private:
  AdvanceFn fn_;
  double step_;
  double cost_hint_;
  std::shared_ptr<PropagatorStats> stats_;
};

/// Composes theta steps of size settings.step. Step j starts at t0 + j k; the final step ends at
/// t_end exactly, absorbing a mismatch below 1e-9 relative.
[[nodiscard]] inline Propagator make_propagator(ProblemSpec problem, ThetaSettings settings, double cost_hint = 0.0)
{
  problem.validate();
  settings.validate();
  const double k = settings.step;
  auto fn = [problem = std::move(problem), settings](const State& s, double t_end, PropagatorStats& stats) {
    const std::size_t n = window_steps(s.time, t_end, settings.step);
    const double t0 = s.time;
    State cur = s;
    std::uint64_t newton = 0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t j = 0; j < n; ++j) {
      const double t_next = j + 1 == n ? t_end : t0 + static_cast<double>(j + 1) * settings.step;
      StepResult r = theta_step_sized(problem, cur, settings, t_next - cur.time);
      r.state.time = t_next;
      cur = std::move(r.state);
      newton += r.newton_iterations;
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    stats.steps.fetch_add(n, std::memory_order_relaxed);
    stats.newton_iterations.fetch_add(newton, std::memory_order_relaxed);
    stats.newton_nanoseconds.fetch_add(
      static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count()),
      std::memory_order_relaxed);
    return cur;
  };
  return Propagator(std::move(fn), k, cost_hint);
}

/// Wraps a propagator so each internal step additionally costs `per_step` of wall time.
/// Used to give the scheduler deterministic, Newton-free workloads.
[[nodiscard]] inline Propagator with_step_cost(Propagator inner, std::chrono::duration<double> per_step)
{
  const double step = inner.step();
  auto fn = [inner, per_step](const State& s, double t_end, PropagatorStats& stats) {
    const std::size_t n = window_steps(s.time, t_end, inner.step());
    std::this_thread::sleep_for(per_step * static_cast<double>(n));
    stats.steps.fetch_add(n, std::memory_order_relaxed);
    return inner.advance(s, t_end);
  };
  return Propagator(std::move(fn), step, per_step.count());
}

/// Dahlquist: y0 e^{lambda t}. Other kinds: a sequential theta solution with the step divided
/// by fine_factor on the same mesh.
[[nodiscard]] inline State reference_solution(const ProblemSpec& problem, double t, const ThetaSettings& settings,
                                              std::size_t fine_factor)
{
  if (fine_factor < 2) {
    throw InvalidArgument("reference_solution: fine_factor must be at least 2");
  }
  State s0 = initial_state(problem);
  if (t == 0.0) {
    return s0;
  }
  if (problem.kind() == ProblemKind::Dahlquist) {
    const auto& d = problem.as<DahlquistParams>();
    return State({d.y0 * std::exp(d.lambda * t)}, t, s0.layout);
  }
  ThetaSettings fine = settings;
  fine.step = settings.step / static_cast<double>(fine_factor);
  return make_propagator(problem, fine).advance(s0, t);
}

/// Least-squares slope of log(y) against log(x).
[[nodiscard]] inline double fit_loglog_slope(std::span<const double> x, std::span<const double> y)
{
  detail::require_same_length(x.size(), y.size(), "fit_loglog_slope");
  const std::size_t n = x.size();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// Observed order of the theta scheme: slope of log(error at horizon) against log(k).
///
/// settings_for maps a step size to the scheme used with it, so fixed-theta runs (backward
/// Euler needs theta0 = 1/(2k)) and fixed-theta0 runs share one driver. Dahlquist errors are
/// measured against the analytic solution; other kinds against a sequential solution with the
/// smallest step divided by 8.
[[nodiscard]] inline double convergence_order(const ProblemSpec& problem,
                                              const std::function<ThetaSettings(double)>& settings_for,
                                              std::span<const double> steps, double horizon = 1.0)
{
  if (steps.size() < 3) {
    throw InvalidArgument("convergence_order: need at least 3 step sizes");
  }
  const State s0 = initial_state(problem);
  double k_min = steps[0];
  for (double k : steps) {
    k_min = std::min(k_min, k);
  }
  State ref;
  if (problem.kind() == ProblemKind::Dahlquist) {
    ref = reference_solution(problem, horizon, settings_for(k_min), 2);
  } else {
    ref = make_propagator(problem, settings_for(k_min / 8.0)).advance(s0, horizon);
  }

  RealVector errors;
  for (double k : steps) {
    const State end = make_propagator(problem, settings_for(k)).advance(s0, horizon);
    errors.push_back(relative_distance(end, ref));
  }
  return fit_loglog_slope(steps, errors);
}

[[nodiscard]] inline double convergence_order(const ProblemSpec& problem, double theta0, std::span<const double> steps,
                                              double horizon = 1.0)
{
  return convergence_order(
    problem, [theta0](double k) { return ThetaSettings{theta0, k, {}}; }, steps, horizon);
}

} // namespace pint

#endif // PINT_INTEGRATORS_HPP
