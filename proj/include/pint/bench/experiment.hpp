#ifndef PINT_BENCH_EXPERIMENT_HPP
#define PINT_BENCH_EXPERIMENT_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "pint/bench/config.hpp"
#include "pint/integrators.hpp"
#include "pint/parareal.hpp"

namespace pint::bench {

/// One output line.
///
/// Three kinds share the columns:
///  - boundary rows: iter >= 1, boundary >= 1; error of the Parareal iterate against the
///    sequential fine solution, the weight used there, and wall times up to that iteration;
///  - discretization rows: iter = -1, boundary >= 1; error of the sequential fine solution
///    against the refined reference (the level Parareal error is compared with);
///  - summary rows: boundary = -1, iter = the iteration used for the measured speedup.
struct ResultRow
{
  std::string problem;
  double K = 0.0;
  double k = 0.0;
  std::string variant;
  std::int64_t iter = 0;
  std::int64_t boundary = 0;
  double rel_err = 0.0;
  double theta = 1.0;
  double t_seq_s = 0.0;
  double t_par_s = 0.0;
  double speedup_meas = 0.0;
  double speedup_theory = 0.0;

  [[nodiscard]] bool is_summary() const noexcept { return boundary < 0; }
  [[nodiscard]] bool is_discretization() const noexcept { return iter < 0 && boundary >= 0; }

  bool operator==(const ResultRow&) const = default;
};

/// Thrown when a propagation fails mid-experiment; carries the rows finished so far.
class ExperimentFailure : public NumericBreakdown
{
public:
  ExperimentFailure(const std::string& what, std::vector<ResultRow> partial)
    : NumericBreakdown(what), partial_(std::move(partial))
  {
  }

  [[nodiscard]] const std::vector<ResultRow>& partial() const noexcept { return partial_; }

private:
  std::vector<ResultRow> partial_;
};

struct RunOptions
{
  /// Progress, Newton counts and phase timings go here when set.
  std::ostream* verbose = nullptr;
};

namespace detail {

inline double seconds(std::chrono::steady_clock::duration d) { return std::chrono::duration<double>(d).count(); }

inline void report_newton(std::ostream* log, const char* name, const Propagator& p)
{
  if (log == nullptr) {
    return;
  }
  const auto& s = p.stats();
  const auto steps = s.steps.load();
  const auto newton = s.newton_iterations.load();
  *log << "  " << name << ": " << s.advances.load() << " advances, " << steps << " steps, " << newton
       << " Newton iterations";
  if (steps > 0) {
    *log << " (" << static_cast<double>(newton) / static_cast<double>(steps) << " per step, "
         << static_cast<double>(s.newton_nanoseconds.load()) * 1e-9 / static_cast<double>(steps) << " s per step)";
  }
  *log << "\n";
}

} // namespace detail

/// Runs the (K, variant) matrix of a config.
///
/// The sequential fine solution and the refined reference are computed once, since neither
/// depends on K or the variant. Measured speedup is the sequential wall time over the Parareal
/// wall time up to the first iteration whose error is at or below the discretization error on
/// every boundary, or up to the last iteration when that never happens.
[[nodiscard]] inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {})
{
  cfg.validate();
  std::ostream* log = opts.verbose;
  const std::string problem(to_string(cfg.problem.kind()));
  const std::size_t L = cfg.intervals;
  const State s0 = initial_state(cfg.problem);
  const RealVector grid = uniform_grid(s0.time, s0.time + cfg.horizon, L);
  std::vector<ResultRow> rows;

  try {
    const Propagator fine = make_propagator(cfg.problem, cfg.fine_settings());
    const auto seq_start = std::chrono::steady_clock::now();
    const std::vector<State> seq = sequential_solve(fine, s0, grid);
    const double t_seq = detail::seconds(std::chrono::steady_clock::now() - seq_start);
    if (log != nullptr) {
      *log << problem << ": sequential fine solve " << t_seq << " s\n";
      detail::report_newton(log, "fine", fine);
    }

    ThetaSettings ref_settings = cfg.fine_settings();
    ref_settings.step /= static_cast<double>(cfg.reference_fine_factor);
    const std::vector<State> ref = sequential_solve(make_propagator(cfg.problem, ref_settings), s0, grid);
    RealVector disc(L + 1, 0.0);
    for (std::size_t l = 1; l <= L; ++l) {
      disc[l] = relative_distance(seq[l], ref[l]);
    }

    for (double K : cfg.coarse_steps) {
      const double r = cfg.fine_step / K;
      for (PararealVariant v : cfg.variants) {
        const std::string variant(to_string(v));
        auto base = [&] {
          ResultRow row;
          row.problem = problem;
          row.K = K;
          row.k = cfg.fine_step;
          row.variant = variant;
          row.t_seq_s = t_seq;
          return row;
        };
        for (std::size_t l = 1; l <= L; ++l) {
          ResultRow row = base();
          row.iter = -1;
          row.boundary = static_cast<std::int64_t>(l);
          row.rel_err = disc[l];
          row.t_par_s = t_seq;
          row.speedup_meas = 1.0;
          row.speedup_theory = 1.0;
          rows.push_back(row);
        }

        const Propagator coarse = make_propagator(cfg.problem, cfg.coarse_settings(K));
        const Propagator fine_run = make_propagator(cfg.problem, cfg.fine_settings());
        PararealConfig pc;
        pc.intervals = L;
        pc.max_iters = cfg.max_iters;
        pc.tol = cfg.tol;
        pc.variant = v;
        if (cfg.workers > 1) {
          pc.scheduler = PipelinedScheduler{cfg.workers};
        }
        const PararealResult res = run_parareal(coarse, fine_run, s0, s0.time + cfg.horizon, pc, &seq);

        std::size_t chosen = 0;
        for (const IterationRecord& rec : res.trace.iterations) {
          if (rec.iteration == 0) {
            continue;
          }
          const double t_par = std::max(rec.elapsed_seconds, 1e-12);
          bool below = true;
          for (std::size_t l = 1; l <= L; ++l) {
            ResultRow row = base();
            row.iter = static_cast<std::int64_t>(rec.iteration);
            row.boundary = static_cast<std::int64_t>(l);
            row.rel_err = rec.boundary_errors[l];
            row.theta = rec.theta_values[l];
            row.t_par_s = t_par;
            row.speedup_meas = t_seq / t_par;
            row.speedup_theory = theoretical_speedup(SpeedupModel{r, rec.iteration, L});
            rows.push_back(row);
            below = below && rec.boundary_errors[l] <= disc[l];
          }
          if (chosen == 0 && below) {
            chosen = rec.iteration;
          }
        }
        const IterationRecord& last = res.trace.iterations.back();
        const IterationRecord& pick = res.trace.iterations[chosen == 0 ? last.iteration : chosen];

        ResultRow summary = base();
        summary.iter = static_cast<std::int64_t>(pick.iteration);
        summary.boundary = -1;
        summary.rel_err = *std::max_element(pick.boundary_errors.begin() + 1, pick.boundary_errors.end());
        double theta_sum = 0.0;
        for (std::size_t l = 1; l <= L; ++l) {
          theta_sum += pick.theta_values[l];
        }
        summary.theta = theta_sum / static_cast<double>(L);
        summary.t_par_s = std::max(pick.elapsed_seconds, 1e-12);
        summary.speedup_meas = t_seq / summary.t_par_s;
        summary.speedup_theory = theoretical_speedup(SpeedupModel{r, std::max<std::size_t>(pick.iteration, 1), L});
        rows.push_back(summary);

        if (log != nullptr) {
          *log << problem << " K=" << K << " " << variant << ": " << last.iteration << " iterations, "
               << res.trace.fine_propagations << " fine / " << res.trace.coarse_propagations
               << " coarse propagations, speedup " << summary.speedup_meas << " at iteration " << pick.iteration
               << " (model " << summary.speedup_theory << ")\n";
          for (const IterationRecord& rec : res.trace.iterations) {
            *log << "  iter " << rec.iteration << ": elapsed " << rec.elapsed_seconds << " s, fine " << rec.fine_seconds
                 << " s, coarse " << rec.coarse_seconds << " s, max correction " << rec.max_correction << "\n";
          }
          detail::report_newton(log, "coarse", coarse);
          detail::report_newton(log, "fine", fine_run);
        }
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ExperimentFailure(e.what(), std::move(rows));
  }
  return rows;
}

} // namespace pint::bench

#endif // PINT_BENCH_EXPERIMENT_HPP
