#ifndef PINT_PARAREAL_HPP
#define PINT_PARAREAL_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <atomic>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pint/detail/task_graph.hpp"
#include "pint/error.hpp"
#include "pint/integrators.hpp"
#include "pint/linalg.hpp"
#include "pint/state.hpp"

namespace pint {

enum class PararealVariant
{
  Classic,
  /// theta = <F, C> / <C, C>
  ThetaLeastSquares,
  /// theta = <F, C> / (<C, C> <F, F>)
  ThetaAnglePenalized,
};

[[nodiscard]] inline std::string_view to_string(PararealVariant v)
{
  switch (v) {
    case PararealVariant::Classic: return "classic";
    case PararealVariant::ThetaLeastSquares: return "theta-lsq";
    case PararealVariant::ThetaAnglePenalized: return "theta-angle";
  }
  return "unknown";
}

[[nodiscard]] inline std::optional<PararealVariant> parse_variant(std::string_view name)
{
  for (auto v : {PararealVariant::Classic, PararealVariant::ThetaLeastSquares, PararealVariant::ThetaAnglePenalized}) {
    if (to_string(v) == name) {
      return v;
    }
  }
  return std::nullopt;
}

struct ThetaClamp
{
  double lo = 0.0;
  double hi = 1.0;

  [[nodiscard]] double apply(double v) const { return std::clamp(v, lo, hi); }
};

struct SerialScheduler
{
};

/// Overlaps fine propagations and corrector sweeps of consecutive iterations on a worker pool.
struct PipelinedScheduler
{
  std::size_t workers = 1;
};

using Scheduler = std::variant<SerialScheduler, PipelinedScheduler>;

struct PararealConfig
{
  std::size_t intervals = 20;
  std::size_t max_iters = 5;
  /// Stop once max_l ||X_l^{i} - X_l^{i-1}|| / ||X_l^{i}|| <= tol.
  double tol = 1e-12;
  PararealVariant variant = PararealVariant::Classic;
  ThetaClamp theta_clamp{};
  Scheduler scheduler = SerialScheduler{};

  void validate() const
  {
    if (intervals < 2) {
      throw InvalidArgument("PararealConfig: need at least 2 intervals");
    }
    if (max_iters < 1 || max_iters > intervals) {
      throw InvalidArgument("PararealConfig: max_iters must lie in [1, intervals]");
    }
    if (!(tol > 0.0)) {
      throw InvalidArgument("PararealConfig: tol must be positive");
    }
    if (!(theta_clamp.lo <= theta_clamp.hi)) {
      throw InvalidArgument("PararealConfig: empty theta clamp");
    }
    if (const auto* p = std::get_if<PipelinedScheduler>(&scheduler); p != nullptr && p->workers < 1) {
      throw InvalidArgument("PararealConfig: pipelined scheduler needs at least one worker");
    }
  }
};

/// Everything recorded for one iteration. Vectors are indexed by boundary 0..L; iteration 0 is
/// the coarse prediction.
struct IterationRecord
{
  std::size_t iteration = 0;
  /// Relative error against the sequential fine solution; empty without an oracle.
  RealVector boundary_errors;
  RealVector correction_norms;
  RealVector theta_values;
  double max_correction = 0.0;
  double fine_seconds = 0.0;
  double coarse_seconds = 0.0;
  /// Wall time from the start of the run until this iteration was complete.
  double elapsed_seconds = 0.0;
};

struct RunTrace
{
  std::vector<IterationRecord> iterations;
  std::size_t fine_propagations = 0;
  std::size_t coarse_propagations = 0;
  bool converged = false;

  [[nodiscard]] std::size_t final_iteration() const { return iterations.empty() ? 0 : iterations.back().iteration; }
};

struct PararealResult
{
  std::vector<State> boundaries;
  RunTrace trace;
};

/// A propagator failed inside a Parareal run.
class PropagationFailure : public Error
{
public:
  PropagationFailure(std::size_t iteration, std::size_t interval, const std::string& what)
    : Error("parareal iteration " + std::to_string(iteration) + ", interval " + std::to_string(interval) + ": " + what),
      iteration_(iteration), interval_(interval)
  {
  }

  [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }
  [[nodiscard]] std::size_t interval() const noexcept { return interval_; }

private:
  std::size_t iteration_;
  std::size_t interval_;
};

/// L + 1 equally spaced points from t0 to t_end; the last is t_end exactly.
[[nodiscard]] inline RealVector uniform_grid(double t0, double t_end, std::size_t intervals)
{
  if (intervals < 1 || !(t_end > t0)) {
    throw InvalidArgument("uniform_grid: need t_end > t0 and at least one interval");
  }
  RealVector grid(intervals + 1);
  for (std::size_t l = 0; l <= intervals; ++l) {
    grid[l] = t0 + (t_end - t0) * static_cast<double>(l) / static_cast<double>(intervals);
  }
  grid.back() = t_end;
  return grid;
}

/// One uninterrupted fine propagation, sampled at every grid point.
[[nodiscard]] inline std::vector<State> sequential_solve(const Propagator& fine, const State& s0, std::span<const double> t_grid)
{
  if (t_grid.size() < 2) {
    throw InvalidArgument("sequential_solve: grid needs at least two points");
  }
  if (t_grid[0] != s0.time) {
    throw InvalidArgument("sequential_solve: grid must start at the initial time");
  }
  std::vector<State> out;
  out.reserve(t_grid.size());
  out.push_back(s0);
  for (std::size_t l = 1; l < t_grid.size(); ++l) {
    if (!(t_grid[l] > t_grid[l - 1])) {
      throw InvalidArgument("sequential_solve: grid must be strictly increasing");
    }
    out.push_back(fine.advance(out.back(), t_grid[l]));
  }
  return out;
}

/// theta * coarse_new + fine_old - theta * coarse_old
[[nodiscard]] inline State parareal_update(const State& coarse_new, const State& fine_old, const State& coarse_old,
                                           double theta)
{
  require_compatible(coarse_new, fine_old, "parareal_update");
  require_compatible(coarse_new, coarse_old, "parareal_update");
  if (coarse_new.time != fine_old.time || coarse_new.time != coarse_old.time) {
    throw ShapeMismatch("parareal_update: states belong to different times");
  }
  RealVector v(fine_old.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = theta * coarse_new.values[i] + fine_old.values[i] - theta * coarse_old.values[i];
  }
  return State(std::move(v), fine_old.time, fine_old.layout);
}

/// Weight of the coarse terms in the update, averaged over layout blocks and clamped.
/// A block whose coarse (or, for the angle-penalized form, fine) part has squared norm
/// <= 1e-28 contributes weight 1.
[[nodiscard]] inline double theta_weight(const State& fine, const State& coarse, PararealVariant variant,
                                         ThetaClamp clamp = {})
{
  if (variant == PararealVariant::Classic) {
    return 1.0;
  }
  require_compatible(fine, coarse, "theta_weight");
  constexpr double degenerate = 1e-28;
  double sum = 0.0;
  const auto& blocks = coarse.layout->blocks();
  for (const Block& b : blocks) {
    const auto f = fine.block(b);
    const auto c = coarse.block(b);
    const double cc = dot(c, c);
    const double fc = dot(f, c);
    double w = 1.0;
    if (variant == PararealVariant::ThetaLeastSquares) {
      if (cc > degenerate) {
        w = fc / cc;
      }
    } else {
      const double ff = dot(f, f);
      if (cc > degenerate && ff > degenerate) {
        w = fc / (cc * ff);
      }
    }
    sum += w;
  }
  return clamp.apply(sum / static_cast<double>(blocks.size()));
}

struct BoundaryError
{
  double error = 0.0;
  /// True when the sequential value vanished and the entry is an absolute error.
  bool absolute = false;
};

/// Per-boundary ||v_p - v_s|| / ||v_s||.
[[nodiscard]] inline std::vector<BoundaryError> boundary_error(std::span<const State> parareal,
                                                               std::span<const State> sequential)
{
  detail::require_same_length(parareal.size(), sequential.size(), "boundary_error");
  std::vector<BoundaryError> out;
  out.reserve(parareal.size());
  for (std::size_t l = 0; l < parareal.size(); ++l) {
    require_compatible(parareal[l], sequential[l], "boundary_error");
    const double diff = distance2(parareal[l].values, sequential[l].values);
    const double ref = norm2(sequential[l].values);
    out.push_back(ref > 0.0 ? BoundaryError{diff / ref, false} : BoundaryError{diff, true});
  }
  return out;
}

struct SpeedupModel
{
  /// Fine-to-coarse step ratio h_F / h_C.
  double r = 0.0;
  std::size_t iters = 1;
  std::size_t intervals = 1;
};

/// S = 1 / (r + (K / N) (1 + r))
[[nodiscard]] inline double theoretical_speedup(const SpeedupModel& m)
{
  if (!(m.r >= 0.0) || m.iters < 1 || m.iters > m.intervals) {
    throw InvalidArgument("theoretical_speedup: need r >= 0 and 0 < K <= N");
  }
  const double k_over_n = static_cast<double>(m.iters) / static_cast<double>(m.intervals);
  return 1.0 / (m.r + k_over_n * (1.0 + m.r));
}

namespace detail {

using Clock = std::chrono::steady_clock;

[[nodiscard]] inline double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

[[nodiscard]] inline double correction(const State& now, const State& before)
{
  const double diff = distance2(now.values, before.values);
  const double ref = norm2(now.values);
  return ref > 0.0 ? diff / ref : diff;
}

template <class Fn>
decltype(auto) annotate(std::size_t iteration, std::size_t interval, Fn&& fn)
{
  try {
    return fn();
  } catch (const PropagationFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw PropagationFailure(iteration, interval, e.what());
  }
}

inline void check_windows(const Propagator& p, std::span<const double> grid, const char* which)
{
  for (std::size_t l = 1; l < grid.size(); ++l) {
    try {
      (void)window_steps(grid[l - 1], grid[l], p.step());
    } catch (const NonDivisibleWindow& e) {
      throw NonDivisibleWindow(std::string("run_parareal: ") + which + " step: " + e.what());
    }
  }
}

inline IterationRecord make_record(std::size_t iteration, std::size_t boundaries, bool with_errors)
{
  IterationRecord r;
  r.iteration = iteration;
  r.correction_norms.assign(boundaries, 0.0);
  r.theta_values.assign(boundaries, 1.0);
  if (with_errors) {
    r.boundary_errors.assign(boundaries, 0.0);
  }
  return r;
}

[[nodiscard]] inline double error_vs(const State& s, const std::vector<State>* oracle, std::size_t l)
{
  return oracle != nullptr ? relative_distance(s, (*oracle)[l]) : 0.0;
}

/// Serial loop. Iteration i only touches boundaries i..L: the ones below are already exact.
inline PararealResult run_serial(const Propagator& coarse, const Propagator& fine, const State& s0,
                                 std::span<const double> grid, const PararealConfig& cfg,
                                 const std::vector<State>* oracle)
{
  const std::size_t L = cfg.intervals;
  const auto start = Clock::now();
  PararealResult out;
  RunTrace& trace = out.trace;
  std::vector<State>& u = out.boundaries;
  std::vector<State> g(L + 1);
  u.assign(L + 1, s0);

  IterationRecord rec0 = make_record(0, L + 1, oracle != nullptr);
  {
    const auto t0 = Clock::now();
    for (std::size_t l = 1; l <= L; ++l) {
      g[l] = annotate(0, l, [&] { return coarse.advance(u[l - 1], grid[l]); });
      u[l] = g[l];
      ++trace.coarse_propagations;
      if (oracle != nullptr) {
        rec0.boundary_errors[l] = error_vs(u[l], oracle, l);
      }
    }
    rec0.coarse_seconds = seconds_since(t0);
  }
  rec0.elapsed_seconds = seconds_since(start);
  trace.iterations.push_back(std::move(rec0));

  std::vector<State> f(L + 1);
  for (std::size_t i = 1; i <= cfg.max_iters; ++i) {
    IterationRecord rec = make_record(i, L + 1, oracle != nullptr);
    const IterationRecord& prev = trace.iterations.back();
    for (std::size_t l = 1; l < i; ++l) {
      if (oracle != nullptr) {
        rec.boundary_errors[l] = prev.boundary_errors[l];
      }
      rec.theta_values[l] = prev.theta_values[l];
    }

    const auto t_fine = Clock::now();
    for (std::size_t l = i; l <= L; ++l) {
      f[l] = annotate(i, l, [&] { return fine.advance(u[l - 1], grid[l]); });
      ++trace.fine_propagations;
    }
    rec.fine_seconds = seconds_since(t_fine);

    const auto t_sweep = Clock::now();
    for (std::size_t l = i; l <= L; ++l) {
      State next;
      if (l == i) {
        rec.theta_values[l] = theta_weight(f[l], g[l], cfg.variant, cfg.theta_clamp);
        next = f[l];
      } else {
        State c = annotate(i, l, [&] { return coarse.advance(u[l - 1], grid[l]); });
        ++trace.coarse_propagations;
        const double theta = theta_weight(f[l], c, cfg.variant, cfg.theta_clamp);
        rec.theta_values[l] = theta;
        next = parareal_update(c, f[l], g[l], theta);
        g[l] = std::move(c);
      }
      rec.correction_norms[l] = correction(next, u[l]);
      rec.max_correction = std::max(rec.max_correction, rec.correction_norms[l]);
      u[l] = std::move(next);
      if (oracle != nullptr) {
        rec.boundary_errors[l] = error_vs(u[l], oracle, l);
      }
    }
    rec.coarse_seconds = seconds_since(t_sweep);
    rec.elapsed_seconds = seconds_since(start);
    const bool converged = rec.max_correction <= cfg.tol;
    trace.iterations.push_back(std::move(rec));
    if (converged) {
      trace.converged = true;
      break;
    }
  }
  return out;
}

/// Pipelined schedule as a task graph.
///
/// Nodes: S(0, l) coarse prediction, F(i, l) fine propagation from boundary l-1 of iterate
/// i-1, S(i, l) corrector producing boundary l of iterate i. Edges:
///   S(0, l)  <- S(0, l-1)
///   F(i, l)  <- S(i-1, l-1)
///   S(i, l)  <- F(i, l), S(i, l-1), S(i-1, l)
/// so a fine propagation starts as soon as its initial value is published, and the corrector
/// sweep of iteration i runs in interval order behind it. Each interval owns one slot; every
/// (iteration, interval) entry of a slot is written once under the slot's lock, so speculative
/// work of iteration i+1 never clobbers values iteration i still reads.
class PipelinedRun
{
public:
  PipelinedRun(const Propagator& coarse, const Propagator& fine, const State& s0, std::span<const double> grid,
               const PararealConfig& cfg, const std::vector<State>* oracle)
    : coarse_(coarse), fine_(fine), grid_(grid), cfg_(cfg), oracle_(oracle), slots_(cfg.intervals + 1)
  {
    const std::size_t K = cfg.max_iters;
    for (Slot& s : slots_) {
      s.boundary.resize(K + 1);
      s.coarse.resize(K + 1);
      s.fine.resize(K + 1);
    }
    for (std::size_t i = 0; i <= K; ++i) {
      slots_[0].boundary[i] = s0;
    }
    records_.reserve(K + 1);
    for (std::size_t i = 0; i <= K; ++i) {
      records_.push_back(make_record(i, cfg.intervals + 1, oracle != nullptr));
    }
  }

  PararealResult run(std::size_t workers)
  {
    const std::size_t L = cfg_.intervals;
    const std::size_t K = cfg_.max_iters;
    start_ = Clock::now();

    detail::TaskGraph graph;
    constexpr std::size_t sweep = 0;
    constexpr std::size_t fine = 1;
    const std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::vector<std::size_t>> s_node(K + 1, std::vector<std::size_t>(L + 1, none));
    std::vector<std::vector<std::size_t>> f_node(K + 1, std::vector<std::size_t>(L + 1, none));

    for (std::size_t l = 1; l <= L; ++l) {
      s_node[0][l] = graph.add([this, l] { predict(l); }, {0, sweep, l}, 0);
      if (l > 1) {
        graph.depends(s_node[0][l], s_node[0][l - 1]);
      }
    }
    for (std::size_t i = 1; i <= K; ++i) {
      for (std::size_t l = i; l <= L; ++l) {
        f_node[i][l] = graph.add([this, i, l] { propagate_fine(i, l); }, {i, fine, l}, i);
        if (s_node[i - 1][l - 1] != none) {
          graph.depends(f_node[i][l], s_node[i - 1][l - 1]);
        }
      }
      for (std::size_t l = i; l <= L; ++l) {
        s_node[i][l] = graph.add([this, i, l, &graph] { correct(i, l, graph); }, {i, sweep, l}, i);
        graph.depends(s_node[i][l], f_node[i][l]);
        graph.depends(s_node[i][l], s_node[i - 1][l]);
        if (l > i) {
          graph.depends(s_node[i][l], s_node[i][l - 1]);
        }
      }
    }
    graph.run(workers);
    return collect();
  }

private:
  struct Slot
  {
    std::mutex lock;
    std::vector<std::optional<State>> boundary;
    std::vector<std::optional<State>> coarse;
    std::vector<std::optional<State>> fine;
  };

  State read_boundary(std::size_t l, std::size_t i)
  {
    std::scoped_lock guard(slots_[l].lock);
    return *slots_[l].boundary[i];
  }
  State read_coarse(std::size_t l, std::size_t i)
  {
    std::scoped_lock guard(slots_[l].lock);
    return *slots_[l].coarse[i];
  }
  State read_fine(std::size_t l, std::size_t i)
  {
    std::scoped_lock guard(slots_[l].lock);
    return *slots_[l].fine[i];
  }

  void predict(std::size_t l)
  {
    const auto t0 = Clock::now();
    const State prev = read_boundary(l - 1, 0);
    State c = annotate(0, l, [&] { return coarse_.advance(prev, grid_[l]); });
    coarse_count_.fetch_add(1, std::memory_order_relaxed);
    const double err = error_vs(c, oracle_, l);
    {
      std::scoped_lock guard(slots_[l].lock);
      slots_[l].coarse[0] = c;
      slots_[l].boundary[0] = std::move(c);
    }
    std::scoped_lock guard(records_lock_);
    IterationRecord& rec = records_[0];
    if (oracle_ != nullptr) {
      rec.boundary_errors[l] = err;
    }
    rec.coarse_seconds += seconds_since(t0);
    if (l == cfg_.intervals) {
      rec.elapsed_seconds = seconds_since(start_);
    }
  }

  void propagate_fine(std::size_t i, std::size_t l)
  {
    const auto t0 = Clock::now();
    const State prev = read_boundary(l - 1, i - 1);
    State f = annotate(i, l, [&] { return fine_.advance(prev, grid_[l]); });
    fine_count_.fetch_add(1, std::memory_order_relaxed);
    {
      std::scoped_lock guard(slots_[l].lock);
      slots_[l].fine[i] = std::move(f);
    }
    std::scoped_lock guard(records_lock_);
    records_[i].fine_seconds += seconds_since(t0);
  }

  void correct(std::size_t i, std::size_t l, detail::TaskGraph& graph)
  {
    const auto t0 = Clock::now();
    const State f = read_fine(l, i);
    const State g_old = read_coarse(l, i - 1);
    const State u_old = read_boundary(l, i - 1);
    State next;
    State g_new;
    double theta = 1.0;
    if (l == i) {
      theta = theta_weight(f, g_old, cfg_.variant, cfg_.theta_clamp);
      next = f;
      g_new = g_old;
    } else {
      const State prev = read_boundary(l - 1, i);
      g_new = annotate(i, l, [&] { return coarse_.advance(prev, grid_[l]); });
      coarse_count_.fetch_add(1, std::memory_order_relaxed);
      theta = theta_weight(f, g_new, cfg_.variant, cfg_.theta_clamp);
      next = parareal_update(g_new, f, g_old, theta);
    }
    const double corr = correction(next, u_old);
    const double err = error_vs(next, oracle_, l);
    {
      std::scoped_lock guard(slots_[l].lock);
      slots_[l].coarse[i] = std::move(g_new);
      slots_[l].boundary[i] = std::move(next);
    }

    std::scoped_lock guard(records_lock_);
    IterationRecord& rec = records_[i];
    rec.theta_values[l] = theta;
    rec.correction_norms[l] = corr;
    rec.max_correction = std::max(rec.max_correction, corr);
    if (oracle_ != nullptr) {
      rec.boundary_errors[l] = err;
    }
    rec.coarse_seconds += seconds_since(t0);
    if (l == cfg_.intervals) {
      rec.elapsed_seconds = seconds_since(start_);
      if (rec.max_correction <= cfg_.tol || i == cfg_.max_iters) {
        if (stop_iteration_ > i) {
          stop_iteration_ = i;
          converged_ = rec.max_correction <= cfg_.tol;
        }
        graph.set_cutoff(i);
      }
    }
  }

  PararealResult collect()
  {
    const std::size_t L = cfg_.intervals;
    const std::size_t stop = std::min(stop_iteration_, cfg_.max_iters);
    PararealResult out;
    out.boundaries.reserve(L + 1);
    for (std::size_t l = 0; l <= L; ++l) {
      out.boundaries.push_back(*slots_[l].boundary[std::min(l, stop)]);
    }
    for (std::size_t i = 0; i <= stop; ++i) {
      IterationRecord rec = std::move(records_[i]);
      for (std::size_t l = 1; l < i; ++l) {
        const IterationRecord& prev = out.trace.iterations.back();
        if (oracle_ != nullptr) {
          rec.boundary_errors[l] = prev.boundary_errors[l];
        }
        rec.theta_values[l] = prev.theta_values[l];
      }
      out.trace.iterations.push_back(std::move(rec));
    }
    out.trace.converged = converged_;
    out.trace.fine_propagations = fine_count_.load();
    out.trace.coarse_propagations = coarse_count_.load();
    return out;
  }

  const Propagator& coarse_;
  const Propagator& fine_;
  std::span<const double> grid_;
  const PararealConfig& cfg_;
  const std::vector<State>* oracle_;
  std::vector<Slot> slots_;
  std::vector<IterationRecord> records_;
  std::mutex records_lock_;
  std::size_t stop_iteration_ = static_cast<std::size_t>(-1);
  bool converged_ = false;
  std::atomic<std::size_t> fine_count_{0};
  std::atomic<std::size_t> coarse_count_{0};
  Clock::time_point start_;
};

} // namespace detail

/// Parareal / theta-Parareal over [s0.time, t_end] split into cfg.intervals windows.
///
/// Iteration 0 is the sequential coarse prediction. Iteration i runs the fine propagator on
/// windows i..L and then the predictor-corrector sweep
///   X_l^i = theta C(X_{l-1}^i) + F(X_{l-1}^{i-1}) - theta C(X_{l-1}^{i-1}),
/// after which boundaries 0..i coincide with the sequential fine solution. With an oracle
/// (the sequential fine states at every boundary) the trace carries per-boundary errors.
/// Serial and pipelined schedules produce identical numbers.
[[nodiscard]] inline PararealResult run_parareal(const Propagator& coarse, const Propagator& fine, const State& s0,
                                                 double t_end, const PararealConfig& cfg,
                                                 const std::vector<State>* oracle = nullptr)
{
  cfg.validate();
  s0.validate();
  const RealVector grid = uniform_grid(s0.time, t_end, cfg.intervals);
  detail::check_windows(coarse, grid, "coarse");
  detail::check_windows(fine, grid, "fine");
  if (oracle != nullptr && oracle->size() != grid.size()) {
    throw ShapeMismatch("run_parareal: oracle must hold one state per boundary");
  }

  if (const auto* p = std::get_if<PipelinedScheduler>(&cfg.scheduler); p != nullptr && p->workers > 1) {
    detail::PipelinedRun run(coarse, fine, s0, grid, cfg, oracle);
    return run.run(p->workers);
  }
  return detail::run_serial(coarse, fine, s0, grid, cfg, oracle);
}

} // namespace pint

#endif // PINT_PARAREAL_HPP
