#ifndef PINT_TESTS_ORACLES_HPP
#define PINT_TESTS_ORACLES_HPP

// Reference computations used only by the tests. Nothing here calls into the code paths it
// is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "pint/integrators.hpp"
#include "pint/parareal.hpp"
#include "pint/state.hpp"

namespace pint::oracle {

/// Dense Gaussian elimination with full row pivoting on a vector-of-rows copy.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b)
{
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[p][k])) {
        p = i;
      }
    }
    std::swap(a[k], a[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) {
        a[i][j] -= f * a[k][j];
      }
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) {
      s -= a[k][j] * x[j];
    }
    x[k] = s / a[k][k];
  }
  return x;
}

inline std::vector<std::vector<double>> to_dense(const Tridiagonal& t)
{
  const std::size_t n = t.diag.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = t.diag[i];
    if (i + 1 < n) {
      a[i][i + 1] = t.upper[i];
      a[i + 1][i] = t.lower[i];
    }
  }
  return a;
}

/// Root of a scalar function on [lo, hi] with a sign change.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200)
{
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Discrete Dirichlet Laplacian eigenvalue for sin(m pi x / length): -(2 nu / h^2)(1 - cos(m pi h / length)).
inline double heat_sine_eigenvalue(double nu, double length, std::size_t mesh_n, int mode)
{
  const double h = length / static_cast<double>(mesh_n + 1);
  return -(2.0 * nu / (h * h)) * (1.0 - std::cos(mode * std::numbers::pi * h / length));
}

struct TextbookRun
{
  /// iterates[i][l]: boundary l after iteration i (i = 0 is the coarse prediction).
  std::vector<std::vector<State>> iterates;
  std::vector<std::vector<double>> thetas;
};

/// Straightforward Parareal: every iteration recomputes every fine and coarse propagation on
/// all intervals and applies the weighted update in one sweep. No skipping, no scheduling.
inline TextbookRun textbook_parareal(const Propagator& coarse, const Propagator& fine, const State& s0, double t_end,
                                     std::size_t intervals, std::size_t iterations, PararealVariant variant,
                                     double clamp_lo = 0.0, double clamp_hi = 1.0)
{
  std::vector<double> t(intervals + 1);
  for (std::size_t l = 0; l <= intervals; ++l) {
    t[l] = s0.time + (t_end - s0.time) * static_cast<double>(l) / static_cast<double>(intervals);
  }
  t.back() = t_end;

  auto weight = [&](const State& f, const State& c) {
    if (variant == PararealVariant::Classic) {
      return 1.0;
    }
    double total = 0.0;
    for (const Block& b : c.layout->blocks()) {
      double fc = 0.0;
      double cc = 0.0;
      double ff = 0.0;
      for (std::size_t j = b.offset; j < b.offset + b.length; ++j) {
        fc += f.values[j] * c.values[j];
        cc += c.values[j] * c.values[j];
        ff += f.values[j] * f.values[j];
      }
      double w = 1.0;
      if (variant == PararealVariant::ThetaLeastSquares && cc > 1e-28) {
        w = fc / cc;
      } else if (variant == PararealVariant::ThetaAnglePenalized && cc > 1e-28 && ff > 1e-28) {
        w = fc / (cc * ff);
      }
      total += w;
    }
    const double avg = total / static_cast<double>(c.layout->blocks().size());
    return std::min(std::max(avg, clamp_lo), clamp_hi);
  };

  TextbookRun run;
  std::vector<State> u(intervals + 1, s0);
  for (std::size_t l = 1; l <= intervals; ++l) {
    u[l] = coarse.advance(u[l - 1], t[l]);
  }
  run.iterates.push_back(u);
  run.thetas.emplace_back(intervals + 1, 1.0);

  for (std::size_t it = 1; it <= iterations; ++it) {
    std::vector<State> fine_old(intervals + 1);
    std::vector<State> coarse_old(intervals + 1);
    for (std::size_t l = 1; l <= intervals; ++l) {
      fine_old[l] = fine.advance(u[l - 1], t[l]);
      coarse_old[l] = coarse.advance(u[l - 1], t[l]);
    }
    std::vector<State> next(intervals + 1, s0);
    std::vector<double> th(intervals + 1, 1.0);
    for (std::size_t l = 1; l <= intervals; ++l) {
      const State c_new = coarse.advance(next[l - 1], t[l]);
      th[l] = weight(fine_old[l], c_new);
      State x = fine_old[l];
      for (std::size_t j = 0; j < x.values.size(); ++j) {
        x.values[j] = th[l] * c_new.values[j] + fine_old[l].values[j] - th[l] * coarse_old[l].values[j];
      }
      next[l] = std::move(x);
    }
    u = next;
    run.iterates.push_back(u);
    run.thetas.push_back(th);
  }
  return run;
}

inline double rel_diff(const State& a, const State& b)
{
  double d = 0.0;
  double n = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) {
    d += (a.values[j] - b.values[j]) * (a.values[j] - b.values[j]);
    n += b.values[j] * b.values[j];
  }
  return n > 0.0 ? std::sqrt(d / n) : std::sqrt(d);
}

/// Earliest finish time of a pipelined Parareal run with unlimited workers.
///
/// Boundary l of iterate i needs the fine solve started from boundary l-1 of iterate i-1, the
/// coarse solve from boundary l-1 of iterate i and boundary l of iterate i-1. Boundary i of
/// iterate i is the fine value itself and costs no coarse solve.
inline double pipelined_critical_path(std::size_t intervals, std::size_t iterations, double coarse_cost,
                                      double fine_cost)
{
  std::vector<double> prev(intervals + 1, 0.0);
  for (std::size_t l = 1; l <= intervals; ++l) {
    prev[l] = prev[l - 1] + coarse_cost;
  }
  for (std::size_t i = 1; i <= iterations; ++i) {
    std::vector<double> cur(intervals + 1, 0.0);
    for (std::size_t l = i; l <= intervals; ++l) {
      const double fine_done = prev[l - 1] + fine_cost;
      if (l == i) {
        cur[l] = std::max(fine_done, prev[l]);
      } else {
        cur[l] = std::max({fine_done, prev[l], cur[l - 1]}) + coarse_cost;
      }
    }
    prev = std::move(cur);
  }
  return prev[intervals];
}

} // namespace pint::oracle

#endif // PINT_TESTS_ORACLES_HPP
