#ifndef PINT_LINALG_HPP
#define PINT_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pint/error.hpp"

namespace pint {

using RealVector = std::vector<double>;

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b, const char* what)
{
  if (a != b) {
    throw ShapeMismatch(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                        std::to_string(b) + ")");
  }
}

inline void require_nonempty(std::size_t n, const char* what)
{
  if (n == 0) {
    throw ShapeMismatch(std::string(what) + ": empty vector");
  }
}

} // namespace detail

[[nodiscard]] inline bool all_finite(std::span<const double> x)
{
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

inline void require_finite(std::span<const double> x, const char* what)
{
  if (!all_finite(x)) {
    throw NumericBreakdown(std::string(what) + ": non-finite value encountered");
  }
}

// The kernels check their results rather than their inputs: a NaN or Inf anywhere in the
// inputs (or an overflow) always reaches the result.

/// alpha * x + y
[[nodiscard]] inline RealVector axpy(double alpha, std::span<const double> x, std::span<const double> y)
{
  detail::require_same_length(x.size(), y.size(), "axpy");
  detail::require_nonempty(x.size(), "axpy");
  RealVector out(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] += alpha * x[i];
  }
  require_finite(out, "axpy");
  return out;
}

[[nodiscard]] inline double dot(std::span<const double> x, std::span<const double> y)
{
  detail::require_same_length(x.size(), y.size(), "dot");
  detail::require_nonempty(x.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += x[i] * y[i];
  }
  if (!std::isfinite(s)) {
    throw NumericBreakdown("dot: non-finite result");
  }
  return s;
}

[[nodiscard]] inline double norm2(std::span<const double> x)
{
  return std::sqrt(dot(x, x));
}

[[nodiscard]] inline double norm_inf(std::span<const double> x)
{
  detail::require_nonempty(x.size(), "norm_inf");
  require_finite(x, "norm_inf");
  double m = 0.0;
  for (double v : x) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

/// Euclidean norm of x - y without allocating.
[[nodiscard]] inline double distance2(std::span<const double> x, std::span<const double> y)
{
  detail::require_same_length(x.size(), y.size(), "distance2");
  detail::require_nonempty(x.size(), "distance2");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  if (!std::isfinite(s)) {
    throw NumericBreakdown("distance2: non-finite result");
  }
  return std::sqrt(s);
}

/// Tridiagonal matrix stored by bands. lower[i] is A(i+1, i), upper[i] is A(i, i+1).
struct Tridiagonal
{
  RealVector lower;
  RealVector diag;
  RealVector upper;

  [[nodiscard]] std::size_t size() const noexcept { return diag.size(); }

  void validate() const
  {
    const std::size_t n = diag.size();
    if (n == 0) {
      throw ShapeMismatch("Tridiagonal: empty diagonal");
    }
    detail::require_same_length(lower.size(), n - 1, "Tridiagonal lower band");
    detail::require_same_length(upper.size(), n - 1, "Tridiagonal upper band");
  }

  [[nodiscard]] RealVector apply(std::span<const double> x) const
  {
    validate();
    detail::require_same_length(x.size(), size(), "Tridiagonal::apply");
    const std::size_t n = size();
    RealVector y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) {
        s += lower[i - 1] * x[i - 1];
      }
      if (i + 1 < n) {
        s += upper[i] * x[i + 1];
      }
      y[i] = s;
    }
    return y;
  }
};

/// Thomas recursion without pivoting. A pivot below 1e-14 * max|diag| is a breakdown.
[[nodiscard]] inline RealVector solve_tridiagonal(const Tridiagonal& a, std::span<const double> b)
{
  a.validate();
  detail::require_same_length(b.size(), a.size(), "solve_tridiagonal");
  const std::size_t n = a.size();
  const double threshold = 1e-14 * norm_inf(a.diag);

  RealVector c_star(n, 0.0);
  RealVector d_star(n, 0.0);

  double pivot = a.diag[0];
  if (!(std::abs(pivot) > threshold)) {
    throw NumericBreakdown("solve_tridiagonal: zero pivot at row 0");
  }
  if (n > 1) {
    c_star[0] = a.upper[0] / pivot;
  }
  d_star[0] = b[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = a.diag[i] - a.lower[i - 1] * c_star[i - 1];
    if (!(std::abs(pivot) > threshold)) {
      throw NumericBreakdown("solve_tridiagonal: zero pivot at row " + std::to_string(i));
    }
    if (i + 1 < n) {
      c_star[i] = a.upper[i] / pivot;
    }
    d_star[i] = (b[i] - a.lower[i - 1] * d_star[i - 1]) / pivot;
  }

  RealVector x(n);
  x[n - 1] = d_star[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    x[i] = d_star[i] - c_star[i] * x[i + 1];
  }
  require_finite(x, "solve_tridiagonal");
  return x;
}

/// Square row-major matrix, used for finite-difference Jacobians.
class DenseMatrix
{
public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  [[nodiscard]] RealVector apply(std::span<const double> x) const
  {
    detail::require_same_length(x.size(), n_, "DenseMatrix::apply");
    RealVector y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        s += a_[i * n_ + j] * x[j];
      }
      y[i] = s;
    }
    return y;
  }

private:
  std::size_t n_ = 0;
  RealVector a_;
};

/// Gaussian elimination with partial pivoting; takes the matrix by value and factors in place.
[[nodiscard]] inline RealVector solve_dense(DenseMatrix a, RealVector b)
{
  const std::size_t n = a.size();
  detail::require_same_length(b.size(), n, "solve_dense");
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      scale = std::max(scale, std::abs(a(i, j)));
    }
  }
  const double threshold = 1e-14 * scale;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > std::abs(a(p, k))) {
        p = i;
      }
    }
    if (!(std::abs(a(p, k)) > threshold)) {
      throw NumericBreakdown("solve_dense: singular matrix at column " + std::to_string(k));
    }
    if (p != k) {
      for (std::size_t j = k; j < n; ++j) {
        std::swap(a(k, j), a(p, j));
      }
      std::swap(b[k], b[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) {
        continue;
      }
      for (std::size_t j = k + 1; j < n; ++j) {
        a(i, j) -= f * a(k, j);
      }
      b[i] -= f * b[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) {
      s -= a(k, j) * b[j];
    }
    b[k] = s / a(k, k);
  }
  require_finite(b, "solve_dense");
  return b;
}

struct NewtonSettings
{
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_iters = 25;
  double damping_min = 1.0 / 64.0;
  double fd_epsilon = 1e-7;

  void validate() const
  {
    if (!(abs_tol > 0.0) || !(rel_tol >= 0.0) || max_iters < 1 || !(damping_min > 0.0) ||
        !(damping_min <= 1.0) || !(fd_epsilon > 0.0)) {
      throw InvalidArgument("NewtonSettings: out-of-range setting");
    }
  }
};

/// Sparsity the finite-difference Jacobian may exploit.
enum class JacobianStructure
{
  Dense,
  Tridiagonal,
};

struct NewtonResult
{
  RealVector x;
  std::size_t iterations = 0;
  double residual_norm = 0.0;
  /// ||r|| before every update and after the last one.
  std::vector<double> residual_history;
};

using ResidualFn = std::function<RealVector(std::span<const double>)>;
using Jacobian = std::variant<DenseMatrix, Tridiagonal>;
using JacobianFn = std::function<Jacobian(std::span<const double>)>;

namespace detail {

inline DenseMatrix fd_jacobian_dense(const ResidualFn& residual, std::span<const double> x,
                                     std::span<const double> r, double eps)
{
  const std::size_t n = x.size();
  DenseMatrix jac(n);
  RealVector xp(x.begin(), x.end());
  for (std::size_t j = 0; j < n; ++j) {
    const double delta = eps * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + delta;
    const RealVector rp = residual(xp);
    xp[j] = x[j];
    require_same_length(rp.size(), n, "newton_solve residual");
    for (std::size_t i = 0; i < n; ++i) {
      jac(i, j) = (rp[i] - r[i]) / delta;
    }
  }
  return jac;
}

/// Three grouped perturbations recover every column of a tridiagonal Jacobian.
inline Tridiagonal fd_jacobian_tridiagonal(const ResidualFn& residual, std::span<const double> x,
                                           std::span<const double> r, double eps)
{
  const std::size_t n = x.size();
  Tridiagonal jac{RealVector(n - 1, 0.0), RealVector(n, 0.0), RealVector(n - 1, 0.0)};
  RealVector xp(x.begin(), x.end());
  RealVector delta(n);
  for (std::size_t j = 0; j < n; ++j) {
    delta[j] = eps * (1.0 + std::abs(x[j]));
  }
  for (std::size_t color = 0; color < 3 && color < n; ++color) {
    for (std::size_t j = color; j < n; j += 3) {
      xp[j] = x[j] + delta[j];
    }
    const RealVector rp = residual(xp);
    require_same_length(rp.size(), n, "newton_solve residual");
    for (std::size_t j = color; j < n; j += 3) {
      xp[j] = x[j];
      jac.diag[j] = (rp[j] - r[j]) / delta[j];
      if (j > 0) {
        jac.upper[j - 1] = (rp[j - 1] - r[j - 1]) / delta[j];
      }
      if (j + 1 < n) {
        jac.lower[j] = (rp[j + 1] - r[j + 1]) / delta[j];
      }
    }
  }
  return jac;
}

} // namespace detail

/// Damped Newton iteration for residual(x) = 0.
///
/// Without an analytic Jacobian the linearization is formed by finite differences with
/// increment fd_epsilon * (1 + |x_j|). Each update is halved until the residual norm
/// decreases or the damping floor is reached, at which point the damped step is taken anyway.
/// Throws NumericBreakdown on non-finite residuals or a singular linearization, and
/// MaxItersExceeded when the tolerance is not met within max_iters updates.
[[nodiscard]] inline NewtonResult newton_solve(const ResidualFn& residual, std::span<const double> x0,
                                               const NewtonSettings& settings,
                                               JacobianStructure structure = JacobianStructure::Dense,
                                               const std::optional<JacobianFn>& jacobian = std::nullopt)
{
  settings.validate();
  if (x0.empty()) {
    throw ShapeMismatch("newton_solve: empty initial guess");
  }
  NewtonResult out;
  out.x.assign(x0.begin(), x0.end());
  RealVector r = residual(out.x);
  detail::require_same_length(r.size(), out.x.size(), "newton_solve residual");
  require_finite(r, "newton_solve: residual at initial guess");

  double rnorm = norm2(r);
  const double target = settings.abs_tol + settings.rel_tol * rnorm;
  out.residual_history.push_back(rnorm);

  while (rnorm > target) {
    if (out.iterations == settings.max_iters) {
      throw MaxItersExceeded("newton_solve: residual " + std::to_string(rnorm) + " after " +
                             std::to_string(out.iterations) + " iterations");
    }
    RealVector neg_r(r.size());
    std::transform(r.begin(), r.end(), neg_r.begin(), [](double v) { return -v; });

    RealVector step;
    if (jacobian) {
      Jacobian jac = (*jacobian)(out.x);
      if (auto* tri = std::get_if<Tridiagonal>(&jac)) {
        step = solve_tridiagonal(*tri, neg_r);
      } else {
        step = solve_dense(std::get<DenseMatrix>(std::move(jac)), std::move(neg_r));
      }
    } else if (structure == JacobianStructure::Tridiagonal) {
      step = solve_tridiagonal(detail::fd_jacobian_tridiagonal(residual, out.x, r, settings.fd_epsilon), neg_r);
    } else {
      step = solve_dense(detail::fd_jacobian_dense(residual, out.x, r, settings.fd_epsilon), std::move(neg_r));
    }

    double lambda = 1.0;
    RealVector trial;
    RealVector r_trial;
    double trial_norm = 0.0;
    for (;;) {
      trial = axpy(lambda, step, out.x);
      r_trial = residual(trial);
      trial_norm = all_finite(r_trial) ? norm2(r_trial) : std::numeric_limits<double>::infinity();
      if (trial_norm < rnorm || lambda * 0.5 < settings.damping_min) {
        break;
      }
      lambda *= 0.5;
    }
    if (!std::isfinite(trial_norm)) {
      throw NumericBreakdown("newton_solve: non-finite residual after damped update");
    }
    out.x = std::move(trial);
    r = std::move(r_trial);
    rnorm = trial_norm;
    ++out.iterations;
    out.residual_history.push_back(rnorm);
  }
  out.residual_norm = rnorm;
  return out;
}

} // namespace pint

#endif // PINT_LINALG_HPP
