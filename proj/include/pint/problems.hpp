#ifndef PINT_PROBLEMS_HPP
#define PINT_PROBLEMS_HPP

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "pint/error.hpp"
#include "pint/linalg.hpp"
#include "pint/state.hpp"

namespace pint {

enum class ProblemKind
{
  Dahlquist,
  Heat1D,
  Advection1D,
  AlePiston,
};

[[nodiscard]] inline std::string_view to_string(ProblemKind k)
{
  switch (k) {
    case ProblemKind::Dahlquist: return "dahlquist";
    case ProblemKind::Heat1D: return "heat1d";
    case ProblemKind::Advection1D: return "advection1d";
    case ProblemKind::AlePiston: return "alepiston";
  }
  return "unknown";
}

/// sin(m * pi * x / length)
struct SineMode
{
  int mode = 1;
};

struct ZeroInit
{
};

/// exp(-((x - center) / width)^2)
struct GaussianBump
{
  double center = 0.5;
  double width = 0.1;
};

/// y' = lambda * y
struct DahlquistParams
{
  double lambda = -1.0;
  double y0 = 1.0;
};

/// v_t = nu * v_xx on (0, length) with Dirichlet values at both ends.
struct Heat1DParams
{
  double nu = 2e-2;
  double length = 1.0;
  double left_bc = 0.0;
  double right_bc = 0.0;
  std::variant<SineMode, ZeroInit> init = SineMode{1};
};

/// v_t + speed * v_x = 0 with central differences, periodic or homogeneous Dirichlet.
struct Advection1DParams
{
  double speed = 1.0;
  double length = 1.0;
  std::variant<GaussianBump, SineMode> init = GaussianBump{};
  bool periodic = true;
};

/// 1D ALE fluid column on (0, L0 + u) closed by a spring-mounted piston.
///
/// The fluid is transported by adv and diffuses with nu on the moving interval. The left end
/// carries the inflow v_in * s(t); the right end moves with the piston velocity w.
struct AlePistonParams
{
  double rho_f = 1e3;   // kg/m^3
  double nu = 2e-2;     // m^2/s
  double L0 = 1.0;      // m
  double adv = 0.2;     // m/s
  double m_s = 50.0;    // kg
  double kappa = 200.0; // N/m
  double v_in = 0.5;    // m/s
  double period = 1.0;  // s
};

using ProblemParams = std::variant<DahlquistParams, Heat1DParams, Advection1DParams, AlePistonParams>;

/// One model problem with its discretization size.
struct ProblemSpec
{
  ProblemParams params = DahlquistParams{};
  /// Interior nodes (fluid nodes for AlePiston); ignored for Dahlquist.
  std::size_t mesh_n = 63;

  [[nodiscard]] ProblemKind kind() const noexcept { return static_cast<ProblemKind>(params.index()); }

  template <class P>
  [[nodiscard]] const P& as() const
  {
    return std::get<P>(params);
  }

  void validate() const
  {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument(std::string("ProblemSpec: ") + what + " must be positive");
      }
    };
    auto finite = [](double v, const char* what) {
      if (!std::isfinite(v)) {
        throw InvalidArgument(std::string("ProblemSpec: ") + what + " must be finite");
      }
    };
    if (kind() != ProblemKind::Dahlquist && mesh_n < 3) {
      throw InvalidArgument("ProblemSpec: mesh_n must be at least 3");
    }
    std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, DahlquistParams>) {
          finite(p.lambda, "lambda");
          finite(p.y0, "y0");
        } else if constexpr (std::is_same_v<P, Heat1DParams>) {
          positive(p.nu, "nu");
          positive(p.length, "length");
          finite(p.left_bc, "left_bc");
          finite(p.right_bc, "right_bc");
        } else if constexpr (std::is_same_v<P, Advection1DParams>) {
          if (!(std::abs(p.speed) > 0.0) || !std::isfinite(p.speed)) {
            throw InvalidArgument("ProblemSpec: advection speed must be nonzero");
          }
          positive(p.length, "length");
          if (const auto* g = std::get_if<GaussianBump>(&p.init)) {
            positive(g->width, "bump width");
          }
        } else {
          positive(p.rho_f, "rho_f");
          positive(p.nu, "nu");
          positive(p.L0, "L0");
          finite(p.adv, "adv");
          positive(p.m_s, "m_s");
          positive(p.kappa, "kappa");
          if (!(p.v_in >= 0.0) || !std::isfinite(p.v_in)) {
            throw InvalidArgument("ProblemSpec: v_in must be non-negative");
          }
          positive(p.period, "period");
        }
      },
      params);
  }
};

/// Oscillating inflow profile 1/2 (1 - cos(pi t / period)), starting from rest at t = 0.
[[nodiscard]] inline double forcing_s(double t, double period)
{
  if (!(period > 0.0)) {
    throw InvalidArgument("forcing_s: period must be positive");
  }
  return 0.5 * (1.0 - std::cos(std::numbers::pi * t / period));
}

[[nodiscard]] inline std::shared_ptr<const Layout> make_layout(const ProblemSpec& p)
{
  switch (p.kind()) {
    case ProblemKind::Dahlquist: return Layout::single("y", 1);
    case ProblemKind::Heat1D: return Layout::single("v", p.mesh_n);
    case ProblemKind::Advection1D: return Layout::single("v", p.mesh_n);
    case ProblemKind::AlePiston:
      return std::make_shared<const Layout>(std::vector<Block>{
        {"v", 0, p.mesh_n}, {"u", p.mesh_n, 1}, {"w", p.mesh_n + 1, 1}});
  }
  throw InvalidArgument("make_layout: unknown problem kind");
}

/// Grid spacing of the spatial discretization (reference spacing for AlePiston).
[[nodiscard]] inline double grid_spacing(const ProblemSpec& p)
{
  switch (p.kind()) {
    case ProblemKind::Dahlquist: return 1.0;
    case ProblemKind::Heat1D: return p.as<Heat1DParams>().length / static_cast<double>(p.mesh_n + 1);
    case ProblemKind::Advection1D: {
      const auto& a = p.as<Advection1DParams>();
      const double cells = a.periodic ? static_cast<double>(p.mesh_n) : static_cast<double>(p.mesh_n + 1);
      return a.length / cells;
    }
    case ProblemKind::AlePiston: return 1.0 / static_cast<double>(p.mesh_n + 1);
  }
  return 1.0;
}

/// Node positions of the spatial unknowns.
///
/// Dirichlet grids use x_i = i h for i = 1..n; the periodic advection grid uses x_i = i h for
/// i = 0..n-1. AlePiston returns reference coordinates in (0, 1).
[[nodiscard]] inline RealVector node_coordinates(const ProblemSpec& p)
{
  if (p.kind() == ProblemKind::Dahlquist) {
    return {};
  }
  const double h = grid_spacing(p);
  const bool periodic = p.kind() == ProblemKind::Advection1D && p.as<Advection1DParams>().periodic;
  RealVector x(p.mesh_n);
  for (std::size_t i = 0; i < p.mesh_n; ++i) {
    x[i] = static_cast<double>(periodic ? i : i + 1) * h;
  }
  return x;
}

[[nodiscard]] inline JacobianStructure jacobian_structure(const ProblemSpec& p)
{
  switch (p.kind()) {
    case ProblemKind::Dahlquist:
    case ProblemKind::Heat1D: return JacobianStructure::Tridiagonal;
    case ProblemKind::Advection1D:
      return p.as<Advection1DParams>().periodic ? JacobianStructure::Dense : JacobianStructure::Tridiagonal;
    case ProblemKind::AlePiston: return JacobianStructure::Dense;
  }
  return JacobianStructure::Dense;
}

[[nodiscard]] inline State initial_state(const ProblemSpec& p)
{
  p.validate();
  auto layout = make_layout(p);
  RealVector v(layout->size(), 0.0);
  switch (p.kind()) {
    case ProblemKind::Dahlquist: v[0] = p.as<DahlquistParams>().y0; break;
    case ProblemKind::Heat1D: {
      const auto& h = p.as<Heat1DParams>();
      if (const auto* m = std::get_if<SineMode>(&h.init)) {
        const RealVector x = node_coordinates(p);
        for (std::size_t i = 0; i < x.size(); ++i) {
          v[i] = std::sin(m->mode * std::numbers::pi * x[i] / h.length);
        }
      }
      break;
    }
    case ProblemKind::Advection1D: {
      const auto& a = p.as<Advection1DParams>();
      const RealVector x = node_coordinates(p);
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (const auto* g = std::get_if<GaussianBump>(&a.init)) {
          const double z = (x[i] - g->center) / g->width;
          v[i] = std::exp(-z * z);
        } else {
          v[i] = std::sin(std::get<SineMode>(a.init).mode * std::numbers::pi * x[i] / a.length);
        }
      }
      break;
    }
    case ProblemKind::AlePiston: break; // starts from rest
  }
  return State(std::move(v), 0.0, std::move(layout));
}

namespace detail {

inline void heat_rhs(const Heat1DParams& p, double h, std::span<const double> v, std::span<double> out)
{
  const std::size_t n = v.size();
  const double c = p.nu / (h * h);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? p.left_bc : v[i - 1];
    const double right = i + 1 == n ? p.right_bc : v[i + 1];
    out[i] = c * (left - 2.0 * v[i] + right);
  }
}

inline void advection_rhs(const Advection1DParams& p, double h, std::span<const double> v, std::span<double> out)
{
  const std::size_t n = v.size();
  const double c = -p.speed / (2.0 * h);
  for (std::size_t i = 0; i < n; ++i) {
    double left = 0.0;
    double right = 0.0;
    if (p.periodic) {
      left = v[(i + n - 1) % n];
      right = v[(i + 1) % n];
    } else {
      left = i == 0 ? 0.0 : v[i - 1];
      right = i + 1 == n ? 0.0 : v[i + 1];
    }
    out[i] = c * (right - left);
  }
}

} // namespace detail

/// Fluid stress rho_f * nu * dv/dx at the piston, from a second-order one-sided difference on the
/// reference grid scaled by the current length L0 + u.
[[nodiscard]] inline double interface_traction(const ProblemSpec& p, const State& s)
{
  const auto& a = p.as<AlePistonParams>();
  const auto v = s.block("v");
  const double u = s.block("u")[0];
  const double w = s.block("w")[0];
  const std::size_t n = v.size();
  const double h = grid_spacing(p);
  const double dx = (3.0 * w - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
  return a.rho_f * a.nu * dx / (a.L0 + u);
}

/// Semi-discrete time derivative of every unknown.
///
/// AlePiston unknowns are the interior fluid velocities on the reference grid, the piston
/// displacement u and velocity w. On the reference interval the fluid obeys
///   v_t = -((adv - x w) / L) v_x + (nu / L^2) v_xx,   L = L0 + u,
/// with v(0) = v_in s(t) and v(1) = w. The piston obeys u_t = w and
///   m_s w_t = -traction - kappa u,
/// where traction is the fluid stress at the interface; the fluid's pull on the piston opposes
/// the fluid stress because the fluid's outward normal there is +x.
[[nodiscard]] inline RealVector rhs(const ProblemSpec& p, const State& s, double t)
{
  RealVector out(s.values.size(), 0.0);
  const double h = grid_spacing(p);
  switch (p.kind()) {
    case ProblemKind::Dahlquist: out[0] = p.as<DahlquistParams>().lambda * s.values[0]; break;
    case ProblemKind::Heat1D: detail::heat_rhs(p.as<Heat1DParams>(), h, s.values, out); break;
    case ProblemKind::Advection1D: detail::advection_rhs(p.as<Advection1DParams>(), h, s.values, out); break;
    case ProblemKind::AlePiston: {
      const auto& a = p.as<AlePistonParams>();
      const auto v = s.block("v");
      const double u = s.block("u")[0];
      const double w = s.block("w")[0];
      if (!(std::abs(u) < 0.9 * a.L0)) {
        throw MeshDegenerate("AlePiston: interface displacement " + std::to_string(u) + " collapses the fluid domain");
      }
      const double len = a.L0 + u;
      const double inflow = a.v_in * forcing_s(t, a.period);
      const std::size_t n = v.size();
      const double diff = a.nu / (len * len * h * h);
      for (std::size_t i = 0; i < n; ++i) {
        const double xi = static_cast<double>(i + 1) * h;
        const double left = i == 0 ? inflow : v[i - 1];
        const double right = i + 1 == n ? w : v[i + 1];
        const double transport = (a.adv - xi * w) / len;
        out[i] = -transport * (right - left) / (2.0 * h) + diff * (left - 2.0 * v[i] + right);
      }
      out[n] = w;
      out[n + 1] = (-interface_traction(p, s) - a.kappa * u) / a.m_s;
      break;
    }
  }
  return out;
}

/// Constant Jacobian of rhs for the linear kinds; empty for AlePiston.
[[nodiscard]] inline std::optional<Jacobian> rhs_jacobian(const ProblemSpec& p)
{
  const std::size_t n = p.kind() == ProblemKind::Dahlquist ? 1 : p.mesh_n;
  const double h = grid_spacing(p);
  switch (p.kind()) {
    case ProblemKind::Dahlquist: return Tridiagonal{{}, {p.as<DahlquistParams>().lambda}, {}};
    case ProblemKind::Heat1D: {
      const double c = p.as<Heat1DParams>().nu / (h * h);
      return Tridiagonal{RealVector(n - 1, c), RealVector(n, -2.0 * c), RealVector(n - 1, c)};
    }
    case ProblemKind::Advection1D: {
      const auto& a = p.as<Advection1DParams>();
      const double c = -a.speed / (2.0 * h);
      if (!a.periodic) {
        return Tridiagonal{RealVector(n - 1, -c), RealVector(n, 0.0), RealVector(n - 1, c)};
      }
      DenseMatrix m(n);
      for (std::size_t i = 0; i < n; ++i) {
        m(i, (i + 1) % n) += c;
        m(i, (i + n - 1) % n) -= c;
      }
      return m;
    }
    case ProblemKind::AlePiston: break;
  }
  return std::nullopt;
}

/// Discrete energy 1/2 m_s w^2 + 1/2 kappa u^2 + 1/2 rho_f (L0 + u) h sum v_i^2 of an AlePiston state.
[[nodiscard]] inline double ale_energy(const ProblemSpec& p, const State& s)
{
  const auto& a = p.as<AlePistonParams>();
  const auto v = s.block("v");
  const double u = s.block("u")[0];
  const double w = s.block("w")[0];
  return 0.5 * a.m_s * w * w + 0.5 * a.kappa * u * u + 0.5 * a.rho_f * (a.L0 + u) * grid_spacing(p) * dot(v, v);
}

} // namespace pint

#endif // PINT_PROBLEMS_HPP
