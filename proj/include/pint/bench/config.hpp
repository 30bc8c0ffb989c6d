#ifndef PINT_BENCH_CONFIG_HPP
#define PINT_BENCH_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pint/error.hpp"
#include "pint/integrators.hpp"
#include "pint/parareal.hpp"
#include "pint/problems.hpp"

namespace pint::bench {

/// Anything wrong with an experiment description. Maps to exit code 2.
class ConfigError : public InvalidArgument
{
public:
  using InvalidArgument::InvalidArgument;
};

/// Output-file failures. Maps to exit code 4.
class IoError : public Error
{
public:
  using Error::Error;
};

/// Flat "section.key" -> value map read from an INI-style file.
using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

} // namespace detail

/// Keys outside any section land in [experiment]. '#' and ';' start comments.
inline KeyValues parse_ini(std::istream& in, const std::string& origin = "<config>")
{
  KeyValues kv;
  std::string section = "experiment";
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    const std::string text = detail::trim(std::string_view(line).substr(0, hash));
    if (text.empty()) {
      continue;
    }
    if (text.front() == '[') {
      if (text.back() != ']' || text.size() < 3) {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      }
      section = detail::lower(detail::trim(std::string_view(text).substr(1, text.size() - 2)));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::lower(detail::trim(std::string_view(text).substr(0, eq)));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    kv[section + "." + key] = detail::trim(std::string_view(text).substr(eq + 1));
  }
  return kv;
}

inline KeyValues load_ini(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file '" + path + "'");
  }
  return parse_ini(in, path);
}

/// Applies "--key=value" style overrides ("key=value" without the dashes also works). A key
/// without a section refers to [experiment].
inline void apply_override(KeyValues& kv, std::string_view arg)
{
  while (arg.starts_with('-')) {
    arg.remove_prefix(1);
  }
  const auto eq = arg.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(arg) + "' is not key=value");
  }
  std::string key = detail::lower(std::string(arg.substr(0, eq)));
  if (key.find('.') == std::string::npos) {
    key = "experiment." + key;
  }
  kv[key] = std::string(arg.substr(eq + 1));
}

struct ExperimentConfig
{
  ProblemSpec problem{};
  double horizon = 1.0;
  std::size_t intervals = 20;
  std::vector<double> coarse_steps{0.05};
  double fine_step = 0.005;
  std::vector<PararealVariant> variants{PararealVariant::Classic};
  std::size_t workers = 1;
  std::size_t reference_fine_factor = 4;
  std::int64_t seed = 0;
  std::string output_path;
  std::size_t max_iters = 5;
  double tol = 1e-12;
  double theta0 = 0.0;
  NewtonSettings newton{};
  /// Every key that was read, for the metadata echo.
  KeyValues echo;

  [[nodiscard]] ThetaSettings coarse_settings(double K) const { return ThetaSettings{theta0, K, newton}; }
  [[nodiscard]] ThetaSettings fine_settings() const { return ThetaSettings{theta0, fine_step, newton}; }

  void validate() const
  {
    try {
      problem.validate();
      newton.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw ConfigError("horizon must be positive");
    }
    if (intervals < 2) {
      throw ConfigError("intervals must be at least 2");
    }
    if (max_iters < 1 || max_iters > intervals) {
      throw ConfigError("max_iters must lie in [1, intervals]");
    }
    if (!(tol > 0.0)) {
      throw ConfigError("tol must be positive");
    }
    if (coarse_steps.empty()) {
      throw ConfigError("coarse_steps is empty");
    }
    if (variants.empty()) {
      throw ConfigError("variants is empty");
    }
    if (workers < 1) {
      throw ConfigError("workers must be at least 1");
    }
    if (reference_fine_factor < 2) {
      throw ConfigError("reference_fine_factor must be at least 2");
    }
    const double window = horizon / static_cast<double>(intervals);
    auto divides = [window](double step) {
      if (!(step > 0.0) || !std::isfinite(step)) {
        return false;
      }
      const double n = std::round(window / step);
      return n >= 1.0 && std::abs(n * step - window) <= 1e-9 * window;
    };
    for (double K : coarse_steps) {
      if (!divides(K)) {
        throw ConfigError("coarse step " + std::to_string(K) + " does not divide horizon/intervals");
      }
      if (!(fine_step < K)) {
        throw ConfigError("fine_step must be smaller than every coarse step");
      }
    }
    if (!divides(fine_step)) {
      throw ConfigError("fine_step " + std::to_string(fine_step) + " does not divide horizon/intervals");
    }
    for (double K : coarse_steps) {
      const double th = 0.5 + theta0 * std::max(K, fine_step);
      if (!(theta0 >= 0.0) || th > 1.0) {
        throw ConfigError("theta0 gives theta outside [1/2, 1] for step " + std::to_string(K));
      }
    }
  }
};

namespace detail {

class Reader
{
public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  [[nodiscard]] bool has(const std::string& key) const { return kv_.contains(key); }

  std::string text(const std::string& key, std::string fallback)
  {
    used_.push_back(key);
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  double real(const std::string& key, double fallback)
  {
    used_.push_back(key);
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : parse_real(key, it->second);
  }

  std::size_t count(const std::string& key, std::size_t fallback)
  {
    used_.push_back(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) {
      return fallback;
    }
    const std::int64_t v = parse_int(key, it->second);
    if (v < 0) {
      throw ConfigError(key + ": expected a non-negative integer, got '" + it->second + "'");
    }
    return static_cast<std::size_t>(v);
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback)
  {
    used_.push_back(key);
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : parse_int(key, it->second);
  }

  bool boolean(const std::string& key, bool fallback)
  {
    used_.push_back(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) {
      return fallback;
    }
    const std::string v = lower(it->second);
    if (v == "true" || v == "yes" || v == "on" || v == "1") {
      return true;
    }
    if (v == "false" || v == "no" || v == "off" || v == "0") {
      return false;
    }
    throw ConfigError(key + ": expected a boolean, got '" + it->second + "'");
  }

  std::vector<std::string> list(const std::string& key, const std::string& fallback)
  {
    std::vector<std::string> out;
    std::stringstream ss(text(key, fallback));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) {
        out.push_back(item);
      }
    }
    return out;
  }

  /// Keys present in the file that nothing asked for; almost always typos.
  [[nodiscard]] std::vector<std::string> unused() const
  {
    std::vector<std::string> out;
    for (const auto& [k, v] : kv_) {
      if (std::find(used_.begin(), used_.end(), k) == used_.end()) {
        out.push_back(k);
      }
    }
    return out;
  }

  static double parse_real(const std::string& key, const std::string& s)
  {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ConfigError(key + ": expected a number, got '" + s + "'");
    }
    return v;
  }

  static std::int64_t parse_int(const std::string& key, const std::string& s)
  {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ConfigError(key + ": expected an integer, got '" + s + "'");
    }
    return v;
  }

private:
  const KeyValues& kv_;
  std::vector<std::string> used_;
};

inline ProblemSpec read_problem(Reader& r, const std::string& kind)
{
  ProblemSpec p;
  const std::string s = kind + ".";
  if (kind == "dahlquist") {
    DahlquistParams d;
    d.lambda = r.real(s + "lambda", d.lambda);
    d.y0 = r.real(s + "y0", d.y0);
    p.params = d;
    p.mesh_n = 1;
  } else if (kind == "heat1d") {
    Heat1DParams h;
    h.nu = r.real(s + "nu", h.nu);
    h.length = r.real(s + "length", h.length);
    h.left_bc = r.real(s + "left_bc", h.left_bc);
    h.right_bc = r.real(s + "right_bc", h.right_bc);
    const std::string init = lower(r.text(s + "init", "sine"));
    if (init == "sine") {
      h.init = SineMode{static_cast<int>(r.count(s + "mode", 1))};
    } else if (init == "zero") {
      h.init = ZeroInit{};
    } else {
      throw ConfigError(s + "init: expected sine or zero, got '" + init + "'");
    }
    p.params = h;
    p.mesh_n = r.count(s + "mesh_n", p.mesh_n);
  } else if (kind == "advection1d") {
    Advection1DParams a;
    a.speed = r.real(s + "speed", a.speed);
    a.length = r.real(s + "length", a.length);
    a.periodic = r.boolean(s + "periodic", a.periodic);
    const std::string init = lower(r.text(s + "init", "gaussian"));
    if (init == "gaussian") {
      GaussianBump bump;
      bump.center = r.real(s + "center", bump.center);
      bump.width = r.real(s + "width", bump.width);
      a.init = bump;
    } else if (init == "sine") {
      a.init = SineMode{static_cast<int>(r.count(s + "mode", 1))};
    } else {
      throw ConfigError(s + "init: expected gaussian or sine, got '" + init + "'");
    }
    p.params = a;
    p.mesh_n = r.count(s + "mesh_n", p.mesh_n);
  } else if (kind == "alepiston") {
    AlePistonParams a;
    a.rho_f = r.real(s + "rho_f", a.rho_f);
    a.nu = r.real(s + "nu", a.nu);
    a.L0 = r.real(s + "l0", a.L0);
    a.adv = r.real(s + "adv", a.adv);
    a.m_s = r.real(s + "m_s", a.m_s);
    a.kappa = r.real(s + "kappa", a.kappa);
    a.v_in = r.real(s + "v_in", a.v_in);
    a.period = r.real(s + "period", a.period);
    p.params = a;
    p.mesh_n = r.count(s + "mesh_n", p.mesh_n);
  } else {
    throw ConfigError("experiment.problem: unknown kind '" + kind + "'");
  }
  return p;
}

} // namespace detail

/// Builds and validates a config. Unknown keys are rejected so typos do not silently fall
/// back to defaults.
inline ExperimentConfig config_from(const KeyValues& kv)
{
  detail::Reader r(kv);
  ExperimentConfig c;
  const std::string kind = detail::lower(r.text("experiment.problem", ""));
  if (kind.empty()) {
    throw ConfigError("experiment.problem is required");
  }
  c.problem = detail::read_problem(r, kind);
  c.horizon = r.real("experiment.horizon", c.horizon);
  c.intervals = r.count("experiment.intervals", c.intervals);
  c.coarse_steps.clear();
  for (const std::string& s : r.list("experiment.coarse_steps", "0.05")) {
    c.coarse_steps.push_back(detail::Reader::parse_real("experiment.coarse_steps", s));
  }
  c.fine_step = r.real("experiment.fine_step", c.fine_step);
  c.variants.clear();
  for (const std::string& s : r.list("experiment.variants", "classic")) {
    const auto v = parse_variant(detail::lower(s));
    if (!v) {
      throw ConfigError("experiment.variants: unknown variant '" + s + "'");
    }
    c.variants.push_back(*v);
  }
  c.workers = r.count("experiment.workers", c.workers);
  c.reference_fine_factor = r.count("experiment.reference_fine_factor", c.reference_fine_factor);
  c.seed = r.integer("experiment.seed", c.seed);
  c.output_path = r.text("experiment.output", c.output_path);
  c.max_iters = r.count("experiment.max_iters", c.max_iters);
  c.tol = r.real("experiment.tol", c.tol);
  c.theta0 = r.real("experiment.theta0", c.theta0);
  c.newton.abs_tol = r.real("newton.abs_tol", c.newton.abs_tol);
  c.newton.rel_tol = r.real("newton.rel_tol", c.newton.rel_tol);
  c.newton.max_iters = r.count("newton.max_iters", c.newton.max_iters);
  c.newton.damping_min = r.real("newton.damping_min", c.newton.damping_min);
  c.newton.fd_epsilon = r.real("newton.fd_epsilon", c.newton.fd_epsilon);

  // Sections for the other problem kinds may stay in the file so one config can be switched
  // between problems with an override.
  std::string msg;
  for (const auto& k : r.unused()) {
    const std::string section = k.substr(0, k.find('.'));
    const bool other_problem = section != kind && (section == "dahlquist" || section == "heat1d" ||
                                                   section == "advection1d" || section == "alepiston");
    if (!other_problem) {
      msg += " " + k;
    }
  }
  if (!msg.empty()) {
    throw ConfigError("unknown config key(s):" + msg);
  }
  c.echo = kv;
  c.validate();
  return c;
}

} // namespace pint::bench

#endif // PINT_BENCH_CONFIG_HPP
