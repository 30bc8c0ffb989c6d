#ifndef PINT_BENCH_OUTPUT_HPP
#define PINT_BENCH_OUTPUT_HPP

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pint/bench/config.hpp"
#include "pint/bench/experiment.hpp"
#include "pint/version.hpp"

namespace pint::bench {

inline constexpr const char* csv_header =
  "problem,K,k,variant,iter,boundary,rel_err,theta,t_seq_s,t_par_s,speedup_meas,speedup_theory";

/// %.17g, so every double survives a text round trip.
inline std::string format_real(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_line(const ResultRow& r)
{
  std::string out;
  out += r.problem + "," + format_real(r.K) + "," + format_real(r.k) + "," + r.variant + ",";
  out += std::to_string(r.iter) + "," + std::to_string(r.boundary) + ",";
  out += format_real(r.rel_err) + "," + format_real(r.theta) + "," + format_real(r.t_seq_s) + "," +
         format_real(r.t_par_s) + "," + format_real(r.speedup_meas) + "," + format_real(r.speedup_theory);
  return out;
}

inline void write_csv(const std::vector<ResultRow>& rows, std::ostream& out)
{
  out << csv_header << "\n";
  for (const ResultRow& r : rows) {
    out << csv_line(r) << "\n";
  }
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  write_csv(rows, out);
  out.flush();
  if (!out) {
    throw IoError("write to '" + path + "' failed");
  }
}

namespace detail {

inline double parse_csv_real(const std::string& s)
{
  // strtod accepts the inf/nan spellings printf produces.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw IoError("bad number '" + s + "' in results file");
  }
  return v;
}

inline std::int64_t parse_csv_int(const std::string& s)
{
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw IoError("bad integer '" + s + "' in results file");
  }
  return v;
}

/// JSON has no inf/nan; those go out as strings.
inline nlohmann::json real_to_json(double v)
{
  if (std::isfinite(v)) {
    return v;
  }
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

inline double real_from_json(const nlohmann::json& j)
{
  if (j.is_number()) {
    return j.get<double>();
  }
  const std::string s = j.get<std::string>();
  if (s == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (s == "-inf") {
    return -std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

} // namespace detail

inline std::vector<ResultRow> read_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line) || line != csv_header) {
    throw IoError("results file does not start with the expected CSV header");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      f.push_back(cell);
    }
    if (f.size() != 12) {
      throw IoError("CSV line has " + std::to_string(f.size()) + " fields, expected 12");
    }
    ResultRow r;
    r.problem = f[0];
    r.K = detail::parse_csv_real(f[1]);
    r.k = detail::parse_csv_real(f[2]);
    r.variant = f[3];
    r.iter = detail::parse_csv_int(f[4]);
    r.boundary = detail::parse_csv_int(f[5]);
    r.rel_err = detail::parse_csv_real(f[6]);
    r.theta = detail::parse_csv_real(f[7]);
    r.t_seq_s = detail::parse_csv_real(f[8]);
    r.t_par_s = detail::parse_csv_real(f[9]);
    r.speedup_meas = detail::parse_csv_real(f[10]);
    r.speedup_theory = detail::parse_csv_real(f[11]);
    rows.push_back(std::move(r));
  }
  return rows;
}

struct RunMetadata
{
  KeyValues config;
  std::size_t workers = 1;
  /// The one Newton setting used for every step size.
  NewtonSettings newton{};
  /// ISO 8601 UTC; filled in by emit_json when empty.
  std::string timestamp;
};

inline std::string utc_timestamp()
{
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json to_json(const std::vector<ResultRow>& rows, const RunMetadata& meta)
{
  nlohmann::json doc;
  doc["metadata"] = {
    {"config", meta.config},
    {"version", version},
    {"timestamp", meta.timestamp.empty() ? utc_timestamp() : meta.timestamp},
    {"workers", meta.workers},
    {"newton",
     {{"abs_tol", meta.newton.abs_tol},
      {"rel_tol", meta.newton.rel_tol},
      {"max_iters", meta.newton.max_iters},
      {"damping_min", meta.newton.damping_min},
      {"fd_epsilon", meta.newton.fd_epsilon}}},
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const ResultRow& r : rows) {
    arr.push_back({
      {"problem", r.problem},
      {"K", detail::real_to_json(r.K)},
      {"k", detail::real_to_json(r.k)},
      {"variant", r.variant},
      {"iter", r.iter},
      {"boundary", r.boundary},
      {"rel_err", detail::real_to_json(r.rel_err)},
      {"theta", detail::real_to_json(r.theta)},
      {"t_seq_s", detail::real_to_json(r.t_seq_s)},
      {"t_par_s", detail::real_to_json(r.t_par_s)},
      {"speedup_meas", detail::real_to_json(r.speedup_meas)},
      {"speedup_theory", detail::real_to_json(r.speedup_theory)},
    });
  }
  doc["rows"] = std::move(arr);
  return doc;
}

inline std::vector<ResultRow> rows_from_json(const nlohmann::json& doc)
{
  std::vector<ResultRow> rows;
  try {
    for (const auto& j : doc.at("rows")) {
      ResultRow r;
      r.problem = j.at("problem").get<std::string>();
      r.K = detail::real_from_json(j.at("K"));
      r.k = detail::real_from_json(j.at("k"));
      r.variant = j.at("variant").get<std::string>();
      r.iter = j.at("iter").get<std::int64_t>();
      r.boundary = j.at("boundary").get<std::int64_t>();
      r.rel_err = detail::real_from_json(j.at("rel_err"));
      r.theta = detail::real_from_json(j.at("theta"));
      r.t_seq_s = detail::real_from_json(j.at("t_seq_s"));
      r.t_par_s = detail::real_from_json(j.at("t_par_s"));
      r.speedup_meas = detail::real_from_json(j.at("speedup_meas"));
      r.speedup_theory = detail::real_from_json(j.at("speedup_theory"));
      rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed results JSON: ") + e.what());
  }
  return rows;
}

inline void emit_json(const std::vector<ResultRow>& rows, const std::string& path, const RunMetadata& meta = {})
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out << to_json(rows, meta).dump(2) << "\n";
  out.flush();
  if (!out) {
    throw IoError("write to '" + path + "' failed");
  }
}

/// Reads either format; JSON is recognised by a leading '{'.
inline std::vector<ResultRow> read_results(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read '" + path + "'");
  }
  in >> std::ws;
  if (in.peek() == '{') {
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("malformed results JSON: ") + e.what());
    }
    return rows_from_json(doc);
  }
  return read_csv(in);
}

} // namespace pint::bench

#endif // PINT_BENCH_OUTPUT_HPP
