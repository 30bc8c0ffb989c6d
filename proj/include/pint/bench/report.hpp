#ifndef PINT_BENCH_REPORT_HPP
#define PINT_BENCH_REPORT_HPP

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "pint/bench/experiment.hpp"

namespace pint::bench {

struct SpeedupEntry
{
  std::string problem;
  double K = 0.0;
  std::string variant;
  std::size_t iteration = 0;
  double t_seq_s = 0.0;
  double t_par_s = 0.0;
  double measured = 0.0;
  double theoretical = 0.0;
  double efficiency = 0.0;
  /// Parareal error at or below the discretization error on every boundary at some iteration.
  /// True when the rows carry no discretization level to compare with.
  bool below_discretization = true;
};

struct SpeedupReport
{
  std::vector<SpeedupEntry> entries;
  /// Index into entries of the recommended coarse step.
  std::optional<std::size_t> best;
  /// False when no entry reached the discretization error and best fell back to raw speedup.
  bool best_meets_error = true;

  [[nodiscard]] std::string text() const
  {
    std::string out = "problem      K          variant      iter  t_seq_s     t_par_s     measured  theory    efficiency\n";
    char buf[256];
    for (const SpeedupEntry& e : entries) {
      std::snprintf(buf, sizeof buf, "%-12s %-10.6g %-12s %-5zu %-11.4g %-11.4g %-9.4f %-9.4f %.4f%s\n",
                    e.problem.c_str(), e.K, e.variant.c_str(), e.iteration, e.t_seq_s, e.t_par_s, e.measured,
                    e.theoretical, e.efficiency, e.below_discretization ? "" : "  (error above discretization)");
      out += buf;
    }
    if (best) {
      const SpeedupEntry& b = entries[*best];
      std::snprintf(buf, sizeof buf, "best K: %.6g (%s, speedup %.4f)%s\n", b.K, b.variant.c_str(), b.measured,
                    best_meets_error ? "" : " -- no K reached the discretization error");
      out += buf;
    }
    return out;
  }
};

/// One entry per (problem, K, variant) summary row. Efficiency is measured over theoretical.
/// The best K maximizes measured speedup among entries that reached the discretization error.
[[nodiscard]] inline SpeedupReport speedup_report(const std::vector<ResultRow>& rows)
{
  using Key = std::tuple<std::string, double, std::string>;
  std::map<std::tuple<std::string, double, std::string, std::int64_t>, double> disc;
  std::map<Key, std::map<std::int64_t, bool>> below; // iteration -> all boundaries below so far
  for (const ResultRow& r : rows) {
    if (r.is_discretization()) {
      disc[{r.problem, r.K, r.variant, r.boundary}] = r.rel_err;
    }
  }
  for (const ResultRow& r : rows) {
    if (r.is_summary() || r.is_discretization()) {
      continue;
    }
    const auto it = disc.find({r.problem, r.K, r.variant, r.boundary});
    if (it == disc.end()) {
      continue;
    }
    auto& flags = below[{r.problem, r.K, r.variant}];
    const bool ok = r.rel_err <= it->second;
    const auto f = flags.find(r.iter);
    flags[r.iter] = (f == flags.end() ? true : f->second) && ok;
  }

  SpeedupReport rep;
  for (const ResultRow& r : rows) {
    if (!r.is_summary()) {
      continue;
    }
    SpeedupEntry e;
    e.problem = r.problem;
    e.K = r.K;
    e.variant = r.variant;
    e.iteration = r.iter > 0 ? static_cast<std::size_t>(r.iter) : 0;
    e.t_seq_s = r.t_seq_s;
    e.t_par_s = r.t_par_s;
    e.measured = r.t_par_s > 0.0 ? r.t_seq_s / r.t_par_s : r.speedup_meas;
    e.theoretical = r.speedup_theory;
    e.efficiency = e.theoretical > 0.0 ? e.measured / e.theoretical : 0.0;
    const auto b = below.find({r.problem, r.K, r.variant});
    if (b != below.end()) {
      e.below_discretization = false;
      for (const auto& [iter, ok] : b->second) {
        e.below_discretization = e.below_discretization || ok;
      }
    }
    rep.entries.push_back(std::move(e));
  }

  for (bool need_error : {true, false}) {
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
      const SpeedupEntry& e = rep.entries[i];
      if (need_error && !e.below_discretization) {
        continue;
      }
      if (!rep.best || e.measured > rep.entries[*rep.best].measured) {
        rep.best = i;
      }
    }
    if (rep.best) {
      rep.best_meets_error = need_error;
      break;
    }
  }
  return rep;
}

} // namespace pint::bench

#endif // PINT_BENCH_REPORT_HPP
