#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mhmap/errors.hpp"
#include "mhmap/experiments/config.hpp"
#include "mhmap/experiments/scenario.hpp"

namespace mhmap::experiments {

/// Per-run seed derivation: bitwise-deterministic regardless of thread
/// scheduling.
inline std::uint64_t run_seed(std::uint64_t master, int run) {
  return master ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(run + 1));
}

/// Ensemble root-mean-square error per reporting step plus the ensemble
/// standard deviation of the per-run error norms.
struct FilterSummary {
  std::vector<double> rmse;    // step k = horizon .. ticks-1
  std::vector<double> stddev;  // across runs, of the per-run error norms
  double mean_optimization_time = 0.0;  // per tick, averaged over runs
  double mean_total_time = 0.0;

  /// Time-averaged RMSE, skipping the first `skip` reporting steps.
  double mean_rmse(int skip = 0) const {
    double sum = 0.0;
    int count = 0;
    for (std::size_t j = static_cast<std::size_t>(skip); j < rmse.size(); ++j) {
      sum += rmse[j];
      ++count;
    }
    return count ? sum / count : 0.0;
  }
};

struct MonteCarloSummary {
  std::optional<FilterSummary> standard;
  std::optional<FilterSummary> fast;
  int horizon = 0;
  double ts = 0.0;
  int runs = 0;
};

namespace detail {

inline FilterSummary summarize(const std::vector<const FilterRunResult*>& runs) {
  FilterSummary s;
  if (runs.empty()) return s;
  const std::size_t steps = runs[0]->error_norms.size();
  s.rmse.assign(steps, 0.0);
  s.stddev.assign(steps, 0.0);
  for (const auto* r : runs) {
    if (r->error_norms.size() != steps) {
      throw DimensionError("summarize: runs disagree on reporting-step count");
    }
    for (std::size_t j = 0; j < steps; ++j) {
      s.rmse[j] += r->error_norms[j] * r->error_norms[j];
    }
    const int ticks = std::max(r->ticks, 1);
    s.mean_optimization_time += r->optimization_time / ticks;
    s.mean_total_time += r->total_time / ticks;
  }
  const auto count = static_cast<double>(runs.size());
  for (std::size_t j = 0; j < steps; ++j) {
    s.rmse[j] = std::sqrt(s.rmse[j] / count);
  }
  for (std::size_t j = 0; j < steps; ++j) {
    double mean = 0.0;
    for (const auto* r : runs) mean += r->error_norms[j];
    mean /= count;
    double var = 0.0;
    for (const auto* r : runs) {
      const double d = r->error_norms[j] - mean;
      var += d * d;
    }
    s.stddev[j] = count > 1 ? std::sqrt(var / (count - 1.0)) : 0.0;
  }
  s.mean_optimization_time /= count;
  s.mean_total_time /= count;
  return s;
}

}  // namespace detail

/// Runs the configured number of independent simulations (in parallel when
/// cfg.threads != 1) and aggregates them in run order, so the result is
/// independent of the thread count.
inline MonteCarloSummary run_monte_carlo(const Scenario& sc) {
  const auto& cfg = sc.config;
  std::vector<RunResult> results(static_cast<std::size_t>(cfg.runs));
  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, cfg.runs));

  if (threads == 1) {
    for (int r = 0; r < cfg.runs; ++r) {
      results[static_cast<std::size_t>(r)] = run_scenario(sc, run_seed(cfg.seed, r));
    }
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < cfg.runs; r = next.fetch_add(1)) {
          results[static_cast<std::size_t>(r)] = run_scenario(sc, run_seed(cfg.seed, r));
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  MonteCarloSummary summary;
  summary.horizon = cfg.horizon;
  summary.ts = cfg.ts_estimator;
  summary.runs = cfg.runs;
  if (results[0].standard) {
    std::vector<const FilterRunResult*> rs;
    for (const auto& r : results) rs.push_back(&*r.standard);
    summary.standard = detail::summarize(rs);
  }
  if (results[0].fast) {
    std::vector<const FilterRunResult*> rs;
    for (const auto& r : results) rs.push_back(&*r.fast);
    summary.fast = detail::summarize(rs);
  }
  return summary;
}

/// Normalized RMSE: the run-average RMSE of `summary` divided by the
/// baseline's. Each average runs over that filter's own post-startup steps,
/// so a shorter horizon pays for its longer (and worse) startup transient.
inline double nrmse(const FilterSummary& summary, const FilterSummary& baseline) {
  const double den = baseline.mean_rmse();
  if (den == 0.0) throw InvalidParameter("nrmse: baseline RMSE is zero");
  return summary.mean_rmse() / den;
}

namespace detail {

inline std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path.string(), path.string());
  out.imbue(std::locale::classic());
  out.precision(12);
  return out;
}

}  // namespace detail

/// rmse.csv: one row per reporting step k = N .. ticks-1.
inline void write_rmse_csv(const FilterSummary& f, int horizon, double ts,
                           const std::filesystem::path& path) {
  auto out = detail::open_csv(path);
  out << "step,time_s,rmse,std\n";
  for (std::size_t j = 0; j < f.rmse.size(); ++j) {
    const int k = horizon + static_cast<int>(j);
    out << k << ',' << k * ts << ',' << f.rmse[j] << ',' << f.stddev[j] << '\n';
  }
}

inline void write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& path,
                           const std::string& extra = {}) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path.string(), path.string());
  out << cfg.serialize();
  if (!extra.empty()) out << extra;
}

/// One sweep result row.
struct SweepRow {
  std::string axis;
  double value = 0.0;
  std::string filter;
  double mean_rmse = 0.0;
  double nrmse = 0.0;  // relative to the axis baseline, same filter
};

/// Sweeps one config key over `values`, re-running the Monte Carlo batch at
/// each point. NRMSE is taken against the axis value `baseline`. Keys in
/// `coupled_keys` receive the same value as the axis key at every point
/// (e.g. the estimators' assumed noise variance tracking the true one).
inline std::vector<SweepRow> sweep_axis(const ExperimentConfig& base, const std::string& key,
                                        const std::vector<double>& values, double baseline,
                                        const std::vector<std::string>& coupled_keys = {}) {
  struct Point {
    double value;
    int horizon;
    MonteCarloSummary summary;
  };
  std::vector<Point> points;
  for (const double v : values) {
    ExperimentConfig cfg = base;
    std::ostringstream tmp;
    tmp.imbue(std::locale::classic());
    tmp.precision(17);
    tmp << v;
    cfg.set(key, tmp.str());
    for (const auto& ck : coupled_keys) cfg.set(ck, tmp.str());
    Scenario sc(cfg);
    points.push_back({v, cfg.horizon, run_monte_carlo(sc)});
  }
  const Point* base_point = nullptr;
  for (const auto& p : points) {
    if (p.value == baseline) base_point = &p;
  }
  if (base_point == nullptr) base_point = &points.back();

  std::vector<SweepRow> rows;
  auto emit = [&](const char* name, const FilterSummary& f, const FilterSummary& fb) {
    SweepRow row;
    row.axis = key;
    row.filter = name;
    row.mean_rmse = f.mean_rmse();
    row.nrmse = nrmse(f, fb);
    rows.push_back(row);
  };
  for (const auto& p : points) {
    const std::size_t before = rows.size();
    if (p.summary.standard) {
      emit("standard", *p.summary.standard, *base_point->summary.standard);
    }
    if (p.summary.fast) {
      emit("fast", *p.summary.fast, *base_point->summary.fast);
    }
    for (std::size_t j = before; j < rows.size(); ++j) rows[j].value = p.value;
  }
  return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows,
                            const std::filesystem::path& path) {
  auto out = detail::open_csv(path);
  out << "axis,value,filter,mean_rmse,nrmse\n";
  for (const auto& r : rows) {
    out << r.axis << ',' << r.value << ',' << r.filter << ',' << r.mean_rmse << ','
        << r.nrmse << '\n';
  }
}

/// Benchmark result: median per-tick wall times over bench_runs runs.
struct BenchRow {
  std::string filter;
  double median_optimization_time = 0.0;
  double median_total_time = 0.0;
};

inline std::vector<BenchRow> run_bench(const Scenario& sc) {
  const auto& cfg = sc.config;
  std::vector<RunResult> results;
  for (int r = 0; r < cfg.bench_runs; ++r) {
    results.push_back(run_scenario(sc, run_seed(cfg.seed, r)));
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  std::vector<BenchRow> rows;
  auto emit = [&](const char* name, auto pick) {
    std::vector<double> opt;
    std::vector<double> total;
    for (const auto& r : results) {
      const FilterRunResult* f = pick(r);
      if (f == nullptr) return;
      const int ticks = std::max(f->ticks, 1);
      opt.push_back(f->optimization_time / ticks);
      total.push_back(f->total_time / ticks);
    }
    rows.push_back({name, median(opt), median(total)});
  };
  emit("standard", [](const RunResult& r) {
    return r.standard ? &*r.standard : nullptr;
  });
  emit("fast", [](const RunResult& r) { return r.fast ? &*r.fast : nullptr; });
  return rows;
}

inline void write_bench_csv(const std::vector<BenchRow>& rows,
                            const std::filesystem::path& path) {
  auto out = detail::open_csv(path);
  out << "filter,median_optimization_time_s,median_total_time_s\n";
  for (const auto& r : rows) {
    out << r.filter << ',' << r.median_optimization_time << ',' << r.median_total_time
        << '\n';
  }
}

/// truth.csv from a single truth-only simulation: grid values per tick.
inline void write_truth_csv(const Scenario& sc, const std::vector<Eigen::VectorXd>& history,
                            const std::filesystem::path& path) {
  auto out = detail::open_csv(path);
  out << "step,time_s";
  for (int p = 0; p < sc.grid.size(); ++p) out << ",p" << p;
  out << '\n';
  for (std::size_t k = 0; k < history.size(); ++k) {
    out << k << ',' << static_cast<double>(k) * sc.config.ts_estimator;
    for (Eigen::Index p = 0; p < history[k].size(); ++p) out << ',' << history[k][p];
    out << '\n';
  }
}

}  // namespace mhmap::experiments
