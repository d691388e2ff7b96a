#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <locale>
#include <sstream>
#include <string>

#include "mhmap/errors.hpp"

namespace mhmap::experiments {

enum class FilterKind { Standard, Fast, Both };

inline std::string to_string(FilterKind f) {
  switch (f) {
    case FilterKind::Standard:
      return "standard";
    case FilterKind::Fast:
      return "fast";
    case FilterKind::Both:
      return "both";
  }
  return "both";
}

inline FilterKind parse_filter_kind(const std::string& s) {
  if (s == "standard") return FilterKind::Standard;
  if (s == "fast") return FilterKind::Fast;
  if (s == "both") return FilterKind::Both;
  throw ConfigError("invalid filter '" + s + "' (expected standard|fast|both)", "filter");
}

/// Declarative description of one simulation experiment. Defaults
/// reproduce the desk-scale diffusion scenario: coarse/slow estimator
/// model against a fine/fast ground truth, deliberately mismatched
/// measurement-noise variance.
struct ExperimentConfig {
  // meshes and time discretization
  double truth_h = 0.09;       // fine truth mesh (~950 vertices)
  double estimator_h = 0.31;   // coarse estimator mesh (~95 vertices)
  double ts_truth = 1.0;       // [s]
  double ts_estimator = 10.0;  // [s], estimator rate 0.1 Hz
  // physics
  double lambda = 5e-8;      // diffusivity [m^2/s]
  double length_unit = 0.01;  // meters per domain coordinate unit
  double gamma = 30.0;        // Dirichlet concentration [g/m^2]
  double duration = 1200.0;
  // sensing
  int sensors = 20;
  double threshold_min = 0.05;
  double threshold_max = 29.95;
  double r_true = 0.1;     // ground-truth measurement noise variance
  double r_assumed = 1.0;  // variance assumed by the estimators
  // estimation
  int horizon = 15;
  double prior_mean = 5.0;              // xbar_0 = prior_mean * 1
  double prior_information = 10.0;      // P = prior_information * I
  double process_information = 10.0;    // G
  double arrival_weight = 1e3;          // Psi (standard filter and fusion)
  double local_arrival_weight = 1e3;    // Psitilde
  double local_process_information = 1e2;  // Gtilde
  int taylor_order = 0;
  bool calibrate_weights = true;
  // simulation
  double truth_process_std = 0.01;  // per-node noise added at truth rate
  int sampling_points = 304;
  int runs = 100;
  int bench_runs = 5;
  std::uint64_t seed = 1;
  FilterKind filter = FilterKind::Both;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const {
    auto require = [](bool ok, const char* key) {
      if (!ok) throw ConfigError(std::string("invalid value for '") + key + "'", key);
    };
    require(truth_h > 0, "truth_h");
    require(estimator_h > 0, "estimator_h");
    require(ts_truth > 0, "ts_truth");
    require(ts_estimator > 0, "ts_estimator");
    const double ratio = ts_estimator / ts_truth;
    require(std::abs(ratio - std::round(ratio)) < 1e-9 && ratio >= 1.0, "ts_estimator");
    require(lambda > 0, "lambda");
    require(length_unit > 0, "length_unit");
    require(duration > 0, "duration");
    require(sensors >= 0, "sensors");
    require(threshold_min < threshold_max, "threshold_min");
    require(r_true >= 0, "r_true");
    require(r_assumed > 0, "r_assumed");
    require(horizon >= 0, "horizon");
    require(prior_information > 0, "prior_information");
    require(process_information > 0, "process_information");
    require(arrival_weight >= 0, "arrival_weight");
    require(local_arrival_weight >= 0, "local_arrival_weight");
    require(local_process_information > 0, "local_process_information");
    require(taylor_order == 0 || taylor_order == 1, "taylor_order");
    require(truth_process_std >= 0, "truth_process_std");
    require(sampling_points > 0, "sampling_points");
    require(runs >= 1, "runs");
    require(bench_runs >= 1, "bench_runs");
    require(threads >= 0, "threads");
  }

  /// Diffusivity in domain coordinate units^2 per second. The mesh
  /// coordinates carry the published dimension numbers; `length_unit` says
  /// how long one coordinate unit is in meters. The default 0.01 (domain in
  /// centimeters) is the only reading under which the published diffusivity,
  /// duration, and concentration range are mutually consistent.
  double effective_diffusivity() const { return lambda / (length_unit * length_unit); }

  int estimator_ticks() const {
    return static_cast<int>(std::round(duration / ts_estimator));
  }
  int truth_steps_per_tick() const {
    return static_cast<int>(std::round(ts_estimator / ts_truth));
  }

  void set(const std::string& key, const std::string& value);
  std::string serialize() const;
};

namespace detail {

inline double parse_double(const std::string& v, const std::string& key) {
  std::istringstream in(v);
  in.imbue(std::locale::classic());
  double x = 0.0;
  if (!(in >> x) || !(in >> std::ws).eof()) {
    throw ConfigError("cannot parse number '" + v + "' for key '" + key + "'", key);
  }
  return x;
}

inline int parse_int(const std::string& v, const std::string& key) {
  const double x = parse_double(v, key);
  if (x != std::round(x)) throw ConfigError("expected integer for key '" + key + "'", key);
  return static_cast<int>(x);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("expected boolean for key '" + key + "'", key);
}

}  // namespace detail

inline void ExperimentConfig::set(const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_int;
  if (key == "truth_h") truth_h = parse_double(value, key);
  else if (key == "estimator_h") estimator_h = parse_double(value, key);
  else if (key == "ts_truth") ts_truth = parse_double(value, key);
  else if (key == "ts_estimator") ts_estimator = parse_double(value, key);
  else if (key == "lambda") lambda = parse_double(value, key);
  else if (key == "length_unit") length_unit = parse_double(value, key);
  else if (key == "gamma") gamma = parse_double(value, key);
  else if (key == "duration") duration = parse_double(value, key);
  else if (key == "sensors") sensors = parse_int(value, key);
  else if (key == "threshold_min") threshold_min = parse_double(value, key);
  else if (key == "threshold_max") threshold_max = parse_double(value, key);
  else if (key == "r_true") r_true = parse_double(value, key);
  else if (key == "r_assumed") r_assumed = parse_double(value, key);
  else if (key == "horizon") horizon = parse_int(value, key);
  else if (key == "prior_mean") prior_mean = parse_double(value, key);
  else if (key == "prior_information") prior_information = parse_double(value, key);
  else if (key == "process_information") process_information = parse_double(value, key);
  else if (key == "arrival_weight") arrival_weight = parse_double(value, key);
  else if (key == "local_arrival_weight") local_arrival_weight = parse_double(value, key);
  else if (key == "local_process_information")
    local_process_information = parse_double(value, key);
  else if (key == "taylor_order") taylor_order = parse_int(value, key);
  else if (key == "calibrate_weights") calibrate_weights = parse_bool(value, key);
  else if (key == "truth_process_std") truth_process_std = parse_double(value, key);
  else if (key == "sampling_points") sampling_points = parse_int(value, key);
  else if (key == "runs") runs = parse_int(value, key);
  else if (key == "bench_runs") bench_runs = parse_int(value, key);
  else if (key == "seed") seed = static_cast<std::uint64_t>(parse_double(value, key));
  else if (key == "filter") filter = parse_filter_kind(value);
  else if (key == "threads") threads = parse_int(value, key);
  else throw ConfigError("unknown config key '" + key + "'", key);
}

inline std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out.precision(17);
  out << "truth_h = " << truth_h << "\n"
      << "estimator_h = " << estimator_h << "\n"
      << "ts_truth = " << ts_truth << "\n"
      << "ts_estimator = " << ts_estimator << "\n"
      << "lambda = " << lambda << "\n"
      << "length_unit = " << length_unit << "\n"
      << "gamma = " << gamma << "\n"
      << "duration = " << duration << "\n"
      << "sensors = " << sensors << "\n"
      << "threshold_min = " << threshold_min << "\n"
      << "threshold_max = " << threshold_max << "\n"
      << "r_true = " << r_true << "\n"
      << "r_assumed = " << r_assumed << "\n"
      << "horizon = " << horizon << "\n"
      << "prior_mean = " << prior_mean << "\n"
      << "prior_information = " << prior_information << "\n"
      << "process_information = " << process_information << "\n"
      << "arrival_weight = " << arrival_weight << "\n"
      << "local_arrival_weight = " << local_arrival_weight << "\n"
      << "local_process_information = " << local_process_information << "\n"
      << "taylor_order = " << taylor_order << "\n"
      << "calibrate_weights = " << (calibrate_weights ? "true" : "false") << "\n"
      << "truth_process_std = " << truth_process_std << "\n"
      << "sampling_points = " << sampling_points << "\n"
      << "runs = " << runs << "\n"
      << "bench_runs = " << bench_runs << "\n"
      << "seed = " << seed << "\n"
      << "filter = " << to_string(filter) << "\n"
      << "threads = " << threads << "\n";
  return out.str();
}

/// Parses a `key = value` config file ('#' starts a comment).
inline ExperimentConfig load_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (eq == std::string::npos) {
      if (!trim(line).empty()) {
        throw ConfigError("malformed config line '" + trim(line) + "'", trim(line));
      }
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key in config line", "");
    config.set(key, value);
  }
  return config;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path, path);
  return load_config(in);
}

}  // namespace mhmap::experiments
