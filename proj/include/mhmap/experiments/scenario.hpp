#pragma once

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "mhmap/errors.hpp"
#include "mhmap/experiments/config.hpp"
#include "mhmap/fast_estimator.hpp"
#include "mhmap/fem/assembly.hpp"
#include "mhmap/fem/interpolation.hpp"
#include "mhmap/fem/mesh.hpp"
#include "mhmap/mh_estimator.hpp"
#include "mhmap/state_space.hpp"

namespace mhmap::experiments {

/// Field-evaluation points evenly spread in the domain, with cached
/// interpolation rows on both the truth and estimator meshes.
struct SamplingGrid {
  std::vector<Eigen::Vector2d> points;
  Eigen::MatrixXd truth_c;     // P x n_truth
  Eigen::VectorXd truth_d;     // D-row dotted with gamma, per point
  Eigen::MatrixXd estimator_c;  // P x n_est
  Eigen::VectorXd estimator_d;

  int size() const { return static_cast<int>(points.size()); }
};

namespace detail {

/// Regular lattice over the bounding box clipped to the domain, with the
/// spacing chosen so the point count lands closest to `target`.
inline std::vector<Eigen::Vector2d> lattice_points(int target) {
  using G = fem::LshapeGeometry;
  auto points_for = [](double spacing) {
    std::vector<Eigen::Vector2d> pts;
    for (double y = spacing / 2; y < G::total_height; y += spacing) {
      for (double x = spacing / 2; x < G::width; x += spacing) {
        const Eigen::Vector2d p(x, y);
        if (G::contains(p, 1e-9)) pts.push_back(p);
      }
    }
    return pts;
  };
  // count is monotone in spacing: bisect, then refine around the winner
  double best_spacing = std::sqrt(G::area / target);
  auto best = points_for(best_spacing);
  for (double f = 0.80; f <= 1.201; f += 0.005) {
    const double s = best_spacing * f;
    auto pts = points_for(s);
    if (std::abs(static_cast<int>(pts.size()) - target) <
        std::abs(static_cast<int>(best.size()) - target)) {
      best = std::move(pts);
    }
  }
  return best;
}

}  // namespace detail

/// Everything derivable from the config alone (no randomness): meshes,
/// assembled FE systems, discrete models, the estimator-scale linear
/// system, and the sampling grid. Built once, shared across Monte Carlo
/// runs and sweep points.
struct Scenario {
  ExperimentConfig config;

  fem::FemMesh truth_mesh;
  fem::FemMesh estimator_mesh;
  fem::AssembledSystem truth_assembled;
  fem::AssembledSystem estimator_assembled;
  std::unique_ptr<fem::DiscreteModel> truth_model;
  std::unique_ptr<fem::DiscreteModel> estimator_model;

  LinearSystem estimator_system;  // dense A, B = I, input = (M+TsS)^{-1} Ts u
  Eigen::VectorXd estimator_input;
  LocalModel local_model;
  SamplingGrid grid;

  explicit Scenario(const ExperimentConfig& cfg) : config(cfg) {
    config.validate();
    truth_mesh = fem::make_lshape_mesh(config.truth_h);
    estimator_mesh = fem::make_lshape_mesh(config.estimator_h);
    truth_assembled =
        fem::assemble(truth_mesh, config.effective_diffusivity(), config.gamma);
    estimator_assembled =
        fem::assemble(estimator_mesh, config.effective_diffusivity(), config.gamma);
    truth_model = std::make_unique<fem::DiscreteModel>(truth_assembled, config.ts_truth);
    estimator_model =
        std::make_unique<fem::DiscreteModel>(estimator_assembled, config.ts_estimator);

    const int n = estimator_model->state_dim();
    estimator_system.A = estimator_model->dense_transition();
    estimator_system.B = Eigen::MatrixXd::Identity(n, n);
    estimator_system.prior_mean = Eigen::VectorXd::Constant(n, config.prior_mean);
    estimator_system.prior_information =
        config.prior_information * Eigen::MatrixXd::Identity(n, n);
    estimator_system.process_information =
        config.process_information * Eigen::MatrixXd::Identity(n, n);
    estimator_system.process_noise_factor = Eigen::MatrixXd::Zero(n, n);
    estimator_input = estimator_model->input_term();

    const int m = config.taylor_order + 1;
    local_model.taylor_order = config.taylor_order;
    local_model.sampling_interval = config.ts_estimator;
    local_model.process_information =
        config.local_process_information * Eigen::MatrixXd::Identity(m, m);
    local_model.arrival_weight =
        config.local_arrival_weight * Eigen::MatrixXd::Identity(m, m);

    grid.points = detail::lattice_points(config.sampling_points);
    const int np = grid.size();
    grid.truth_c.resize(np, truth_model->state_dim());
    grid.truth_d.resize(np);
    grid.estimator_c.resize(np, n);
    grid.estimator_d.resize(np);
    for (int p = 0; p < np; ++p) {
      const auto rt = fem::interp_row(truth_mesh, grid.points[static_cast<std::size_t>(p)]);
      grid.truth_c.row(p) = rt.free_row.transpose();
      grid.truth_d[p] = rt.dirichlet_row.dot(truth_assembled.dirichlet_values);
      const auto re =
          fem::interp_row(estimator_mesh, grid.points[static_cast<std::size_t>(p)]);
      grid.estimator_c.row(p) = re.free_row.transpose();
      grid.estimator_d[p] = re.dirichlet_row.dot(estimator_assembled.dirichlet_values);
    }
  }
};

/// One random sensor network: positions, thresholds, and interpolation
/// rows on both meshes.
struct SensorDeployment {
  std::vector<Eigen::Vector2d> positions;
  Eigen::VectorXd thresholds;
  Eigen::MatrixXd truth_c;  // l x n_truth
  Eigen::VectorXd truth_d;
  Eigen::MatrixXd estimator_c;  // l x n_est
  Eigen::VectorXd estimator_d;

  int count() const { return static_cast<int>(positions.size()); }
};

/// Uniform-over-domain placement via rejection sampling in the bounding
/// box; thresholds uniform in [threshold_min, threshold_max].
inline SensorDeployment deploy_sensors(const Scenario& sc, int count, std::mt19937_64& rng) {
  using G = fem::LshapeGeometry;
  SensorDeployment d;
  std::uniform_real_distribution<double> ux(0.0, G::width);
  std::uniform_real_distribution<double> uy(0.0, G::total_height);
  std::uniform_real_distribution<double> utau(sc.config.threshold_min,
                                              sc.config.threshold_max);
  d.thresholds.resize(count);
  d.truth_c.resize(count, sc.truth_model->state_dim());
  d.truth_d.resize(count);
  d.estimator_c.resize(count, sc.estimator_model->state_dim());
  d.estimator_d.resize(count);
  for (int i = 0; i < count; ++i) {
    Eigen::Vector2d p;
    do {
      p = {ux(rng), uy(rng)};
    } while (!G::contains(p, 1e-6));
    d.positions.push_back(p);
    d.thresholds[i] = utau(rng);
    const auto rt = fem::interp_row(sc.truth_mesh, p);
    d.truth_c.row(i) = rt.free_row.transpose();
    d.truth_d[i] = rt.dirichlet_row.dot(sc.truth_assembled.dirichlet_values);
    const auto re = fem::interp_row(sc.estimator_mesh, p);
    d.estimator_c.row(i) = re.free_row.transpose();
    d.estimator_d[i] = re.dirichlet_row.dot(sc.estimator_assembled.dirichlet_values);
  }
  return d;
}

/// Per-run, per-filter outputs: the field-error norm at each reporting
/// step k = N..ticks-1 plus accumulated timings.
struct FilterRunResult {
  std::vector<double> error_norms;
  double optimization_time = 0.0;
  double total_time = 0.0;
  int ticks = 0;

  double mean_error(int from_step = 0) const {
    double sum = 0.0;
    int count = 0;
    for (std::size_t j = static_cast<std::size_t>(from_step); j < error_norms.size(); ++j) {
      sum += error_norms[j];
      ++count;
    }
    return count ? sum / count : 0.0;
  }
};

struct RunResult {
  std::optional<FilterRunResult> standard;
  std::optional<FilterRunResult> fast;
};

namespace detail {

inline Eigen::VectorXd truth_grid_values(const Scenario& sc, const Eigen::VectorXd& x_truth) {
  return sc.grid.truth_c * x_truth + sc.grid.truth_d;
}

inline Eigen::VectorXd estimator_grid_values(const Scenario& sc, const Eigen::VectorXd& x_est) {
  return sc.grid.estimator_c * x_est + sc.grid.estimator_d;
}

inline double clamp_weight(double w) { return std::min(std::max(w, 1e-3), 1e6); }

}  // namespace detail

/// Inverse-variance pseudo-measurement weight, clamped to [1e-3, 1e6].
inline double inverse_variance_weight(const std::vector<double>& errors) {
  if (errors.empty()) return 1e6;
  double mean = 0.0;
  for (const double e : errors) mean += e;
  mean /= static_cast<double>(errors.size());
  double var = 0.0;
  for (const double e : errors) var += (e - mean) * (e - mean);
  var /= static_cast<double>(errors.size());
  if (var <= 0.0) return 1e6;
  return detail::clamp_weight(1.0 / var);
}

namespace detail {

/// Simulates the truth field and the binary measurement stream; invokes
/// `on_tick(k, y, truth_at_sensors)` at every estimator tick.
template <typename OnTick>
void simulate_measurements(const Scenario& sc, const SensorDeployment& sensors,
                           std::mt19937_64& rng, OnTick&& on_tick) {
  const auto& cfg = sc.config;
  const int ticks = cfg.estimator_ticks();
  const int per_tick = cfg.truth_steps_per_tick();
  const double noise_std = std::sqrt(cfg.r_true);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  Eigen::VectorXd x_truth = Eigen::VectorXd::Zero(sc.truth_model->state_dim());

  for (int k = 0; k < ticks; ++k) {
    if (k > 0) {
      for (int s = 0; s < per_tick; ++s) {
        x_truth = sc.truth_model->step(x_truth);
        if (cfg.truth_process_std > 0.0) {
          for (Eigen::Index i = 0; i < x_truth.size(); ++i) {
            x_truth[i] += cfg.truth_process_std * std_normal(rng);
          }
        }
      }
    }
    const Eigen::VectorXd c_at_sensors = sensors.truth_c * x_truth + sensors.truth_d;
    Eigen::VectorXi y(sensors.count());
    for (int i = 0; i < sensors.count(); ++i) {
      const double z = c_at_sensors[i] + (noise_std > 0.0 ? noise_std * std_normal(rng) : 0.0);
      y[i] = z >= sensors.thresholds[i] ? 1 : 0;
    }
    on_tick(k, y, x_truth);
  }
}

}  // namespace detail

/// Calibrates per-sensor fusion weights Xi^(i) from the empirical step-1
/// error variance on dedicated seeded calibration passes (>= 500 samples
/// per sensor).
inline Eigen::VectorXd calibrate_weights(const Scenario& sc, const SensorDeployment& sensors,
                                         std::uint64_t calibration_seed,
                                         int min_samples = 500) {
  const auto& cfg = sc.config;
  const int l = sensors.count();
  std::vector<std::vector<double>> errors(static_cast<std::size_t>(l));
  const int usable_per_run = std::max(1, cfg.estimator_ticks() - cfg.horizon);
  const int passes = (min_samples + usable_per_run - 1) / usable_per_run;

  for (int pass = 0; pass < passes; ++pass) {
    std::mt19937_64 rng(calibration_seed ^ (0x9e3779b97f4a7c15ULL * (pass + 1)));
    std::vector<FastSensor> fast_sensors;
    for (int i = 0; i < l; ++i) {
      fast_sensors.push_back({sensors.estimator_c.row(i).transpose(),
                              sensors.estimator_d[i], sensors.thresholds[i],
                              NoiseModel::gaussian(cfg.r_assumed), 1.0});
    }
    FastFilter filter(sc.estimator_system, std::move(fast_sensors), sc.local_model,
                      cfg.horizon, cfg.arrival_weight * Eigen::MatrixXd::Identity(
                                       sc.estimator_system.state_dim(),
                                       sc.estimator_system.state_dim()));
    std::vector<Eigen::VectorXd> truth_at_sensors;
    detail::simulate_measurements(
        sc, sensors, rng, [&](int k, const Eigen::VectorXi& y, const Eigen::VectorXd& xt) {
          truth_at_sensors.push_back(sensors.truth_c * xt + sensors.truth_d);
          // step-1 only: the fused output is ignored here
          filter.advance(y, k > 0 ? sc.estimator_input : Eigen::VectorXd());
          if (k >= cfg.horizon) {
            const int head = k - cfg.horizon;
            for (int i = 0; i < l; ++i) {
              errors[static_cast<std::size_t>(i)].push_back(
                  filter.pseudo()(i, 0) -
                  truth_at_sensors[static_cast<std::size_t>(head)][i]);
            }
          }
        });
  }
  Eigen::VectorXd weights(l);
  for (int i = 0; i < l; ++i) {
    weights[i] = inverse_variance_weight(errors[static_cast<std::size_t>(i)]);
  }
  return weights;
}

/// One full simulation run: truth generation, measurement stream, and the
/// selected filter(s). Deterministic given (scenario config, run_seed).
inline RunResult run_scenario(const Scenario& sc, std::uint64_t run_seed) {
  const auto& cfg = sc.config;
  std::mt19937_64 rng(run_seed);
  const SensorDeployment sensors = deploy_sensors(sc, cfg.sensors, rng);
  const int n = sc.estimator_system.state_dim();
  const Eigen::MatrixXd psi =
      cfg.arrival_weight * Eigen::MatrixXd::Identity(n, n);

  const bool run_standard =
      cfg.filter == FilterKind::Standard || cfg.filter == FilterKind::Both;
  const bool run_fast = cfg.filter == FilterKind::Fast || cfg.filter == FilterKind::Both;

  // standard filter sensor bank over the estimator mesh; the Dirichlet
  // offset is subsumed into the threshold
  ThresholdSensorBank bank;
  for (int i = 0; i < sensors.count(); ++i) {
    bank.emplace_back(sensors.estimator_c.row(i).transpose(),
                      sensors.thresholds[i] - sensors.estimator_d[i],
                      NoiseModel::gaussian(cfg.r_assumed));
  }
  std::optional<MovingHorizonFilter> standard;
  if (run_standard) {
    standard.emplace(sc.estimator_system, bank, cfg.horizon, psi);
  }

  std::optional<FastFilter> fast;
  Eigen::VectorXd fusion_weights;
  if (run_fast) {
    fusion_weights = Eigen::VectorXd::Ones(sensors.count());
    if (cfg.calibrate_weights) {
      fusion_weights = calibrate_weights(sc, sensors, run_seed ^ 0xc2b2ae3d27d4eb4fULL);
    }
    std::vector<FastSensor> fast_sensors;
    for (int i = 0; i < sensors.count(); ++i) {
      fast_sensors.push_back({sensors.estimator_c.row(i).transpose(), sensors.estimator_d[i],
                              sensors.thresholds[i], NoiseModel::gaussian(cfg.r_assumed),
                              fusion_weights[i]});
    }
    fast.emplace(sc.estimator_system, std::move(fast_sensors), sc.local_model, cfg.horizon,
                 psi);
  }

  RunResult result;
  if (run_standard) result.standard.emplace();
  if (run_fast) result.fast.emplace();
  std::vector<Eigen::VectorXd> truth_grid_history;

  detail::simulate_measurements(
      sc, sensors, rng, [&](int k, const Eigen::VectorXi& y, const Eigen::VectorXd& xt) {
        truth_grid_history.push_back(detail::truth_grid_values(sc, xt));
        const Eigen::VectorXd input = k > 0 ? sc.estimator_input : Eigen::VectorXd();
        if (standard) {
          const auto t0 = std::chrono::steady_clock::now();
          const auto& sol = standard->advance(y, input);
          result.standard->total_time +=
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          result.standard->optimization_time += sol.stats.wall_time;
          ++result.standard->ticks;
          if (k >= cfg.horizon) {
            const Eigen::VectorXd est = detail::estimator_grid_values(sc, sol.estimates.front());
            result.standard->error_norms.push_back(
                (est - truth_grid_history[static_cast<std::size_t>(k - cfg.horizon)]).norm());
          }
        }
        if (fast) {
          const auto t0 = std::chrono::steady_clock::now();
          const auto& sol = fast->advance(y, input);
          result.fast->total_time +=
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          result.fast->optimization_time += fast->last_local_time() + sol.stats.wall_time;
          ++result.fast->ticks;
          if (k >= cfg.horizon) {
            const Eigen::VectorXd est = detail::estimator_grid_values(sc, sol.estimates.front());
            result.fast->error_norms.push_back(
                (est - truth_grid_history[static_cast<std::size_t>(k - cfg.horizon)]).norm());
          }
        }
      });
  return result;
}

/// Truth-only simulation: grid concentrations at every estimator tick.
inline std::vector<Eigen::VectorXd> simulate_truth(const Scenario& sc, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const SensorDeployment sensors = deploy_sensors(sc, sc.config.sensors, rng);
  std::vector<Eigen::VectorXd> history;
  detail::simulate_measurements(sc, sensors, rng,
                                [&](int, const Eigen::VectorXi&, const Eigen::VectorXd& xt) {
                                  history.push_back(detail::truth_grid_values(sc, xt));
                                });
  return history;
}

}  // namespace mhmap::experiments
