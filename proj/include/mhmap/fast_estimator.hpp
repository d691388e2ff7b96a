#pragma once

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <utility>
#include <vector>

#include "mhmap/block_tridiag.hpp"
#include "mhmap/errors.hpp"
#include "mhmap/mh_estimator.hpp"
#include "mhmap/state_space.hpp"

namespace mhmap {

/// Local concentration model used by the step-1 filters: a truncated
/// Taylor chain of order M in {0, 1} (M = 0: nearly-constant value,
/// M = 1: nearly-constant derivative with transition [[1,Ts],[0,1]]).
struct LocalModel {
  int taylor_order = 0;
  double sampling_interval = 1.0;
  Eigen::MatrixXd process_information;  // Gtilde, (M+1)x(M+1) PD
  Eigen::MatrixXd arrival_weight;       // Psitilde, (M+1)x(M+1) PSD

  int state_dim() const { return taylor_order + 1; }

  Eigen::MatrixXd transition() const {
    if (taylor_order == 0) {
      return Eigen::MatrixXd::Identity(1, 1);
    }
    if (taylor_order == 1) {
      Eigen::MatrixXd a(2, 2);
      a << 1.0, sampling_interval, 0.0, 1.0;
      return a;
    }
    throw InvalidParameter("LocalModel: taylor_order must be 0 or 1");
  }

  /// Selector row [1 0 ... 0] picking the concentration component.
  Eigen::VectorXd output_row() const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(state_dim());
    c[0] = 1.0;
    return c;
  }
};

/// Concentration pseudo-measurements produced by step 1:
/// values(i, j) = sigma_hat_{(k-N+j)|k}^(i) for sensor i, window slot j.
struct PseudoMeasurementSet {
  Eigen::MatrixXd values;   // l x (N+1)
  Eigen::VectorXd weights;  // Xi^(i) > 0, length l
};

/// One sensor as seen by the fast filter: the FE interpolation row and
/// Dirichlet offset for step 2, the threshold and assumed noise for step 1.
struct FastSensor {
  Eigen::VectorXd row;     // C^(i) over the FE state
  double offset = 0.0;     // D^(i) gamma
  double threshold = 0.0;  // tau^(i) in concentration units
  NoiseModel assumed_noise;
  double weight = 1.0;  // Xi^(i)
};

/// Step-2 quadratic moving-horizon field-fusion instance:
///   |x_{k-N} - xbar|^2_Psi + sum_j |x_{j+1} - A x_j - B u_j|^2_G
///     + sum_j sum_i Xi^(i) (sigma_hat_{j}^(i) - C^(i) x_j - D^(i) gamma)^2
struct FieldFusionProblem {
  const LinearSystem* system = nullptr;
  const std::vector<FastSensor>* sensors = nullptr;
  Eigen::VectorXd prediction;
  Eigen::MatrixXd arrival_weight;
  std::vector<Eigen::VectorXd> inputs;  // N entries
  Eigen::MatrixXd pseudo;               // l x (N+1)

  int horizon() const { return static_cast<int>(pseudo.cols()) - 1; }
  int state_dim() const { return system->state_dim(); }
};

namespace detail {

/// Hessian of the fusion cost (constant in X) in block-tridiagonal form.
inline void fusion_hessian(const FieldFusionProblem& p, std::vector<Eigen::MatrixXd>& diag,
                           std::vector<Eigen::MatrixXd>& sub) {
  const int n = p.state_dim();
  const int steps = static_cast<int>(p.pseudo.cols());
  const auto& sys = *p.system;
  diag.assign(static_cast<std::size_t>(steps), Eigen::MatrixXd::Zero(n, n));
  sub.assign(static_cast<std::size_t>(steps - 1), -2.0 * sys.process_information * sys.A);
  diag[0] += 2.0 * p.arrival_weight;
  const Eigen::MatrixXd atga =
      2.0 * sys.A.transpose() * sys.process_information * sys.A;
  Eigen::MatrixXd meas = Eigen::MatrixXd::Zero(n, n);
  for (const auto& s : *p.sensors) {
    meas += 2.0 * s.weight * (s.row * s.row.transpose());
  }
  for (int j = 0; j < steps; ++j) {
    if (j + 1 < steps) {
      diag[static_cast<std::size_t>(j)] += atga;
      diag[static_cast<std::size_t>(j + 1)] += 2.0 * sys.process_information;
    }
    diag[static_cast<std::size_t>(j)] += meas;
  }
}

/// Gradient of the fusion cost at X = 0.
inline Eigen::VectorXd fusion_gradient_at_zero(const FieldFusionProblem& p) {
  const int n = p.state_dim();
  const int steps = static_cast<int>(p.pseudo.cols());
  const auto& sys = *p.system;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(steps) * n);
  g.segment(0, n) -= 2.0 * p.arrival_weight * p.prediction;
  for (int j = 0; j + 1 < steps; ++j) {
    const Eigen::VectorXd b = sys.B * p.inputs[static_cast<std::size_t>(j)];
    const Eigen::VectorXd gb = 2.0 * sys.process_information * b;
    g.segment(static_cast<Eigen::Index>(j + 1) * n, n) -= gb;
    g.segment(static_cast<Eigen::Index>(j) * n, n) += sys.A.transpose() * gb;
  }
  for (int j = 0; j < steps; ++j) {
    for (std::size_t i = 0; i < p.sensors->size(); ++i) {
      const auto& s = (*p.sensors)[i];
      const double target = p.pseudo(static_cast<Eigen::Index>(i), j) - s.offset;
      g.segment(static_cast<Eigen::Index>(j) * n, n) -= 2.0 * s.weight * target * s.row;
    }
  }
  return g;
}

}  // namespace detail

/// Value of the step-2 quadratic cost at a stacked trajectory.
inline double fusion_cost(const FieldFusionProblem& p, const Eigen::VectorXd& X) {
  const int n = p.state_dim();
  const int steps = static_cast<int>(p.pseudo.cols());
  const auto& sys = *p.system;
  double cost = 0.0;
  {
    const Eigen::VectorXd d = X.segment(0, n) - p.prediction;
    cost += d.dot(p.arrival_weight * d);
  }
  for (int j = 0; j + 1 < steps; ++j) {
    const Eigen::VectorXd r = X.segment(static_cast<Eigen::Index>(j + 1) * n, n) -
                              sys.A * X.segment(static_cast<Eigen::Index>(j) * n, n) -
                              sys.B * p.inputs[static_cast<std::size_t>(j)];
    cost += r.dot(sys.process_information * r);
  }
  for (int j = 0; j < steps; ++j) {
    const auto xj = X.segment(static_cast<Eigen::Index>(j) * n, n);
    for (std::size_t i = 0; i < p.sensors->size(); ++i) {
      const auto& s = (*p.sensors)[i];
      const double r = p.pseudo(static_cast<Eigen::Index>(i), j) - s.row.dot(xj) - s.offset;
      cost += s.weight * r * r;
    }
  }
  return cost;
}

inline Eigen::VectorXd fusion_gradient(const FieldFusionProblem& p, const Eigen::VectorXd& X) {
  std::vector<Eigen::MatrixXd> diag, sub;
  detail::fusion_hessian(p, diag, sub);
  const int n = p.state_dim();
  Eigen::VectorXd g = detail::fusion_gradient_at_zero(p);
  for (std::size_t j = 0; j < diag.size(); ++j) {
    g.segment(static_cast<Eigen::Index>(j) * n, n) +=
        diag[j] * X.segment(static_cast<Eigen::Index>(j) * n, n);
    if (j + 1 < diag.size()) {
      const auto xj1 = X.segment(static_cast<Eigen::Index>(j + 1) * n, n);
      const auto xj = X.segment(static_cast<Eigen::Index>(j) * n, n);
      g.segment(static_cast<Eigen::Index>(j) * n, n) += sub[j].transpose() * xj1;
      g.segment(static_cast<Eigen::Index>(j + 1) * n, n) += sub[j] * xj;
    }
  }
  return g;
}

/// Closed-form minimizer of the step-2 cost: one SPD block-tridiagonal
/// solve of the normal equations, no iterations. A pre-factored solver may
/// be supplied to amortize the (time-invariant) Hessian factorization.
inline WindowSolution solve_fusion(const FieldFusionProblem& p,
                                   const BlockTridiagonalCholesky* prefactored = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  BlockTridiagonalCholesky local;
  const BlockTridiagonalCholesky* chol = prefactored;
  if (chol == nullptr || !chol->factored()) {
    std::vector<Eigen::MatrixXd> diag, sub;
    detail::fusion_hessian(p, diag, sub);
    local.factor(diag, sub);
    chol = &local;
  }
  const Eigen::VectorXd X = chol->solve(-detail::fusion_gradient_at_zero(p));
  WindowSolution sol;
  sol.estimates = detail::unstack(X, p.state_dim());
  sol.cost_value = fusion_cost(p, X);
  sol.stats.iterations = 0;
  sol.stats.final_gradient_norm = fusion_gradient(p, X).norm();
  sol.stats.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

/// Factors the fusion Hessian once for reuse across time steps.
inline BlockTridiagonalCholesky factor_fusion_hessian(const FieldFusionProblem& p) {
  std::vector<Eigen::MatrixXd> diag, sub;
  detail::fusion_hessian(p, diag, sub);
  BlockTridiagonalCholesky chol;
  chol.factor(diag, sub);
  return chol;
}

/// Extracts the concentration pseudo-measurements (first local state
/// component) from the step-1 window solutions.
inline Eigen::MatrixXd extract_pseudo(const std::vector<WindowSolution>& locals) {
  if (locals.empty()) return {};
  const auto steps = static_cast<Eigen::Index>(locals[0].estimates.size());
  Eigen::MatrixXd sigma(static_cast<Eigen::Index>(locals.size()), steps);
  for (std::size_t i = 0; i < locals.size(); ++i) {
    for (Eigen::Index j = 0; j < steps; ++j) {
      sigma(static_cast<Eigen::Index>(i), j) =
          locals[i].estimates[static_cast<std::size_t>(j)][0];
    }
  }
  return sigma;
}

/// Two-stage fast MH-MAP field filter.
///
/// Step 1 runs one independent low-order MH-MAP filter per sensor on the
/// local concentration, recasting the binary measurements as real-valued
/// pseudo-measurements. Step 2 fuses them over the FE model with a single
/// quadratic moving-horizon solve.
class FastFilter {
 public:
  FastFilter(const LinearSystem& field_system, std::vector<FastSensor> sensors,
             const LocalModel& local_model, int horizon, Eigen::MatrixXd arrival_weight,
             SolverSettings settings = {})
      : system_(&field_system),
        sensors_(std::move(sensors)),
        horizon_(horizon),
        arrival_weight_(std::move(arrival_weight)),
        settings_(settings) {
    // step-1 plumbing: one scalar-chain system and one-sensor bank per sensor
    local_systems_.reserve(sensors_.size());
    local_banks_.reserve(sensors_.size());
    for (const auto& s : sensors_) {
      LinearSystem loc;
      loc.A = local_model.transition();
      loc.B = Eigen::MatrixXd::Zero(local_model.state_dim(), 1);
      loc.prior_mean = Eigen::VectorXd::Zero(local_model.state_dim());
      loc.prior_mean[0] = s.row.dot(field_system.prior_mean) + s.offset;
      loc.prior_information = local_model.arrival_weight;
      loc.process_information = local_model.process_information;
      loc.process_noise_factor = Eigen::MatrixXd::Zero(local_model.state_dim(),
                                                       local_model.state_dim());
      local_systems_.push_back(std::move(loc));
      ThresholdSensorBank bank;
      bank.emplace_back(local_model.output_row(), s.threshold, s.assumed_noise);
      local_banks_.push_back(std::move(bank));
    }
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
      local_filters_.emplace_back(local_systems_[i], local_banks_[i], horizon_,
                                  local_model.arrival_weight, settings_);
    }
  }

  // the local filters hold pointers into local_systems_/local_banks_
  FastFilter(const FastFilter&) = delete;
  FastFilter& operator=(const FastFilter&) = delete;

  /// One estimator tick: step 1 for every sensor, then the step-2 fusion.
  /// `input` is the field-model input u_{k-1} (ignored at k = 0).
  const WindowSolution& advance(const Eigen::VectorXi& measurement,
                                const Eigen::VectorXd& input = {}) {
    if (measurement.size() != static_cast<Eigen::Index>(sensors_.size())) {
      throw DimensionError("FastFilter::advance: measurement size mismatch");
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<WindowSolution> locals(sensors_.size());
    Eigen::VectorXi bit(1);
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
      bit[0] = measurement[static_cast<Eigen::Index>(i)];
      locals[i] = local_filters_[i].advance(bit, Eigen::VectorXd::Zero(1));
    }
    local_time_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const Eigen::VectorXd u_last =
        step_ > 0 ? (input.size() ? input : Eigen::VectorXd::Zero(system_->input_dim()))
                  : Eigen::VectorXd::Zero(system_->input_dim());
    if (step_ > 0) inputs_.push_back(u_last);
    const bool startup = step_ <= horizon_;
    if (!startup) {
      prediction_ = horizon_ > 0
                        ? fused_.estimates[1]
                        : Eigen::VectorXd(system_->A * fused_.estimates.back() +
                                          system_->B * u_last);
      inputs_.pop_front();
    }

    FieldFusionProblem problem;
    problem.system = system_;
    problem.sensors = &sensors_;
    problem.prediction = startup ? system_->prior_mean : prediction_;
    problem.arrival_weight = startup ? system_->prior_information : arrival_weight_;
    problem.inputs.assign(inputs_.begin(), inputs_.end());
    pseudo_ = extract_pseudo(locals);
    problem.pseudo = pseudo_;

    const int steps = static_cast<int>(problem.pseudo.cols());
    if (steps != cached_steps_ || startup != cached_startup_) {
      fusion_chol_ = factor_fusion_hessian(problem);
      cached_steps_ = steps;
      cached_startup_ = startup;
    }
    fused_ = solve_fusion(problem, &fusion_chol_);
    ++step_;
    return fused_;
  }

  const WindowSolution& solution() const { return fused_; }
  const Eigen::VectorXd& smoothed_head() const { return fused_.estimates.front(); }
  /// Step-1 pseudo-measurements of the latest window (l x window size).
  const Eigen::MatrixXd& pseudo() const { return pseudo_; }
  /// Wall time of the latest step-1 batch (solver diagnostics).
  double last_local_time() const { return local_time_; }
  std::vector<FastSensor>& sensors() { return sensors_; }

 private:
  const LinearSystem* system_;
  std::vector<FastSensor> sensors_;
  int horizon_;
  Eigen::MatrixXd arrival_weight_;
  SolverSettings settings_;
  std::vector<LinearSystem> local_systems_;
  std::vector<ThresholdSensorBank> local_banks_;
  std::vector<MovingHorizonFilter> local_filters_;
  int step_ = 0;
  double local_time_ = 0.0;
  Eigen::VectorXd prediction_;
  std::deque<Eigen::VectorXd> inputs_;
  Eigen::MatrixXd pseudo_;
  WindowSolution fused_;
  BlockTridiagonalCholesky fusion_chol_;
  int cached_steps_ = -1;
  bool cached_startup_ = false;
};

}  // namespace mhmap
