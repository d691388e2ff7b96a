#pragma once

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "mhmap/block_tridiag.hpp"
#include "mhmap/errors.hpp"
#include "mhmap/state_space.hpp"

namespace mhmap {

/// One sliding-window estimation instance: the moving-horizon cost
///   |x_{k-N} - xbar|^2_Psi + sum_j |x_{j+1} - A x_j - B u_j|^2_G
///     + sum_j sum_i { -(1-y) ln F(tau - C x_j) - y ln(1 - F(tau - C x_j)) }
/// over the N+1 window states. The dynamics sum runs over the N
/// transitions inside the window.
struct WindowProblem {
  const LinearSystem* system = nullptr;
  const ThresholdSensorBank* bank = nullptr;
  Eigen::VectorXd prediction;                  // xbar_{k-N}
  Eigen::MatrixXd arrival_weight;              // Psi, symmetric PSD
  std::vector<Eigen::VectorXd> inputs;         // u_{k-N} .. u_{k-1}  (N entries)
  std::vector<Eigen::VectorXi> measurements;   // y_{k-N} .. y_k      (N+1 entries)

  int horizon() const { return static_cast<int>(measurements.size()) - 1; }
  int state_dim() const { return system->state_dim(); }
  Eigen::Index stacked_dim() const {
    return static_cast<Eigen::Index>(measurements.size()) * state_dim();
  }

  void validate() const {
    if (system == nullptr || bank == nullptr) {
      throw InvalidParameter("window problem: missing system or sensor bank");
    }
    if (measurements.empty() || inputs.size() + 1 != measurements.size()) {
      throw DimensionError("window problem: inputs/measurements length mismatch");
    }
    if (prediction.size() != system->state_dim()) {
      throw DimensionError("window problem: prediction size mismatch");
    }
  }
};

struct SolverSettings {
  double gradient_tolerance = 1e-8;
  int max_iterations = 100;
  double armijo_slope = 1e-4;
  double backtrack_ratio = 0.5;
  double fraction_to_boundary = 0.99;
  double hessian_regularization = 1e-10;
};

struct SolverStats {
  int iterations = 0;
  double final_gradient_norm = 0.0;
  int line_search_backtracks = 0;
  double wall_time = 0.0;
  bool converged = true;
};

struct WindowSolution {
  std::vector<Eigen::VectorXd> estimates;  // xhat_{k-N|k} .. xhat_{k|k}
  double cost_value = 0.0;
  SolverStats stats;
};

namespace detail {

inline Eigen::VectorXd stack(const std::vector<Eigen::VectorXd>& xs) {
  if (xs.empty()) return {};
  const Eigen::Index n = xs[0].size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()) * n);
  for (std::size_t j = 0; j < xs.size(); ++j) {
    out.segment(static_cast<Eigen::Index>(j) * n, n) = xs[j];
  }
  return out;
}

inline std::vector<Eigen::VectorXd> unstack(const Eigen::VectorXd& x, Eigen::Index n) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(x.size() / n));
  for (Eigen::Index j = 0; j * n < x.size(); ++j) {
    out.push_back(x.segment(j * n, n));
  }
  return out;
}

}  // namespace detail

/// True iff X lies strictly inside the feasible polyhedron of the window.
inline bool mh_in_domain(const WindowProblem& p, const Eigen::VectorXd& X) {
  const int n = p.state_dim();
  const int steps = static_cast<int>(p.measurements.size());
  for (int j = 0; j < steps; ++j) {
    const auto xj = X.segment(static_cast<Eigen::Index>(j) * n, n);
    for (std::size_t i = 0; i < p.bank->size(); ++i) {
      const auto& s = (*p.bank)[i];
      const double margin = s.threshold - s.row.dot(xj);
      const auto which = p.measurements[j][static_cast<Eigen::Index>(i)]
                             ? LogTerm::Survival
                             : LogTerm::Cdf;
      if (!s.assumed_noise.support(which).contains(margin)) {
        return false;
      }
    }
  }
  return true;
}

inline double mh_cost(const WindowProblem& p, const Eigen::VectorXd& X) {
  const int n = p.state_dim();
  const int steps = static_cast<int>(p.measurements.size());
  const auto& sys = *p.system;
  double cost = 0.0;
  {
    const Eigen::VectorXd d = X.segment(0, n) - p.prediction;
    cost += d.dot(p.arrival_weight * d);
  }
  for (int j = 0; j + 1 < steps; ++j) {
    const Eigen::VectorXd r =
        X.segment(static_cast<Eigen::Index>(j + 1) * n, n) -
        sys.A * X.segment(static_cast<Eigen::Index>(j) * n, n) -
        sys.B * p.inputs[static_cast<std::size_t>(j)];
    cost += r.dot(sys.process_information * r);
  }
  for (int j = 0; j < steps; ++j) {
    const auto xj = X.segment(static_cast<Eigen::Index>(j) * n, n);
    for (std::size_t i = 0; i < p.bank->size(); ++i) {
      const auto& s = (*p.bank)[i];
      const double margin = s.threshold - s.row.dot(xj);
      cost += p.measurements[j][static_cast<Eigen::Index>(i)]
                  ? s.assumed_noise.neg_log_survival(margin)
                  : s.assumed_noise.neg_log_cdf(margin);
    }
  }
  return cost;
}

inline Eigen::VectorXd mh_gradient(const WindowProblem& p, const Eigen::VectorXd& X) {
  const int n = p.state_dim();
  const int steps = static_cast<int>(p.measurements.size());
  const auto& sys = *p.system;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(X.size());
  g.segment(0, n) += 2.0 * p.arrival_weight * (X.segment(0, n) - p.prediction);
  for (int j = 0; j + 1 < steps; ++j) {
    const Eigen::VectorXd r =
        X.segment(static_cast<Eigen::Index>(j + 1) * n, n) -
        sys.A * X.segment(static_cast<Eigen::Index>(j) * n, n) -
        sys.B * p.inputs[static_cast<std::size_t>(j)];
    const Eigen::VectorXd gr = 2.0 * sys.process_information * r;
    g.segment(static_cast<Eigen::Index>(j + 1) * n, n) += gr;
    g.segment(static_cast<Eigen::Index>(j) * n, n) -= sys.A.transpose() * gr;
  }
  for (int j = 0; j < steps; ++j) {
    const auto xj = X.segment(static_cast<Eigen::Index>(j) * n, n);
    for (std::size_t i = 0; i < p.bank->size(); ++i) {
      const auto& s = (*p.bank)[i];
      const double margin = s.threshold - s.row.dot(xj);
      const LogDerivatives d = p.measurements[j][static_cast<Eigen::Index>(i)]
                                   ? s.assumed_noise.dneg_log_survival(margin)
                                   : s.assumed_noise.dneg_log_cdf(margin);
      g.segment(static_cast<Eigen::Index>(j) * n, n) -= d.first * s.row;
    }
  }
  return g;
}

/// Block-tridiagonal Hessian: diagonal blocks and sub-diagonal blocks
/// (block (j+1, j) = -2 G A for every transition).
inline void mh_hessian(const WindowProblem& p, const Eigen::VectorXd& X,
                       std::vector<Eigen::MatrixXd>& diag,
                       std::vector<Eigen::MatrixXd>& sub) {
  const int n = p.state_dim();
  const int steps = static_cast<int>(p.measurements.size());
  const auto& sys = *p.system;
  diag.assign(static_cast<std::size_t>(steps), Eigen::MatrixXd::Zero(n, n));
  sub.assign(static_cast<std::size_t>(steps - 1), -2.0 * sys.process_information * sys.A);
  diag[0] += 2.0 * p.arrival_weight;
  const Eigen::MatrixXd atga =
      2.0 * sys.A.transpose() * sys.process_information * sys.A;
  for (int j = 0; j + 1 < steps; ++j) {
    diag[static_cast<std::size_t>(j)] += atga;
    diag[static_cast<std::size_t>(j + 1)] += 2.0 * sys.process_information;
  }
  for (int j = 0; j < steps; ++j) {
    const auto xj = X.segment(static_cast<Eigen::Index>(j) * n, n);
    for (std::size_t i = 0; i < p.bank->size(); ++i) {
      const auto& s = (*p.bank)[i];
      const double margin = s.threshold - s.row.dot(xj);
      const LogDerivatives d = p.measurements[j][static_cast<Eigen::Index>(i)]
                                   ? s.assumed_noise.dneg_log_survival(margin)
                                   : s.assumed_noise.dneg_log_cdf(margin);
      if (d.second != 0.0) {
        diag[static_cast<std::size_t>(j)] += d.second * (s.row * s.row.transpose());
      }
    }
  }
}

/// Dense Hessian assembled from the block-tridiagonal form (test support).
inline Eigen::MatrixXd mh_hessian_dense(const WindowProblem& p, const Eigen::VectorXd& X) {
  std::vector<Eigen::MatrixXd> diag, sub;
  mh_hessian(p, X, diag, sub);
  const int n = p.state_dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(X.size(), X.size());
  for (std::size_t j = 0; j < diag.size(); ++j) {
    h.block(static_cast<Eigen::Index>(j) * n, static_cast<Eigen::Index>(j) * n, n, n) =
        diag[j];
  }
  for (std::size_t j = 0; j < sub.size(); ++j) {
    h.block(static_cast<Eigen::Index>(j + 1) * n, static_cast<Eigen::Index>(j) * n, n, n) =
        sub[j];
    h.block(static_cast<Eigen::Index>(j) * n, static_cast<Eigen::Index>(j + 1) * n, n, n) =
        sub[j].transpose();
  }
  return h;
}

namespace detail {

/// Largest step fraction in [0, 1] keeping X + t dX strictly feasible,
/// scaled back by the fraction-to-boundary parameter.
inline double max_feasible_step(const WindowProblem& p, const Eigen::VectorXd& X,
                                const Eigen::VectorXd& dX, double fraction) {
  const int n = p.state_dim();
  const int steps = static_cast<int>(p.measurements.size());
  double t_max = 1.0;
  for (int j = 0; j < steps; ++j) {
    const auto xj = X.segment(static_cast<Eigen::Index>(j) * n, n);
    const auto dj = dX.segment(static_cast<Eigen::Index>(j) * n, n);
    for (std::size_t i = 0; i < p.bank->size(); ++i) {
      const auto& s = (*p.bank)[i];
      const auto which = p.measurements[j][static_cast<Eigen::Index>(i)]
                             ? LogTerm::Survival
                             : LogTerm::Cdf;
      const SupportInterval sup = s.assumed_noise.support(which);
      const double margin = s.threshold - s.row.dot(xj);
      const double dmargin = -s.row.dot(dj);
      if (std::isfinite(sup.lower) && dmargin < 0.0) {
        t_max = std::min(t_max, fraction * (margin - sup.lower) / (-dmargin));
      }
      if (std::isfinite(sup.upper) && dmargin > 0.0) {
        t_max = std::min(t_max, fraction * (sup.upper - margin) / dmargin);
      }
    }
  }
  return std::max(t_max, 0.0);
}

/// Pushes a start point strictly inside the feasible polyhedron by backing
/// each violated inequality off its bound, one sensor row at a time.
inline Eigen::VectorXd make_feasible(const WindowProblem& p, Eigen::VectorXd X,
                                     double fraction) {
  const int n = p.state_dim();
  const int steps = static_cast<int>(p.measurements.size());
  for (int pass = 0; pass < 64; ++pass) {
    bool adjusted = false;
    for (int j = 0; j < steps; ++j) {
      auto xj = X.segment(static_cast<Eigen::Index>(j) * n, n);
      for (std::size_t i = 0; i < p.bank->size(); ++i) {
        const auto& s = (*p.bank)[i];
        const auto which = p.measurements[j][static_cast<Eigen::Index>(i)]
                               ? LogTerm::Survival
                               : LogTerm::Cdf;
        const SupportInterval sup = s.assumed_noise.support(which);
        const double margin = s.threshold - s.row.dot(xj);
        const double rr = s.row.squaredNorm();
        if (rr == 0.0) continue;
        const double backoff = (1.0 - fraction) * std::max(1.0, std::abs(s.threshold));
        if (std::isfinite(sup.lower) && margin <= sup.lower) {
          // shift x_j along -C so the margin lands at lower + backoff
          xj -= s.row * ((sup.lower + backoff - margin) / rr);
          adjusted = true;
        } else if (std::isfinite(sup.upper) && margin >= sup.upper) {
          xj += s.row * ((margin - sup.upper + backoff) / rr);
          adjusted = true;
        }
      }
    }
    if (!adjusted) {
      return X;
    }
  }
  if (!mh_in_domain(p, X)) {
    throw InfeasibleStart("could not construct a strictly feasible start");
  }
  return X;
}

}  // namespace detail

/// Damped Newton descent with Armijo backtracking and block-tridiagonal
/// Cholesky factorization of the Hessian.
inline WindowSolution solve_window(const WindowProblem& p, const SolverSettings& settings,
                                   std::optional<Eigen::VectorXd> warm_start = {}) {
  p.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n = p.state_dim();

  Eigen::VectorXd X;
  if (warm_start) {
    X = std::move(*warm_start);
  } else {
    // open-loop rollout from the prediction
    X.resize(p.stacked_dim());
    Eigen::VectorXd xj = p.prediction;
    X.segment(0, n) = xj;
    for (std::size_t j = 0; j < p.inputs.size(); ++j) {
      xj = p.system->A * xj + p.system->B * p.inputs[j];
      X.segment(static_cast<Eigen::Index>(j + 1) * n, n) = xj;
    }
  }
  if (!mh_in_domain(p, X)) {
    X = detail::make_feasible(p, X, settings.fraction_to_boundary);
  }

  WindowSolution sol;
  double cost = mh_cost(p, X);
  std::vector<Eigen::MatrixXd> diag, sub;
  BlockTridiagonalCholesky chol;

  for (int it = 0; it < settings.max_iterations; ++it) {
    const Eigen::VectorXd grad = mh_gradient(p, X);
    sol.stats.final_gradient_norm = grad.norm();
    if (sol.stats.final_gradient_norm <= settings.gradient_tolerance) {
      sol.stats.iterations = it;
      sol.stats.converged = true;
      break;
    }
    mh_hessian(p, X, diag, sub);
    double reg = settings.hessian_regularization;
    for (;;) {
      for (auto& d : diag) d.diagonal().array() += reg;
      try {
        chol.factor(diag, sub);
        break;
      } catch (const SingularSystem&) {
        for (auto& d : diag) d.diagonal().array() -= reg;
        reg *= 100.0;
        if (reg > 1e12) throw;
      }
    }
    const Eigen::VectorXd dX = -chol.solve(grad);
    const double slope = grad.dot(dX);
    double t = detail::max_feasible_step(p, X, dX, settings.fraction_to_boundary);
    bool accepted = false;
    while (t > 1e-16) {
      const Eigen::VectorXd cand = X + t * dX;
      const double cand_cost = mh_cost(p, cand);
      if (cand_cost <= cost + settings.armijo_slope * t * slope) {
        X = cand;
        cost = cand_cost;
        accepted = true;
        break;
      }
      t *= settings.backtrack_ratio;
      ++sol.stats.line_search_backtracks;
    }
    sol.stats.iterations = it + 1;
    if (!accepted) {
      // no admissible step along the Newton direction: stop at the best iterate
      sol.stats.converged =
          sol.stats.final_gradient_norm <= 1e3 * settings.gradient_tolerance;
      break;
    }
    if (it + 1 == settings.max_iterations) {
      sol.stats.converged = false;
    }
  }

  sol.estimates = detail::unstack(X, n);
  sol.cost_value = cost;
  sol.stats.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

/// Recursive MH-MAP filter over a sliding window.
///
/// For the first N steps the growing full-information problem is solved
/// (arrival weight P, prediction = prior mean); afterwards the window
/// slides and the prediction is the previous window's second state.
class MovingHorizonFilter {
 public:
  MovingHorizonFilter(const LinearSystem& system, const ThresholdSensorBank& bank,
                      int horizon, Eigen::MatrixXd arrival_weight,
                      SolverSettings settings = {})
      : system_(&system),
        bank_(&bank),
        horizon_(horizon),
        arrival_weight_(std::move(arrival_weight)),
        settings_(settings) {
    if (horizon_ < 0) throw InvalidParameter("horizon must be >= 0");
  }

  /// Processes measurement y_k; `input` is u_{k-1} (ignored at k = 0).
  const WindowSolution& advance(const Eigen::VectorXi& measurement,
                                const Eigen::VectorXd& input = {}) {
    const int n = system_->state_dim();
    const Eigen::VectorXd u_last =
        step_ > 0 ? (input.size() ? input : Eigen::VectorXd::Zero(system_->input_dim()))
                  : Eigen::VectorXd::Zero(system_->input_dim());
    if (step_ > 0) {
      inputs_.push_back(u_last);
    }
    measurements_.push_back(measurement);
    const bool startup = step_ <= horizon_;
    if (!startup) {
      // slide: drop the oldest step, prediction per the window recursion
      prediction_ = horizon_ > 0
                        ? solution_.estimates[1]
                        : Eigen::VectorXd(system_->A * solution_.estimates.back() +
                                          system_->B * u_last);
      inputs_.pop_front();
      measurements_.pop_front();
    }

    WindowProblem problem;
    problem.system = system_;
    problem.bank = bank_;
    problem.prediction = startup ? system_->prior_mean : prediction_;
    problem.arrival_weight = startup ? system_->prior_information : arrival_weight_;
    problem.inputs.assign(inputs_.begin(), inputs_.end());
    problem.measurements.assign(measurements_.begin(), measurements_.end());

    std::optional<Eigen::VectorXd> warm;
    if (step_ > 0) {
      Eigen::VectorXd w(problem.stacked_dim());
      const std::size_t keep = startup ? solution_.estimates.size()
                                       : solution_.estimates.size() - 1;
      const std::size_t offset = startup ? 0 : 1;
      for (std::size_t j = 0; j < keep; ++j) {
        w.segment(static_cast<Eigen::Index>(j) * n, n) =
            solution_.estimates[j + offset];
      }
      // pad with a one-step prediction from the last estimate
      w.segment(static_cast<Eigen::Index>(keep) * n, n) =
          system_->A * solution_.estimates.back() + system_->B * u_last;
      warm = std::move(w);
    }

    solution_ = solve_window(problem, settings_, std::move(warm));
    ++step_;
    return solution_;
  }

  /// x̂_{k-N|k}: the smoothed estimate at the head of the current window.
  const Eigen::VectorXd& smoothed_head() const { return solution_.estimates.front(); }
  const WindowSolution& solution() const { return solution_; }
  int steps_processed() const { return step_; }

 private:
  const LinearSystem* system_;
  const ThresholdSensorBank* bank_;
  int horizon_;
  Eigen::MatrixXd arrival_weight_;
  SolverSettings settings_;
  int step_ = 0;
  Eigen::VectorXd prediction_;
  std::deque<Eigen::VectorXd> inputs_;
  std::deque<Eigen::VectorXi> measurements_;
  WindowSolution solution_;
};

}  // namespace mhmap
