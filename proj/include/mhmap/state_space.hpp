#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <random>
#include <utility>
#include <vector>

#include "mhmap/errors.hpp"
#include "mhmap/noise.hpp"

namespace mhmap {

/// Linear state-space model x_{k+1} = A x_k + B u_k + w_k with Gaussian
/// prior N(prior_mean, P^{-1}) and process noise w ~ N(0, G^{-1}).
///
/// P and G are stored in information form; sampling uses a precomputed
/// lower-triangular factor L with L L^T = G^{-1} (zero factor disables
/// process noise).
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd prior_mean;
  Eigen::MatrixXd prior_information;    // P, symmetric PSD
  Eigen::MatrixXd process_information;  // G, symmetric PD
  Eigen::MatrixXd process_noise_factor;  // L, with L L^T = G^{-1}

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }

  /// Builds the sampling factor from G (L = chol(G)^{-T}).
  void derive_noise_factor_from_information() {
    Eigen::LLT<Eigen::MatrixXd> llt(process_information);
    if (llt.info() != Eigen::Success) {
      throw SingularSystem("process information matrix is not positive definite");
    }
    const int n = state_dim();
    process_noise_factor =
        llt.matrixU().solve(Eigen::MatrixXd::Identity(n, n));
  }

  void validate() const {
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n || prior_mean.size() != n ||
        prior_information.rows() != n || prior_information.cols() != n ||
        process_information.rows() != n || process_information.cols() != n) {
      throw DimensionError("LinearSystem dimensions are inconsistent");
    }
  }
};

/// One threshold sensor: row C^(i), threshold tau^(i), and two noise models.
/// `truth_noise` generates measurements; `assumed_noise` is what the
/// estimator believes, kept separate to allow deliberate mismatch.
struct ThresholdSensor {
  Eigen::VectorXd row;
  double threshold = 0.0;
  NoiseModel truth_noise;
  NoiseModel assumed_noise;

  ThresholdSensor(Eigen::VectorXd c, double tau, NoiseModel truth, NoiseModel assumed)
      : row(std::move(c)), threshold(tau), truth_noise(truth), assumed_noise(assumed) {}
  ThresholdSensor(Eigen::VectorXd c, double tau, NoiseModel noise)
      : ThresholdSensor(std::move(c), tau, noise, noise) {}
};

using ThresholdSensorBank = std::vector<ThresholdSensor>;

struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;
  double sampling_interval = 1.0;
};

struct MeasurementRecord {
  std::vector<Eigen::VectorXi> bits;        // y_k in {0,1}^l
  std::vector<Eigen::VectorXd> pre_threshold;  // z_k, diagnostics only
};

/// One step of the dynamics with process noise drawn from the seeded stream.
inline Eigen::VectorXd step(const LinearSystem& sys, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u, std::mt19937_64& rng) {
  if (x.size() != sys.A.cols() || u.size() != sys.B.cols()) {
    throw DimensionError("step: state/input size mismatch");
  }
  Eigen::VectorXd next = sys.A * x + sys.B * u;
  if (sys.process_noise_factor.size() > 0 && !sys.process_noise_factor.isZero(0.0)) {
    std::normal_distribution<double> std_normal(0.0, 1.0);
    Eigen::VectorXd w(next.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      w[i] = std_normal(rng);
    }
    next += sys.process_noise_factor * w;
  }
  return next;
}

/// Samples the threshold sensor bank at state x.
/// Ties at z == tau produce y = 1 (the comparison is >=).
inline std::pair<Eigen::VectorXi, Eigen::VectorXd> measure(const ThresholdSensorBank& bank,
                                                           const Eigen::VectorXd& x,
                                                           std::mt19937_64& rng) {
  const auto l = static_cast<Eigen::Index>(bank.size());
  Eigen::VectorXi y(l);
  Eigen::VectorXd z(l);
  for (Eigen::Index i = 0; i < l; ++i) {
    const auto& s = bank[static_cast<std::size_t>(i)];
    if (s.row.size() != x.size()) {
      throw DimensionError("measure: sensor row length mismatch");
    }
    z[i] = s.row.dot(x) + s.truth_noise.sample(rng);
    y[i] = z[i] >= s.threshold ? 1 : 0;
  }
  return {y, z};
}

/// Deterministic measurement with noise disabled.
inline Eigen::VectorXi measure_noiseless(const ThresholdSensorBank& bank,
                                         const Eigen::VectorXd& x) {
  const auto l = static_cast<Eigen::Index>(bank.size());
  Eigen::VectorXi y(l);
  for (Eigen::Index i = 0; i < l; ++i) {
    const auto& s = bank[static_cast<std::size_t>(i)];
    y[i] = s.row.dot(x) >= s.threshold ? 1 : 0;
  }
  return y;
}

/// ln p(y^(i) | x) under the estimator-assumed noise model.
inline double log_likelihood_term(const ThresholdSensorBank& bank, std::size_t i, int y_bit,
                                  const Eigen::VectorXd& x) {
  const auto& s = bank.at(i);
  const double margin = s.threshold - s.row.dot(x);
  return y_bit ? -s.assumed_noise.neg_log_survival(margin)
               : -s.assumed_noise.neg_log_cdf(margin);
}

}  // namespace mhmap
