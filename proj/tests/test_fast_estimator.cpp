#include <catch2/catch_amalgamated.hpp>

#include <Eigen/QR>
#include <cmath>
#include <random>
#include <vector>

#include "mhmap/fast_estimator.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;
using mhmap::FastFilter;
using mhmap::FastSensor;
using mhmap::FieldFusionProblem;
using mhmap::LinearSystem;
using mhmap::LocalModel;
using mhmap::MovingHorizonFilter;
using mhmap::NoiseModel;
using mhmap::ThresholdSensorBank;

namespace {

LinearSystem random_field_system(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  LinearSystem sys;
  sys.A = 0.85 * MatrixXd::Identity(n, n);
  for (int i = 0; i + 1 < n; ++i) sys.A(i, i + 1) = 0.05;
  sys.B = MatrixXd::Identity(n, n);
  sys.prior_mean = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) sys.prior_mean[i] = dist(rng);
  sys.prior_information = 2.0 * MatrixXd::Identity(n, n);
  sys.process_information = 3.0 * MatrixXd::Identity(n, n);
  sys.process_noise_factor = MatrixXd::Zero(n, n);
  return sys;
}

std::vector<FastSensor> random_sensors(int l, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<FastSensor> out;
  for (int i = 0; i < l; ++i) {
    FastSensor s{VectorXd(n), 0.1 * dist(rng), 0.3 * dist(rng),
                 NoiseModel::gaussian(1.0), 0.5 + 0.1 * i};
    for (int j = 0; j < n; ++j) s.row[j] = dist(rng);
    out.push_back(std::move(s));
  }
  return out;
}

FieldFusionProblem random_fusion(const LinearSystem& sys,
                                 const std::vector<FastSensor>& sensors, int horizon,
                                 std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  const int n = sys.state_dim();
  FieldFusionProblem p;
  p.system = &sys;
  p.sensors = &sensors;
  p.prediction = sys.prior_mean;
  p.arrival_weight = 1.5 * MatrixXd::Identity(n, n);
  for (int j = 0; j < horizon; ++j) {
    VectorXd u(n);
    for (int i = 0; i < n; ++i) u[i] = 0.2 * dist(rng);
    p.inputs.push_back(u);
  }
  p.pseudo.resize(static_cast<Eigen::Index>(sensors.size()), horizon + 1);
  for (Eigen::Index i = 0; i < p.pseudo.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.pseudo.cols(); ++j) {
      p.pseudo(i, j) = dist(rng);
    }
  }
  return p;
}

// Dense least-squares oracle: stack every weighted residual into one
// over-determined system and solve by QR.
VectorXd fusion_lsq_oracle(const FieldFusionProblem& p) {
  const int n = p.state_dim();
  const int steps = static_cast<int>(p.pseudo.cols());
  const int l = static_cast<int>(p.sensors->size());
  const int vars = steps * n;
  const int rows = n + (steps - 1) * n + steps * l;
  MatrixXd J = MatrixXd::Zero(rows, vars);
  VectorXd r = VectorXd::Zero(rows);
  int at = 0;

  // arrival block: sqrt(Psi) (x0 - xbar)
  const MatrixXd psi_sqrt = Eigen::LLT<MatrixXd>(p.arrival_weight).matrixL().transpose();
  J.block(at, 0, n, n) = psi_sqrt;
  r.segment(at, n) = psi_sqrt * p.prediction;
  at += n;

  const MatrixXd g_sqrt =
      Eigen::LLT<MatrixXd>(p.system->process_information).matrixL().transpose();
  for (int j = 0; j + 1 < steps; ++j) {
    J.block(at, (j + 1) * n, n, n) = g_sqrt;
    J.block(at, j * n, n, n) = -g_sqrt * p.system->A;
    r.segment(at, n) = g_sqrt * p.system->B * p.inputs[static_cast<std::size_t>(j)];
    at += n;
  }
  for (int j = 0; j < steps; ++j) {
    for (int i = 0; i < l; ++i) {
      const auto& s = (*p.sensors)[static_cast<std::size_t>(i)];
      const double w = std::sqrt(s.weight);
      J.block(at, j * n, 1, n) = w * s.row.transpose();
      r[at] = w * (p.pseudo(i, j) - s.offset);
      ++at;
    }
  }
  return J.colPivHouseholderQr().solve(r);
}

LocalModel default_local(int order = 0) {
  LocalModel m;
  m.taylor_order = order;
  m.sampling_interval = 0.5;
  m.process_information = 100.0 * MatrixXd::Identity(order + 1, order + 1);
  m.arrival_weight = 1000.0 * MatrixXd::Identity(order + 1, order + 1);
  return m;
}

}  // namespace

TEST_CASE("local model transition forms") {
  auto m0 = default_local(0);
  CHECK(m0.state_dim() == 1);
  CHECK(m0.transition()(0, 0) == 1.0);
  CHECK(m0.output_row().size() == 1);
  CHECK(m0.output_row()[0] == 1.0);

  auto m1 = default_local(1);
  CHECK(m1.state_dim() == 2);
  MatrixXd a = m1.transition();
  CHECK(a(0, 0) == 1.0);
  CHECK(a(0, 1) == 0.5);
  CHECK(a(1, 0) == 0.0);
  CHECK(a(1, 1) == 1.0);
  CHECK(m1.output_row()[0] == 1.0);
  CHECK(m1.output_row()[1] == 0.0);

  LocalModel bad = default_local(0);
  bad.taylor_order = 2;
  CHECK_THROWS_AS(bad.transition(), mhmap::InvalidParameter);
}

TEST_CASE("fusion solve matches the dense least-squares oracle") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = random_field_system(10, rng);
    const auto sensors = random_sensors(6, 10, rng);
    const auto p = random_fusion(sys, sensors, 4, rng);

    const auto sol = mhmap::solve_fusion(p);
    const VectorXd oracle = fusion_lsq_oracle(p);
    for (std::size_t j = 0; j < sol.estimates.size(); ++j) {
      const VectorXd want = oracle.segment(static_cast<Eigen::Index>(j) * 10, 10);
      CHECK((sol.estimates[j] - want).norm() <= 1e-9 * (1.0 + want.norm()));
    }
  }
}

TEST_CASE("fusion solution satisfies the normal equations") {
  std::mt19937_64 rng(62);
  const auto sys = random_field_system(8, rng);
  const auto sensors = random_sensors(5, 8, rng);
  const auto p = random_fusion(sys, sensors, 6, rng);
  const auto sol = mhmap::solve_fusion(p);

  VectorXd X(static_cast<Eigen::Index>(sol.estimates.size()) * 8);
  for (std::size_t j = 0; j < sol.estimates.size(); ++j) {
    X.segment(static_cast<Eigen::Index>(j) * 8, 8) = sol.estimates[j];
  }
  const double scale = 1.0 + mhmap::fusion_gradient(p, VectorXd::Zero(X.size())).norm();
  CHECK(mhmap::fusion_gradient(p, X).norm() <= 1e-8 * scale);
  CHECK(sol.stats.iterations == 0);

  // any perturbation increases the quadratic cost
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    VectorXd d(X.size());
    for (int i = 0; i < d.size(); ++i) d[i] = 0.1 * dist(rng);
    CHECK(mhmap::fusion_cost(p, X + d) >= sol.cost_value - 1e-10);
  }
}

TEST_CASE("prefactored Hessian reproduces the direct solve") {
  std::mt19937_64 rng(63);
  const auto sys = random_field_system(6, rng);
  const auto sensors = random_sensors(4, 6, rng);
  const auto p = random_fusion(sys, sensors, 5, rng);
  const auto direct = mhmap::solve_fusion(p);
  const auto chol = mhmap::factor_fusion_hessian(p);
  const auto cached = mhmap::solve_fusion(p, &chol);
  for (std::size_t j = 0; j < direct.estimates.size(); ++j) {
    CHECK((direct.estimates[j] - cached.estimates[j]).norm() == 0.0);
  }
}

TEST_CASE("zero-weight sensors reduce fusion to the open-loop rollout") {
  std::mt19937_64 rng(64);
  const auto sys = random_field_system(4, rng);
  auto sensors = random_sensors(3, 4, rng);
  for (auto& s : sensors) s.weight = 0.0;
  const auto p = random_fusion(sys, sensors, 5, rng);
  const auto sol = mhmap::solve_fusion(p);

  VectorXd xj = p.prediction;
  CHECK((sol.estimates[0] - xj).norm() <= 1e-9);
  for (std::size_t j = 0; j < p.inputs.size(); ++j) {
    xj = sys.A * xj + sys.B * p.inputs[j];
    CHECK((sol.estimates[j + 1] - xj).norm() <= 1e-9);
  }
}

TEST_CASE("step-1 filters equal a generic moving-horizon filter") {
  // one sensor: the fast filter's pseudo-measurements must be bitwise the
  // window estimates of a standalone filter on the same local chain
  std::mt19937_64 rng(65);
  const auto model = default_local(0);
  LinearSystem field = random_field_system(3, rng);

  std::vector<FastSensor> sensors;
  FastSensor s{VectorXd::Zero(3), 0.2, 0.1, NoiseModel::gaussian(1.0), 1.0};
  s.row << 0.5, 0.3, 0.2;
  sensors.push_back(s);

  const int horizon = 4;
  FastFilter fast(field, sensors, model, horizon,
                  MatrixXd::Identity(3, 3));

  LinearSystem loc;
  loc.A = model.transition();
  loc.B = MatrixXd::Zero(1, 1);
  loc.prior_mean = VectorXd::Constant(1, s.row.dot(field.prior_mean) + s.offset);
  loc.prior_information = model.arrival_weight;
  loc.process_information = model.process_information;
  loc.process_noise_factor = MatrixXd::Zero(1, 1);
  ThresholdSensorBank bank;
  bank.emplace_back(model.output_row(), s.threshold, s.assumed_noise);
  MovingHorizonFilter reference(loc, bank, horizon, model.arrival_weight);

  std::uniform_int_distribution<int> coin(0, 1);
  for (int k = 0; k < 12; ++k) {
    VectorXi y(1);
    y[0] = coin(rng);
    fast.advance(y, VectorXd::Zero(3));
    const auto& ref = reference.advance(y, VectorXd::Zero(1));
    REQUIRE(fast.pseudo().cols() == static_cast<Eigen::Index>(ref.estimates.size()));
    for (std::size_t j = 0; j < ref.estimates.size(); ++j) {
      CHECK(fast.pseudo()(0, static_cast<Eigen::Index>(j)) ==
            ref.estimates[j][0]);
    }
  }
}

TEST_CASE("pseudo-measurement window grows through startup then slides") {
  std::mt19937_64 rng(66);
  const auto field = random_field_system(2, rng);
  const auto sensors = random_sensors(3, 2, rng);
  const int horizon = 3;
  FastFilter fast(field, sensors, default_local(0), horizon,
                  MatrixXd::Identity(2, 2));
  std::uniform_int_distribution<int> coin(0, 1);
  for (int k = 0; k < 8; ++k) {
    VectorXi y(3);
    for (int i = 0; i < 3; ++i) y[i] = coin(rng);
    const auto& sol = fast.advance(y, VectorXd::Zero(2));
    const int expected = std::min(k + 1, horizon + 1);
    CHECK(fast.pseudo().rows() == 3);
    CHECK(fast.pseudo().cols() == expected);
    CHECK(static_cast<int>(sol.estimates.size()) == expected);
    CHECK(fast.smoothed_head().size() == 2);
  }

  VectorXi bad(2);
  CHECK_THROWS_AS(fast.advance(bad), mhmap::DimensionError);
}

TEST_CASE("fast filter agrees with the standard filter as weights grow") {
  // scalar field x_{k+1} = x_k, one sensor, local model identical to the
  // field model: with a huge fusion weight the fused estimate must track
  // the standard filter run with the same window weights
  LocalModel model;
  model.taylor_order = 0;
  model.sampling_interval = 1.0;
  model.process_information = MatrixXd::Constant(1, 1, 100.0);
  model.arrival_weight = MatrixXd::Constant(1, 1, 1000.0);

  LinearSystem field;
  field.A = MatrixXd::Identity(1, 1);
  field.B = MatrixXd::Zero(1, 1);
  field.prior_mean = VectorXd::Constant(1, 0.5);
  field.prior_information = model.arrival_weight;
  field.process_information = model.process_information;
  field.process_noise_factor = MatrixXd::Zero(1, 1);

  std::vector<FastSensor> sensors;
  sensors.push_back(
      {VectorXd::Ones(1), 0.0, 0.4, NoiseModel::gaussian(1.0), 1e12});

  const int horizon = 5;
  FastFilter fast(field, sensors, model, horizon, model.arrival_weight);

  ThresholdSensorBank bank;
  bank.emplace_back(VectorXd::Ones(1), 0.4, NoiseModel::gaussian(1.0));
  MovingHorizonFilter standard(field, bank, horizon, model.arrival_weight);

  std::mt19937_64 rng(67);
  std::uniform_int_distribution<int> coin(0, 1);
  double max_diff = 0.0;
  for (int k = 0; k < 50; ++k) {
    VectorXi y(1);
    y[0] = coin(rng);
    fast.advance(y, VectorXd::Zero(1));
    standard.advance(y, VectorXd::Zero(1));
    max_diff = std::max(max_diff,
                        std::abs(fast.smoothed_head()[0] - standard.smoothed_head()[0]));
  }
  CHECK(max_diff <= 1e-6);
}

TEST_CASE("fast filter is deterministic") {
  std::mt19937_64 rng(68);
  const auto field = random_field_system(3, rng);
  const auto sensors = random_sensors(4, 3, rng);
  FastFilter a(field, sensors, default_local(0), 3, MatrixXd::Identity(3, 3));
  FastFilter b(field, sensors, default_local(0), 3, MatrixXd::Identity(3, 3));
  std::uniform_int_distribution<int> coin(0, 1);
  for (int k = 0; k < 10; ++k) {
    VectorXi y(4);
    for (int i = 0; i < 4; ++i) y[i] = coin(rng);
    const auto& sa = a.advance(y, VectorXd::Zero(3));
    const auto& sb = b.advance(y, VectorXd::Zero(3));
    for (std::size_t j = 0; j < sa.estimates.size(); ++j) {
      CHECK(sa.estimates[j] == sb.estimates[j]);
    }
    CHECK(a.pseudo() == b.pseudo());
  }
}
