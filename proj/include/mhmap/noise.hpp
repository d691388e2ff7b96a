#pragma once

#include <cmath>
#include <limits>
#include <random>

#include "mhmap/errors.hpp"

namespace mhmap {

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kSqrt2Pi = 2.5066282746310002;
inline constexpr double kSqrt2OverPi = 0.7978845608028654;  // sqrt(2/pi)

/// Scaled complementary error function exp(x^2) * erfc(x).
///
/// For x in [0, 6) the product exp(x^2)*erfc(x) is evaluated directly
/// (exp(36) ~ 4e15, no overflow). For x >= 6 the asymptotic expansion
///   erfcx(x) ~ 1/(x sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2x^2)^k
/// is summed until the terms stop decreasing, which for x >= 6 reaches
/// machine precision. Negative arguments use the reflection
/// erfcx(-x) = 2 exp(x^2) - erfcx(x) and overflow for x < -26.6.
inline double erfcx(double x) {
  if (x < 0.0) {
    return 2.0 * std::exp(x * x) - erfcx(-x);
  }
  if (x < 6.0) {
    return std::exp(x * x) * std::erfc(x);
  }
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double mag = 1.0;
  double sign = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    const double next = mag * static_cast<double>(2 * k - 1) * inv2x2;
    if (next >= mag) {
      break;  // past the smallest term of the divergent series
    }
    mag = next;
    sign = -sign;
    sum += sign * mag;
    if (mag < 1e-20) {
      break;
    }
  }
  return sum / (x * 1.7724538509055160);  // sqrt(pi)
}

/// -ln Phi(u) for the standard normal, stable for u down to -40 and beyond.
inline double neg_log_std_normal_cdf(double u) {
  if (u > 0.0) {
    // Phi(u) = 1 - erfc(u/sqrt(2))/2, close to 1: keep precision via log1p.
    return -std::log1p(-0.5 * std::erfc(u / kSqrt2));
  }
  // Phi(u) = 0.5 exp(-u^2/2) erfcx(-u/sqrt(2))
  return 0.5 * u * u - std::log(0.5 * erfcx(-u / kSqrt2));
}

/// Inverse Mills ratio phi(u)/Phi(u) for the standard normal.
inline double std_normal_mills(double u) {
  if (u > 26.0) {
    // Phi(u) == 1 to machine precision.
    return std::exp(-0.5 * u * u) / kSqrt2Pi;
  }
  return kSqrt2OverPi / erfcx(-u / kSqrt2);
}

inline double softplus(double t) {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

inline double logistic_sigmoid(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace detail

enum class NoiseKind { Gaussian, Logistic, Laplace, Uniform, Exponential };

/// Which log term of the Bernoulli likelihood a support query refers to.
enum class LogTerm { Cdf, Survival };

/// Open interval on which the corresponding -ln F / -ln(1-F) is finite.
struct SupportInterval {
  double lower = -detail::kInf;
  double upper = detail::kInf;

  bool contains(double z) const { return z > lower && z < upper; }
};

/// First and second derivative of a scalar log-likelihood term.
struct LogDerivatives {
  double first = 0.0;
  double second = 0.0;
};

/// A scalar log-concave measurement-noise distribution.
///
/// Exposes the CDF, the two negative log terms -ln F(z) and -ln(1-F(z))
/// appearing in the MAP cost, and their analytic first/second derivatives.
/// Both log terms are convex on their open support; evaluation is stable
/// in the far Gaussian tails (|z| up to 40 standard deviations).
class NoiseModel {
 public:
  static NoiseModel gaussian(double variance) {
    if (!(variance > 0.0)) throw InvalidParameter("Gaussian variance must be > 0");
    return NoiseModel(NoiseKind::Gaussian, std::sqrt(variance), 0.0);
  }
  static NoiseModel logistic(double scale) {
    if (!(scale > 0.0)) throw InvalidParameter("Logistic scale must be > 0");
    return NoiseModel(NoiseKind::Logistic, scale, 0.0);
  }
  static NoiseModel laplace(double scale) {
    if (!(scale > 0.0)) throw InvalidParameter("Laplace scale must be > 0");
    return NoiseModel(NoiseKind::Laplace, scale, 0.0);
  }
  static NoiseModel uniform(double lower, double upper) {
    if (!(lower < upper)) throw InvalidParameter("Uniform bounds must satisfy lower < upper");
    return NoiseModel(NoiseKind::Uniform, lower, upper);
  }
  static NoiseModel exponential(double rate) {
    if (!(rate > 0.0)) throw InvalidParameter("Exponential rate must be > 0");
    return NoiseModel(NoiseKind::Exponential, rate, 0.0);
  }

  NoiseKind kind() const { return kind_; }

  double cdf(double z) const {
    switch (kind_) {
      case NoiseKind::Gaussian: {
        const double u = z / p0_;
        return 0.5 * std::erfc(-u / detail::kSqrt2);
      }
      case NoiseKind::Logistic:
        return detail::logistic_sigmoid(z / p0_);
      case NoiseKind::Laplace: {
        const double t = z / p0_;
        return t < 0.0 ? 0.5 * std::exp(t) : 1.0 - 0.5 * std::exp(-t);
      }
      case NoiseKind::Uniform:
        if (z <= p0_) return 0.0;
        if (z >= p1_) return 1.0;
        return (z - p0_) / (p1_ - p0_);
      case NoiseKind::Exponential:
        return z <= 0.0 ? 0.0 : -std::expm1(-p0_ * z);
    }
    return 0.0;
  }

  double neg_log_cdf(double z) const {
    switch (kind_) {
      case NoiseKind::Gaussian:
        return detail::neg_log_std_normal_cdf(z / p0_);
      case NoiseKind::Logistic:
        return detail::softplus(-z / p0_);
      case NoiseKind::Laplace: {
        const double t = z / p0_;
        if (t < 0.0) return std::log(2.0) - t;
        return -std::log1p(-0.5 * std::exp(-t));
      }
      case NoiseKind::Uniform:
        check_domain(z, LogTerm::Cdf);
        if (z >= p1_) return 0.0;
        return -std::log((z - p0_) / (p1_ - p0_));
      case NoiseKind::Exponential:
        check_domain(z, LogTerm::Cdf);
        return -std::log(-std::expm1(-p0_ * z));
    }
    return 0.0;
  }

  double neg_log_survival(double z) const {
    switch (kind_) {
      case NoiseKind::Gaussian:
        return detail::neg_log_std_normal_cdf(-z / p0_);
      case NoiseKind::Logistic:
        return detail::softplus(z / p0_);
      case NoiseKind::Laplace: {
        const double t = z / p0_;
        if (t >= 0.0) return std::log(2.0) + t;
        return -std::log1p(-0.5 * std::exp(t));
      }
      case NoiseKind::Uniform:
        check_domain(z, LogTerm::Survival);
        if (z <= p0_) return 0.0;
        return -std::log((p1_ - z) / (p1_ - p0_));
      case NoiseKind::Exponential:
        return p0_ * std::max(z, 0.0);
    }
    return 0.0;
  }

  LogDerivatives dneg_log_cdf(double z) const {
    switch (kind_) {
      case NoiseKind::Gaussian: {
        const double u = z / p0_;
        const double h = detail::std_normal_mills(u);
        return {-h / p0_, h * (h + u) / (p0_ * p0_)};
      }
      case NoiseKind::Logistic: {
        const double f = detail::logistic_sigmoid(z / p0_);
        return {-(1.0 - f) / p0_, f * (1.0 - f) / (p0_ * p0_)};
      }
      case NoiseKind::Laplace: {
        const double t = z / p0_;
        if (t < 0.0) return {-1.0 / p0_, 0.0};
        const double e = std::exp(-t);
        const double F = 1.0 - 0.5 * e;
        const double f = 0.5 * e / p0_;
        // l1'' = (f^2 - f' F)/F^2 with f' = -f/b.
        return {-f / F, (f * f + f * F / p0_) / (F * F)};
      }
      case NoiseKind::Uniform: {
        check_domain(z, LogTerm::Cdf);
        if (z >= p1_) return {0.0, 0.0};
        const double d = z - p0_;
        return {-1.0 / d, 1.0 / (d * d)};
      }
      case NoiseKind::Exponential: {
        check_domain(z, LogTerm::Cdf);
        const double t = p0_ * z;
        const double F = -std::expm1(-t);
        const double e = std::exp(-t);
        return {-p0_ * e / F, p0_ * p0_ * e / (F * F)};
      }
    }
    return {};
  }

  LogDerivatives dneg_log_survival(double z) const {
    switch (kind_) {
      case NoiseKind::Gaussian: {
        const double u = z / p0_;
        const double h = detail::std_normal_mills(-u);
        return {h / p0_, h * (h - u) / (p0_ * p0_)};
      }
      case NoiseKind::Logistic: {
        const double f = detail::logistic_sigmoid(z / p0_);
        return {f / p0_, f * (1.0 - f) / (p0_ * p0_)};
      }
      case NoiseKind::Laplace: {
        const double t = z / p0_;
        if (t >= 0.0) return {1.0 / p0_, 0.0};
        const double e = std::exp(t);
        const double S = 1.0 - 0.5 * e;
        const double f = 0.5 * e / p0_;
        // l2'' = (f^2 + f' S)/S^2 with f' = f/b.
        return {f / S, (f * f + f * S / p0_) / (S * S)};
      }
      case NoiseKind::Uniform: {
        check_domain(z, LogTerm::Survival);
        if (z <= p0_) return {0.0, 0.0};
        const double d = p1_ - z;
        return {1.0 / d, 1.0 / (d * d)};
      }
      case NoiseKind::Exponential:
        return {z > 0.0 ? p0_ : 0.0, 0.0};
    }
    return {};
  }

  SupportInterval support(LogTerm which) const {
    switch (kind_) {
      case NoiseKind::Gaussian:
      case NoiseKind::Logistic:
      case NoiseKind::Laplace:
        return {};
      case NoiseKind::Uniform:
        return which == LogTerm::Cdf ? SupportInterval{p0_, detail::kInf}
                                     : SupportInterval{-detail::kInf, p1_};
      case NoiseKind::Exponential:
        return which == LogTerm::Cdf ? SupportInterval{0.0, detail::kInf} : SupportInterval{};
    }
    return {};
  }

  double sample(std::mt19937_64& rng) const {
    switch (kind_) {
      case NoiseKind::Gaussian: {
        std::normal_distribution<double> dist(0.0, p0_);
        return dist(rng);
      }
      case NoiseKind::Logistic: {
        const double u = uniform01(rng);
        return p0_ * std::log(u / (1.0 - u));
      }
      case NoiseKind::Laplace: {
        const double u = uniform01(rng) - 0.5;
        return -p0_ * std::copysign(std::log1p(-2.0 * std::abs(u)), u);
      }
      case NoiseKind::Uniform:
        return p0_ + (p1_ - p0_) * uniform01(rng);
      case NoiseKind::Exponential:
        return -std::log1p(-uniform01(rng)) / p0_;
    }
    return 0.0;
  }

  /// Standard deviation, used for scenario diagnostics only.
  double std_dev() const {
    switch (kind_) {
      case NoiseKind::Gaussian:
        return p0_;
      case NoiseKind::Logistic:
        return p0_ * 3.141592653589793 / std::sqrt(3.0);
      case NoiseKind::Laplace:
        return p0_ * detail::kSqrt2;
      case NoiseKind::Uniform:
        return (p1_ - p0_) / std::sqrt(12.0);
      case NoiseKind::Exponential:
        return 1.0 / p0_;
    }
    return 0.0;
  }

 private:
  NoiseModel(NoiseKind kind, double p0, double p1) : kind_(kind), p0_(p0), p1_(p1) {}

  void check_domain(double z, LogTerm which) const {
    if (!support(which).contains(z)) {
      throw DomainError("noise log term evaluated outside its support");
    }
  }

  static double uniform01(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(std::numeric_limits<double>::min(), 1.0);
    return dist(rng);
  }

  NoiseKind kind_;
  // Gaussian: p0 = standard deviation. Logistic/Laplace: p0 = scale.
  // Uniform: [p0, p1]. Exponential: p0 = rate.
  double p0_;
  double p1_;
};

}  // namespace mhmap
