#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hypermap {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Smallest admissible temperature: every likelihood divides by T, so the
// zero-temperature model variant is excluded.
inline constexpr double kMinTemperature = 0.01;

// Individual Bernoulli log-terms are floored here to keep profiles finite.
inline constexpr double kLogFloor = -690.77552789821368;  // ln(1e-300)

// Model parameters: external-link rate m, internal-link rate L, radial drift
// exponent beta (power-law exponent gamma = 1 + 1/beta), temperature T,
// curvature scale zeta = sqrt(-K), and final network size t.
struct ModelParams {
  double m = 1.5;
  double L = 2.5;
  double beta = 1.0 / 1.1;
  double T = 0.4;
  double zeta = 1.0;
  long long t = 0;

  double gamma() const { return 1.0 + 1.0 / beta; }

  static ModelParams from_gamma(double m, double L, double gamma, double T, double zeta,
                                long long t) {
    if (!(gamma >= 2.0))
      throw std::invalid_argument("gamma must be >= 2 (got " + std::to_string(gamma) + ")");
    ModelParams p;
    p.m = m;
    p.L = L;
    p.beta = 1.0 / (gamma - 1.0);
    p.T = T;
    p.zeta = zeta;
    p.t = t;
    p.validate();
    return p;
  }

  void validate() const {
    if (!(m >= 0.0)) throw std::invalid_argument("m must be >= 0");
    if (!(L >= 0.0)) throw std::invalid_argument("L must be >= 0");
    if (!(beta > 0.0 && beta <= 1.0))
      throw std::invalid_argument("beta must lie in (0, 1] (gamma in [2, inf))");
    if (!(T >= kMinTemperature && T < 1.0))
      throw std::invalid_argument("T must lie in (0, 1); values below " +
                                  std::to_string(kMinTemperature) + " are rejected");
    if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be > 0");
    if (t < 1) throw std::invalid_argument("t must be >= 1");
  }
};

struct PolarCoord {
  double r = 0.0;
  double theta = 0.0;
};

// Circular separation reduced to [0, pi].
inline double angular_distance(double a, double b) {
  double d = std::fmod(std::fabs(a - b), kTwoPi);
  return std::numbers::pi - std::fabs(std::numbers::pi - d);
}

inline double normalize_angle(double theta) {
  double v = std::fmod(theta, kTwoPi);
  if (v < 0.0) v += kTwoPi;
  return v;
}

namespace detail {

// Scaled-space kernels work with zeta*r throughout; zeta cancels everywhere a
// distance meets a cutoff, so these are exactly curvature-invariant.

inline double scaled_radial_initial(long long i) { return 2.0 * std::log(static_cast<double>(i)); }

inline double scaled_radial_at(long long j, long long i, double beta) {
  return 2.0 * beta * std::log(static_cast<double>(j)) +
         2.0 * (1.0 - beta) * std::log(static_cast<double>(i));
}

// zeta * x from the hyperbolic law of cosines, rearranged so both terms are
// non-negative (cosh a cosh b - sinh a sinh b cos d = cosh(a-b) +
// 2 sinh a sinh b sin^2(d/2)); near-coincident points then round to zero
// instead of picking up cancellation noise. The clamp guards residual
// round-off below 1.
inline double scaled_distance(double sr_a, double sr_b, double dtheta) {
  double s = std::sin(0.5 * dtheta);
  double arg = std::cosh(sr_a - sr_b) + 2.0 * std::sinh(sr_a) * std::sinh(sr_b) * s * s;
  return std::acosh(arg < 1.0 ? 1.0 : arg);
}

inline double softplus(double s) {
  if (s > 0.0) return s + std::log1p(std::exp(-s));
  return std::log1p(std::exp(s));
}

// log p and log(1-p) for the logistic connection probability, expressed via
// s = (zeta*x - zeta*R) / (2T). Floored so profiles stay finite.
inline double log_p(double s) {
  double v = -softplus(s);
  return v < kLogFloor ? kLogFloor : v;
}

inline double log_1mp(double s) {
  double v = -softplus(-s);
  return v < kLogFloor ? kLogFloor : v;
}

inline double logistic(double s) {
  if (s > 0.0) {
    double e = std::exp(-s);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(s));
}

}  // namespace detail

// Radial coordinate at birth: r_i = (2/zeta) ln i.
inline double radial_initial(long long i, const ModelParams& p) {
  if (i < 1) throw std::invalid_argument("radial_initial: rank must be >= 1");
  return detail::scaled_radial_initial(i) / p.zeta;
}

// Radial coordinate of node j at the time node i appears, in closed form from
// the birth radii: r_j(i) = beta*r_j + (1-beta)*r_i.
inline double radial_at(long long j, long long i, const ModelParams& p) {
  if (j < 1 || j > i) throw std::invalid_argument("radial_at: need 1 <= j <= i");
  return detail::scaled_radial_at(j, i, p.beta) / p.zeta;
}

inline double hyperbolic_distance(const PolarCoord& a, const PolarCoord& b, double zeta) {
  double dtheta = angular_distance(a.theta, b.theta);
  return detail::scaled_distance(zeta * a.r, zeta * b.r, dtheta) / zeta;
}

// p(x) = 1 / (1 + exp(zeta (x - R) / (2T))).
inline double connection_probability(double x, double R, double T, double zeta) {
  if (!(T > 0.0)) throw std::invalid_argument("connection_probability: T must be > 0");
  return detail::logistic(zeta * (x - R) / (2.0 * T));
}

// Expected number of older nodes that node i links to at birth, for a network
// grown to final size t. The removable singularity at beta = 1/2 is replaced
// by its limit; at beta = 1 the closed form degenerates entirely.
inline double expected_degree_mbar(long long i, const ModelParams& p) {
  if (i < 1 || i > p.t) throw std::invalid_argument("expected_degree_mbar: need 1 <= i <= t");
  if (std::fabs(p.beta - 1.0) < 1e-9)
    throw std::invalid_argument(
        "expected_degree_mbar: closed form is degenerate at beta = 1 (gamma = 2)");
  double beta = p.beta;
  double omb = 1.0 - beta;
  double ti = static_cast<double>(p.t) / static_cast<double>(i);
  double g;
  if (std::fabs(beta - 0.5) < 1e-9) {
    g = std::log(ti);
  } else {
    g = (std::pow(ti, 2.0 * beta - 1.0) - 1.0) / (2.0 * beta - 1.0);
  }
  double denom = 1.0 - std::pow(static_cast<double>(p.t), -omb);
  double bracket = 1.0 - std::pow(static_cast<double>(i), -omb);
  return p.m + 2.0 * p.L * omb * g * bracket / (denom * denom);
}

// I_i = (1 - i^{-(1-beta)}) / (1-beta), with the beta -> 1 limit ln(i).
inline double radial_integral(long long i, double beta) {
  if (i < 1) throw std::invalid_argument("radial_integral: rank must be >= 1");
  if (std::fabs(beta - 1.0) < 1e-9) return std::log(static_cast<double>(i));
  double omb = 1.0 - beta;
  return (1.0 - std::pow(static_cast<double>(i), -omb)) / omb;
}

namespace detail {

// zeta * R_i. For i = 1 the radial integral vanishes and node 1 has no
// earlier partners; the cutoff is a -inf sentinel only to keep the function
// total ("connects to nothing").
inline double scaled_cutoff(long long i, const ModelParams& p) {
  double mbar = expected_degree_mbar(i, p);
  if (!(mbar > 0.0))
    throw std::invalid_argument("cutoff_radius: expected degree must be positive");
  double I = radial_integral(i, p.beta);
  if (I <= 0.0) return -std::numeric_limits<double>::infinity();
  double c = 2.0 * p.T / std::sin(p.T * std::numbers::pi) * I / mbar;
  return scaled_radial_initial(i) - 2.0 * std::log(c);
}

}  // namespace detail

// Connection cutoff radius R_i.
inline double cutoff_radius(long long i, const ModelParams& p) {
  return detail::scaled_cutoff(i, p) / p.zeta;
}

}  // namespace hypermap
