#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "hypermap/geometry.hpp"
#include "hypermap/graph.hpp"
#include "hypermap/parallel.hpp"

namespace hypermap {

// Quadrature / lattice resolution for the common-neighbors integrals.
struct QuadratureSpec {
  int points = 256;

  void validate() const {
    if (points < 8) throw std::invalid_argument("quadrature needs at least 8 points");
  }
};

// Variance floor: the normal approximation degenerates when every constituent
// probability saturates, so sigma is clamped before use.
inline constexpr double kSigmaFloor = 1e-3;

struct CommonNeighborStats {
  double mu = 0.0;
  double sigma2 = 0.0;
};

struct LikelihoodProfile {
  std::vector<double> thetas;
  std::vector<double> loglik;
  double argmax_theta = 0.0;
  std::size_t argmax_index = 0;
};

// Candidate angles for placing node i: uniform on [0, 2pi) with spacing at
// most min{0.01, 1/i}.
inline std::vector<double> angle_grid(long long i) {
  double dtheta = std::min(0.01, 1.0 / static_cast<double>(i));
  auto n = static_cast<std::size_t>(std::ceil(kTwoPi / dtheta));
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) grid[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
  return grid;
}

// Argmax over precomputed scores; ties resolve to the smallest angle.
inline LikelihoodProfile make_profile(std::vector<double> thetas, std::vector<double> values) {
  if (thetas.empty() || thetas.size() != values.size())
    throw std::invalid_argument("make_profile: grid and scores must be nonempty and aligned");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best]) best = k;
  LikelihoodProfile prof;
  prof.thetas = std::move(thetas);
  prof.loglik = std::move(values);
  prof.argmax_index = best;
  prof.argmax_theta = prof.thetas[best];
  return prof;
}

template <typename Score>
LikelihoodProfile maximize_profile(Score&& score, std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("maximize_profile: empty grid");
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = score(grid[k]);
  return make_profile(std::vector<double>(grid.begin(), grid.end()), std::move(values));
}

namespace detail {

// z^e specialised for the exponents 1/(2T) that occur in practice; the sqrt
// chains avoid a general pow in the innermost loops.
struct PowExp {
  enum Kind { kOne, kInt, kQuarter, kGeneral } kind = kGeneral;
  double e = 1.0;
  int n = 1;

  static PowExp make(double e) {
    PowExp p;
    p.e = e;
    double r = std::round(e);
    if (std::fabs(e - 1.0) < 1e-12) {
      p.kind = kOne;
    } else if (std::fabs(e - r) < 1e-12 && r >= 1.0 && r <= 64.0) {
      p.kind = kInt;
      p.n = static_cast<int>(r);
    } else {
      double q = std::round(4.0 * e);
      if (std::fabs(4.0 * e - q) < 1e-12 && q >= 1.0 && q <= 8.0) {
        p.kind = kQuarter;
        p.n = static_cast<int>(q);
      }
    }
    return p;
  }

  static double pow_int(double z, int n) {
    double acc = 1.0;
    while (n > 0) {
      if (n & 1) acc *= z;
      z *= z;
      n >>= 1;
    }
    return acc;
  }

  double operator()(double z) const {
    switch (kind) {
      case kOne: return z;
      case kInt: return pow_int(z, n);
      case kQuarter: return std::sqrt(std::sqrt(pow_int(z, n)));
      default: return std::pow(z, e);
    }
  }
};

// Bernoulli factors shared by one profile evaluation: for partner f,
//   q(theta)  = dc[f] + sh[f] * (1 - cos(theta - theta_f))
//   e^{s}     = (w * kb[f])^{1/(2T)},  w = q + sqrt(q^2 - 1)
// dc = cosh of the radial difference, sh = product of the sinh's; kb folds in
// the cutoff, so saturation degrades to 0/inf instead of NaN.
struct PairFactorSet {
  std::vector<double> dc, sh, kb, cos_th, sin_th;
  std::vector<std::uint8_t> conn;
  PowExp pw;
  bool connected_only = false;

  std::size_t size() const { return dc.size(); }

  void reserve(std::size_t n) {
    dc.reserve(n); sh.reserve(n); kb.reserve(n);
    cos_th.reserve(n); sin_th.reserve(n); conn.reserve(n);
  }

  void push(double sr_young, double sr_old, double kbase, double theta, bool connected) {
    dc.push_back(std::cosh(sr_young - sr_old));
    sh.push_back(std::sinh(sr_young) * std::sinh(sr_old));
    kb.push_back(kbase);
    cos_th.push_back(std::cos(theta));
    sin_th.push_back(std::sin(theta));
    conn.push_back(connected ? 1 : 0);
  }

  double score_at(double cos_t, double sin_t) const {
    double sum = 0.0;
    const std::size_t n = size();
    for (std::size_t f = 0; f < n; ++f) {
      double versine = 1.0 - (cos_t * cos_th[f] + sin_t * sin_th[f]);
      double q = dc[f] + sh[f] * versine;
      if (q < 1.0) q = 1.0;
      double w = q + std::sqrt((q - 1.0) * (q + 1.0));
      double u = pw(w * kb[f]);
      double v = (connected_only || conn[f]) ? -std::log1p(u) : -std::log1p(1.0 / u);
      sum += v < kLogFloor ? kLogFloor : v;
    }
    return sum;
  }

  double score_theta(double theta) const { return score_at(std::cos(theta), std::sin(theta)); }
};

// Factors for placing node i at time i against partners j < i (optionally
// restricted to its earlier neighbors, connected terms only).
inline PairFactorSet placement_factors(long long i, std::span<const double> theta_by_rank,
                                       const RankedNet& net, const ModelParams& p,
                                       bool neighbors_only) {
  if (i < 2 || i > net.t) throw std::invalid_argument("placement needs 2 <= i <= t");
  PairFactorSet set;
  set.pw = PowExp::make(1.0 / (2.0 * p.T));
  set.connected_only = neighbors_only;
  double sri = scaled_radial_initial(i);
  double kbase = std::exp(-scaled_cutoff(i, p));
  if (neighbors_only) {
    set.reserve(net.nbr[static_cast<std::size_t>(i)].size());
    for (int j : net.nbr[static_cast<std::size_t>(i)]) {
      if (j >= i) break;  // sorted; only earlier partners
      set.push(sri, scaled_radial_at(j, i, p.beta), kbase,
               theta_by_rank[static_cast<std::size_t>(j)], true);
    }
    return set;
  }
  set.reserve(static_cast<std::size_t>(i - 1));
  auto nb = net.nbr[static_cast<std::size_t>(i)].begin();
  auto nb_end = net.nbr[static_cast<std::size_t>(i)].end();
  for (long long j = 1; j < i; ++j) {
    while (nb != nb_end && *nb < j) ++nb;
    bool connected = (nb != nb_end && *nb == j);
    set.push(sri, scaled_radial_at(j, i, p.beta), kbase,
             theta_by_rank[static_cast<std::size_t>(j)], connected);
  }
  return set;
}

// Factors for re-optimizing node j when ranks 1..i are placed. Each pair
// (j, l) is evaluated at the time the younger of the two appeared, with the
// younger node's cutoff.
inline PairFactorSet correction_factors(long long j, long long i,
                                        std::span<const double> theta_by_rank,
                                        const RankedNet& net, const ModelParams& p) {
  if (j < 1 || j > i || i > net.t || i < 2)
    throw std::invalid_argument("correction needs 1 <= j <= i <= t, i >= 2");
  PairFactorSet set;
  set.pw = PowExp::make(1.0 / (2.0 * p.T));
  set.reserve(static_cast<std::size_t>(i - 1));
  auto nb = net.nbr[static_cast<std::size_t>(j)].begin();
  auto nb_end = net.nbr[static_cast<std::size_t>(j)].end();
  for (long long l = 1; l <= i; ++l) {
    if (l == j) continue;
    while (nb != nb_end && *nb < l) ++nb;
    bool connected = (nb != nb_end && *nb == l);
    long long young = std::max(j, l), old = std::min(j, l);
    set.push(scaled_radial_initial(young), scaled_radial_at(old, young, p.beta),
             std::exp(-scaled_cutoff(young, p)),
             theta_by_rank[static_cast<std::size_t>(l)], connected);
  }
  return set;
}

// Evaluates a factor set on many candidate angles; candidates are independent
// so the result is identical for any thread count.
inline std::vector<double> score_grid(const PairFactorSet& set, std::span<const double> grid,
                                      int threads) {
  std::vector<double> cs(grid.size()), sn(grid.size()), out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    cs[k] = std::cos(grid[k]);
    sn[k] = std::sin(grid[k]);
  }
  parallel_chunks(static_cast<std::int64_t>(grid.size()), 64, threads,
                  [&](std::int64_t lo, std::int64_t hi) {
                    for (std::int64_t k = lo; k < hi; ++k)
                      out[static_cast<std::size_t>(k)] =
                          set.score_at(cs[static_cast<std::size_t>(k)], sn[static_cast<std::size_t>(k)]);
                  });
  return out;
}

}  // namespace detail

// Log-likelihood of node i sitting at `theta` given the links and non-links
// to all earlier nodes, evaluated at time i.
inline double link_loglik(long long i, double theta, std::span<const double> theta_by_rank,
                          const RankedNet& net, const ModelParams& p) {
  return detail::placement_factors(i, theta_by_rank, net, p, false).score_theta(theta);
}

// Log-likelihood for re-optimizing node j's angle once ranks 1..i are placed;
// every pair is scored at the time its younger endpoint appeared.
inline double correction_loglik(long long j, long long i, double theta,
                                std::span<const double> theta_by_rank, const RankedNet& net,
                                const ModelParams& p) {
  return detail::correction_factors(j, i, theta_by_rank, net, p).score_theta(theta);
}

// Neighbor-only initialization score: connected terms of link_loglik, O(k_i).
inline double init_loglik(long long i, double theta, std::span<const double> theta_by_rank,
                          const RankedNet& net, const ModelParams& p) {
  auto set = detail::placement_factors(i, theta_by_rank, net, p, true);
  if (set.size() == 0)
    throw std::domain_error("init_loglik: node has no earlier neighbors (no anchor)");
  return set.score_theta(theta);
}

namespace detail {

// Connection factor between `young` and `old` (young appears later) as a
// function of the versine 1 - cos(separation), at the time `young` appears.
struct PairProfile {
  double dc, sh, kb;
  PowExp pw;

  PairProfile(long long young, long long old_rank, const ModelParams& p) {
    double sr_young = scaled_radial_initial(young);
    double sr_old = scaled_radial_at(old_rank, young, p.beta);
    dc = std::cosh(sr_young - sr_old);
    sh = std::sinh(sr_young) * std::sinh(sr_old);
    kb = std::exp(-scaled_cutoff(young, p));
    pw = PowExp::make(1.0 / (2.0 * p.T));
  }

  double operator()(double versine) const {
    double q = dc + sh * versine;
    if (q < 1.0) q = 1.0;
    double w = q + std::sqrt((q - 1.0) * (q + 1.0));
    double u = pw(w * kb);
    double v = 1.0 / (1.0 + u);
    return std::isnan(v) ? 0.0 : v;
  }

  static double versine(double angle) {
    double s = std::sin(0.5 * angle);
    return 2.0 * s * s;
  }
};

inline void check_cn_triple(long long i, long long j, long long k, const ModelParams& p) {
  if (!(i > j) || j < 1) throw std::invalid_argument("common-neighbor terms need i > j >= 1");
  if (k == i || k == j || k < 1 || k > p.t)
    throw std::invalid_argument("common-neighbor witness k must satisfy k <= t, k not in {i, j}");
}

}  // namespace detail

// Probability that some node k is connected to both i and j (i > j) when their
// angular separation is dtheta, integrating the unknown angle of k over the
// circle with an M-point trapezoid rule (exact convention: the uniform rule on
// a periodic integrand).
inline double cn_pair_prob(long long i, long long j, long long k, double dtheta,
                           const ModelParams& p, const QuadratureSpec& quad) {
  detail::check_cn_triple(i, j, k, p);
  quad.validate();
  detail::PairProfile fj(std::max(j, k), std::min(j, k), p);
  detail::PairProfile fi(std::max(i, k), std::min(i, k), p);
  const int M = quad.points;
  double sum = 0.0;
  for (int n = 0; n < M; ++n) {
    double phi = kTwoPi * static_cast<double>(n) / static_cast<double>(M);
    sum += fj(detail::PairProfile::versine(phi)) * fi(detail::PairProfile::versine(phi - dtheta));
  }
  return sum / static_cast<double>(M);
}

// Mean and variance of the number of common neighbors of (i, j) at final time
// t, summing the per-witness Bernoulli moments over k < j, j < k < i, k > i.
inline CommonNeighborStats cn_moments(long long i, long long j, double dtheta,
                                      const ModelParams& p, const QuadratureSpec& quad) {
  if (!(i > j) || j < 1) throw std::invalid_argument("cn_moments needs i > j >= 1");
  CommonNeighborStats st;
  for (long long k = 1; k <= p.t; ++k) {
    if (k == i || k == j) continue;
    double prob = cn_pair_prob(i, j, k, dtheta, p, quad);
    if (prob < 0.0) prob = 0.0;
    if (prob > 1.0) prob = 1.0;
    st.mu += prob;
    st.sigma2 += prob * (1.0 - prob);
  }
  return st;
}

// Log-likelihood of node i at `theta` given the observed common-neighbor
// counts n_obs[j] for j < i (taken from the full final adjacency). The
// angle-independent normal constant is dropped.
inline double cn_loglik(long long i, double theta, std::span<const double> theta_by_rank,
                        std::span<const double> n_obs_by_rank, const ModelParams& p,
                        const QuadratureSpec& quad) {
  if (i < 2) throw std::invalid_argument("cn_loglik needs i >= 2");
  double sum = 0.0;
  for (long long j = 1; j < i; ++j) {
    double dtheta = angular_distance(theta, theta_by_rank[static_cast<std::size_t>(j)]);
    CommonNeighborStats st = cn_moments(i, j, dtheta, p, quad);
    double sigma = std::sqrt(st.sigma2);
    if (sigma < kSigmaFloor) sigma = kSigmaFloor;
    double d = n_obs_by_rank[static_cast<std::size_t>(j)] - st.mu;
    sum += -std::log(sigma) - d * d / (2.0 * sigma * sigma);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Fast common-neighbors path. For a fixed witness k the integrand is a product
// of two even periodic profiles, so the integral as a function of the (i, j)
// separation is their circular cross-correlation; one FFT per profile gives
// all M separations at once. The direct quadrature above is the oracle the
// fast path is tested against.
// ---------------------------------------------------------------------------

class CnCorrelator {
 public:
  CnCorrelator(long long i, const ModelParams& p, QuadratureSpec quad, int threads = 1)
      : i_(i), p_(p), M_(quad.points) {
    quad.validate();
    if (i < 2 || i > p.t) throw std::invalid_argument("CnCorrelator needs 2 <= i <= t");
    versine_lattice_.resize(static_cast<std::size_t>(M_));
    for (int d = 0; d < M_; ++d)
      versine_lattice_[static_cast<std::size_t>(d)] =
          detail::PairProfile::versine(kTwoPi * d / static_cast<double>(M_));
    // Spectra of the factors that involve node i, shared across partners j.
    spectra_i_.assign(static_cast<std::size_t>(p.t) + 1, {});
    parallel_chunks(p.t, 16, threads, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t k = lo; k < hi; ++k) {
        long long rank = k + 1;
        if (rank == i_) continue;
        spectra_i_[static_cast<std::size_t>(rank)] =
            spectrum(detail::PairProfile(std::max(i_, rank), std::min(i_, rank), p_));
      }
    });
  }

  int lattice_points() const { return M_; }
  double lattice_step() const { return kTwoPi / static_cast<double>(M_); }

  int snap(double theta) const {
    auto d = static_cast<long long>(std::llround(theta / lattice_step()));
    d %= M_;
    if (d < 0) d += M_;
    return static_cast<int>(d);
  }

  // mu and sum of squared probabilities at every lattice separation, for the
  // pair (i, j), j < i.
  struct PairTables {
    std::vector<double> mu, sum_p2;
  };

  PairTables pair_tables(long long j) const {
    if (!(j >= 1 && j < i_)) throw std::invalid_argument("pair_tables needs 1 <= j < i");
    PairTables tab;
    tab.mu.assign(static_cast<std::size_t>(M_), 0.0);
    tab.sum_p2.assign(static_cast<std::size_t>(M_), 0.0);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> prod(static_cast<std::size_t>(M_));
    std::vector<std::complex<double>> corr(static_cast<std::size_t>(M_));
    for (long long k = 1; k <= p_.t; ++k) {
      if (k == i_ || k == j) continue;
      auto other = spectrum(detail::PairProfile(std::max(j, k), std::min(j, k), p_));
      const auto& mine = spectra_i_[static_cast<std::size_t>(k)];
      for (int m = 0; m < M_; ++m)
        prod[static_cast<std::size_t>(m)] =
            other[static_cast<std::size_t>(m)] * std::conj(mine[static_cast<std::size_t>(m)]);
      fft.inv(corr, prod);
      for (int d = 0; d < M_; ++d) {
        double prob = corr[static_cast<std::size_t>(d)].real() / static_cast<double>(M_);
        if (prob < 0.0) prob = 0.0;
        if (prob > 1.0) prob = 1.0;
        tab.mu[static_cast<std::size_t>(d)] += prob;
        tab.sum_p2[static_cast<std::size_t>(d)] += prob * prob;
      }
    }
    return tab;
  }

  // Single-pair probabilities on the lattice (used to validate against the
  // direct quadrature path).
  std::vector<double> pair_prob_lattice(long long j, long long k) const {
    detail::check_cn_triple(i_, j, k, p_);
    Eigen::FFT<double> fft;
    auto other = spectrum(detail::PairProfile(std::max(j, k), std::min(j, k), p_));
    const auto& mine = spectra_i_[static_cast<std::size_t>(k)];
    std::vector<std::complex<double>> prod(static_cast<std::size_t>(M_));
    for (int m = 0; m < M_; ++m)
      prod[static_cast<std::size_t>(m)] =
          other[static_cast<std::size_t>(m)] * std::conj(mine[static_cast<std::size_t>(m)]);
    std::vector<std::complex<double>> corr;
    fft.inv(corr, prod);
    std::vector<double> out(static_cast<std::size_t>(M_));
    for (int d = 0; d < M_; ++d) {
      double prob = corr[static_cast<std::size_t>(d)].real() / static_cast<double>(M_);
      out[static_cast<std::size_t>(d)] = prob < 0.0 ? 0.0 : (prob > 1.0 ? 1.0 : prob);
    }
    return out;
  }

 private:
  std::vector<std::complex<double>> spectrum(const detail::PairProfile& prof) const {
    std::vector<double> samples(static_cast<std::size_t>(M_));
    // Even in the separation: sample half, mirror the rest.
    for (int d = 0; d <= M_ / 2; ++d)
      samples[static_cast<std::size_t>(d)] = prof(versine_lattice_[static_cast<std::size_t>(d)]);
    for (int d = M_ / 2 + 1; d < M_; ++d)
      samples[static_cast<std::size_t>(d)] = samples[static_cast<std::size_t>(M_ - d)];
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, samples);
    return spec;
  }

  long long i_;
  ModelParams p_;
  int M_;
  std::vector<double> versine_lattice_;
  std::vector<std::vector<std::complex<double>>> spectra_i_;
};

// Common-neighbors likelihood of node i over all lattice candidate angles at
// once. Placed angles are snapped to the nearest lattice point when indexing
// the correlation tables; rotation invariance is exact because only
// separations enter.
inline std::vector<double> cn_profile_lattice(long long i, std::span<const double> theta_by_rank,
                                              std::span<const double> n_obs_by_rank,
                                              const ModelParams& p, const QuadratureSpec& quad,
                                              int threads) {
  CnCorrelator corr(i, p, quad, threads);
  const int M = corr.lattice_points();
  std::vector<double> out(static_cast<std::size_t>(M), 0.0);
  std::vector<CnCorrelator::PairTables> tables(static_cast<std::size_t>(i));
  parallel_chunks(i - 1, 1, threads, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t jj = lo; jj < hi; ++jj) tables[static_cast<std::size_t>(jj + 1)] = corr.pair_tables(jj + 1);
  });
  for (long long j = 1; j < i; ++j) {
    const auto& tab = tables[static_cast<std::size_t>(j)];
    int base = corr.snap(theta_by_rank[static_cast<std::size_t>(j)]);
    double n_obs = n_obs_by_rank[static_cast<std::size_t>(j)];
    for (int ell = 0; ell < M; ++ell) {
      int d = ell - base;
      if (d < 0) d += M;
      double mu = tab.mu[static_cast<std::size_t>(d)];
      double sigma2 = tab.mu[static_cast<std::size_t>(d)] - tab.sum_p2[static_cast<std::size_t>(d)];
      double sigma = sigma2 > 0.0 ? std::sqrt(sigma2) : 0.0;
      if (sigma < kSigmaFloor) sigma = kSigmaFloor;
      double dn = n_obs - mu;
      out[static_cast<std::size_t>(ell)] += -std::log(sigma) - dn * dn / (2.0 * sigma * sigma);
    }
  }
  return out;
}

// Lattice angles used by cn_profile_lattice (candidates for the CN method).
inline std::vector<double> lattice_grid(const QuadratureSpec& quad) {
  quad.validate();
  std::vector<double> grid(static_cast<std::size_t>(quad.points));
  for (int d = 0; d < quad.points; ++d)
    grid[static_cast<std::size_t>(d)] = kTwoPi * d / static_cast<double>(quad.points);
  return grid;
}

}  // namespace hypermap
