#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "hypermap/embedder.hpp"
#include "hypermap/generator.hpp"
#include "hypermap/geometry.hpp"
#include "hypermap/graph.hpp"
#include "hypermap/io.hpp"
#include "hypermap/parallel.hpp"
#include "hypermap/rng.hpp"

namespace hypermap {

// Final-time coordinates aligned with a graph's node indices.
struct NodeCoords {
  std::vector<double> r;
  std::vector<double> theta;

  std::size_t size() const { return r.size(); }
};

inline NodeCoords coords_from_embedding(const Graph& g, const Embedding& e) {
  NodeCoords c;
  c.r.assign(static_cast<std::size_t>(g.node_count()), 0.0);
  c.theta.assign(static_cast<std::size_t>(g.node_count()), 0.0);
  std::vector<char> seen(static_cast<std::size_t>(g.node_count()), 0);
  for (long long rank = 1; rank <= e.t; ++rank) {
    const std::string& label = e.label_by_rank[static_cast<std::size_t>(rank)];
    if (!g.contains(label))
      throw std::invalid_argument("embedding node '" + label + "' is not in the graph");
    int idx = g.index_of(label);
    c.r[static_cast<std::size_t>(idx)] = e.r_by_rank[static_cast<std::size_t>(rank)];
    c.theta[static_cast<std::size_t>(idx)] = e.theta_by_rank[static_cast<std::size_t>(rank)];
    seen[static_cast<std::size_t>(idx)] = 1;
  }
  for (int v = 0; v < g.node_count(); ++v)
    if (!seen[static_cast<std::size_t>(v)])
      throw std::invalid_argument("coordinates missing for node '" + g.label(v) + "'");
  return c;
}

// Ground-truth coordinates (labels are birth ranks) moved to final time.
inline NodeCoords coords_from_truth(const Graph& g, const TruthCoords& truth,
                                    const ModelParams& p) {
  NodeCoords c;
  c.r.assign(static_cast<std::size_t>(g.node_count()), 0.0);
  c.theta.assign(static_cast<std::size_t>(g.node_count()), 0.0);
  for (int v = 0; v < g.node_count(); ++v) {
    long long rank = 0;
    try {
      rank = parse_int(g.label(v), "rank label");
    } catch (const IoError&) {
      throw std::invalid_argument("truth coordinates need rank labels; got '" + g.label(v) + "'");
    }
    if (rank < 1 || rank > truth.t)
      throw std::invalid_argument("node '" + g.label(v) + "' outside truth sidecar range");
    c.r[static_cast<std::size_t>(v)] = radial_at(rank, truth.t, p);
    c.theta[static_cast<std::size_t>(v)] = truth.angle[static_cast<std::size_t>(rank)];
  }
  return c;
}

namespace detail {

struct PairKernel {
  std::vector<double> sr, sh, cos_th, sin_th;
  double kbase;
  PowExp pw;

  PairKernel(const NodeCoords& c, const ModelParams& p) {
    std::size_t n = c.size();
    sr.resize(n); sh.resize(n); cos_th.resize(n); sin_th.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
      sr[v] = p.zeta * c.r[v];
      sh[v] = std::sinh(sr[v]);
      cos_th[v] = std::cos(c.theta[v]);
      sin_th[v] = std::sin(c.theta[v]);
    }
    kbase = std::exp(-scaled_cutoff(p.t, p));
    pw = PowExp::make(1.0 / (2.0 * p.T));
  }

  double scaled_arg(std::size_t a, std::size_t b) const {
    double versine = 1.0 - (cos_th[a] * cos_th[b] + sin_th[a] * sin_th[b]);
    double q = std::cosh(sr[a] - sr[b]) + sh[a] * sh[b] * versine;
    return q < 1.0 ? 1.0 : q;
  }

  // e^{s} for the pair (a, b) at final time with the global cutoff.
  double exp_s(std::size_t a, std::size_t b) const {
    double q = scaled_arg(a, b);
    double w = q + std::sqrt((q - 1.0) * (q + 1.0));
    return pw(w * kbase);
  }

  double distance(std::size_t a, std::size_t b) const {
    return std::acosh(scaled_arg(a, b));  // zeta-scaled
  }
};

}  // namespace detail

// Logarithmic loss: minus the global Bernoulli log-likelihood over all node
// pairs at final-time coordinates with the global cutoff R_t.
inline double log_loss(const Graph& g, const NodeCoords& coords, const ModelParams& p,
                       int threads = 0) {
  if (static_cast<int>(coords.size()) != g.node_count())
    throw std::invalid_argument("log_loss: coordinates do not cover the node set");
  detail::PairKernel kernel(coords, p);
  const int n = g.node_count();
  double total = parallel_sum(n, threads, [&](std::int64_t a) {
    auto nbrs = g.neighbors(static_cast<int>(a));
    auto it = nbrs.begin();
    double s = 0.0;
    for (std::int64_t b = 0; b < a; ++b) {
      while (it != nbrs.end() && *it < b) ++it;
      bool connected = (it != nbrs.end() && *it == b);
      double u = kernel.exp_s(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
      double v = connected ? -std::log1p(u) : -std::log1p(1.0 / u);
      s += v < kLogFloor ? kLogFloor : v;
    }
    return -s;
  });
  return total;
}

// Mean log-loss over `trials` resamplings of every angle (radii kept), the
// random-coordinates baseline for the loss ratio.
inline double log_loss_random_baseline(const Graph& g, const NodeCoords& coords,
                                       const ModelParams& p, int trials, std::uint64_t seed,
                                       int threads = 0) {
  if (trials < 1) throw std::invalid_argument("log_loss_random_baseline: trials must be >= 1");
  Rng rng(seed);
  double sum = 0.0;
  NodeCoords shuffled = coords;
  for (int trial = 0; trial < trials; ++trial) {
    for (std::size_t v = 0; v < shuffled.size(); ++v) shuffled.theta[v] = rng.angle();
    sum += log_loss(g, shuffled, p, threads);
  }
  return sum / trials;
}

struct ConnProbBin {
  double x_lo = 0.0, x_hi = 0.0;
  long long pairs = 0;
  long long connected = 0;

  double ratio() const { return pairs ? static_cast<double>(connected) / pairs : 0.0; }
};

struct ConnProbHistogram {
  double bin_width = 0.5;
  std::vector<ConnProbBin> bins;
};

// Fraction of connected pairs per hyperbolic-distance bin.
inline ConnProbHistogram empirical_connection_probability(const Graph& g,
                                                          const NodeCoords& coords,
                                                          double bin_width,
                                                          const ModelParams& p) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be > 0");
  detail::PairKernel kernel(coords, p);
  ConnProbHistogram hist;
  hist.bin_width = bin_width;
  const int n = g.node_count();
  for (int a = 0; a < n; ++a) {
    auto nbrs = g.neighbors(a);
    auto it = nbrs.begin();
    for (int b = 0; b < a; ++b) {
      while (it != nbrs.end() && *it < b) ++it;
      bool connected = (it != nbrs.end() && *it == b);
      double x = kernel.distance(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) / p.zeta;
      auto bin = static_cast<std::size_t>(x / bin_width);
      if (bin >= hist.bins.size()) {
        std::size_t old = hist.bins.size();
        hist.bins.resize(bin + 1);
        for (std::size_t s = old; s < hist.bins.size(); ++s) {
          hist.bins[s].x_lo = static_cast<double>(s) * bin_width;
          hist.bins[s].x_hi = static_cast<double>(s + 1) * bin_width;
        }
      }
      ++hist.bins[bin].pairs;
      if (connected) ++hist.bins[bin].connected;
    }
  }
  return hist;
}

struct RouteOutcome {
  bool success = false;
  int hops = 0;
  std::vector<int> path;
};

// Greedy forwarding: move to the neighbor hyperbolically closest to the
// destination (ties to the smallest label); drop on ping-pong or after t hops.
inline RouteOutcome greedy_route(const Graph& g, const NodeCoords& coords, int source, int dest,
                                 double zeta = 1.0) {
  if (source == dest) throw std::invalid_argument("greedy_route: source equals destination");
  double srd = zeta * coords.r[static_cast<std::size_t>(dest)];
  double shd = std::sinh(srd);
  double cd = std::cos(coords.theta[static_cast<std::size_t>(dest)]);
  double sd = std::sin(coords.theta[static_cast<std::size_t>(dest)]);
  auto dist_to_dest = [&](int v) {
    double srv = zeta * coords.r[static_cast<std::size_t>(v)];
    double versine = 1.0 - (std::cos(coords.theta[static_cast<std::size_t>(v)]) * cd +
                            std::sin(coords.theta[static_cast<std::size_t>(v)]) * sd);
    double q = std::cosh(srv - srd) + std::sinh(srv) * shd * versine;
    return std::acosh(q < 1.0 ? 1.0 : q);
  };

  RouteOutcome out;
  out.path.push_back(source);
  int current = source, previous = -1;
  const long long cap = g.node_count();  // termination guard, counted as failure
  for (long long step = 0; step < cap; ++step) {
    int next = -1;
    double best = 0.0;
    for (int nb : g.neighbors(current)) {
      double d = dist_to_dest(nb);
      if (next < 0 || d < best || (d == best && g.label(nb) < g.label(next))) {
        next = nb;
        best = d;
      }
    }
    if (next < 0) return out;             // isolated node
    if (next == previous) return out;     // local-minimum loop detected
    out.path.push_back(next);
    ++out.hops;
    if (next == dest) {
      out.success = true;
      return out;
    }
    previous = current;
    current = next;
  }
  return out;  // hop cap exceeded
}

struct GrStats {
  double p_s = 0.0;
  double mean_hops = 0.0;
  long long sampled_pairs = 0;
  long long successes = 0;
};

// Success ratio and mean hop count over uniformly sampled ordered pairs
// (exhaustive when the pair universe is small enough).
inline GrStats gr_stats(const Graph& g, const NodeCoords& coords, long long num_pairs,
                        std::uint64_t seed, double zeta = 1.0, int threads = 0) {
  if (num_pairs < 1) throw std::invalid_argument("gr_stats: num_pairs must be >= 1");
  const long long n = g.node_count();
  const long long universe = n * (n - 1);
  std::vector<std::pair<int, int>> pairs;
  if (universe <= num_pairs) {
    pairs.reserve(static_cast<std::size_t>(universe));
    for (int s = 0; s < n; ++s)
      for (int d = 0; d < n; ++d)
        if (s != d) pairs.emplace_back(s, d);
  } else {
    Rng rng(seed);
    std::unordered_set<std::uint64_t> seen;
    pairs.reserve(static_cast<std::size_t>(num_pairs));
    while (static_cast<long long>(pairs.size()) < num_pairs) {
      auto s = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      auto d = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      if (s == d) continue;
      std::uint64_t key = static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(n) +
                          static_cast<std::uint64_t>(d);
      if (seen.insert(key).second) pairs.emplace_back(s, d);
    }
  }
  std::vector<std::int32_t> hops(pairs.size(), -1);
  parallel_chunks(static_cast<std::int64_t>(pairs.size()), 256, threads,
                  [&](std::int64_t lo, std::int64_t hi) {
                    for (std::int64_t k = lo; k < hi; ++k) {
                      auto [s, d] = pairs[static_cast<std::size_t>(k)];
                      RouteOutcome r = greedy_route(g, coords, s, d, zeta);
                      hops[static_cast<std::size_t>(k)] = r.success ? r.hops : -1;
                    }
                  });
  GrStats st;
  st.sampled_pairs = static_cast<long long>(pairs.size());
  long long hop_sum = 0;
  for (auto h : hops)
    if (h >= 0) {
      ++st.successes;
      hop_sum += h;
    }
  st.p_s = st.sampled_pairs ? static_cast<double>(st.successes) / st.sampled_pairs : 0.0;
  st.mean_hops = st.successes ? static_cast<double>(hop_sum) / st.successes : 0.0;
  return st;
}

struct Alignment {
  double rotation = 0.0;
  bool reflected = false;
  std::vector<double> error;  // per node, in [0, pi]
  double mean_error = 0.0;
  double median_error = 0.0;
};

namespace detail {

inline double circular_mean_of_diffs(std::span<const double> a, std::span<const double> b) {
  double s = 0.0, c = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    s += std::sin(d);
    c += std::cos(d);
  }
  return std::atan2(s, c);
}

}  // namespace detail

// Finds the global rotation (and possibly reflection) best mapping the
// inferred angles onto the truth, and reports per-node circular errors.
inline Alignment align_angles(std::span<const double> inferred, std::span<const double> truth) {
  if (inferred.size() != truth.size() || inferred.empty())
    throw std::invalid_argument("align_angles: angle sets must match and be nonempty");
  auto evaluate = [&](bool reflected) {
    std::vector<double> oriented(inferred.size());
    for (std::size_t k = 0; k < inferred.size(); ++k)
      oriented[k] = reflected ? normalize_angle(kTwoPi - inferred[k]) : inferred[k];
    Alignment a;
    a.reflected = reflected;
    a.rotation = detail::circular_mean_of_diffs(truth, oriented);
    a.error.resize(inferred.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < inferred.size(); ++k) {
      a.error[k] = angular_distance(truth[k], oriented[k] + a.rotation);
      sum += a.error[k];
    }
    a.mean_error = sum / static_cast<double>(inferred.size());
    std::vector<double> tmp = a.error;
    std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(tmp.size() / 2), tmp.end());
    a.median_error = tmp[tmp.size() / 2];
    return a;
  };
  Alignment plain = evaluate(false);
  Alignment mirrored = evaluate(true);
  return mirrored.mean_error < plain.mean_error ? mirrored : plain;
}

struct EvalReport {
  double ll_inf = 0.0;
  double ll_rand = 0.0;
  std::optional<double> ll_real;
  double r_ll_log = 0.0;  // ll_rand - ll_inf
  ConnProbHistogram conn_hist;
  GrStats gr;
  std::optional<Alignment> angle_err;
};

inline void write_report(const std::filesystem::path& path, const EvalReport& rep) {
  atomic_write(path, [&](std::ostream& out) {
    out << "ll_inf " << format_double(rep.ll_inf) << '\n';
    out << "ll_rand " << format_double(rep.ll_rand) << '\n';
    if (rep.ll_real) out << "ll_real " << format_double(*rep.ll_real) << '\n';
    out << "r_ll_log " << format_double(rep.r_ll_log) << '\n';
    out << "gr_pairs " << rep.gr.sampled_pairs << '\n';
    out << "gr_successes " << rep.gr.successes << '\n';
    out << "gr_success_ratio " << format_double(rep.gr.p_s) << '\n';
    out << "gr_mean_hops " << format_double(rep.gr.mean_hops) << '\n';
    if (rep.angle_err) {
      out << "angle_rotation " << format_double(rep.angle_err->rotation) << '\n';
      out << "angle_reflected " << (rep.angle_err->reflected ? 1 : 0) << '\n';
      out << "angle_mean_error " << format_double(rep.angle_err->mean_error) << '\n';
      out << "angle_median_error " << format_double(rep.angle_err->median_error) << '\n';
    }
  });
}

inline void write_conn_hist_csv(const std::filesystem::path& path, const ConnProbHistogram& hist) {
  atomic_write(path, [&](std::ostream& out) {
    out << "x_lo,x_hi,pairs,connected,ratio\n";
    for (const auto& bin : hist.bins)
      out << format_double(bin.x_lo) << ',' << format_double(bin.x_hi) << ',' << bin.pairs << ','
          << bin.connected << ',' << format_double(bin.ratio()) << '\n';
  });
}

}  // namespace hypermap
