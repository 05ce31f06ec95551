#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypermap/geometry.hpp"
#include "hypermap/graph.hpp"
#include "hypermap/io.hpp"
#include "hypermap/rng.hpp"

namespace hypermap {

// A generated network together with its ground-truth coordinates. Labels are
// the decimal birth ranks "1".."t"; per-rank vectors are 1-based (slot 0 unused).
struct SyntheticNetwork {
  Graph graph;
  std::vector<double> radius;  // birth radius by rank
  std::vector<double> angle;   // by rank
  ModelParams params;
  std::uint64_t seed = 0;
};

namespace detail {

// One growth realization. Draw order is pinned: at the birth of node i one
// uniform for its angle (unless `angles` supplies them all), then one coin per
// candidate edge for j = 1..i-1 ascending. The sequence consumed for the first
// n nodes does not depend on the final size t, so two runs of the same seed
// grown to different sizes share their draw prefix.
inline std::vector<std::pair<std::string, std::string>> grow_edges(
    const ModelParams& p, Rng& rng, std::vector<double>& theta_out,
    std::span<const double> angles) {
  long long t = p.t;
  bool fixed = !angles.empty();
  if (fixed && static_cast<long long>(angles.size()) != t + 1)
    throw std::invalid_argument("grow_edges: fixed coordinates must cover all t nodes");
  theta_out.assign(static_cast<std::size_t>(t) + 1, 0.0);

  std::vector<double> ch(static_cast<std::size_t>(t) + 1, 0.0);
  std::vector<double> sh(static_cast<std::size_t>(t) + 1, 0.0);
  std::vector<double> cos_th(static_cast<std::size_t>(t) + 1, 0.0);
  std::vector<double> sin_th(static_cast<std::size_t>(t) + 1, 0.0);
  std::vector<std::pair<std::string, std::string>> edges;
  edges.reserve(static_cast<std::size_t>(2.2 * (p.m + p.L) * static_cast<double>(t)) + 16);

  double inv2T = 1.0 / (2.0 * p.T);
  for (long long i = 1; i <= t; ++i) {
    double th = fixed ? angles[static_cast<std::size_t>(i)] : rng.angle();
    theta_out[static_cast<std::size_t>(i)] = th;
    cos_th[static_cast<std::size_t>(i)] = std::cos(th);
    sin_th[static_cast<std::size_t>(i)] = std::sin(th);
    if (i == 1) continue;

    double sri = detail::scaled_radial_initial(i);
    double shi = std::sinh(sri);
    double scut = detail::scaled_cutoff(i, p);
    // Radii of the old nodes at time i.
    for (long long j = 1; j < i; ++j) {
      double srj = detail::scaled_radial_at(j, i, p.beta);
      ch[static_cast<std::size_t>(j)] = std::cosh(sri - srj);
      sh[static_cast<std::size_t>(j)] = std::sinh(srj);
    }
    for (long long j = 1; j < i; ++j) {
      double versine =
          1.0 - (cos_th[static_cast<std::size_t>(i)] * cos_th[static_cast<std::size_t>(j)] +
                 sin_th[static_cast<std::size_t>(i)] * sin_th[static_cast<std::size_t>(j)]);
      double arg = ch[static_cast<std::size_t>(j)] + shi * sh[static_cast<std::size_t>(j)] * versine;
      double x = std::acosh(arg < 1.0 ? 1.0 : arg);
      double prob = detail::logistic((x - scut) * inv2T);
      if (rng.uniform() < prob)
        edges.emplace_back(std::to_string(j), std::to_string(i));
    }
  }
  return edges;
}

}  // namespace detail

// Grows one network of size params.t. A (params, seed) pair fully determines
// the edge set.
inline SyntheticNetwork generate(const ModelParams& p, std::uint64_t seed) {
  p.validate();
  if (p.t < 2) throw std::invalid_argument("generate: t must be >= 2");
  Rng rng(seed);
  SyntheticNetwork net;
  net.params = p;
  net.seed = seed;
  auto edges = detail::grow_edges(p, rng, net.angle, {});
  // Isolated ranks must still appear as nodes.
  std::vector<std::pair<std::string, std::string>> all = std::move(edges);
  Graph g = Graph::from_edges(all);
  if (g.node_count() < p.t) {
    for (long long i = 1; i <= p.t; ++i) all.emplace_back(std::to_string(i), std::to_string(i));
    g = Graph::from_edges(all);
  }
  net.graph = std::move(g);
  net.radius.assign(static_cast<std::size_t>(p.t) + 1, 0.0);
  for (long long i = 1; i <= p.t; ++i)
    net.radius[static_cast<std::size_t>(i)] = radial_initial(i, p);
  return net;
}

// One growth realization with all angles held fixed; only the edge coins are
// random. Used to sample the distribution of common-neighbor counts.
inline Graph frozen_growth_replicate(std::span<const double> angles_by_rank,
                                     const ModelParams& p, std::uint64_t seed) {
  p.validate();
  if (static_cast<long long>(angles_by_rank.size()) != p.t + 1)
    throw std::invalid_argument(
        "frozen_growth_replicate: need angles for ranks 1..t (1-based, slot 0 unused)");
  Rng rng(seed);
  std::vector<double> theta;
  auto edges = detail::grow_edges(p, rng, theta, angles_by_rank);
  for (long long i = 1; i <= p.t; ++i) edges.emplace_back(std::to_string(i), std::to_string(i));
  return Graph::from_edges(edges);
}

// Ground-truth sidecar: "# rank r theta" header, one node per line.
inline void write_truth(const std::filesystem::path& path, const SyntheticNetwork& net) {
  atomic_write(path, [&](std::ostream& out) {
    out << "# rank r theta\n";
    for (long long i = 1; i <= net.params.t; ++i)
      out << i << ' ' << format_double(net.radius[static_cast<std::size_t>(i)]) << ' '
          << format_double(net.angle[static_cast<std::size_t>(i)]) << '\n';
  });
}

struct TruthCoords {
  std::vector<double> radius;  // birth radius by rank, 1-based
  std::vector<double> angle;
  long long t = 0;
};

inline TruthCoords read_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open truth sidecar '" + path.string() + "'");
  TruthCoords tc;
  tc.radius.push_back(0.0);
  tc.angle.push_back(0.0);
  std::string line;
  long long expect = 1;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ss(line);
    std::string rank_s, r_s, th_s;
    if (!(ss >> rank_s >> r_s >> th_s))
      throw IoError("malformed truth line in '" + path.string() + "': " + line);
    long long rank = parse_int(rank_s, "rank");
    if (rank != expect)
      throw IoError("truth sidecar ranks must be contiguous from 1 (got " + rank_s + ")");
    tc.radius.push_back(parse_double(r_s, "radius"));
    tc.angle.push_back(parse_double(th_s, "angle"));
    ++expect;
  }
  tc.t = expect - 1;
  if (tc.t < 1) throw IoError("truth sidecar '" + path.string() + "' has no nodes");
  return tc;
}

}  // namespace hypermap
