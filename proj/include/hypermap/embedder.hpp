#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypermap/geometry.hpp"
#include "hypermap/graph.hpp"
#include "hypermap/io.hpp"
#include "hypermap/likelihood.hpp"

namespace hypermap {

enum class Method { kLink, kCn, kHybrid };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::kLink: return "link";
    case Method::kCn: return "cn";
    default: return "hybrid";
  }
}

inline Method parse_method(const std::string& s) {
  if (s == "link") return Method::kLink;
  if (s == "cn") return Method::kCn;
  if (s == "hybrid") return Method::kHybrid;
  throw std::invalid_argument("unknown method '" + s + "' (expected link|cn|hybrid)");
}

struct EmbedConfig {
  Method method = Method::kHybrid;
  bool fast = false;
  double window_c = 200.0;                          // half-width of the refine window is C/i
  int k_speedup = 10;                               // fast path for degree < k_speedup
  std::vector<int> correction_degrees = {60, 40, 20, 10};
  int correction_repeats = -1;                      // <0: round(mean degree)
  double theta1 = std::numbers::pi;
  ModelParams params;
  QuadratureSpec quad;                              // lattice for the CN phase
  int threads = 0;

  void validate(long long node_count) const {
    params.validate();
    quad.validate();
    if (params.t != node_count)
      throw std::invalid_argument("params.t must equal the graph node count");
    if (!(window_c > 0.0)) throw std::invalid_argument("window constant C must be > 0");
    if (k_speedup < 0) throw std::invalid_argument("k_speedup must be >= 0");
    for (std::size_t s = 1; s < correction_degrees.size(); ++s)
      if (correction_degrees[s] >= correction_degrees[s - 1])
        throw std::invalid_argument("correction degree thresholds must be strictly decreasing");
    for (int k : correction_degrees)
      if (k <= 0) throw std::invalid_argument("correction degree thresholds must be positive");
  }
};

struct Embedding {
  long long t = 0;
  std::vector<std::string> label_by_rank;  // 1-based, slot 0 empty
  std::vector<int> degree_by_rank;
  std::vector<double> r_by_rank;           // final-time radii
  std::vector<double> theta_by_rank;
  ModelParams params;
  std::string method;
};

struct CorrectionEvent {
  int threshold = 0;
  long long trigger_rank = 0;
  int sweeps = 0;
  bool skipped = false;
  std::string note;
};

struct EmbedLog {
  long long switch_rank = 0;  // last rank placed by the common-neighbors likelihood
  std::vector<CorrectionEvent> corrections;
  long long fast_fallbacks = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> notes;
};

namespace detail {

inline std::size_t best_index(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best]) best = k;
  return best;
}

// Grid indices whose angle lies within `halfwidth` of `center` (circularly).
inline std::vector<std::size_t> window_indices(std::span<const double> grid, double center,
                                               double halfwidth) {
  std::vector<std::size_t> idx;
  if (halfwidth >= std::numbers::pi) {
    idx.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) idx[k] = k;
    return idx;
  }
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (angular_distance(grid[k], center) <= halfwidth) idx.push_back(k);
  return idx;
}

}  // namespace detail

// One correction sweep at time i: every rank j <= i (ascending, skipping
// frozen ones) is re-optimized over the grid; a move is taken only if it does
// not lower the pair likelihood, so the sweep is coordinate ascent.
inline int correction_sweep(long long i, std::vector<double>& theta_by_rank,
                            const RankedNet& net, const ModelParams& p,
                            std::span<const char> frozen, int threads) {
  auto grid = angle_grid(i);
  int moved = 0;
  for (long long j = 1; j <= i; ++j) {
    if (!frozen.empty() && frozen[static_cast<std::size_t>(j)]) continue;
    auto factors = detail::correction_factors(j, i, theta_by_rank, net, p);
    auto scores = detail::score_grid(factors, grid, threads);
    std::size_t best = detail::best_index(scores);
    double current = factors.score_theta(theta_by_rank[static_cast<std::size_t>(j)]);
    if (scores[best] > current) {
      theta_by_rank[static_cast<std::size_t>(j)] = grid[best];
      ++moved;
    }
  }
  return moved;
}

// Fast placement: neighbor-only initialization over the full grid, then the
// full link likelihood restricted to the window theta_init +/- C/i.
inline double fast_place(long long i, std::span<const double> theta_by_rank,
                         const RankedNet& net, const EmbedConfig& cfg,
                         double* theta_init_out = nullptr) {
  auto grid = angle_grid(i);
  auto init_factors = detail::placement_factors(i, theta_by_rank, net, cfg.params, true);
  if (init_factors.size() == 0)
    throw std::domain_error("fast_place: node has no earlier neighbors");
  auto init_scores = detail::score_grid(init_factors, grid, cfg.threads);
  double theta_init = grid[detail::best_index(init_scores)];
  if (theta_init_out) *theta_init_out = theta_init;

  auto idx = detail::window_indices(grid, theta_init, cfg.window_c / static_cast<double>(i));
  std::vector<double> sub(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) sub[k] = grid[idx[k]];
  auto full_factors = detail::placement_factors(i, theta_by_rank, net, cfg.params, false);
  auto sub_scores = detail::score_grid(full_factors, sub, cfg.threads);
  return sub[detail::best_index(sub_scores)];
}

// Replays the network growth, assigning each node the angle that maximizes the
// configured likelihood. Deterministic: no randomness anywhere in inference.
inline Embedding embed(const Graph& g, const EmbedConfig& cfg, EmbedLog* out_log = nullptr) {
  auto t_start = std::chrono::steady_clock::now();
  if (g.empty()) throw std::invalid_argument("embed: empty graph");
  cfg.validate(g.node_count());
  const ModelParams& p = cfg.params;
  const long long t = p.t;

  GrowthSchedule schedule = rank_by_degree(g);
  RankedNet net = make_ranked(g, schedule);
  EmbedLog log;

  // Correction triggers: a step for threshold K fires right after the last
  // node with degree >= K appears. Degrees are non-increasing in rank.
  std::vector<std::vector<int>> step_thresholds(static_cast<std::size_t>(t) + 1);
  int repeats = cfg.correction_repeats;
  if (repeats < 0)
    repeats = static_cast<int>(std::lround(2.0 * static_cast<double>(g.edge_count()) /
                                           static_cast<double>(t)));
  for (int K : cfg.correction_degrees) {
    long long nk = 0;
    while (nk < t && net.degree[static_cast<std::size_t>(nk + 1)] >= K) ++nk;
    if (nk < 2) {
      CorrectionEvent ev;
      ev.threshold = K;
      ev.trigger_rank = nk;
      ev.skipped = true;
      ev.note = nk == 0 ? "no node reaches this degree" : "trigger before any pair exists";
      log.corrections.push_back(ev);
      continue;
    }
    step_thresholds[static_cast<std::size_t>(nk)].push_back(K);
  }

  std::vector<double> theta(static_cast<std::size_t>(t) + 1, 0.0);
  std::vector<char> cn_placed(static_cast<std::size_t>(t) + 1, 0);
  theta[1] = normalize_angle(cfg.theta1);
  if (cfg.method != Method::kLink) cn_placed[1] = 1;  // anchor of the CN phase

  auto lattice = lattice_grid(cfg.quad);
  std::vector<double> n_obs(static_cast<std::size_t>(t) + 1, 0.0);

  for (long long i = 2; i <= t; ++i) {
    bool use_cn = false;
    if (cfg.method == Method::kCn) {
      use_cn = true;
    } else if (cfg.method == Method::kHybrid) {
      use_cn = expected_degree_mbar(i, p) >= static_cast<double>(i - 1);
    }

    if (use_cn) {
      for (long long j = 1; j < i; ++j)
        n_obs[static_cast<std::size_t>(j)] =
            static_cast<double>(net.common_neighbors(static_cast<int>(i), static_cast<int>(j)));
      auto scores = cn_profile_lattice(i, theta, n_obs, p, cfg.quad, cfg.threads);
      theta[static_cast<std::size_t>(i)] = lattice[detail::best_index(scores)];
      cn_placed[static_cast<std::size_t>(i)] = 1;
      log.switch_rank = i;
    } else if (cfg.fast && net.degree[static_cast<std::size_t>(i)] < cfg.k_speedup) {
      bool has_anchor = false;
      for (int j : net.nbr[static_cast<std::size_t>(i)])
        if (j < i) { has_anchor = true; break; }
      if (!has_anchor) {
        ++log.fast_fallbacks;
        auto grid = angle_grid(i);
        auto factors = detail::placement_factors(i, theta, net, p, false);
        auto scores = detail::score_grid(factors, grid, cfg.threads);
        theta[static_cast<std::size_t>(i)] = grid[detail::best_index(scores)];
      } else {
        theta[static_cast<std::size_t>(i)] = fast_place(i, theta, net, cfg);
      }
    } else {
      auto grid = angle_grid(i);
      auto factors = detail::placement_factors(i, theta, net, p, false);
      auto scores = detail::score_grid(factors, grid, cfg.threads);
      theta[static_cast<std::size_t>(i)] = grid[detail::best_index(scores)];
    }

    for (int K : step_thresholds[static_cast<std::size_t>(i)]) {
      CorrectionEvent ev;
      ev.threshold = K;
      ev.trigger_rank = i;
      ev.sweeps = repeats;
      for (int s = 0; s < repeats; ++s)
        correction_sweep(i, theta, net, p, std::span<const char>(cn_placed), cfg.threads);
      log.corrections.push_back(ev);
    }
  }

  Embedding emb;
  emb.t = t;
  emb.params = p;
  emb.method = method_name(cfg.method) + std::string(cfg.fast ? "+fast" : "");
  emb.label_by_rank.assign(static_cast<std::size_t>(t) + 1, "");
  emb.degree_by_rank.assign(static_cast<std::size_t>(t) + 1, 0);
  emb.r_by_rank.assign(static_cast<std::size_t>(t) + 1, 0.0);
  emb.theta_by_rank = std::move(theta);
  for (long long r = 1; r <= t; ++r) {
    int node = schedule.node_of(static_cast<int>(r));
    emb.label_by_rank[static_cast<std::size_t>(r)] = g.label(node);
    emb.degree_by_rank[static_cast<std::size_t>(r)] = g.degree(node);
    emb.r_by_rank[static_cast<std::size_t>(r)] = radial_at(r, t, p);
  }
  log.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (out_log) *out_log = log;
  return emb;
}

// Coordinate file: "# label rank degree r theta" header, one node per line.
inline void write_coords(const std::filesystem::path& path, const Embedding& e) {
  atomic_write(path, [&](std::ostream& out) {
    out << "# label rank degree r theta\n";
    for (long long r = 1; r <= e.t; ++r)
      out << e.label_by_rank[static_cast<std::size_t>(r)] << ' ' << r << ' '
          << e.degree_by_rank[static_cast<std::size_t>(r)] << ' '
          << format_double(e.r_by_rank[static_cast<std::size_t>(r)]) << ' '
          << format_double(e.theta_by_rank[static_cast<std::size_t>(r)]) << '\n';
  });
}

inline Embedding read_coords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open coordinate file '" + path.string() + "'");
  struct Row {
    std::string label;
    long long rank;
    int degree;
    double r, theta;
  };
  std::vector<Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ss(line);
    Row row;
    std::string rank_s, deg_s, r_s, th_s;
    if (!(ss >> row.label >> rank_s >> deg_s >> r_s >> th_s))
      throw IoError("malformed coordinate line in '" + path.string() + "': " + line);
    row.rank = parse_int(rank_s, "rank");
    row.degree = static_cast<int>(parse_int(deg_s, "degree"));
    row.r = parse_double(r_s, "r");
    row.theta = parse_double(th_s, "theta");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("coordinate file '" + path.string() + "' has no nodes");
  Embedding e;
  e.t = static_cast<long long>(rows.size());
  e.label_by_rank.assign(rows.size() + 1, "");
  e.degree_by_rank.assign(rows.size() + 1, 0);
  e.r_by_rank.assign(rows.size() + 1, 0.0);
  e.theta_by_rank.assign(rows.size() + 1, 0.0);
  for (const auto& row : rows) {
    if (row.rank < 1 || row.rank > e.t)
      throw IoError("coordinate rank " + std::to_string(row.rank) + " out of range in '" +
                    path.string() + "'");
    if (!e.label_by_rank[static_cast<std::size_t>(row.rank)].empty())
      throw IoError("duplicate rank " + std::to_string(row.rank) + " in '" + path.string() + "'");
    e.label_by_rank[static_cast<std::size_t>(row.rank)] = row.label;
    e.degree_by_rank[static_cast<std::size_t>(row.rank)] = row.degree;
    e.r_by_rank[static_cast<std::size_t>(row.rank)] = row.r;
    e.theta_by_rank[static_cast<std::size_t>(row.rank)] = normalize_angle(row.theta);
  }
  for (long long r = 1; r <= e.t; ++r)
    if (e.label_by_rank[static_cast<std::size_t>(r)].empty())
      throw IoError("coordinate file '" + path.string() + "' is missing rank " + std::to_string(r));
  return e;
}

}  // namespace hypermap
