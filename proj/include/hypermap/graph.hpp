#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hypermap/io.hpp"

namespace hypermap {

struct LoadReport {
  std::size_t lines = 0;
  std::size_t edges = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

// Immutable undirected simple graph over opaque string labels. Nodes are
// indexed densely in first-appearance order; adjacency lists are sorted.
class Graph {
 public:
  Graph() = default;

  // Edges may contain duplicates and self-loops; both are sanitized and
  // counted. Isolated nodes can be introduced through add_node only.
  static Graph from_edges(const std::vector<std::pair<std::string, std::string>>& edges,
                          LoadReport* report = nullptr) {
    Graph g;
    LoadReport rep;
    for (const auto& [u, v] : edges) {
      if (u == v) {
        ++rep.self_loops_dropped;
        g.intern(u);
        continue;
      }
      int a = g.intern(u);
      int b = g.intern(v);
      g.raw_edges_.emplace_back(std::min(a, b), std::max(a, b));
    }
    g.finalize(&rep);
    if (report) *report = rep;
    return g;
  }

  int node_count() const { return static_cast<int>(labels_.size()); }
  std::size_t edge_count() const { return edge_total_; }
  bool empty() const { return labels_.empty(); }

  const std::string& label(int idx) const { return labels_.at(static_cast<std::size_t>(idx)); }
  const std::vector<std::string>& labels() const { return labels_; }

  bool contains(std::string_view label) const { return index_.find(std::string(label)) != index_.end(); }

  int index_of(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end())
      throw std::invalid_argument("unknown node label '" + std::string(label) + "'");
    return it->second;
  }

  std::span<const int> neighbors(int idx) const {
    return adjacency_.at(static_cast<std::size_t>(idx));
  }

  int degree(int idx) const {
    return static_cast<int>(adjacency_.at(static_cast<std::size_t>(idx)).size());
  }

  bool has_edge(int a, int b) const {
    const auto& na = adjacency_.at(static_cast<std::size_t>(a));
    const auto& nb = adjacency_.at(static_cast<std::size_t>(b));
    const auto& sm = na.size() <= nb.size() ? na : nb;
    int other = na.size() <= nb.size() ? b : a;
    return std::binary_search(sm.begin(), sm.end(), other);
  }

  // |adjacency(a) ∩ adjacency(b)| by merging the sorted lists.
  int common_neighbor_count(int a, int b) const {
    const auto& na = adjacency_.at(static_cast<std::size_t>(a));
    const auto& nb = adjacency_.at(static_cast<std::size_t>(b));
    int count = 0;
    auto ia = na.begin();
    auto ib = nb.begin();
    while (ia != na.end() && ib != nb.end()) {
      if (*ia < *ib) ++ia;
      else if (*ib < *ia) ++ib;
      else { ++count; ++ia; ++ib; }
    }
    return count;
  }

 private:
  int intern(const std::string& label) {
    auto [it, inserted] = index_.try_emplace(label, static_cast<int>(labels_.size()));
    if (inserted) labels_.push_back(label);
    return it->second;
  }

  void finalize(LoadReport* rep) {
    std::sort(raw_edges_.begin(), raw_edges_.end());
    std::size_t before = raw_edges_.size();
    raw_edges_.erase(std::unique(raw_edges_.begin(), raw_edges_.end()), raw_edges_.end());
    rep->duplicates_dropped = before - raw_edges_.size();
    rep->edges = raw_edges_.size();
    edge_total_ = raw_edges_.size();
    adjacency_.assign(labels_.size(), {});
    for (auto [a, b] : raw_edges_) {
      adjacency_[static_cast<std::size_t>(a)].push_back(b);
      adjacency_[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& list : adjacency_) std::sort(list.begin(), list.end());
    raw_edges_.clear();
    raw_edges_.shrink_to_fit();
  }

  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<std::pair<int, int>> raw_edges_;
  std::size_t edge_total_ = 0;
};

// Edge-list format: one edge per line, two whitespace-separated labels,
// '#'-prefixed lines ignored. Self-loops are dropped (counted in the report);
// duplicate edges are merged. A malformed line is an error naming its number.
inline Graph load_edge_list(const std::filesystem::path& path, LoadReport* report = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list '" + path.string() + "'");
  std::vector<std::pair<std::string, std::string>> edges;
  std::string line;
  std::size_t lineno = 0;
  LoadReport rep;
  while (std::getline(in, line)) {
    ++lineno;
    ++rep.lines;
    std::istringstream ss(line);
    std::string u, v, extra;
    if (!(ss >> u)) continue;                // blank line
    if (u.front() == '#') continue;          // comment
    if (!(ss >> v) || (ss >> extra))
      throw IoError("malformed edge on line " + std::to_string(lineno) + " of '" +
                    path.string() + "': expected two labels");
    edges.emplace_back(std::move(u), std::move(v));
  }
  LoadReport built;
  Graph g = Graph::from_edges(edges, &built);
  rep.edges = built.edges;
  rep.self_loops_dropped = built.self_loops_dropped;
  rep.duplicates_dropped = built.duplicates_dropped;
  if (report) *report = rep;
  return g;
}

inline void write_edge_list(const std::filesystem::path& path, const Graph& g) {
  atomic_write(path, [&](std::ostream& out) {
    for (int a = 0; a < g.node_count(); ++a)
      for (int b : g.neighbors(a))
        if (a < b) out << g.label(a) << ' ' << g.label(b) << '\n';
  });
}

// Observed number of common neighbors between two distinct nodes.
inline int common_neighbors(const Graph& g, std::string_view u, std::string_view v) {
  if (u == v) throw std::invalid_argument("common_neighbors: nodes must be distinct");
  return g.common_neighbor_count(g.index_of(u), g.index_of(v));
}

// Bijection between node indices and birth ranks 1..t, non-increasing degree
// order, equal degrees broken by ascending label so runs are reproducible.
class GrowthSchedule {
 public:
  GrowthSchedule() = default;
  explicit GrowthSchedule(std::vector<int> node_by_rank, int node_count)
      : node_by_rank_(std::move(node_by_rank)), rank_by_node_(node_count, 0) {
    for (int r = 1; r < static_cast<int>(node_by_rank_.size()); ++r)
      rank_by_node_[static_cast<std::size_t>(node_by_rank_[static_cast<std::size_t>(r)])] = r;
  }

  int size() const { return static_cast<int>(node_by_rank_.size()) - 1; }
  int node_of(int rank) const { return node_by_rank_.at(static_cast<std::size_t>(rank)); }
  int rank_of(int node) const { return rank_by_node_.at(static_cast<std::size_t>(node)); }

 private:
  std::vector<int> node_by_rank_;  // index 0 unused; ranks are 1-based
  std::vector<int> rank_by_node_;
};

inline GrowthSchedule rank_by_degree(const Graph& g) {
  if (g.empty()) throw std::invalid_argument("rank_by_degree: empty graph");
  std::vector<int> order(static_cast<std::size_t>(g.node_count()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    int da = g.degree(a), db = g.degree(b);
    if (da != db) return da > db;
    return g.label(a) < g.label(b);
  });
  std::vector<int> node_by_rank(order.size() + 1, -1);
  for (std::size_t i = 0; i < order.size(); ++i) node_by_rank[i + 1] = order[i];
  return GrowthSchedule(std::move(node_by_rank), g.node_count());
}

// Rank-space view of a graph: everything the embedding kernels touch, with
// nodes renamed to their birth ranks. Index 0 is unused.
struct RankedNet {
  int t = 0;
  std::vector<std::vector<int>> nbr;  // sorted neighbor ranks, 1-based
  std::vector<int> degree;            // by rank

  bool adjacent(int a, int b) const {
    const auto& na = nbr[static_cast<std::size_t>(a)];
    const auto& nb = nbr[static_cast<std::size_t>(b)];
    const auto& sm = na.size() <= nb.size() ? na : nb;
    int other = na.size() <= nb.size() ? b : a;
    return std::binary_search(sm.begin(), sm.end(), other);
  }

  int common_neighbors(int a, int b) const {
    const auto& na = nbr[static_cast<std::size_t>(a)];
    const auto& nb = nbr[static_cast<std::size_t>(b)];
    int count = 0;
    auto ia = na.begin();
    auto ib = nb.begin();
    while (ia != na.end() && ib != nb.end()) {
      if (*ia < *ib) ++ia;
      else if (*ib < *ia) ++ib;
      else { ++count; ++ia; ++ib; }
    }
    return count;
  }
};

inline RankedNet make_ranked(const Graph& g, const GrowthSchedule& schedule) {
  RankedNet net;
  net.t = g.node_count();
  net.nbr.assign(static_cast<std::size_t>(net.t) + 1, {});
  net.degree.assign(static_cast<std::size_t>(net.t) + 1, 0);
  for (int r = 1; r <= net.t; ++r) {
    int node = schedule.node_of(r);
    auto& list = net.nbr[static_cast<std::size_t>(r)];
    list.reserve(g.neighbors(node).size());
    for (int nb : g.neighbors(node)) list.push_back(schedule.rank_of(nb));
    std::sort(list.begin(), list.end());
    net.degree[static_cast<std::size_t>(r)] = static_cast<int>(list.size());
  }
  return net;
}

// Mean local clustering coefficient; nodes of degree < 2 contribute zero.
inline double average_clustering(const Graph& g) {
  if (g.empty()) return 0.0;
  double total = 0.0;
  for (int v = 0; v < g.node_count(); ++v) {
    auto nb = g.neighbors(v);
    int k = static_cast<int>(nb.size());
    if (k < 2) continue;
    long long tri = 0;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        if (g.has_edge(nb[i], nb[j])) ++tri;
    total += 2.0 * static_cast<double>(tri) / (static_cast<double>(k) * (k - 1));
  }
  return total / g.node_count();
}

}  // namespace hypermap
