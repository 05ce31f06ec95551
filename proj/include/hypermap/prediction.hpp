#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypermap/evaluate.hpp"
#include "hypermap/graph.hpp"
#include "hypermap/io.hpp"

namespace hypermap {

enum class ScoreMethod { kHyperbolic, kPa, kCn };

inline const char* score_method_name(ScoreMethod m) {
  switch (m) {
    case ScoreMethod::kHyperbolic: return "hyperbolic";
    case ScoreMethod::kPa: return "pa";
    default: return "cn";
  }
}

// Smaller hyperbolic distance means "more likely"; the baselines point the
// other way.
inline bool lower_is_better(ScoreMethod m) { return m == ScoreMethod::kHyperbolic; }

// Pairs of base-snapshot node indices labeled by what a future snapshot did
// to them: positives gained a link, negatives stayed disconnected.
struct LabeledPairs {
  std::vector<std::pair<int, int>> positives;
  std::vector<std::pair<int, int>> negatives;
  std::string provenance;
};

struct SnapshotDiffStats {
  long long future_links_on_base = 0;
  long long links_involving_new_nodes = 0;
};

// Labels every disconnected base pair by the future snapshot, aligned by node
// label; future links touching nodes absent from the base are skipped and
// counted (the base embedding has no coordinates for them).
inline LabeledPairs label_future_pairs(const Graph& base, const Graph& future,
                                       SnapshotDiffStats* stats = nullptr) {
  SnapshotDiffStats st;
  for (int a = 0; a < future.node_count(); ++a) {
    bool a_known = base.contains(future.label(a));
    for (int b : future.neighbors(a)) {
      if (b >= a) break;
      if (!a_known || !base.contains(future.label(b))) ++st.links_involving_new_nodes;
    }
  }
  LabeledPairs out;
  out.provenance = "base:" + std::to_string(base.node_count()) + " nodes -> future:" +
                   std::to_string(future.node_count()) + " nodes";
  std::vector<int> future_idx(static_cast<std::size_t>(base.node_count()), -1);
  for (int v = 0; v < base.node_count(); ++v)
    if (future.contains(base.label(v))) future_idx[static_cast<std::size_t>(v)] = future.index_of(base.label(v));
  for (int a = 0; a < base.node_count(); ++a) {
    for (int b = 0; b < a; ++b) {
      if (base.has_edge(a, b)) continue;
      int fa = future_idx[static_cast<std::size_t>(a)];
      int fb = future_idx[static_cast<std::size_t>(b)];
      bool linked = fa >= 0 && fb >= 0 && future.has_edge(fa, fb);
      if (linked) {
        out.positives.emplace_back(b, a);
        ++st.future_links_on_base;
      } else {
        out.negatives.emplace_back(b, a);
      }
    }
  }
  if (stats) *stats = st;
  return out;
}

// Scores for a list of pairs under one method. Hyperbolic needs coordinates;
// the degree-product and common-neighbors baselines need the base graph.
inline std::vector<double> score_pairs(std::span<const std::pair<int, int>> pairs,
                                       ScoreMethod method, const Graph& base,
                                       const NodeCoords* coords = nullptr, double zeta = 1.0) {
  std::vector<double> scores(pairs.size());
  if (method == ScoreMethod::kHyperbolic) {
    if (!coords || static_cast<int>(coords->size()) != base.node_count())
      throw std::invalid_argument("hyperbolic scores need coordinates for every node");
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      PolarCoord a{coords->r[static_cast<std::size_t>(pairs[k].first)],
                   coords->theta[static_cast<std::size_t>(pairs[k].first)]};
      PolarCoord b{coords->r[static_cast<std::size_t>(pairs[k].second)],
                   coords->theta[static_cast<std::size_t>(pairs[k].second)]};
      scores[k] = hyperbolic_distance(a, b, zeta);
    }
  } else if (method == ScoreMethod::kPa) {
    for (std::size_t k = 0; k < pairs.size(); ++k)
      scores[k] = static_cast<double>(base.degree(pairs[k].first)) *
                  static_cast<double>(base.degree(pairs[k].second));
  } else {
    for (std::size_t k = 0; k < pairs.size(); ++k)
      scores[k] = static_cast<double>(base.common_neighbor_count(pairs[k].first, pairs[k].second));
  }
  return scores;
}

// Exact rank statistic: probability that a positive outranks a negative, ties
// counting one half. No sampling.
inline double auc(std::span<const double> positive_scores, std::span<const double> negative_scores,
                  bool lower_better) {
  if (positive_scores.empty() || negative_scores.empty())
    throw std::invalid_argument("auc: need at least one positive and one negative");
  std::vector<double> neg(negative_scores.begin(), negative_scores.end());
  std::sort(neg.begin(), neg.end());
  double wins = 0.0;
  for (double s : positive_scores) {
    auto lo = std::lower_bound(neg.begin(), neg.end(), s) - neg.begin();
    auto hi = std::upper_bound(neg.begin(), neg.end(), s) - neg.begin();
    auto below = static_cast<double>(lo);                 // negatives < s
    auto ties = static_cast<double>(hi - lo);
    auto above = static_cast<double>(neg.size()) - below - ties;
    wins += (lower_better ? above : below) + 0.5 * ties;
  }
  return wins / (static_cast<double>(positive_scores.size()) * static_cast<double>(neg.size()));
}

struct FutureLinkBin {
  double x_lo = 0.0, x_hi = 0.0;
  long long pairs = 0;
  long long linked = 0;

  double ratio() const { return pairs ? static_cast<double>(linked) / pairs : 0.0; }
};

struct FutureLinkCurve {
  double bin_width = 0.5;
  std::vector<FutureLinkBin> bins;
};

// Empirical probability that a disconnected base pair gains a link, as a
// function of its hyperbolic distance in the base embedding.
inline FutureLinkCurve future_link_curve(const LabeledPairs& labeled, const Graph& base,
                                         const NodeCoords& coords, double bin_width,
                                         double zeta = 1.0) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be > 0");
  FutureLinkCurve curve;
  curve.bin_width = bin_width;
  auto add = [&](const std::pair<int, int>& pr, bool linked) {
    PolarCoord a{coords.r[static_cast<std::size_t>(pr.first)], coords.theta[static_cast<std::size_t>(pr.first)]};
    PolarCoord b{coords.r[static_cast<std::size_t>(pr.second)], coords.theta[static_cast<std::size_t>(pr.second)]};
    double x = hyperbolic_distance(a, b, zeta);
    auto bin = static_cast<std::size_t>(x / bin_width);
    if (bin >= curve.bins.size()) {
      std::size_t old = curve.bins.size();
      curve.bins.resize(bin + 1);
      for (std::size_t s = old; s < curve.bins.size(); ++s) {
        curve.bins[s].x_lo = static_cast<double>(s) * bin_width;
        curve.bins[s].x_hi = static_cast<double>(s + 1) * bin_width;
      }
    }
    ++curve.bins[bin].pairs;
    if (linked) ++curve.bins[bin].linked;
  };
  for (const auto& pr : labeled.positives) add(pr, true);
  for (const auto& pr : labeled.negatives) add(pr, false);
  return curve;
}

inline constexpr double kDefaultCmBinWidth = 3.6 * std::numbers::pi / 180.0;

struct CenterOfMass {
  double theta_cm = 0.0;
  long long members = 0;
  bool wrap_straddle = false;  // group occupies both boundary bins; the linear
                               // binned mean is then distorted
};

// Binned angular center of mass of a node group: the n(b)-weighted mean of the
// occupied bin centers (a linear, not circular, mean).
inline CenterOfMass center_of_mass(std::span<const double> group_angles,
                                   double bin_width = kDefaultCmBinWidth) {
  if (group_angles.empty()) throw std::invalid_argument("center_of_mass: empty group");
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be > 0");
  auto n_bins = static_cast<std::size_t>(std::ceil(kTwoPi / bin_width));
  std::vector<long long> counts(n_bins, 0);
  for (double th : group_angles) {
    auto b = static_cast<std::size_t>(normalize_angle(th) / bin_width);
    if (b >= n_bins) b = n_bins - 1;
    ++counts[b];
  }
  CenterOfMass cm;
  cm.members = static_cast<long long>(group_angles.size());
  double weighted = 0.0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    double center = (static_cast<double>(b) + 0.5) * bin_width;
    weighted += center * static_cast<double>(counts[b]);
  }
  cm.theta_cm = weighted / static_cast<double>(cm.members);
  cm.wrap_straddle = counts.front() > 0 && counts.back() > 0;
  return cm;
}

// Group metadata: lines of "label group-name".
inline std::map<std::string, std::vector<std::string>> load_groups(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open group file '" + path.string() + "'");
  std::map<std::string, std::vector<std::string>> groups;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string label, group, extra;
    if (!(ss >> label)) continue;
    if (label.front() == '#') continue;
    if (!(ss >> group) || (ss >> extra))
      throw IoError("malformed group line " + std::to_string(lineno) + " in '" + path.string() +
                    "': expected 'label group-name'");
    groups[group].push_back(label);
  }
  return groups;
}

}  // namespace hypermap
