#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include "hypermap/generator.hpp"
#include "support/oracles.hpp"

using namespace hypermap;
using Catch::Approx;

namespace {

std::set<std::pair<std::string, std::string>> edge_set(const Graph& g) {
  std::set<std::pair<std::string, std::string>> out;
  for (int a = 0; a < g.node_count(); ++a)
    for (int b : g.neighbors(a))
      if (a < b) out.insert({std::min(g.label(a), g.label(b)), std::max(g.label(a), g.label(b))});
  return out;
}

}  // namespace

TEST_CASE("generation basics") {
  ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 200);
  SECTION("nodes, truth, and label scheme") {
    auto net = generate(p, 3);
    CHECK(net.graph.node_count() == 200);
    for (long long i = 1; i <= p.t; ++i) {
      CHECK(net.graph.contains(std::to_string(i)));
      CHECK(net.radius[static_cast<std::size_t>(i)] == Approx(radial_initial(i, p)).margin(1e-14));
      CHECK(net.angle[static_cast<std::size_t>(i)] >= 0.0);
      CHECK(net.angle[static_cast<std::size_t>(i)] < kTwoPi);
    }
  }
  SECTION("determinism: one seed, one network") {
    auto a = generate(p, 11);
    auto b = generate(p, 11);
    CHECK(edge_set(a.graph) == edge_set(b.graph));
    CHECK(a.angle == b.angle);
    auto c = generate(p, 12);
    CHECK(edge_set(a.graph) != edge_set(c.graph));
  }
  SECTION("smallest network: a single pinned coin flip") {
    ModelParams p2 = p;
    p2.t = 2;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 40ULL, 500ULL}) {
      auto net = generate(p2, seed);
      // Replay the documented draw order: theta_1, theta_2, then the coin.
      Rng rng(seed);
      double th1 = rng.angle();
      double th2 = rng.angle();
      double coin = rng.uniform();
      PolarCoord a{radial_initial(2, p2), th2};
      PolarCoord b{radial_at(1, 2, p2), th1};
      double prob = connection_probability(hyperbolic_distance(a, b, p2.zeta),
                                           cutoff_radius(2, p2), p2.T, p2.zeta);
      bool expect_edge = coin < prob;
      CHECK((net.graph.edge_count() == 1) == expect_edge);
      CHECK(net.angle[1] == th1);
      CHECK(net.angle[2] == th2);
    }
  }
  SECTION("invalid parameters are rejected") {
    ModelParams bad = p;
    bad.t = 1;
    CHECK_THROWS_AS(generate(bad, 1), std::invalid_argument);
  }
}

TEST_CASE("growth prefix coupling across final sizes") {
  // The draw sequence for the first nodes does not depend on the final size,
  // and later final times only raise the connection cutoffs, so the smaller
  // snapshot's edges are a subset of the larger one's on the shared ranks.
  ModelParams base = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 150);
  ModelParams future = base;
  future.t = 200;
  auto small = generate(base, 9);
  auto big = generate(future, 9);
  for (long long i = 1; i <= base.t; ++i)
    CHECK(small.angle[static_cast<std::size_t>(i)] == big.angle[static_cast<std::size_t>(i)]);
  auto small_edges = edge_set(small.graph);
  auto big_edges = edge_set(big.graph);
  long long gained = 0;
  for (const auto& e : small_edges) CHECK(big_edges.count(e) == 1);
  for (int a = 0; a < big.graph.node_count(); ++a) {
    long long la = parse_int(big.graph.label(a), "rank");
    if (la > base.t) continue;
    for (int b : big.graph.neighbors(a)) {
      long long lb = parse_int(big.graph.label(b), "rank");
      if (lb > base.t || b >= a) continue;
      if (!small_edges.count({std::min(big.graph.label(a), big.graph.label(b)),
                              std::max(big.graph.label(a), big.graph.label(b))}))
        ++gained;
    }
  }
  CHECK(gained > 0);  // the longer horizon adds links between old ranks
}

TEST_CASE("frozen growth replicates") {
  SECTION("near-step connections are deterministic") {
    ModelParams p = ModelParams::from_gamma(2.0, 1.0, 2.5, 0.01, 1.0, 4);
    std::vector<double> angles(5, 0.0);  // all nodes at the same angle
    auto first = frozen_growth_replicate(angles, p, 1);
    CHECK(first.node_count() == 4);
    CHECK(first.edge_count() == 6);  // saturated: complete graph
    for (std::uint64_t seed = 2; seed <= 5; ++seed) {
      auto rep = frozen_growth_replicate(angles, p, seed);
      CHECK(edge_set(rep) == edge_set(first));
      CHECK(common_neighbors(rep, "1", "2") == 2);
    }
  }
  SECTION("sample moments match the per-pair Bernoulli sums") {
    // The moment formulas condition on (theta_i, theta_j) only: the witness
    // angles are integrated out. The replicate oracle therefore pins the two
    // target angles and redraws every other angle each time.
    ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 60);
    const long long i = 12, j = 5;
    const double theta_i = 0.8, theta_j = 5.9;
    const int reps = 400;
    Rng angle_rng(4);
    std::vector<double> angles(61, 0.0);
    double sum = 0.0, sum2 = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      for (int r = 1; r <= 60; ++r) angles[static_cast<std::size_t>(r)] = angle_rng.angle();
      angles[static_cast<std::size_t>(i)] = theta_i;
      angles[static_cast<std::size_t>(j)] = theta_j;
      auto g = frozen_growth_replicate(angles, p, 1000 + static_cast<std::uint64_t>(rep));
      auto n = static_cast<double>(common_neighbors(g, std::to_string(i), std::to_string(j)));
      sum += n;
      sum2 += n * n;
    }
    double mean = sum / reps;
    double var = sum2 / reps - mean * mean;
    auto st = cn_moments(i, j, angular_distance(theta_i, theta_j), p, QuadratureSpec{1024});
    double se_mean = std::sqrt(var / reps);
    CHECK(std::fabs(mean - st.mu) <= 4.0 * se_mean + 0.01);
    // Loose two-sided band for the variance at this replicate count.
    CHECK(var > 0.5 * st.sigma2);
    CHECK(var < 2.0 * st.sigma2 + 0.5);
  }
  SECTION("incomplete coordinates are rejected") {
    ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 10);
    std::vector<double> angles(5, 0.0);
    CHECK_THROWS_AS(frozen_growth_replicate(angles, p, 1), std::invalid_argument);
  }
}

TEST_CASE("clustering falls with temperature") {
  double prev = 2.0;
  for (double T : {0.05, 0.7}) {
    double acc = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, T, 1.0, 400);
      acc += average_clustering(generate(p, seed).graph);
    }
    double mean = acc / 3.0;
    CHECK(mean < prev);
    prev = mean;
  }
}

TEST_CASE("truth sidecar round-trip") {
  namespace fs = std::filesystem;
  ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 25);
  auto net = generate(p, 6);
  fs::path path = fs::temp_directory_path() / "truth_roundtrip.txt";
  write_truth(path, net);
  auto tc = read_truth(path);
  REQUIRE(tc.t == p.t);
  for (long long i = 1; i <= p.t; ++i) {
    CHECK(tc.radius[static_cast<std::size_t>(i)] == net.radius[static_cast<std::size_t>(i)]);
    CHECK(tc.angle[static_cast<std::size_t>(i)] == net.angle[static_cast<std::size_t>(i)]);
  }
}
