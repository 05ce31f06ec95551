#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "hypermap/embedder.hpp"
#include "hypermap/generator.hpp"
#include "support/oracles.hpp"

using namespace hypermap;
using Catch::Approx;

namespace {

EmbedConfig config_for(const ModelParams& p) {
  EmbedConfig cfg;
  cfg.params = p;
  cfg.method = Method::kLink;
  cfg.correction_degrees.clear();
  cfg.threads = 2;
  return cfg;
}

// Global pairwise log-likelihood at the pairwise birth times, used to check
// the coordinate-ascent property of correction sweeps.
double global_pair_loglik(long long i, const std::vector<double>& th, const RankedNet& net,
                          const ModelParams& p) {
  double sum = 0.0;
  for (long long a = 2; a <= i; ++a)
    for (long long b = 1; b < a; ++b)
      sum += oracle::pair_log_term(a, b, th[static_cast<std::size_t>(a)],
                                   th[static_cast<std::size_t>(b)],
                                   net.adjacent(static_cast<int>(a), static_cast<int>(b)), p);
  return sum;
}

}  // namespace

TEST_CASE("three-node path against a hand-built grid search") {
  // Path b - a - c: degrees a=2, b=1, c=1, so ranks are a:1, b:2, c:3.
  Graph g = Graph::from_edges({{"b", "a"}, {"a", "c"}});
  ModelParams p = ModelParams::from_gamma(1.0, 0.5, 2.1, 0.4, 1.0, 3);
  EmbedConfig cfg = config_for(p);
  auto emb = embed(g, cfg);
  CHECK(emb.label_by_rank[1] == "a");
  CHECK(emb.theta_by_rank[1] == Approx(std::numbers::pi));
  CHECK(emb.r_by_rank[1] == Approx(radial_at(1, 3, p)).margin(1e-14));

  auto schedule = rank_by_degree(g);
  auto net = make_ranked(g, schedule);
  std::vector<double> th = {0.0, std::numbers::pi, 0.0, 0.0};
  auto prof2 = maximize_profile(
      [&](double c) { return oracle::link_loglik(2, c, th, net, p); }, angle_grid(2));
  th[2] = prof2.argmax_theta;
  CHECK(emb.theta_by_rank[2] == Approx(prof2.argmax_theta).margin(1e-12));
  auto prof3 = maximize_profile(
      [&](double c) { return oracle::link_loglik(3, c, th, net, p); }, angle_grid(3));
  CHECK(emb.theta_by_rank[3] == Approx(prof3.argmax_theta).margin(1e-12));
}

TEST_CASE("embedding determinism") {
  ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 80);
  auto net = generate(p, 5);
  EmbedConfig cfg = config_for(p);
  cfg.method = Method::kHybrid;
  cfg.correction_degrees = {10, 5};
  SECTION("bit-identical re-runs") {
    auto a = embed(net.graph, cfg);
    auto b = embed(net.graph, cfg);
    CHECK(a.theta_by_rank == b.theta_by_rank);
    CHECK(a.r_by_rank == b.r_by_rank);
  }
  SECTION("thread count does not affect the result") {
    EmbedConfig c1 = cfg, c4 = cfg;
    c1.threads = 1;
    c4.threads = 4;
    auto a = embed(net.graph, c1);
    auto b = embed(net.graph, c4);
    CHECK(a.theta_by_rank == b.theta_by_rank);
  }
}

TEST_CASE("hybrid switch rule") {
  SECTION("reference parameters switch after rank 33") {
    ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 5000);
    long long last = 0;
    for (long long i = 2; i <= 100; ++i)
      if (expected_degree_mbar(i, p) >= static_cast<double>(i - 1)) last = i;
    CHECK(last == 33);
  }
  SECTION("the log records the switch and matches the rule") {
    ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 60);
    auto net = generate(p, 2);
    EmbedConfig cfg = config_for(p);
    cfg.method = Method::kHybrid;
    EmbedLog log;
    embed(net.graph, cfg, &log);
    long long want = 0;
    for (long long i = 2; i <= p.t; ++i)
      if (expected_degree_mbar(i, p) >= static_cast<double>(i - 1)) want = i;
    CHECK(log.switch_rank == want);
    CHECK(log.switch_rank >= 2);
  }
}

TEST_CASE("hybrid first phase equals the pure CN method") {
  ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 70);
  auto net = generate(p, 7);
  EmbedConfig hybrid = config_for(p);
  hybrid.method = Method::kHybrid;
  EmbedConfig cn = hybrid;
  cn.method = Method::kCn;
  EmbedLog log;
  auto h = embed(net.graph, hybrid, &log);
  auto c = embed(net.graph, cn);
  REQUIRE(log.switch_rank >= 2);
  for (long long i = 1; i <= log.switch_rank; ++i)
    CHECK(h.theta_by_rank[static_cast<std::size_t>(i)] ==
          c.theta_by_rank[static_cast<std::size_t>(i)]);
}

TEST_CASE("fast placement") {
  ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 90);
  auto net = generate(p, 13);
  auto schedule = rank_by_degree(net.graph);
  auto ranked = make_ranked(net.graph, schedule);
  EmbedConfig cfg = config_for(p);
  auto full = embed(net.graph, cfg);
  SECTION("a saturating window reproduces the full search") {
    EmbedConfig wide = cfg;
    wide.fast = true;
    wide.k_speedup = 1000;       // fast path for everyone
    wide.window_c = 1e9;         // window covers the whole circle
    auto fast_emb = embed(net.graph, wide);
    long long diffs = 0;
    for (long long i = 1; i <= p.t; ++i)
      if (fast_emb.theta_by_rank[static_cast<std::size_t>(i)] !=
          full.theta_by_rank[static_cast<std::size_t>(i)])
        ++diffs;
    CHECK(diffs == 0);
  }
  SECTION("initial estimate lies inside the refinement window") {
    EmbedConfig f = cfg;
    f.fast = true;
    for (long long i = 40; i <= 50; ++i) {
      bool anchored = false;
      for (int j : ranked.nbr[static_cast<std::size_t>(i)])
        if (j < i) anchored = true;
      if (!anchored) continue;
      double theta_init = 0.0;
      double refined = fast_place(i, full.theta_by_rank, ranked, f, &theta_init);
      CHECK(angular_distance(refined, theta_init) <= f.window_c / static_cast<double>(i) + 1e-9);
    }
  }
}

TEST_CASE("correction machinery") {
  ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 60);
  auto net = generate(p, 21);
  SECTION("zero repeats change nothing") {
    EmbedConfig off = config_for(p);
    EmbedConfig zero = config_for(p);
    zero.correction_degrees = {5};
    zero.correction_repeats = 0;
    auto a = embed(net.graph, off);
    auto b = embed(net.graph, zero);
    CHECK(a.theta_by_rank == b.theta_by_rank);
  }
  SECTION("each sweep is coordinate ascent on the pairwise likelihood") {
    auto schedule = rank_by_degree(net.graph);
    auto ranked = make_ranked(net.graph, schedule);
    EmbedConfig cfg = config_for(p);
    auto emb = embed(net.graph, cfg);
    std::vector<double> th = emb.theta_by_rank;
    const long long i = p.t;
    double before = global_pair_loglik(i, th, ranked, p);
    for (int sweep = 0; sweep < 3; ++sweep) {
      correction_sweep(i, th, ranked, p, {}, 2);
      double after = global_pair_loglik(i, th, ranked, p);
      CHECK(after >= before - 1e-9);
      before = after;
    }
  }
  SECTION("degree thresholds fire after the last qualifying rank") {
    EmbedConfig cfg = config_for(p);
    cfg.correction_degrees = {1000, 5};
    cfg.correction_repeats = 1;
    EmbedLog log;
    embed(net.graph, cfg, &log);
    REQUIRE(log.corrections.size() == 2);
    CHECK(log.corrections[0].threshold == 1000);
    CHECK(log.corrections[0].skipped);
    auto schedule = rank_by_degree(net.graph);
    long long want = 0;
    for (long long r = 1; r <= p.t; ++r)
      if (net.graph.degree(schedule.node_of(static_cast<int>(r))) >= 5) want = r;
    CHECK_FALSE(log.corrections[1].skipped);
    CHECK(log.corrections[1].trigger_rank == want);
  }
}

TEST_CASE("embedding validation and bookkeeping") {
  ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 30);
  auto net = generate(p, 3);
  SECTION("node count mismatch is rejected") {
    EmbedConfig cfg = config_for(p);
    cfg.params.t = 29;
    CHECK_THROWS_WITH(embed(net.graph, cfg), Catch::Matchers::ContainsSubstring("node count"));
  }
  SECTION("final radii follow the drift closed form") {
    EmbedConfig cfg = config_for(p);
    auto emb = embed(net.graph, cfg);
    for (long long r = 1; r <= p.t; ++r)
      CHECK(emb.r_by_rank[static_cast<std::size_t>(r)] ==
            Approx(radial_at(r, p.t, p)).margin(1e-13));
  }
  SECTION("angles stay in range") {
    EmbedConfig cfg = config_for(p);
    auto emb = embed(net.graph, cfg);
    for (long long r = 1; r <= p.t; ++r) {
      CHECK(emb.theta_by_rank[static_cast<std::size_t>(r)] >= 0.0);
      CHECK(emb.theta_by_rank[static_cast<std::size_t>(r)] < kTwoPi);
    }
  }
}

TEST_CASE("coordinate file round-trip") {
  namespace fs = std::filesystem;
  ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 40);
  auto net = generate(p, 17);
  auto emb = embed(net.graph, config_for(p));
  fs::path path = fs::temp_directory_path() / "coords_roundtrip.txt";
  write_coords(path, emb);
  auto back = read_coords(path);
  REQUIRE(back.t == emb.t);
  for (long long r = 1; r <= emb.t; ++r) {
    CHECK(back.label_by_rank[static_cast<std::size_t>(r)] ==
          emb.label_by_rank[static_cast<std::size_t>(r)]);
    CHECK(back.degree_by_rank[static_cast<std::size_t>(r)] ==
          emb.degree_by_rank[static_cast<std::size_t>(r)]);
    CHECK(back.r_by_rank[static_cast<std::size_t>(r)] ==
          emb.r_by_rank[static_cast<std::size_t>(r)]);
    CHECK(back.theta_by_rank[static_cast<std::size_t>(r)] ==
          emb.theta_by_rank[static_cast<std::size_t>(r)]);
  }
  SECTION("rank gaps are detected") {
    fs::path bad = fs::temp_directory_path() / "coords_bad.txt";
    std::ofstream out(bad);
    out << "# label rank degree r theta\nn1 1 2 0.5 1.0\nn3 3 1 0.7 2.0\n";
    out.close();
    // Two rows whose ranks skip 2: rank 3 falls outside 1..2.
    CHECK_THROWS_WITH(read_coords(bad), Catch::Matchers::ContainsSubstring("out of range"));
  }
}
