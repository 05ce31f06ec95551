// Command-line front end: generate / embed / eval / predict.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <exception>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "hypermap/hypermap.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hypermap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitInternal = 3;

std::string timestamp_utc() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  return buf;
}

struct ParamFlags {
  double m = 1.5;
  double L = 2.5;
  double gamma = 2.1;
  std::optional<double> beta;
  double T = 0.4;
  double zeta = 1.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--m", m, "external-link rate m");
    cmd->add_option("--L", L, "internal-link rate L");
    auto* g = cmd->add_option("--gamma", gamma, "power-law exponent gamma = 1 + 1/beta");
    auto* b = cmd->add_option("--beta", beta, "radial drift exponent beta in (0, 1]");
    g->excludes(b);
    cmd->add_option("--T", T, "temperature in (0, 1)");
    cmd->add_option("--zeta", zeta, "curvature scale sqrt(-K)");
  }

  ModelParams resolve(long long t) const {
    if (beta) {
      ModelParams p;
      p.m = m;
      p.L = L;
      p.beta = *beta;
      p.T = T;
      p.zeta = zeta;
      p.t = t;
      p.validate();
      return p;
    }
    return ModelParams::from_gamma(m, L, gamma, T, zeta, t);
  }

  json to_json(const ModelParams& p) const {
    return json{{"m", p.m},       {"L", p.L},   {"beta", p.beta}, {"gamma", p.gamma()},
                {"T", p.T},       {"zeta", p.zeta}, {"t", p.t}};
  }
};

void write_manifest(const fs::path& path, json manifest) {
  manifest["tool"] = "hypermap";
  manifest["version"] = kVersion;
  manifest["timestamp"] = timestamp_utc();
  atomic_write(path, [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

struct GenerateArgs {
  long long t = 1000;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  ParamFlags params;
};

int run_generate(const GenerateArgs& a) {
  ModelParams p = a.params.resolve(a.t);
  fs::create_directories(a.out_dir);
  auto net = generate(p, a.seed);
  fs::path edges = fs::path(a.out_dir) / "edges.txt";
  fs::path truth = fs::path(a.out_dir) / "truth.txt";
  // Emit edges in birth order so a run is byte-reproducible.
  atomic_write(edges, [&](std::ostream& out) {
    const Graph& g = net.graph;
    std::vector<std::pair<long long, long long>> rows;
    rows.reserve(g.edge_count());
    for (int v = 0; v < g.node_count(); ++v) {
      long long lv = parse_int(g.label(v), "rank");
      for (int w : g.neighbors(v)) {
        long long lw = parse_int(g.label(w), "rank");
        if (lv < lw) rows.emplace_back(lv, lw);
      }
    }
    std::sort(rows.begin(), rows.end());
    for (auto [x, y] : rows) out << x << ' ' << y << '\n';
  });
  write_truth(truth, net);
  json manifest{{"command", "generate"},
                {"seed", a.seed},
                {"params", a.params.to_json(p)},
                {"outputs", {{"edges", edges.string()}, {"truth", truth.string()}}},
                {"nodes", net.graph.node_count()},
                {"edges_generated", net.graph.edge_count()}};
  write_manifest(fs::path(a.out_dir) / "generate.manifest.json", manifest);
  std::cout << "generated t=" << net.graph.node_count() << " edges=" << net.graph.edge_count()
            << " -> " << edges.string() << '\n';
  return kExitOk;
}

struct EmbedArgs {
  std::string edges;
  std::string out_dir = ".";
  std::string method = "hybrid";
  bool fast = false;
  bool no_corrections = false;
  double window_c = 200.0;
  int k_speedup = 10;
  std::vector<int> correction_degrees = {60, 40, 20, 10};
  int correction_repeats = -1;
  double theta1 = std::numbers::pi;
  int quad_points = 256;
  int threads = 0;
  ParamFlags params;
};

int run_embed(const EmbedArgs& a) {
  LoadReport rep;
  Graph g = load_edge_list(a.edges, &rep);
  if (g.empty()) throw std::invalid_argument("input graph is empty");
  EmbedConfig cfg;
  cfg.method = parse_method(a.method);
  cfg.fast = a.fast;
  cfg.window_c = a.window_c;
  cfg.k_speedup = a.k_speedup;
  cfg.correction_degrees = a.no_corrections ? std::vector<int>{} : a.correction_degrees;
  cfg.correction_repeats = a.correction_repeats;
  cfg.theta1 = a.theta1;
  cfg.quad.points = a.quad_points;
  cfg.threads = a.threads;
  cfg.params = a.params.resolve(g.node_count());
  fs::create_directories(a.out_dir);
  EmbedLog log;
  Embedding emb = embed(g, cfg, &log);
  fs::path coords = fs::path(a.out_dir) / "coords.txt";
  write_coords(coords, emb);
  fs::path logfile = fs::path(a.out_dir) / "embed.log";
  atomic_write(logfile, [&](std::ostream& out) {
    out << "method " << emb.method << '\n';
    out << "switch_rank " << log.switch_rank << '\n';
    out << "fast_fallbacks " << log.fast_fallbacks << '\n';
    out << "wall_seconds " << format_double(log.wall_seconds) << '\n';
    for (const auto& ev : log.corrections)
      out << "correction threshold=" << ev.threshold << " trigger_rank=" << ev.trigger_rank
          << " sweeps=" << ev.sweeps << (ev.skipped ? " skipped: " + ev.note : "") << '\n';
    for (const auto& note : log.notes) out << "note " << note << '\n';
  });
  json manifest{{"command", "embed"},
                {"inputs", {{"edges", a.edges}}},
                {"params", a.params.to_json(cfg.params)},
                {"method", emb.method},
                {"fast", a.fast},
                {"window_c", a.window_c},
                {"k_speedup", a.k_speedup},
                {"correction_degrees", cfg.correction_degrees},
                {"correction_repeats", a.correction_repeats},
                {"theta1", a.theta1},
                {"quad_points", a.quad_points},
                {"switch_rank", log.switch_rank},
                {"wall_seconds", log.wall_seconds},
                {"self_loops_dropped", rep.self_loops_dropped},
                {"duplicates_dropped", rep.duplicates_dropped},
                {"outputs", {{"coords", coords.string()}, {"log", logfile.string()}}}};
  write_manifest(fs::path(a.out_dir) / "embed.manifest.json", manifest);
  std::cout << "embedded t=" << emb.t << " method=" << emb.method
            << " switch_rank=" << log.switch_rank << " wall=" << log.wall_seconds << "s -> "
            << coords.string() << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string edges;
  std::string coords;
  std::string truth;
  std::string out_dir = ".";
  long long gr_pairs = 10000;
  int ll_rand_trials = 10;
  double bin_width = 0.5;
  std::uint64_t seed = 1;
  int threads = 0;
  ParamFlags params;
};

int run_eval(const EvalArgs& a) {
  Graph g = load_edge_list(a.edges);
  if (g.empty()) throw std::invalid_argument("input graph is empty");
  Embedding emb = read_coords(a.coords);
  ModelParams p = a.params.resolve(emb.t);
  // Node-set validation names the offending label in either direction.
  NodeCoords coords = coords_from_embedding(g, emb);
  if (emb.t != g.node_count())
    throw std::invalid_argument("coordinate file covers " + std::to_string(emb.t) +
                                " nodes but the edge list has " +
                                std::to_string(g.node_count()));
  p = a.params.resolve(g.node_count());
  fs::create_directories(a.out_dir);

  EvalReport rep;
  rep.ll_inf = log_loss(g, coords, p, a.threads);
  rep.ll_rand = log_loss_random_baseline(g, coords, p, a.ll_rand_trials, a.seed, a.threads);
  rep.r_ll_log = rep.ll_rand - rep.ll_inf;
  rep.conn_hist = empirical_connection_probability(g, coords, a.bin_width, p);
  rep.gr = gr_stats(g, coords, a.gr_pairs, a.seed, p.zeta, a.threads);

  fs::path angle_csv;
  if (!a.truth.empty()) {
    TruthCoords tc = read_truth(a.truth);
    NodeCoords truth_coords = coords_from_truth(g, tc, p);
    rep.ll_real = log_loss(g, truth_coords, p, a.threads);
    rep.angle_err = align_angles(coords.theta, truth_coords.theta);
    angle_csv = fs::path(a.out_dir) / "angle_errors.csv";
    atomic_write(angle_csv, [&](std::ostream& out) {
      out << "label,inferred_theta,true_theta,aligned_error\n";
      for (int v = 0; v < g.node_count(); ++v)
        out << g.label(v) << ',' << format_double(coords.theta[static_cast<std::size_t>(v)]) << ','
            << format_double(truth_coords.theta[static_cast<std::size_t>(v)]) << ','
            << format_double(rep.angle_err->error[static_cast<std::size_t>(v)]) << '\n';
    });
  }

  fs::path report = fs::path(a.out_dir) / "report.txt";
  fs::path hist_csv = fs::path(a.out_dir) / "conn_prob.csv";
  write_report(report, rep);
  write_conn_hist_csv(hist_csv, rep.conn_hist);
  json manifest{{"command", "eval"},
                {"inputs", {{"edges", a.edges}, {"coords", a.coords}, {"truth", a.truth}}},
                {"params", a.params.to_json(p)},
                {"seed", a.seed},
                {"gr_pairs", a.gr_pairs},
                {"ll_rand_trials", a.ll_rand_trials},
                {"bin_width", a.bin_width},
                {"outputs",
                 {{"report", report.string()},
                  {"conn_prob", hist_csv.string()},
                  {"angle_errors", angle_csv.string()}}}};
  write_manifest(fs::path(a.out_dir) / "eval.manifest.json", manifest);
  std::cout << "ll_inf=" << rep.ll_inf << " ll_rand=" << rep.ll_rand << " p_s=" << rep.gr.p_s
            << " mean_hops=" << rep.gr.mean_hops << " -> " << report.string() << '\n';
  return kExitOk;
}

struct PredictArgs {
  std::string base_edges;
  std::string future_edges;
  std::string coords;
  std::string groups;
  std::string out_dir = ".";
  double bin_width = 0.5;
};

int run_predict(const PredictArgs& a) {
  Graph base = load_edge_list(a.base_edges);
  Graph future = load_edge_list(a.future_edges);
  if (base.empty()) throw std::invalid_argument("base snapshot is empty");
  Embedding emb = read_coords(a.coords);
  NodeCoords coords = coords_from_embedding(base, emb);
  fs::create_directories(a.out_dir);

  SnapshotDiffStats st;
  LabeledPairs labeled = label_future_pairs(base, future, &st);

  // Mean base degree bounds the "low degree" slice.
  double kbar = 2.0 * static_cast<double>(base.edge_count()) / base.node_count();
  auto in_low = [&](const std::pair<int, int>& pr) {
    return base.degree(pr.first) < kbar && base.degree(pr.second) < kbar;
  };
  auto in_zero_cn = [&](const std::pair<int, int>& pr) {
    return base.common_neighbor_count(pr.first, pr.second) == 0;
  };

  struct Slice {
    std::string name;
    std::vector<std::pair<int, int>> pos, neg;
  };
  std::vector<Slice> slices(3);
  slices[0].name = "all";
  slices[1].name = "zero-common-neighbors";
  slices[2].name = "low-degree";
  auto distribute = [&](const std::vector<std::pair<int, int>>& pairs, bool positive) {
    for (const auto& pr : pairs) {
      auto& all = positive ? slices[0].pos : slices[0].neg;
      all.push_back(pr);
      if (in_zero_cn(pr)) (positive ? slices[1].pos : slices[1].neg).push_back(pr);
      if (in_low(pr)) (positive ? slices[2].pos : slices[2].neg).push_back(pr);
    }
  };
  distribute(labeled.positives, true);
  distribute(labeled.negatives, false);

  fs::path report = fs::path(a.out_dir) / "predict.csv";
  json auc_json = json::object();
  atomic_write(report, [&](std::ostream& out) {
    out << "method,subset,auc,positives,negatives\n";
    for (const auto& slice : slices) {
      for (ScoreMethod method :
           {ScoreMethod::kHyperbolic, ScoreMethod::kPa, ScoreMethod::kCn}) {
        std::string cell = "undefined";
        if (!slice.pos.empty() && !slice.neg.empty()) {
          auto ps = score_pairs(slice.pos, method, base, &coords, emb.params.zeta);
          auto ns = score_pairs(slice.neg, method, base, &coords, emb.params.zeta);
          cell = format_double(auc(ps, ns, lower_is_better(method)));
        }
        out << score_method_name(method) << ',' << slice.name << ',' << cell << ','
            << slice.pos.size() << ',' << slice.neg.size() << '\n';
        auc_json[slice.name][score_method_name(method)] = cell;
      }
    }
  });

  fs::path curve_csv = fs::path(a.out_dir) / "future_curve.csv";
  auto curve = future_link_curve(labeled, base, coords, a.bin_width, emb.params.zeta);
  atomic_write(curve_csv, [&](std::ostream& out) {
    out << "x_lo,x_hi,pairs,linked,ratio\n";
    for (const auto& bin : curve.bins)
      out << format_double(bin.x_lo) << ',' << format_double(bin.x_hi) << ',' << bin.pairs << ','
          << bin.linked << ',' << format_double(bin.ratio()) << '\n';
  });

  fs::path groups_csv;
  if (!a.groups.empty()) {
    auto groups = load_groups(a.groups);
    groups_csv = fs::path(a.out_dir) / "groups_cm.csv";
    atomic_write(groups_csv, [&](std::ostream& out) {
      out << "group,members,theta_cm,wrap_straddle\n";
      for (const auto& [name, members] : groups) {
        std::vector<double> angles;
        for (const auto& label : members)
          if (base.contains(label))
            angles.push_back(coords.theta[static_cast<std::size_t>(base.index_of(label))]);
        if (angles.empty()) continue;
        auto cm = center_of_mass(angles);
        out << name << ',' << angles.size() << ',' << format_double(cm.theta_cm) << ','
            << (cm.wrap_straddle ? 1 : 0) << '\n';
      }
    });
  }

  json manifest{{"command", "predict"},
                {"inputs",
                 {{"base_edges", a.base_edges},
                  {"future_edges", a.future_edges},
                  {"coords", a.coords},
                  {"groups", a.groups}}},
                {"bin_width", a.bin_width},
                {"future_links_on_base", st.future_links_on_base},
                {"links_involving_new_nodes_skipped", st.links_involving_new_nodes},
                {"auc", auc_json},
                {"outputs",
                 {{"report", report.string()},
                  {"future_curve", curve_csv.string()},
                  {"groups_cm", groups_csv.string()}}}};
  write_manifest(fs::path(a.out_dir) / "predict.manifest.json", manifest);
  std::cout << "future links on base pairs: " << st.future_links_on_base << " (skipped "
            << st.links_involving_new_nodes << " new-node links) -> " << report.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperbolic network toolkit: growth, embedding, evaluation, link prediction"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "",
                 "INI file with one section per command (flags take precedence)");

  GenerateArgs gen;
  auto* cgen = app.add_subcommand("generate", "Grow a synthetic network");
  cgen->add_option("--t", gen.t, "number of nodes")->required();
  cgen->add_option("--seed", gen.seed, "RNG seed");
  cgen->add_option("--out-dir", gen.out_dir, "output directory");
  gen.params.attach(cgen);

  EmbedArgs emb;
  auto* cemb = app.add_subcommand("embed", "Infer node coordinates for a network");
  cemb->add_option("--edges", emb.edges, "edge list file")->required();
  cemb->add_option("--method", emb.method, "link | cn | hybrid");
  cemb->add_flag("--fast", emb.fast, "neighbor-initialized windowed search for low-degree nodes");
  cemb->add_option("--C", emb.window_c, "window constant for the fast search");
  cemb->add_option("--k-speedup", emb.k_speedup, "fast path for nodes with degree below this");
  cemb->add_option("--correction-degrees", emb.correction_degrees,
                   "degree thresholds triggering correction steps")
      ->delimiter(',');
  cemb->add_flag("--no-corrections", emb.no_corrections, "disable correction steps");
  cemb->add_option("--correction-repeats", emb.correction_repeats,
                   "sweeps per correction step (-1: round of the mean degree)");
  cemb->add_option("--theta1", emb.theta1, "angle of the first node");
  cemb->add_option("--quad-points", emb.quad_points, "lattice size for the CN integrals");
  cemb->add_option("--threads", emb.threads, "worker threads (0: all cores)");
  cemb->add_option("--out-dir", emb.out_dir, "output directory");
  emb.params.attach(cemb);

  EvalArgs ev;
  auto* cev = app.add_subcommand("eval", "Score an embedding");
  cev->add_option("--edges", ev.edges, "edge list file")->required();
  cev->add_option("--coords", ev.coords, "coordinate file")->required();
  cev->add_option("--truth", ev.truth, "ground-truth sidecar (optional)");
  cev->add_option("--gr-pairs", ev.gr_pairs, "greedy-routing sample size");
  cev->add_option("--ll-rand-trials", ev.ll_rand_trials, "random-angle baseline trials");
  cev->add_option("--bin-width", ev.bin_width, "connection-probability bin width");
  cev->add_option("--seed", ev.seed, "RNG seed for sampling");
  cev->add_option("--threads", ev.threads, "worker threads (0: all cores)");
  cev->add_option("--out-dir", ev.out_dir, "output directory");
  ev.params.attach(cev);

  PredictArgs pre;
  auto* cpre = app.add_subcommand("predict", "Score future-link prediction");
  cpre->add_option("--base-edges", pre.base_edges, "base snapshot edge list")->required();
  cpre->add_option("--future-edges", pre.future_edges, "future snapshot edge list")->required();
  cpre->add_option("--coords", pre.coords, "base embedding coordinates")->required();
  cpre->add_option("--groups", pre.groups, "node group metadata (label group-name)");
  cpre->add_option("--bin-width", pre.bin_width, "future-link curve bin width");
  cpre->add_option("--out-dir", pre.out_dir, "output directory");

  try {
    app.parse(argc, argv);
    if (cgen->parsed()) return run_generate(gen);
    if (cemb->parsed()) return run_embed(emb);
    if (cev->parsed()) return run_eval(ev);
    if (cpre->parsed()) return run_predict(pre);
    return kExitUsage;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid arguments: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
