// Copyright 2026 The SCALA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance harness: prints one PASS/FAIL/SKIP line per criterion and exits
// nonzero if any evaluated criterion fails.
//
//   acceptance          criteria 1-4 and 7; 5, 6 and 8 reported as SKIP
//   acceptance --cora   criteria 5, 6 and 8 on the Cora data found in
//                       $SCALA_CORA_DIR (edges.tsv, attrs.csv); exit 77 if absent.
//                       SCALA_CORA_ROUNDS=64 selects the reduced-R variant.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "scala/eval.hpp"
#include "scala/homophily.hpp"
#include "scala/pipeline.hpp"
#include "scala/synthetic.hpp"
#include "test_util.hpp"

namespace {

using namespace scala;
using Clock = std::chrono::steady_clock;

constexpr int kSkipExit = 77;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::printf("[%s] criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void report_skip(int id, const std::string& name, const std::string& why) {
  std::printf("[SKIP] criterion %d: %s (%s)\n", id, name.c_str(), why.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

// ---------------------------------------------------------------- 1

Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  const auto g = make_synthetic_graph({.nodes = 10, .communities = 2, .attributes = 6,
                                       .avg_degree = 3.0, .mixing = 0.2, .topic_density = 0.5,
                                       .noise_density = 0.1, .seed = 10});
  std::vector<Edge> kept;
  const auto edges = g.edge_list();
  for (std::size_t k = 0; k < edges.size(); k += 2) kept.push_back(edges[k]);
  const AttributedGraph spar(kept, g.shared_attributes());
  std::vector<NodeId> batch(10);
  std::iota(batch.begin(), batch.end(), 0);
  const SamplerConfig sampler{.subgraph_size = 4, .rng_seed = 3};
  const auto pairs = make_batch_pairs(g, spar, batch, sampler, 0);
  const SparseRows rows(g.attributes());
  Rng init(4);
  auto params = ModelParams::initialize(6, 8, 4, init);
  double worst = 0.0;
  std::string worst_name;
  for (bool literal : {false, true}) {
    const ModelOptions opts{.gamma = 0.7, .spar_target_from_dense = literal};
    params.zero_grad();
    batch_forward(params, rows, pairs, opts, true, 1);
    const auto loss = [&] { return batch_forward(params, rows, pairs, opts, false, 1).loss; };
    Rng rng(1);
    const auto list = params.all();
    // Probe count above every parameter's size: each entry is checked.
    const auto r = nn::grad_check(loss, list, 1000, rng);
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      worst_name = r.worst_parameter;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 10.0,
          fmt("max rel err %.3g, ", worst) + "worst " + worst_name + fmt(", %.2fs", secs)};
}

// ---------------------------------------------------------------- 2

Outcome sparsifier_oracle() {
  Rng rng(2025);
  double worst = 0.0;
  std::size_t edge_mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 49);
    const std::size_t f = 1 + uniform_index(rng, 16);
    const double p = 0.05 + 0.5 * uniform01(rng);
    const double eps = uniform01(rng);
    const auto g = testing::random_graph(n, f, p, rng());
    const auto sim = edge_similarities(g);
    const auto view = sparsify(g, sim, eps);
    const auto scores = spar_scores(g, view);
    const auto dense = oracle::sparsify_dense(g, eps);
    for (NodeId i = 0; i < n; ++i) {
      const auto nb = g.neighbors(i);
      for (std::size_t k = 0; k < nb.size(); ++k) {
        worst = std::max(worst, std::abs(sim.raw_at(g, i, k) - dense.raw[i][nb[k]]));
        worst = std::max(worst, std::abs(sim.normalized_at(g, i, k) - dense.normalized[i][nb[k]]));
      }
      for (NodeId j = 0; j < n; ++j) {
        edge_mismatches += view.graph.has_edge(i, j) != (dense.spar[i][j] == 1.0);
      }
      worst = std::max(worst, std::abs(scores[i] - dense.scores[i]));
    }
  }
  return {worst < 1e-12 && edge_mismatches == 0,
          fmt("max abs diff %.3g, ", worst) + std::to_string(edge_mismatches) +
              " spar-view edge mismatches"};
}

// ---------------------------------------------------------------- 3

Outcome auc_oracle() {
  Rng rng(77);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 300);
    std::vector<double> s(n);
    std::vector<int> y(n);
    const std::size_t levels = 1 + uniform_index(rng, 30);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(uniform_index(rng, levels)) * 0.37;
      y[i] = uniform01(rng) < 0.25 ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    worst = std::max(worst, std::abs(auc(s, y) - oracle::pairwise_auc(s, y)));
  }
  return {worst < 1e-12, fmt("max abs diff %.3g over 100 tied instances", worst)};
}

// ---------------------------------------------------------------- 4

Outcome synthetic_end_to_end() {
  const auto t0 = Clock::now();
  const auto clean = make_synthetic_graph({.nodes = 500, .seed = 42});
  const InjectionConfig inj{.clique_size = 15, .clique_count = 2, .attribute_anomaly_count = 15,
                            .candidate_pool_size = 50, .rng_seed = 42};
  const auto [g, labels] = inject_anomalies(clean, inj);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.rounds = 64;
  cfg.rng_seed = 42;
  cfg.threads = default_threads();
  const auto result = run_pipeline(g, &labels, cfg);
  const double a = auc(result.scores.final_scores(), result.scores.binary_labels());
  const double secs = seconds_since(t0);
  return {a >= 0.80 && secs < 180.0, fmt("AUC %.4f, %.1fs", a, secs)};
}

// ---------------------------------------------------------------- 7

Outcome property_suites() {
  std::vector<std::pair<std::string, std::function<bool()>>> checks;
  Rng master(7);

  checks.emplace_back("symmetry preserved by injection and sparsification", [&] {
    const auto clean = testing::random_graph(80, 8, 0.08, master());
    const auto [g, labels] = inject_anomalies(
        clean, {.clique_size = 6, .clique_count = 2, .attribute_anomaly_count = 6,
                .candidate_pool_size = 10, .rng_seed = master()});
    const auto view = sparsify(g, edge_similarities(g), 0.3);
    for (const auto* h : {&g, &view.graph}) {
      for (NodeId u = 0; u < h->num_nodes(); ++u) {
        for (NodeId v : h->neighbors(u)) {
          if (!h->has_edge(v, u) || u == v) return false;
        }
      }
    }
    return true;
  });

  checks.emplace_back("sampling deterministic across runs and thread counts", [&] {
    const auto g = testing::random_graph(60, 4, 0.1, master());
    std::vector<NodeId> batch(60);
    std::iota(batch.begin(), batch.end(), 0);
    const SamplerConfig cfg{.rng_seed = 5};
    const auto a = make_batch_pairs(g, g, batch, cfg, 3, 1);
    const auto b = make_batch_pairs(g, g, batch, cfg, 3, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].pos_dense.node_ids != b[i].pos_dense.node_ids ||
          a[i].neg_spar.node_ids != b[i].neg_spar.node_ids) {
        return false;
      }
    }
    return true;
  });

  checks.emplace_back("epsilon nesting is monotone", [&] {
    const auto g = testing::random_graph(50, 6, 0.2, master());
    const auto sim = edge_similarities(g);
    std::size_t previous = g.num_edges() + 1;
    AttributedGraph looser = g;
    for (double eps : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      const auto view = sparsify(g, sim, eps);
      for (const auto& [u, v] : view.graph.edge_list()) {
        if (!looser.has_edge(u, v)) return false;
      }
      if (view.graph.num_edges() > previous) return false;
      previous = view.graph.num_edges();
      looser = view.graph;
    }
    return true;
  });

  checks.emplace_back("GCN and MLP share one weight per view", [&] {
    const auto g = testing::random_graph(6, 5, 0.0, master());
    const SparseRows rows(g.attributes());
    Rng rng(master());
    auto params = ModelParams::initialize(5, 4, 2, rng);
    params.encoder_spar.value *= 3.0;
    for (const auto* p : {&params.encoder_dense, &params.encoder_spar}) {
      const auto pair = build_pair(g, {0, 3}, 0, Polarity::kPositive, View::kDense);
      const nn::RowVector via_gcn = embed_subgraph(pair, rows, p->value, 0.25).row(1);
      if (!via_gcn.isApprox(embed_target(3, rows, p->value, 0.25), 1e-14)) return false;
    }
    return true;
  });

  checks.emplace_back("score ranges and fusion monotonicity", [&] {
    const auto g = make_synthetic_graph({.nodes = 80, .seed = master()});
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.rounds = 3;
    cfg.embedding_dim = 16;
    cfg.rng_seed = master();
    const auto r = run_pipeline(g, nullptr, cfg);
    for (const auto& row : r.scores.rows) {
      if (row.contrast < -1.0 || row.contrast > 1.0) return false;
      if (row.final_score < -(1.0 - cfg.lambda) || row.final_score > 1.0) return false;
    }
    const auto& rows = r.scores.rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if (rows[i].contrast >= rows[j].contrast && rows[i].spar_norm >= rows[j].spar_norm &&
            rows[i].final_score < rows[j].final_score) {
          return false;
        }
      }
    }
    return true;
  });

  checks.emplace_back("ROC curve monotone from (0,0) to (1,1)", [&] {
    Rng rng(master());
    std::vector<double> s(120);
    std::vector<int> y(120);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = static_cast<double>(uniform_index(rng, 15));
      y[i] = i % 4 == 0;
    }
    const auto pts = roc_points(s, y);
    if (pts.front().fpr != 0.0 || pts.front().tpr != 0.0) return false;
    if (pts.back().fpr != 1.0 || pts.back().tpr != 1.0) return false;
    for (std::size_t k = 1; k < pts.size(); ++k) {
      if (pts[k].fpr < pts[k - 1].fpr || pts[k].tpr < pts[k - 1].tpr) return false;
    }
    return std::abs(trapezoid_area(pts) - auc(s, y)) < 1e-12;
  });

  std::string failed;
  for (const auto& [name, check] : checks) {
    bool ok = false;
    try {
      ok = check();
    } catch (const std::exception& e) {
      ok = false;
    }
    if (!ok) failed += (failed.empty() ? "" : "; ") + name;
  }
  return {failed.empty(), failed.empty() ? std::to_string(checks.size()) +
                                               " property groups hold; unit suites run under ctest"
                                         : "failed: " + failed};
}

// ---------------------------------------------------------------- 5, 6, 8

struct CoraRun {
  double full = 0.0;
  double without_spar = 0.0;
};

int run_cora() {
  const char* dir_env = std::getenv("SCALA_CORA_DIR");
  const std::filesystem::path dir = dir_env ? dir_env : "";
  if (dir.empty() || !std::filesystem::exists(dir / "edges.tsv") ||
      !std::filesystem::exists(dir / "attrs.csv")) {
    const std::string why = "Cora data not found; set SCALA_CORA_DIR to a directory with "
                            "edges.tsv and attrs.csv";
    report_skip(5, "Cora reproduction", why);
    report_skip(6, "ablation direction on Cora", why);
    report_skip(8, "homophily diagnostic on Cora", why);
    return kSkipExit;
  }
  const auto clean = io::load_graph(dir / "edges.tsv", dir / "attrs.csv").graph;
  std::uint32_t rounds = 256;
  if (const char* r = std::getenv("SCALA_CORA_ROUNDS")) rounds = static_cast<std::uint32_t>(std::stoul(r));
  const double threshold = rounds >= 256 ? 0.92 : 0.90;

  std::vector<CoraRun> runs;
  double mean_normal = 0.0;
  double mean_anomalous = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto inj = InjectionConfig::for_total(150);
    inj.rng_seed = seed;
    const auto [g, labels] = inject_anomalies(clean, inj);
    TrainConfig cfg;  // defaults are the Cora settings
    cfg.rounds = rounds;
    cfg.rng_seed = seed;
    cfg.threads = default_threads();
    const auto t0 = Clock::now();
    const auto result = run_pipeline(g, &labels, cfg);
    const auto y = labels.binary();
    CoraRun run;
    run.full = auc(result.scores.final_scores(), y);
    // lambda = 0 leaves only the contrastive term.
    run.without_spar = auc(fuse_scores(result.contrast, result.spar_raw, 0.0).final_scores(), y);
    std::printf("  seed %llu: AUC %.4f, w/o spar %.4f, %.0fs\n",
                static_cast<unsigned long long>(seed), run.full, run.without_spar,
                seconds_since(t0));
    runs.push_back(run);
    const auto hist = homophily_stats(g, result.similarity, labels);
    mean_normal += hist.mean_normal / 3.0;
    mean_anomalous += hist.mean_anomalous / 3.0;
  }
  double mean = 0.0;
  bool ordered = true;
  for (const auto& r : runs) {
    mean += r.full / static_cast<double>(runs.size());
    ordered = ordered && r.full > r.without_spar;
  }
  report(5, "Cora reproduction",
         {mean >= threshold, fmt("mean AUC %.4f over 3 seeds, threshold %.2f", mean, threshold) +
                                 ", R=" + std::to_string(rounds)});
  report(6, "ablation direction on Cora",
         {ordered, ordered ? "full > lambda=0 for every seed" : "ordering violated"});
  report(8, "homophily diagnostic on Cora",
         {mean_anomalous < mean_normal,
          fmt("anomalous mean %.4f vs normal mean %.4f", mean_anomalous, mean_normal)});
  return failures == 0 ? 0 : 1;
}

template <typename F>
Outcome guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1 && std::string(argv[1]) == "--cora") {
    try {
      return run_cora();
    } catch (const std::exception& e) {
      std::printf("[FAIL] Cora criteria (exception: %s)\n", e.what());
      return 1;
    }
  }
  report(1, "gradient fidelity", guarded(gradient_fidelity));
  report(2, "sparsifier oracle equivalence", guarded(sparsifier_oracle));
  report(3, "AUC oracle equivalence", guarded(auc_oracle));
  report(4, "synthetic end-to-end", guarded(synthetic_end_to_end));
  report_skip(5, "Cora reproduction", "runs under the acceptance_cora test");
  report_skip(6, "ablation direction on Cora", "runs under the acceptance_cora test");
  report(7, "property suites", guarded(property_suites));
  report_skip(8, "homophily diagnostic on Cora", "runs under the acceptance_cora test");
  return failures == 0 ? 0 : 1;
}
