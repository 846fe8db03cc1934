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

// scala: command-line front end for anomaly injection, sparsification,
// training, scoring and evaluation.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "scala/config.hpp"
#include "scala/eval.hpp"
#include "scala/homophily.hpp"
#include "scala/pipeline.hpp"
#include "scala/synthetic.hpp"

namespace {

using scala::RunConfig;
namespace fs = std::filesystem;

constexpr const char* kOutputDirEnv = "SCALA_OUTPUT_DIR";

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> rounds;
  std::optional<std::uint32_t> epochs;
  std::optional<std::size_t> threads;
  std::optional<std::uint32_t> anomalies;
  std::string out;
  std::string edges;
  std::string attrs;
  std::string labels;
  std::string checkpoint;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Run seed (overrides config)");
  cmd->add_option("--rounds", f.rounds, "Inference sampling rounds R");
  cmd->add_option("--epochs", f.epochs, "Training epochs T");
  cmd->add_option("--threads", f.threads, "Worker threads (default: available cores)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--anomalies", f.anomalies, "Total injected anomalies, split equally");
  cmd->add_option("-o,--out", f.out, "Output directory");
  cmd->add_option("--edges", f.edges, "Edge list (src<TAB>dst)");
  cmd->add_option("--attrs", f.attrs, "Attribute CSV");
  cmd->add_option("--labels", f.labels, "Label CSV (node_id,label)");
  cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint path");
}

// Precedence: flag > environment > config file > built-in default.
RunConfig resolve(const CommonFlags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : scala::load_run_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.rounds) cfg.train.rounds = *f.rounds;
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.anomalies) {
    const auto base = cfg.injection;
    cfg.injection =
        scala::InjectionConfig::for_total(*f.anomalies, base.clique_size, base.candidate_pool_size);
  }
  cfg.train.threads = f.threads.value_or(scala::default_threads());
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    cfg.output_dir = env;
  }
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (!f.edges.empty()) cfg.dataset.edges = f.edges;
  if (!f.attrs.empty()) cfg.dataset.attrs = f.attrs;
  if (!f.labels.empty()) cfg.dataset.labels = f.labels;
  if (!f.checkpoint.empty()) cfg.checkpoint = f.checkpoint;
  cfg.propagate_seed();
  cfg.validate();
  return cfg;
}

scala::AttributedGraph load_dataset(const RunConfig& cfg) {
  if (cfg.dataset.edges.empty() || cfg.dataset.attrs.empty()) {
    throw scala::ConfigError("dataset.edges and dataset.attrs are required");
  }
  auto loaded = scala::io::load_graph(cfg.dataset.edges, cfg.dataset.attrs);
  if (loaded.self_loops_dropped > 0) {
    std::cerr << "warning: dropped " << loaded.self_loops_dropped << " self-loop(s)\n";
  }
  return std::move(loaded.graph);
}

std::optional<scala::AnomalyLabels> load_labels(const RunConfig& cfg, std::size_t n) {
  if (cfg.dataset.labels.empty()) return std::nullopt;
  return scala::io::read_labels(cfg.dataset.labels, n);
}

scala::AnomalyLabels require_labels(const RunConfig& cfg, std::size_t n) {
  auto labels = load_labels(cfg, n);
  if (!labels) throw scala::ConfigError("this command needs dataset.labels");
  return *std::move(labels);
}

void write_metrics(const RunConfig& cfg, const scala::ScoreTable& table) {
  const auto report = scala::evaluate(table.final_scores(), table.binary_labels());
  auto out = scala::io::open_output(cfg.output_dir / "metrics.json");
  out << scala::metrics_json(report, cfg.seed, scala::to_json(cfg)).dump(2) << '\n';
  scala::write_roc(cfg.output_dir / "roc.csv", report.roc_points);
  std::cout << "auc " << scala::io::format_double(report.auc) << '\n';
}

void write_sparsification(const RunConfig& cfg, const scala::AttributedGraph& g,
                          const scala::SimilarityIndex& sim, const scala::SparsifiedView& view) {
  scala::write_similarities(cfg.output_dir / "similarities.csv", g, sim);
  scala::io::write_edges(cfg.output_dir / "spar_edges.tsv", view.graph);
}

void write_training(const RunConfig& cfg, const scala::TrainResult& trained) {
  scala::save_checkpoint(cfg.checkpoint_path(), trained.params, cfg.train.model_options());
  scala::write_loss_trace(cfg.output_dir / "loss_trace.csv", trained.loss_trace);
}

void print_epoch(std::uint32_t epoch, double loss) {
  std::cerr << "epoch " << epoch << " loss " << scala::io::format_double(loss) << '\n';
}

int cmd_generate(const CommonFlags& f, scala::SyntheticConfig synth) {
  const RunConfig cfg = resolve(f);
  synth.seed = cfg.seed;
  synth.validate();
  const auto g = scala::make_synthetic_graph(synth);
  scala::io::write_edges(cfg.output_dir / "edges.tsv", g);
  scala::io::write_attributes(cfg.output_dir / "attrs.csv", g.attributes());
  return 0;
}

int cmd_inject(const CommonFlags& f) {
  const RunConfig cfg = resolve(f);
  const auto g = load_dataset(cfg);
  const auto [perturbed, labels] = scala::inject_anomalies(g, cfg.injection);
  scala::io::write_edges(cfg.output_dir / "edges.tsv", perturbed);
  scala::io::write_attributes(cfg.output_dir / "attrs.csv", perturbed.attributes());
  scala::io::write_labels(cfg.output_dir / "labels.csv", labels);
  std::cout << "injected " << labels.num_anomalies() << " anomalies\n";
  return 0;
}

int cmd_sparsify(const CommonFlags& f) {
  const RunConfig cfg = resolve(f);
  const auto g = load_dataset(cfg);
  const auto sim = scala::edge_similarities(g, cfg.train.normalization);
  const auto view = scala::sparsify(g, sim, cfg.train.epsilon);
  write_sparsification(cfg, g, sim, view);
  std::cout << "kept " << view.graph.num_edges() << " of " << g.num_edges() << " edges\n";
  return 0;
}

int cmd_train(const CommonFlags& f) {
  const RunConfig cfg = resolve(f);
  const auto g = load_dataset(cfg);
  const auto view =
      scala::sparsify(g, scala::edge_similarities(g, cfg.train.normalization), cfg.train.epsilon);
  write_training(cfg, scala::train(g, view, cfg.train, print_epoch));
  return 0;
}

int cmd_score(const CommonFlags& f) {
  RunConfig cfg = resolve(f);
  const auto g = load_dataset(cfg);
  const auto labels = load_labels(cfg, g.num_nodes());
  const auto ckpt = scala::load_checkpoint(cfg.checkpoint_path());
  // Scoring must see the options the model was trained with.
  cfg.train.gamma = ckpt.options.gamma;
  cfg.train.spar_target_from_dense = ckpt.options.spar_target_from_dense;
  const auto view =
      scala::sparsify(g, scala::edge_similarities(g, cfg.train.normalization), cfg.train.epsilon);
  const auto contrast = scala::infer_contrast_scores(g, view, ckpt.params, cfg.train);
  const auto table = scala::fuse_scores(contrast, scala::spar_scores(g, view), cfg.train.lambda,
                                        labels ? &*labels : nullptr);
  scala::write_scores(cfg.output_dir / "scores.csv", table);
  return 0;
}

int cmd_eval(const CommonFlags& f, const std::string& scores_path) {
  const RunConfig cfg = resolve(f);
  const fs::path path = scores_path.empty() ? cfg.output_dir / "scores.csv" : fs::path(scores_path);
  write_metrics(cfg, scala::read_scores(path));
  return 0;
}

int cmd_pipeline(const CommonFlags& f) {
  const RunConfig cfg = resolve(f);
  const auto g = load_dataset(cfg);
  const auto labels = load_labels(cfg, g.num_nodes());
  const auto result =
      scala::run_pipeline(g, labels ? &*labels : nullptr, cfg.train, print_epoch);
  write_sparsification(cfg, g, result.similarity, result.view);
  write_training(cfg, result.training);
  scala::write_scores(cfg.output_dir / "scores.csv", result.scores);
  if (labels) {
    write_metrics(cfg, result.scores);
  } else {
    std::cerr << "note: no labels given, skipping metrics.json and roc.csv\n";
  }
  return 0;
}

int cmd_homophily(const CommonFlags& f) {
  const RunConfig cfg = resolve(f);
  const auto g = load_dataset(cfg);
  const auto labels = require_labels(cfg, g.num_nodes());
  const auto sim = scala::edge_similarities(g, cfg.train.normalization);
  const auto hist = scala::homophily_stats(g, sim, labels);
  scala::write_histogram(cfg.output_dir / "histogram.csv", hist);
  std::cout << "mean_normal " << scala::io::format_double(hist.mean_normal) << '\n'
            << "mean_anomalous " << scala::io::format_double(hist.mean_anomalous) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SCALA graph anomaly detection"};
  app.require_subcommand(1);

  CommonFlags flags;
  scala::SyntheticConfig synth;
  std::string scores_path;
  int (*dispatch)(const CommonFlags&) = nullptr;

  auto* generate = app.add_subcommand("generate", "Write a synthetic homophilous graph");
  add_common(generate, flags);
  generate->add_option("--nodes", synth.nodes, "Node count");
  generate->add_option("--communities", synth.communities, "Community count");
  generate->add_option("--attributes", synth.attributes, "Attribute dimension");
  generate->add_option("--avg-degree", synth.avg_degree, "Target mean degree");
  generate->add_option("--mixing", synth.mixing, "Fraction of cross-community edges");
  generate->add_option("--topic-density", synth.topic_density, "P(feature on) in own block");
  generate->add_option("--noise-density", synth.noise_density, "P(feature on) elsewhere");

  const auto add = [&](const char* name, const char* help, int (*fn)(const CommonFlags&)) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, flags);
    cmd->callback([&dispatch, fn] { dispatch = fn; });
    return cmd;
  };
  add("inject", "Plant structural and attribute anomalies", cmd_inject);
  add("sparsify", "Compute edge similarities and the sparsified view", cmd_sparsify);
  add("train", "Train the dual-view contrastive model", cmd_train);
  add("score", "Score nodes with a trained checkpoint", cmd_score);
  auto* eval = add("eval", "Compute AUC and ROC from a score table", nullptr);
  eval->add_option("--scores", scores_path, "Score CSV (default: <out>/scores.csv)");
  add("pipeline", "Sparsify, train, score and evaluate in one run", cmd_pipeline);
  add("homophily", "Neighbor-similarity histogram by class", cmd_homophily);

  CLI11_PARSE(app, argc, argv);
  try {
    if (generate->parsed()) return cmd_generate(flags, synth);
    if (eval->parsed()) return cmd_eval(flags, scores_path);
    return dispatch(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
