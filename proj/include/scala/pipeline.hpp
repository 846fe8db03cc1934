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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "scala/graph.hpp"
#include "scala/io.hpp"
#include "scala/model.hpp"
#include "scala/sampler.hpp"
#include "scala/sparsifier.hpp"

namespace scala {

struct TrainConfig {
  std::uint32_t epochs = 100;
  std::uint32_t batch_size = 300;
  double learning_rate = 1e-3;
  double gamma = 0.9;
  double lambda = 0.2;
  double epsilon = 0.1;
  std::uint32_t subgraph_size = 4;
  std::uint32_t rounds = 256;
  std::uint32_t embedding_dim = 64;
  std::uint64_t rng_seed = 0;

  double restart_prob = 0.3;
  std::uint32_t max_steps = 256;
  bool spar_target_from_dense = false;
  NormalizationScope normalization = NormalizationScope::kIncidentEdges;
  std::size_t threads = 1;

  void validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (batch_size < 1 || rounds < 1 || subgraph_size < 1 || embedding_dim < 1) {
      throw ConfigError("batch_size, rounds, subgraph_size and embedding_dim must be >= 1");
    }
    sampler().validate();
    adam().validate();
  }

  SamplerConfig sampler() const {
    return {subgraph_size, restart_prob, max_steps, rng_seed};
  }
  ModelOptions model_options() const { return {gamma, spar_target_from_dense}; }
  nn::AdamConfig adam() const { return {learning_rate}; }
};

// RNG stream tags.
inline constexpr std::uint64_t kInitStream = 0x1417;
inline constexpr std::uint64_t kEpochShuffleStream = 0xe90c;
inline constexpr std::uint64_t kInferenceShuffleStream = 0x1fe2;
// Sampling-round keys for inference start here; training uses the epoch index.
inline constexpr std::uint64_t kInferenceRoundBase = std::uint64_t{1} << 40;

// Random partition of 0..n-1 into batches of `batch_size`. A trailing batch
// of one node is merged into its predecessor since contrast needs two.
inline std::vector<std::vector<NodeId>> make_batches(std::size_t n, std::size_t batch_size,
                                                     Rng& rng) {
  if (n < 2) throw ConfigError("training needs at least 2 nodes");
  std::vector<NodeId> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<NodeId>(i);
  shuffle(order, rng);
  std::vector<std::vector<NodeId>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    if (end - start == 1 && !batches.empty()) {
      batches.back().push_back(order[start]);
    } else {
      batches.emplace_back(order.begin() + start, order.begin() + end);
    }
  }
  return batches;
}

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_trace;  // mean loss per epoch
};

using EpochCallback = std::function<void(std::uint32_t epoch, double mean_loss)>;

inline TrainResult train(const AttributedGraph& g, const SparsifiedView& view,
                         const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (view.graph.num_nodes() != g.num_nodes()) {
    throw InternalError("spar view and graph disagree on node count");
  }
  const SparseRows rows(g.attributes());
  Rng init_rng = lane_rng(cfg.rng_seed, kInitStream, 0, 0);
  TrainResult result;
  result.params = ModelParams::initialize(static_cast<Eigen::Index>(g.num_attributes()),
                                          cfg.embedding_dim, cfg.subgraph_size, init_rng);
  const SamplerConfig sampler = cfg.sampler();
  const ModelOptions opts = cfg.model_options();
  const nn::AdamConfig adam = cfg.adam();
  const auto params = result.params.all();

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng = lane_rng(cfg.rng_seed, kEpochShuffleStream, 0, epoch);
    const auto batches = make_batches(g.num_nodes(), cfg.batch_size, shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto pairs =
          make_batch_pairs(g, view.graph, batches[b], sampler, epoch, cfg.threads);
      result.params.zero_grad();
      const BatchResult out =
          batch_forward(result.params, rows, pairs, opts, /*accumulate=*/true, cfg.threads);
      if (!std::isfinite(out.loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(b));
      }
      nn::adam_step(params, adam);
      epoch_loss += out.loss * static_cast<double>(batches[b].size());
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(g.num_nodes()));
    if (on_epoch) on_epoch(epoch, result.loss_trace.back());
  }
  return result;
}

// Mean over R sampling rounds of (1-gamma)(s~d - sd) + gamma (s~s - ss).
inline std::vector<double> infer_contrast_scores(const AttributedGraph& g,
                                                 const SparsifiedView& view,
                                                 const ModelParams& params,
                                                 const TrainConfig& cfg) {
  cfg.validate();
  const SparseRows rows(g.attributes());
  const SamplerConfig sampler = cfg.sampler();
  const ModelOptions opts = cfg.model_options();
  ModelParams frozen = params;
  std::vector<double> sum(g.num_nodes(), 0.0);
  for (std::uint32_t r = 0; r < cfg.rounds; ++r) {
    Rng shuffle_rng = lane_rng(cfg.rng_seed, kInferenceShuffleStream, 0, r);
    const auto batches = make_batches(g.num_nodes(), cfg.batch_size, shuffle_rng);
    for (const auto& batch : batches) {
      const auto pairs =
          make_batch_pairs(g, view.graph, batch, sampler, kInferenceRoundBase + r, cfg.threads);
      const BatchResult out =
          batch_forward(frozen, rows, pairs, opts, /*accumulate=*/false, cfg.threads);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        sum[batch[i]] += out.scores[i].contrast_score(opts.gamma);
      }
    }
  }
  for (double& s : sum) s /= static_cast<double>(cfg.rounds);
  return sum;
}

inline constexpr int kUnknownLabel = -1;

struct ScoreRow {
  NodeId node_id = 0;
  double spar_raw = 0.0;
  double spar_norm = 0.0;
  double contrast = 0.0;
  double final_score = 0.0;
  int label = kUnknownLabel;
};

struct ScoreTable {
  std::vector<ScoreRow> rows;

  std::vector<double> final_scores() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.final_score);
    return out;
  }
  std::vector<double> column(double ScoreRow::*field) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.*field);
    return out;
  }
  // 1 for any anomaly kind, 0 for normal.
  std::vector<int> binary_labels() const {
    std::vector<int> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
      if (r.label == kUnknownLabel) throw UndefinedMetricError("score table has no labels");
      out.push_back(r.label > 0 ? 1 : 0);
    }
    return out;
  }
};

// Min-max normalizes the sparsification score across nodes (all-equal -> 0)
// and mixes: (1-lambda) score_con + lambda score_spar_norm.
inline ScoreTable fuse_scores(std::span<const double> contrast, std::span<const double> spar_raw,
                              double lambda, const AnomalyLabels* labels = nullptr) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  if (contrast.size() != spar_raw.size() || (labels && labels->size() != contrast.size())) {
    throw InternalError("fuse_scores inputs differ in length");
  }
  ScoreTable table;
  table.rows.resize(contrast.size());
  if (contrast.empty()) return table;
  const auto [lo_it, hi_it] = std::minmax_element(spar_raw.begin(), spar_raw.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  for (std::size_t i = 0; i < contrast.size(); ++i) {
    ScoreRow& row = table.rows[i];
    row.node_id = static_cast<NodeId>(i);
    row.spar_raw = spar_raw[i];
    row.spar_norm = hi > lo ? (spar_raw[i] - lo) / (hi - lo) : 0.0;
    row.contrast = contrast[i];
    row.final_score = (1.0 - lambda) * row.contrast + lambda * row.spar_norm;
    row.label = labels ? static_cast<int>(labels->kinds[i]) : kUnknownLabel;
  }
  return table;
}

// CSV "node_id,score_spar_raw,score_spar_norm,score_con,score_final,label".
inline void write_scores(const std::filesystem::path& path, const ScoreTable& table) {
  auto out = io::open_output(path);
  out << "node_id,score_spar_raw,score_spar_norm,score_con,score_final,label\n";
  for (const auto& r : table.rows) {
    out << r.node_id << ',' << io::format_double(r.spar_raw) << ','
        << io::format_double(r.spar_norm) << ',' << io::format_double(r.contrast) << ','
        << io::format_double(r.final_score) << ',' << r.label << '\n';
  }
}

inline ScoreTable read_scores(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty() || line.starts_with("node_id")) continue;
    const auto cells = io::split(line, ',');
    ScoreRow r;
    if (cells.size() != 6 || !io::parse_number(cells[0], r.node_id) ||
        !io::parse_number(cells[1], r.spar_raw) || !io::parse_number(cells[2], r.spar_norm) ||
        !io::parse_number(cells[3], r.contrast) || !io::parse_number(cells[4], r.final_score) ||
        !io::parse_number(cells[5], r.label)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": malformed score row");
    }
    table.rows.push_back(r);
  }
  return table;
}

inline void write_loss_trace(const std::filesystem::path& path, std::span<const double> trace) {
  auto out = io::open_output(path);
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < trace.size(); ++e) {
    out << e << ',' << io::format_double(trace[e]) << '\n';
  }
}

// Everything one end-to-end run produces.
struct PipelineResult {
  SimilarityIndex similarity;
  SparsifiedView view;
  std::vector<double> spar_raw;
  TrainResult training;
  std::vector<double> contrast;
  ScoreTable scores;
};

inline PipelineResult run_pipeline(const AttributedGraph& g, const AnomalyLabels* labels,
                                   const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  PipelineResult out;
  out.similarity = edge_similarities(g, cfg.normalization);
  out.view = sparsify(g, out.similarity, cfg.epsilon);
  out.spar_raw = spar_scores(g, out.view);
  out.training = train(g, out.view, cfg, on_epoch);
  out.contrast = infer_contrast_scores(g, out.view, out.training.params, cfg);
  out.scores = fuse_scores(out.contrast, out.spar_raw, cfg.lambda, labels);
  return out;
}

}  // namespace scala
