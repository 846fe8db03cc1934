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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gtest/gtest.h"
#include "scala/eval.hpp"
#include "scala/pipeline.hpp"
#include "scala/synthetic.hpp"
#include "test_util.hpp"

namespace scala {
namespace {

AttributedGraph toy_graph() {
  return make_synthetic_graph({.nodes = 10, .communities = 2, .attributes = 6, .avg_degree = 3.0,
                               .mixing = 0.2, .topic_density = 0.5, .noise_density = 0.1,
                               .seed = 10});
}

TrainConfig toy_config() {
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 300;
  cfg.rounds = 4;
  cfg.embedding_dim = 8;
  cfg.rng_seed = 17;
  return cfg;
}

TEST(MakeBatchesTest, CoversEveryNodeOnceAndMergesSingletons) {
  Rng rng(1);
  const auto batches = make_batches(601, 300, rng);
  ASSERT_EQ(batches.size(), 2u);
  EXPECT_EQ(batches[0].size(), 300u);
  EXPECT_EQ(batches[1].size(), 301u);
  std::vector<NodeId> all;
  for (const auto& b : batches) all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  for (NodeId i = 0; i < 601; ++i) EXPECT_EQ(all[i], i);
}

TEST(TrainTest, ZeroEpochsReturnsInitialParameters) {
  const auto g = toy_graph();
  const auto view = sparsify(g, edge_similarities(g), 0.1);
  auto cfg = toy_config();
  cfg.epochs = 0;
  const auto result = train(g, view, cfg);
  EXPECT_TRUE(result.loss_trace.empty());
  Rng init = lane_rng(cfg.rng_seed, kInitStream, 0, 0);
  const auto initial = ModelParams::initialize(6, 8, 4, init);
  EXPECT_EQ(result.params.encoder_dense.value, initial.encoder_dense.value);
  EXPECT_EQ(result.params.discriminator.value, initial.discriminator.value);
}

TEST(TrainTest, LossDecreasesOnToyGraph) {
  const auto g = toy_graph();
  const auto view = sparsify(g, edge_similarities(g), 0.1);
  auto cfg = toy_config();
  cfg.epochs = 50;
  cfg.learning_rate = 0.01;
  std::vector<std::uint32_t> seen;
  const auto result = train(g, view, cfg, [&](std::uint32_t e, double) { seen.push_back(e); });
  ASSERT_EQ(result.loss_trace.size(), 50u);
  EXPECT_EQ(seen.size(), 50u);
  EXPECT_LT(result.loss_trace.back(), result.loss_trace.front());
}

TEST(TrainTest, RejectsBadHyperparameters) {
  const auto g = toy_graph();
  const auto view = sparsify(g, edge_similarities(g), 0.1);
  auto cfg = toy_config();
  cfg.gamma = 1.5;
  EXPECT_THROW(train(g, view, cfg), ConfigError);
  cfg = toy_config();
  cfg.learning_rate = 0.0;
  EXPECT_THROW(train(g, view, cfg), ConfigError);
}

TEST(InferTest, ZeroDiscriminatorGivesZeroContrast) {
  const auto g = toy_graph();
  const auto view = sparsify(g, edge_similarities(g), 0.1);
  auto cfg = toy_config();
  cfg.epochs = 0;
  auto params = train(g, view, cfg).params;
  params.discriminator.value.setZero();
  for (double s : infer_contrast_scores(g, view, params, cfg)) EXPECT_EQ(s, 0.0);
}

TEST(InferTest, ScoresBoundedAndSingleRoundMatchesFirstRound) {
  const auto g = toy_graph();
  const auto view = sparsify(g, edge_similarities(g), 0.1);
  auto cfg = toy_config();
  const auto params = train(g, view, cfg).params;
  cfg.rounds = 1;
  const auto one = infer_contrast_scores(g, view, params, cfg);
  cfg.rounds = 2;
  const auto two = infer_contrast_scores(g, view, params, cfg);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_GE(one[i], -1.0);
    EXPECT_LE(one[i], 1.0);
    EXPECT_GE(two[i], -1.0);
    EXPECT_LE(two[i], 1.0);
  }
  cfg.rounds = 1;
  EXPECT_EQ(infer_contrast_scores(g, view, params, cfg), one);
}

TEST(FuseScoresTest, LambdaExtremesAndRange) {
  const std::vector<double> con{0.3, -0.2, 0.9, 0.0};
  const std::vector<double> spar{2.0, 0.0, 1.0, 4.0};
  const auto only_con = fuse_scores(con, spar, 0.0);
  EXPECT_EQ(only_con.final_scores(), con);
  const auto only_spar = fuse_scores(con, spar, 1.0);
  EXPECT_EQ(only_spar.final_scores(), (std::vector<double>{0.5, 0.0, 0.25, 1.0}));
  const auto mixed = fuse_scores(con, spar, 0.2);
  for (const auto& r : mixed.rows) {
    EXPECT_GE(r.final_score, -0.8);
    EXPECT_LE(r.final_score, 1.0);
    EXPECT_DOUBLE_EQ(r.final_score, 0.8 * r.contrast + 0.2 * r.spar_norm);
  }
  EXPECT_THROW(fuse_scores(con, spar, 1.2), ConfigError);
  EXPECT_THROW(fuse_scores(con, spar, -0.1), ConfigError);
}

TEST(FuseScoresTest, ConstantSparScoresNormalizeToZero) {
  const std::vector<double> con{0.1, 0.2};
  const std::vector<double> spar{3.0, 3.0};
  for (const auto& r : fuse_scores(con, spar, 0.5).rows) EXPECT_EQ(r.spar_norm, 0.0);
}

TEST(FuseScoresTest, MonotoneInBothInputs) {
  const std::vector<double> con{0.1, 0.1, 0.3};
  const std::vector<double> spar{1.0, 2.0, 2.0};
  const auto t = fuse_scores(con, spar, 0.3).final_scores();
  EXPECT_LT(t[0], t[1]);
  EXPECT_LT(t[1], t[2]);
}

TEST(ScoresFileTest, RoundTrip) {
  const std::vector<double> con{0.125, -0.5};
  const std::vector<double> spar{1.0, 0.0};
  AnomalyLabels labels(2);
  labels.kinds[1] = AnomalyKind::kAttribute;
  const auto table = fuse_scores(con, spar, 0.2, &labels);
  const auto dir = testing::temp_dir("scores");
  write_scores(dir / "scores.csv", table);
  const auto back = read_scores(dir / "scores.csv");
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.final_scores(), table.final_scores());
  EXPECT_EQ(back.binary_labels(), (std::vector<int>{0, 1}));
  EXPECT_EQ(back.rows[1].label, 2);
}

TEST(PipelineTest, BitIdenticalAcrossThreadCounts) {
  const auto g = make_synthetic_graph({.nodes = 120, .seed = 5});
  auto cfg = toy_config();
  cfg.batch_size = 50;
  cfg.epochs = 2;
  cfg.rounds = 2;
  cfg.threads = 1;
  const auto a = run_pipeline(g, nullptr, cfg);
  cfg.threads = 3;
  const auto b = run_pipeline(g, nullptr, cfg);
  EXPECT_EQ(a.training.loss_trace, b.training.loss_trace);
  EXPECT_EQ(a.scores.final_scores(), b.scores.final_scores());
}

TEST(PipelineTest, RankingFindsInjectedAnomalies) {
  const auto clean = make_synthetic_graph({.nodes = 200, .seed = 9});
  InjectionConfig inj{.clique_size = 10, .clique_count = 1, .attribute_anomaly_count = 10,
                      .candidate_pool_size = 30, .rng_seed = 4};
  const auto [g, labels] = inject_anomalies(clean, inj);
  auto cfg = toy_config();
  cfg.epochs = 30;
  cfg.rounds = 16;
  cfg.batch_size = 100;
  cfg.learning_rate = 0.005;
  const auto result = run_pipeline(g, &labels, cfg);
  EXPECT_GT(auc(result.scores.final_scores(), result.scores.binary_labels()), 0.8);
}

}  // namespace
}  // namespace scala
