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
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scala/common.hpp"
#include "scala/graph.hpp"

namespace scala {

struct SamplerConfig {
  std::uint32_t subgraph_size = 4;
  double restart_prob = 0.3;
  std::uint32_t max_steps = 256;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (subgraph_size < 1) throw ConfigError("subgraph_size must be >= 1");
    if (!(restart_prob > 0.0 && restart_prob < 1.0)) {
      throw ConfigError("restart_prob must lie in (0, 1)");
    }
    if (max_steps < subgraph_size) throw ConfigError("max_steps must be >= subgraph_size");
  }
};

enum class View : std::uint8_t { kDense = 0, kSpar = 1 };
enum class Polarity : std::uint8_t { kPositive = 0, kNegative = 1 };

// Number of nodes reachable from `source` (itself included), capped at `cap`.
inline std::size_t bounded_reach(const AttributedGraph& g, NodeId source, std::size_t cap) {
  std::vector<NodeId> seen{source};
  for (std::size_t head = 0; head < seen.size() && seen.size() < cap; ++head) {
    for (NodeId nb : g.neighbors(seen[head])) {
      if (std::find(seen.begin(), seen.end(), nb) == seen.end()) {
        seen.push_back(nb);
        if (seen.size() >= cap) break;
      }
    }
  }
  return seen.size();
}

// Random walk with restart from `target`, returning the first P distinct
// nodes visited in order (target first). Padded with the target id when the
// walk budget runs out or the component is smaller than P.
inline std::vector<NodeId> rwr_sample(const AttributedGraph& g, NodeId target,
                                      const SamplerConfig& cfg, Rng& rng) {
  const std::size_t size = cfg.subgraph_size;
  std::vector<NodeId> ids{target};
  ids.reserve(size);
  const std::size_t reachable = size > 1 ? bounded_reach(g, target, size) : 1;
  NodeId current = target;
  for (std::uint32_t step = 0; step < cfg.max_steps && ids.size() < reachable; ++step) {
    if (uniform01(rng) < cfg.restart_prob) {
      current = target;
      continue;
    }
    const auto nb = g.neighbors(current);
    if (nb.empty()) {
      current = target;
      continue;
    }
    current = nb[uniform_index(rng, nb.size())];
    if (std::find(ids.begin(), ids.end(), current) == ids.end()) ids.push_back(current);
  }
  ids.resize(size, target);
  return ids;
}

// One node-subgraph contrast instance.
//
// `node_ids[0]` is the node the subgraph was sampled around; every row holding
// that id is anonymized in attributes(). For a positive pair it equals
// `target`; for a negative pair it is another node of the batch. The
// similarity vector is always measured against `target`.
struct SubgraphPair {
  NodeId target = 0;
  std::vector<NodeId> node_ids;
  Eigen::MatrixXd adj_norm;
  Eigen::RowVectorXd sim_vector;
  View view = View::kDense;
  Polarity polarity = Polarity::kPositive;

  std::size_t size() const { return node_ids.size(); }

  bool anonymized(std::size_t k) const { return node_ids[k] == node_ids.front(); }

  AttributeMatrix attributes(const AttributedGraph& g) const {
    AttributeMatrix x(size(), g.num_attributes());
    for (std::size_t k = 0; k < size(); ++k) {
      if (anonymized(k)) {
        x.row(k).setZero();
      } else {
        x.row(k) = g.attribute_row(node_ids[k]);
      }
    }
    return x;
  }
};

// D^{-1/2} (A_sub + I) D^{-1/2} for the subgraph induced by node_ids. Padding
// copies of node_ids[0] get a self-loop only.
inline Eigen::MatrixXd normalized_subgraph_adjacency(const AttributedGraph& g,
                                                     const std::vector<NodeId>& node_ids) {
  const auto p = static_cast<Eigen::Index>(node_ids.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(p, p);
  const auto is_padding = [&](Eigen::Index k) { return k > 0 && node_ids[k] == node_ids[0]; };
  for (Eigen::Index r = 0; r < p; ++r) {
    if (is_padding(r)) continue;
    for (Eigen::Index c = r + 1; c < p; ++c) {
      if (is_padding(c)) continue;
      if (g.has_edge(node_ids[r], node_ids[c])) a(r, c) = a(c, r) = 1.0;
    }
  }
  const Eigen::VectorXd inv_sqrt_deg = a.rowwise().sum().array().rsqrt();
  return inv_sqrt_deg.asDiagonal() * a * inv_sqrt_deg.asDiagonal();
}

// Raw dot similarity of `target` against each subgraph node, min-max
// normalized within the vector (all-equal -> all 1.0).
inline Eigen::RowVectorXd similarity_vector(const AttributedGraph& g, NodeId target,
                                            const std::vector<NodeId>& node_ids) {
  const auto p = static_cast<Eigen::Index>(node_ids.size());
  Eigen::RowVectorXd s(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    s(k) = g.attribute_row(target).dot(g.attribute_row(node_ids[k]));
  }
  const double lo = s.minCoeff();
  const double hi = s.maxCoeff();
  if (hi > lo) {
    s = (s.array() - lo) / (hi - lo);
  } else {
    s.setOnes();
  }
  return s;
}

// `view_graph` supplies the induced adjacency. Similarities use the original
// attribute rows, before anonymization.
inline SubgraphPair build_pair(const AttributedGraph& view_graph, std::vector<NodeId> node_ids,
                               NodeId target, Polarity polarity, View view) {
  if (node_ids.empty()) throw InternalError("build_pair: empty node list");
  for (NodeId id : node_ids) {
    if (id >= view_graph.num_nodes()) throw InternalError("build_pair: node id out of range");
  }
  if (target >= view_graph.num_nodes()) throw InternalError("build_pair: target out of range");
  SubgraphPair pair;
  pair.target = target;
  pair.adj_norm = normalized_subgraph_adjacency(view_graph, node_ids);
  pair.sim_vector = similarity_vector(view_graph, target, node_ids);
  pair.node_ids = std::move(node_ids);
  pair.view = view;
  pair.polarity = polarity;
  return pair;
}

// Negative pair for `target` that reuses another target's positive subgraph.
inline SubgraphPair as_negative_for(const AttributedGraph& view_graph, const SubgraphPair& donor,
                                    NodeId target) {
  SubgraphPair pair = donor;
  pair.target = target;
  pair.polarity = Polarity::kNegative;
  pair.sim_vector = similarity_vector(view_graph, target, donor.node_ids);
  return pair;
}

struct TargetPairs {
  SubgraphPair pos_dense;
  SubgraphPair neg_dense;
  SubgraphPair pos_spar;
  SubgraphPair neg_spar;
};

// RNG streams for the two views.
inline constexpr std::uint64_t kDenseSampleStream = 0xd15e;
inline constexpr std::uint64_t kSparSampleStream = 0x5ba2;

// Samples the four pairs of every batch target. The negative pair of the
// target at position i is the positive subgraph of position (i + 1) mod B, per
// view. Each target's walks use a lane RNG keyed by (seed, target, round).
inline std::vector<TargetPairs> make_batch_pairs(const AttributedGraph& dense,
                                                 const AttributedGraph& spar,
                                                 std::span<const NodeId> batch,
                                                 const SamplerConfig& cfg, std::uint64_t round,
                                                 std::size_t threads = 1) {
  if (batch.size() < 2) throw ConfigError("a contrast batch needs at least 2 targets");
  const std::size_t b = batch.size();
  std::vector<SubgraphPair> pos_dense(b);
  std::vector<SubgraphPair> pos_spar(b);
  parallel_for(b, threads, [&](std::size_t i) {
    const NodeId t = batch[i];
    Rng dense_rng = lane_rng(cfg.rng_seed, kDenseSampleStream, t, round);
    Rng spar_rng = lane_rng(cfg.rng_seed, kSparSampleStream, t, round);
    pos_dense[i] = build_pair(dense, rwr_sample(dense, t, cfg, dense_rng), t,
                              Polarity::kPositive, View::kDense);
    pos_spar[i] = build_pair(spar, rwr_sample(spar, t, cfg, spar_rng), t,
                             Polarity::kPositive, View::kSpar);
  });
  std::vector<TargetPairs> out(b);
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t donor = (i + 1) % b;
    out[i].neg_dense = as_negative_for(dense, pos_dense[donor], batch[i]);
    out[i].neg_spar = as_negative_for(spar, pos_spar[donor], batch[i]);
  }
  for (std::size_t i = 0; i < b; ++i) {
    out[i].pos_dense = std::move(pos_dense[i]);
    out[i].pos_spar = std::move(pos_spar[i]);
  }
  return out;
}

}  // namespace scala
