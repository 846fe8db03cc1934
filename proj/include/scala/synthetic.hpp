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

#include <cstdint>
#include <vector>

#include "scala/common.hpp"
#include "scala/graph.hpp"

namespace scala {

// Homophilous attributed graph: nodes belong to communities, link mostly
// within them, and switch on binary attributes drawn mostly from their
// community's block of features.
struct SyntheticConfig {
  std::uint32_t nodes = 500;
  std::uint32_t communities = 5;
  std::uint32_t attributes = 100;
  double avg_degree = 6.0;
  double mixing = 0.05;          // fraction of edges placed across communities
  double topic_density = 0.3;    // P(feature on) inside the own block
  double noise_density = 0.01;   // P(feature on) elsewhere
  std::uint64_t seed = 0;

  void validate() const {
    if (nodes < 2 || communities < 1 || communities > nodes || attributes < communities) {
      throw ConfigError("synthetic graph needs nodes >= 2, 1 <= communities <= nodes, "
                        "attributes >= communities");
    }
  }
};

inline NodeId community_of(NodeId node, const SyntheticConfig& cfg) {
  return node % cfg.communities;
}

inline AttributedGraph make_synthetic_graph(const SyntheticConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const std::uint32_t n = cfg.nodes;
  const std::uint32_t block = cfg.attributes / cfg.communities;

  AttributeMatrix x = AttributeMatrix::Zero(n, cfg.attributes);
  for (NodeId i = 0; i < n; ++i) {
    const std::uint32_t lo = community_of(i, cfg) * block;
    for (std::uint32_t c = 0; c < cfg.attributes; ++c) {
      const bool own = c >= lo && c < lo + block;
      if (uniform01(rng) < (own ? cfg.topic_density : cfg.noise_density)) x(i, c) = 1.0;
    }
    // Guarantee at least one own-topic feature.
    x(i, lo + uniform_index(rng, block)) = 1.0;
  }

  std::vector<std::vector<NodeId>> members(cfg.communities);
  for (NodeId i = 0; i < n; ++i) members[community_of(i, cfg)].push_back(i);

  const auto target_edges = static_cast<std::size_t>(cfg.avg_degree * n / 2.0);
  std::vector<Edge> edges;
  edges.reserve(target_edges + n);
  // A ring per community keeps every node attached.
  for (const auto& group : members) {
    for (std::size_t k = 0; k + 1 < group.size(); ++k) edges.emplace_back(group[k], group[k + 1]);
  }
  while (edges.size() < target_edges) {
    const NodeId u = static_cast<NodeId>(uniform_index(rng, n));
    NodeId v = 0;
    if (uniform01(rng) < cfg.mixing) {
      v = static_cast<NodeId>(uniform_index(rng, n));
    } else {
      const auto& group = members[community_of(u, cfg)];
      v = group[uniform_index(rng, group.size())];
    }
    if (u != v) edges.emplace_back(u, v);
  }
  return AttributedGraph(edges, std::move(x));
}

}  // namespace scala
