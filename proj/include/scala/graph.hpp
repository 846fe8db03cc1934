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
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "scala/common.hpp"

namespace scala {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;
using AttributeMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Undirected, unweighted graph with a dense attribute row per node.
//
// Adjacency is stored as CSR with sorted, duplicate-free neighbor lists and no
// self-loops. Instances are immutable once built; every "mutation" (anomaly
// injection, sparsification) produces a new graph.
class AttributedGraph {
 public:
  AttributedGraph() = default;

  // Builds from an arbitrary undirected edge list: reversed and duplicate
  // pairs collapse, self-loops are ignored. Ids must be < attributes.rows().
  AttributedGraph(const std::vector<Edge>& edges, AttributeMatrix attributes)
      : AttributedGraph(edges, std::make_shared<const AttributeMatrix>(std::move(attributes))) {}

  // Shares an attribute matrix with other graphs over the same node set.
  AttributedGraph(const std::vector<Edge>& edges,
                  std::shared_ptr<const AttributeMatrix> attributes)
      : attributes_(std::move(attributes)) {
    const AttributeMatrix& x = *attributes_;
    const std::size_t n = static_cast<std::size_t>(x.rows());
    if (!x.allFinite()) {
      throw MalformedInputError("attribute matrix contains non-finite values");
    }
    std::vector<Edge> directed;
    directed.reserve(edges.size() * 2);
    for (const auto& [u, v] : edges) {
      if (u >= n || v >= n) {
        throw MalformedInputError("edge (" + std::to_string(u) + ", " +
                                  std::to_string(v) + ") references node >= n=" +
                                  std::to_string(n));
      }
      if (u == v) continue;
      directed.emplace_back(u, v);
      directed.emplace_back(v, u);
    }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

    offsets_.assign(n + 1, 0);
    for (const auto& e : directed) ++offsets_[e.first + 1];
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
    targets_.resize(directed.size());
    for (std::size_t k = 0; k < directed.size(); ++k) targets_[k] = directed[k].second;
  }

  std::size_t num_nodes() const { return static_cast<std::size_t>(attributes_->rows()); }
  std::size_t num_edges() const { return targets_.size() / 2; }
  std::size_t num_attributes() const { return static_cast<std::size_t>(attributes_->cols()); }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {targets_.data() + offsets_[i], targets_.data() + offsets_[i + 1]};
  }
  std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }

  bool has_edge(NodeId i, NodeId j) const {
    const auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), j);
  }

  // Position of j inside neighbors(i), or degree(i) when absent.
  std::size_t neighbor_slot(NodeId i, NodeId j) const {
    const auto nb = neighbors(i);
    const auto it = std::lower_bound(nb.begin(), nb.end(), j);
    if (it == nb.end() || *it != j) return nb.size();
    return static_cast<std::size_t>(it - nb.begin());
  }

  // Offset of i's first entry in the flat directed-edge arrays.
  std::size_t edge_offset(NodeId i) const { return offsets_[i]; }
  std::size_t num_directed_edges() const { return targets_.size(); }

  const AttributeMatrix& attributes() const { return *attributes_; }
  const std::shared_ptr<const AttributeMatrix>& shared_attributes() const { return attributes_; }
  auto attribute_row(NodeId i) const { return attributes_->row(i); }

  // Each undirected edge once, as (i, j) with i < j, in ascending order.
  std::vector<Edge> edge_list() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (NodeId i = 0; i < num_nodes(); ++i) {
      for (NodeId j : neighbors(i)) {
        if (i < j) out.emplace_back(i, j);
      }
    }
    return out;
  }

  bool operator==(const AttributedGraph& other) const {
    const AttributeMatrix& a = *attributes_;
    const AttributeMatrix& b = *other.attributes_;
    return offsets_ == other.offsets_ && targets_ == other.targets_ &&
           a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  }

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> targets_;
  std::shared_ptr<const AttributeMatrix> attributes_ =
      std::make_shared<const AttributeMatrix>();
};

enum class AnomalyKind : std::uint8_t {
  kNormal = 0,
  kStructural = 1,
  kAttribute = 2,
};

struct AnomalyLabels {
  std::vector<AnomalyKind> kinds;

  AnomalyLabels() = default;
  explicit AnomalyLabels(std::size_t n) : kinds(n, AnomalyKind::kNormal) {}

  std::size_t size() const { return kinds.size(); }
  bool is_anomalous(NodeId i) const { return kinds[i] != AnomalyKind::kNormal; }

  std::size_t count(AnomalyKind kind) const {
    return static_cast<std::size_t>(std::count(kinds.begin(), kinds.end(), kind));
  }
  std::size_t num_anomalies() const { return size() - count(AnomalyKind::kNormal); }

  // y_i in {0, 1}.
  std::vector<int> binary() const {
    std::vector<int> y(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i) y[i] = kinds[i] != AnomalyKind::kNormal;
    return y;
  }

  bool operator==(const AnomalyLabels&) const = default;
};

struct InjectionConfig {
  std::uint32_t clique_size = 15;
  std::uint32_t clique_count = 5;
  std::uint32_t attribute_anomaly_count = 75;
  std::uint32_t candidate_pool_size = 50;
  std::uint64_t rng_seed = 0;

  // Clique and attribute counts for a total anomaly budget, split equally.
  static InjectionConfig for_total(std::uint32_t total_anomalies,
                                   std::uint32_t clique_size = 15,
                                   std::uint32_t candidate_pool_size = 50) {
    InjectionConfig cfg;
    cfg.clique_size = clique_size;
    cfg.clique_count = total_anomalies / (2 * clique_size);
    cfg.attribute_anomaly_count = total_anomalies - cfg.clique_count * clique_size;
    cfg.candidate_pool_size = candidate_pool_size;
    return cfg;
  }

  void validate(std::size_t n) const {
    if (clique_size < 2) throw ConfigError("clique_size must be >= 2");
    if (candidate_pool_size < 1) throw ConfigError("candidate_pool_size must be >= 1");
    const std::uint64_t needed =
        std::uint64_t{clique_size} * clique_count + attribute_anomaly_count;
    if (needed > n) {
      throw ConfigError("injection needs " + std::to_string(needed) +
                        " distinct nodes but graph has " + std::to_string(n));
    }
  }
};

// Plants `clique_count` disjoint cliques of `clique_size` uniformly chosen
// nodes. Existing edges are kept; attributes are untouched.
inline std::pair<AttributedGraph, AnomalyLabels> inject_structural(
    const AttributedGraph& g, const InjectionConfig& cfg) {
  const std::size_t n = g.num_nodes();
  cfg.validate(n);
  AnomalyLabels labels(n);
  if (cfg.clique_count == 0) return {g, labels};

  Rng rng(cfg.rng_seed);
  const std::uint32_t members = cfg.clique_size * cfg.clique_count;
  const auto chosen = sample_without_replacement(static_cast<std::uint32_t>(n), members, rng);

  std::vector<Edge> edges = g.edge_list();
  for (std::uint32_t c = 0; c < cfg.clique_count; ++c) {
    const auto first = chosen.begin() + std::ptrdiff_t{c} * cfg.clique_size;
    for (auto a = first; a != first + cfg.clique_size; ++a) {
      labels.kinds[*a] = AnomalyKind::kStructural;
      for (auto b = a + 1; b != first + cfg.clique_size; ++b) edges.emplace_back(*a, *b);
    }
  }
  return {AttributedGraph(edges, g.shared_attributes()), std::move(labels)};
}

// Replaces the attribute row of `attribute_anomaly_count` nodes not flagged in
// `exclude` with the row of the farthest (Euclidean) node among
// `candidate_pool_size` distinct candidates. Distances are measured against the
// attributes as they were before this call. Adjacency is untouched.
//
// The returned labels are `exclude` plus the new attribute anomalies.
inline std::pair<AttributedGraph, AnomalyLabels> inject_attribute(
    const AttributedGraph& g, const InjectionConfig& cfg, const AnomalyLabels& exclude) {
  const std::size_t n = g.num_nodes();
  if (exclude.size() != n) throw ConfigError("exclude labels length differs from node count");
  if (cfg.candidate_pool_size < 1) throw ConfigError("candidate_pool_size must be >= 1");
  AnomalyLabels labels = exclude;
  if (cfg.attribute_anomaly_count == 0) return {g, labels};

  std::vector<NodeId> unlabeled;
  for (NodeId i = 0; i < n; ++i) {
    if (!exclude.is_anomalous(i)) unlabeled.push_back(i);
  }
  if (unlabeled.size() < cfg.attribute_anomaly_count) {
    throw ConfigError("only " + std::to_string(unlabeled.size()) +
                      " unlabeled nodes for " +
                      std::to_string(cfg.attribute_anomaly_count) + " attribute anomalies");
  }
  if (cfg.candidate_pool_size > n - 1) {
    throw ConfigError("candidate_pool_size exceeds the number of other nodes");
  }

  // Separate stream from structural injection under the same seed.
  Rng rng(splitmix64(cfg.rng_seed ^ 0xa77e1b07eULL));
  const auto victim_slots = sample_without_replacement(
      static_cast<std::uint32_t>(unlabeled.size()), cfg.attribute_anomaly_count, rng);

  const AttributeMatrix& original = g.attributes();
  AttributeMatrix perturbed = original;
  for (const std::uint32_t slot : victim_slots) {
    const NodeId victim = unlabeled[slot];
    // Candidates drawn from all nodes except the victim.
    auto draws = sample_without_replacement(static_cast<std::uint32_t>(n - 1),
                                            cfg.candidate_pool_size, rng);
    NodeId best = victim;
    double best_dist = -1.0;
    for (std::uint32_t d : draws) {
      const NodeId c = d >= victim ? d + 1 : d;
      const double dist = (original.row(victim) - original.row(c)).squaredNorm();
      if (dist > best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    perturbed.row(victim) = original.row(best);
    labels.kinds[victim] = AnomalyKind::kAttribute;
  }
  return {AttributedGraph(g.edge_list(), std::move(perturbed)), std::move(labels)};
}

// Both injections in sequence, as used by the benchmark protocol.
inline std::pair<AttributedGraph, AnomalyLabels> inject_anomalies(
    const AttributedGraph& g, const InjectionConfig& cfg) {
  cfg.validate(g.num_nodes());
  auto [structural, labels] = inject_structural(g, cfg);
  return inject_attribute(structural, cfg, labels);
}

}  // namespace scala
