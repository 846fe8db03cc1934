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

#include <cmath>
#include <filesystem>
#include <limits>
#include <vector>

#include "scala/graph.hpp"
#include "scala/io.hpp"

namespace scala {

enum class NormalizationScope {
  kIncidentEdges,  // min/max over the node's incident edges only
  kFullRow,        // min/max over all n entries of the dense similarity row
};

// Dot-product attribute similarity on every directed edge of a graph, with
// per-row min-max normalization. Entries are laid out in the graph's CSR
// order: entry k of node i belongs to neighbors(i)[k].
struct SimilarityIndex {
  std::vector<double> raw;
  std::vector<double> normalized;
  std::vector<double> row_min;
  std::vector<double> row_max;
  NormalizationScope scope = NormalizationScope::kIncidentEdges;

  double raw_at(const AttributedGraph& g, NodeId i, std::size_t slot) const {
    return raw[g.edge_offset(i) + slot];
  }
  double normalized_at(const AttributedGraph& g, NodeId i, std::size_t slot) const {
    return normalized[g.edge_offset(i) + slot];
  }
};

// Degenerate rows (max == min) normalize to 1.0.
inline double min_max(double value, double lo, double hi) {
  return hi > lo ? (value - lo) / (hi - lo) : 1.0;
}

inline SimilarityIndex edge_similarities(
    const AttributedGraph& g, NormalizationScope scope = NormalizationScope::kIncidentEdges) {
  const std::size_t n = g.num_nodes();
  const AttributeMatrix& x = g.attributes();
  SimilarityIndex sim;
  sim.scope = scope;
  sim.raw.resize(g.num_directed_edges());
  sim.normalized.resize(g.num_directed_edges());
  sim.row_min.assign(n, 0.0);
  sim.row_max.assign(n, 0.0);

  for (NodeId i = 0; i < n; ++i) {
    const auto nb = g.neighbors(i);
    const std::size_t base = g.edge_offset(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      // Reuse the mirrored entry so raw(i,j) == raw(j,i) bit-for-bit.
      const NodeId j = nb[k];
      sim.raw[base + k] = j < i ? sim.raw[g.edge_offset(j) + g.neighbor_slot(j, i)]
                                : x.row(i).dot(x.row(j));
    }
  }

  for (NodeId i = 0; i < n; ++i) {
    const std::size_t base = g.edge_offset(i);
    const std::size_t deg = g.degree(i);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    if (scope == NormalizationScope::kFullRow) {
      const Eigen::VectorXd row = x * x.row(i).transpose();
      lo = row.minCoeff();
      hi = row.maxCoeff();
    } else {
      for (std::size_t k = 0; k < deg; ++k) {
        lo = std::min(lo, sim.raw[base + k]);
        hi = std::max(hi, sim.raw[base + k]);
      }
    }
    if (deg == 0 && scope == NormalizationScope::kIncidentEdges) lo = hi = 0.0;
    sim.row_min[i] = lo;
    sim.row_max[i] = hi;
    for (std::size_t k = 0; k < deg; ++k) {
      sim.normalized[base + k] = min_max(sim.raw[base + k], lo, hi);
    }
  }
  return sim;
}

// The spar-view: edges whose normalized similarity exceeds epsilon from both
// endpoints' rows, plus how many incident edges each node lost.
struct SparsifiedView {
  AttributedGraph graph;
  std::vector<std::size_t> removed_count;
  double epsilon = 0.0;
};

inline SparsifiedView sparsify(const AttributedGraph& g, const SimilarityIndex& sim,
                               double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
  if (sim.normalized.size() != g.num_directed_edges()) {
    throw InternalError("similarity index was built for a different graph");
  }
  const std::size_t n = g.num_nodes();
  std::vector<Edge> kept;
  for (NodeId i = 0; i < n; ++i) {
    const auto nb = g.neighbors(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const NodeId j = nb[k];
      if (j < i) continue;
      const bool forward = sim.normalized_at(g, i, k) > epsilon;
      const bool backward = sim.normalized_at(g, j, g.neighbor_slot(j, i)) > epsilon;
      if (forward && backward) kept.emplace_back(i, j);
    }
  }
  SparsifiedView view{AttributedGraph(kept, g.shared_attributes()), {}, epsilon};
  view.removed_count.resize(n);
  for (NodeId i = 0; i < n; ++i) {
    view.removed_count[i] = g.degree(i) - view.graph.degree(i);
  }
  return view;
}

// ||a_i - a_i^spar||: the adjacency rows are binary and the spar row is a
// subset, so the norm is sqrt(#removed incident edges).
inline std::vector<double> spar_scores(const AttributedGraph& g, const SparsifiedView& view) {
  if (view.removed_count.size() != g.num_nodes()) {
    throw InternalError("sparsified view was built for a different graph");
  }
  std::vector<double> scores(g.num_nodes());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = std::sqrt(static_cast<double>(view.removed_count[i]));
  }
  return scores;
}

// CSV "i,j,raw,normalized", one line per directed edge.
inline void write_similarities(const std::filesystem::path& path, const AttributedGraph& g,
                               const SimilarityIndex& sim) {
  auto out = io::open_output(path);
  out << "i,j,raw,normalized\n";
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const auto nb = g.neighbors(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      out << i << ',' << nb[k] << ',' << io::format_double(sim.raw_at(g, i, k)) << ','
          << io::format_double(sim.normalized_at(g, i, k)) << '\n';
    }
  }
}

}  // namespace scala
