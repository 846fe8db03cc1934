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

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "scala/graph.hpp"

namespace scala::testing {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("scala_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Erdos-Renyi graph with Gaussian attributes.
inline AttributedGraph random_graph(std::size_t n, std::size_t f, double edge_prob,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  AttributeMatrix x(n, f);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < f; ++c) x(i, c) = gauss(rng);
  }
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      if (coin(rng) < edge_prob) edges.emplace_back(i, j);
    }
  }
  return AttributedGraph(edges, std::move(x));
}

inline bool is_symmetric(const AttributedGraph& g) {
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    for (NodeId j : g.neighbors(i)) {
      if (j == i || !g.has_edge(j, i)) return false;
    }
  }
  return true;
}

inline bool lists_sorted_unique(const AttributedGraph& g) {
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const auto nb = g.neighbors(i);
    for (std::size_t k = 1; k < nb.size(); ++k) {
      if (nb[k - 1] >= nb[k]) return false;
    }
  }
  return true;
}

}  // namespace scala::testing
