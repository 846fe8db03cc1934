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
#include <array>
#include <cmath>
#include <filesystem>
#include <vector>

#include "scala/graph.hpp"
#include "scala/io.hpp"
#include "scala/sparsifier.hpp"

namespace scala {

// Distribution of per-node mean neighbor similarity, split by class.
struct HomophilyHistogram {
  static constexpr std::size_t kBins = 10;
  static constexpr double kBinWidth = 0.1;

  std::array<double, kBins> pct_normal{};
  std::array<double, kBins> pct_anomalous{};
  std::size_t n_normal = 0;
  std::size_t n_anomalous = 0;
  std::size_t isolated_normal = 0;
  std::size_t isolated_anomalous = 0;
  double mean_normal = 0.0;
  double mean_anomalous = 0.0;
  // NaN for isolated nodes.
  std::vector<double> node_mean;

  static std::size_t bin_of(double value) {
    const auto b = static_cast<std::ptrdiff_t>(std::floor(value * static_cast<double>(kBins)));
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(b, 0, kBins - 1));
  }
};

inline HomophilyHistogram homophily_stats(const AttributedGraph& g, const SimilarityIndex& sim,
                                          const AnomalyLabels& labels) {
  if (labels.size() != g.num_nodes() || sim.normalized.size() != g.num_directed_edges()) {
    throw InternalError("homophily_stats inputs disagree on graph shape");
  }
  HomophilyHistogram h;
  h.node_mean.assign(g.num_nodes(), std::nan(""));
  std::array<std::size_t, HomophilyHistogram::kBins> count_normal{};
  std::array<std::size_t, HomophilyHistogram::kBins> count_anomalous{};
  double sum_normal = 0.0;
  double sum_anomalous = 0.0;

  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const bool anomalous = labels.is_anomalous(i);
    const std::size_t deg = g.degree(i);
    if (deg == 0) {
      ++(anomalous ? h.isolated_anomalous : h.isolated_normal);
      continue;
    }
    double total = 0.0;
    for (std::size_t k = 0; k < deg; ++k) total += sim.normalized_at(g, i, k);
    const double mean = total / static_cast<double>(deg);
    h.node_mean[i] = mean;
    const std::size_t bin = HomophilyHistogram::bin_of(mean);
    if (anomalous) {
      ++count_anomalous[bin];
      ++h.n_anomalous;
      sum_anomalous += mean;
    } else {
      ++count_normal[bin];
      ++h.n_normal;
      sum_normal += mean;
    }
  }
  for (std::size_t b = 0; b < HomophilyHistogram::kBins; ++b) {
    if (h.n_normal > 0) h.pct_normal[b] = 100.0 * count_normal[b] / h.n_normal;
    if (h.n_anomalous > 0) h.pct_anomalous[b] = 100.0 * count_anomalous[b] / h.n_anomalous;
  }
  if (h.n_normal > 0) h.mean_normal = sum_normal / h.n_normal;
  if (h.n_anomalous > 0) h.mean_anomalous = sum_anomalous / h.n_anomalous;
  return h;
}

// CSV "bin_lo,bin_hi,pct_normal,pct_anomalous".
inline void write_histogram(const std::filesystem::path& path, const HomophilyHistogram& h) {
  auto out = io::open_output(path);
  out << "bin_lo,bin_hi,pct_normal,pct_anomalous\n";
  for (std::size_t b = 0; b < HomophilyHistogram::kBins; ++b) {
    out << io::format_double(b / 10.0) << ',' << io::format_double((b + 1) / 10.0) << ','
        << io::format_double(h.pct_normal[b]) << ',' << io::format_double(h.pct_anomalous[b])
        << '\n';
  }
}

}  // namespace scala
