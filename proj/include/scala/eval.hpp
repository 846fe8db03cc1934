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
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "scala/common.hpp"
#include "scala/io.hpp"

namespace scala {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct MetricsReport {
  double auc = 0.5;
  std::vector<RocPoint> roc_points;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

namespace detail {

inline void check_binary_problem(std::span<const double> scores, std::span<const int> labels,
                                 std::size_t& n_pos, std::size_t& n_neg) {
  if (scores.size() != labels.size()) throw InternalError("scores and labels differ in length");
  n_pos = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(),
                                                 [](int y) { return y != 0; }));
  n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw UndefinedMetricError("AUC needs at least one positive and one negative label");
  }
}

}  // namespace detail

// Mann-Whitney U / (n_pos n_neg) with tied scores given average ranks, i.e.
// P(score of a random anomaly > score of a random normal node) + P(tie)/2.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  detail::check_binary_problem(scores, labels, n_pos, n_neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t positives = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      positives += labels[order[j]] != 0;
      ++j;
    }
    // Ranks i+1..j share their mean.
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    positive_rank_sum += mean_rank * static_cast<double>(positives);
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

// ROC vertices for thresholds at every distinct score, descending, from (0,0)
// to (1,1). A node is flagged when its score >= threshold.
inline std::vector<RocPoint> roc_points(std::span<const double> scores,
                                        std::span<const int> labels) {
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  detail::check_binary_problem(scores, labels, n_pos, n_neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> points{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] != 0 ? tp : fp) += 1;
      ++i;
    }
    points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                      static_cast<double>(tp) / static_cast<double>(n_pos), threshold});
  }
  return points;
}

inline double trapezoid_area(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    area += (points[k].fpr - points[k - 1].fpr) * (points[k].tpr + points[k - 1].tpr) / 2.0;
  }
  return area;
}

inline MetricsReport evaluate(std::span<const double> scores, std::span<const int> labels) {
  MetricsReport report;
  report.auc = auc(scores, labels);
  report.roc_points = roc_points(scores, labels);
  detail::check_binary_problem(scores, labels, report.n_pos, report.n_neg);
  return report;
}

// 64-bit FNV-1a, used to fingerprint the resolved configuration.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline nlohmann::json metrics_json(const MetricsReport& report, std::uint64_t seed,
                                   const nlohmann::json& config) {
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a(config.dump())));
  return nlohmann::json{{"auc", report.auc},       {"n_pos", report.n_pos},
                        {"n_neg", report.n_neg},   {"seed", seed},
                        {"config_hash", hash},     {"config", config}};
}

// CSV "fpr,tpr,threshold"; the leading point's threshold is "inf".
inline void write_roc(const std::filesystem::path& path, std::span<const RocPoint> points) {
  auto out = io::open_output(path);
  out << "fpr,tpr,threshold\n";
  for (const auto& p : points) {
    out << io::format_double(p.fpr) << ',' << io::format_double(p.tpr) << ','
        << io::format_double(p.threshold) << '\n';
  }
}

}  // namespace scala
