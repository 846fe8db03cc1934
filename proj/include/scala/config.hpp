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

// JSON run configuration shared by the command-line tool. Unknown keys are
// rejected so a typo never silently falls back to a default.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"
#include "scala/common.hpp"
#include "scala/graph.hpp"
#include "scala/io.hpp"
#include "scala/pipeline.hpp"

namespace scala {

struct DatasetPaths {
  std::filesystem::path edges;
  std::filesystem::path attrs;
  std::filesystem::path labels;  // optional
};

struct RunConfig {
  DatasetPaths dataset;
  InjectionConfig injection;
  TrainConfig train;
  std::filesystem::path output_dir = "scala_out";
  std::filesystem::path checkpoint;  // empty: <output_dir>/checkpoint.json
  std::uint64_t seed = 0;

  // Copies the single run seed into every nested config.
  void propagate_seed() {
    injection.rng_seed = seed;
    train.rng_seed = seed;
  }

  std::filesystem::path checkpoint_path() const {
    return checkpoint.empty() ? output_dir / "checkpoint.json" : checkpoint;
  }

  void validate() const {
    train.validate();
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::string_view section,
                           std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) throw ConfigError(std::string(section) + " must be a JSON object");
  const std::set<std::string_view> allowed(known);
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key \"" + key + "\" in " + std::string(section));
    }
  }
}

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out, std::string_view section) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(section) + "." + key + " has the wrong type");
  }
}

inline const char* scope_name(NormalizationScope s) {
  return s == NormalizationScope::kFullRow ? "full_row" : "incident_edges";
}

}  // namespace detail

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  using detail::read_field;
  RunConfig cfg;
  detail::reject_unknown(j, "config",
                         {"dataset", "injection", "sampler", "train", "output_dir", "checkpoint",
                          "seed", "threads", "anomalies"});
  if (j.contains("dataset")) {
    const auto& d = j["dataset"];
    detail::reject_unknown(d, "dataset", {"edges", "attrs", "labels"});
    std::string edges, attrs, labels;
    read_field(d, "edges", edges, "dataset");
    read_field(d, "attrs", attrs, "dataset");
    read_field(d, "labels", labels, "dataset");
    cfg.dataset = {edges, attrs, labels};
  }
  if (j.contains("anomalies")) {
    std::uint32_t total = 0;
    read_field(j, "anomalies", total, "config");
    cfg.injection = InjectionConfig::for_total(total);
  }
  if (j.contains("injection")) {
    const auto& s = j["injection"];
    detail::reject_unknown(
        s, "injection",
        {"clique_size", "clique_count", "attribute_anomaly_count", "candidate_pool_size"});
    read_field(s, "clique_size", cfg.injection.clique_size, "injection");
    read_field(s, "clique_count", cfg.injection.clique_count, "injection");
    read_field(s, "attribute_anomaly_count", cfg.injection.attribute_anomaly_count, "injection");
    read_field(s, "candidate_pool_size", cfg.injection.candidate_pool_size, "injection");
  }
  if (j.contains("sampler")) {
    const auto& s = j["sampler"];
    detail::reject_unknown(s, "sampler", {"subgraph_size", "restart_prob", "max_steps"});
    read_field(s, "subgraph_size", cfg.train.subgraph_size, "sampler");
    read_field(s, "restart_prob", cfg.train.restart_prob, "sampler");
    read_field(s, "max_steps", cfg.train.max_steps, "sampler");
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    detail::reject_unknown(t, "train",
                           {"epochs", "batch_size", "learning_rate", "gamma", "lambda", "epsilon",
                            "rounds", "embedding_dim", "spar_target_from_dense",
                            "normalization"});
    read_field(t, "epochs", cfg.train.epochs, "train");
    read_field(t, "batch_size", cfg.train.batch_size, "train");
    read_field(t, "learning_rate", cfg.train.learning_rate, "train");
    read_field(t, "gamma", cfg.train.gamma, "train");
    read_field(t, "lambda", cfg.train.lambda, "train");
    read_field(t, "epsilon", cfg.train.epsilon, "train");
    read_field(t, "rounds", cfg.train.rounds, "train");
    read_field(t, "embedding_dim", cfg.train.embedding_dim, "train");
    read_field(t, "spar_target_from_dense", cfg.train.spar_target_from_dense, "train");
    std::string scope = detail::scope_name(cfg.train.normalization);
    read_field(t, "normalization", scope, "train");
    if (scope == "incident_edges") {
      cfg.train.normalization = NormalizationScope::kIncidentEdges;
    } else if (scope == "full_row") {
      cfg.train.normalization = NormalizationScope::kFullRow;
    } else {
      throw ConfigError("train.normalization must be \"incident_edges\" or \"full_row\"");
    }
  }
  std::string out = cfg.output_dir.string();
  read_field(j, "output_dir", out, "config");
  cfg.output_dir = out;
  std::string ckpt;
  read_field(j, "checkpoint", ckpt, "config");
  cfg.checkpoint = ckpt;
  read_field(j, "seed", cfg.seed, "config");
  read_field(j, "threads", cfg.train.threads, "config");
  cfg.propagate_seed();
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

// Every resolved value, defaults included. Thread count is left out because
// it never changes results.
inline nlohmann::json to_json(const RunConfig& cfg) {
  const auto& t = cfg.train;
  const auto& q = cfg.injection;
  return nlohmann::json{
      {"dataset",
       {{"edges", cfg.dataset.edges.string()},
        {"attrs", cfg.dataset.attrs.string()},
        {"labels", cfg.dataset.labels.string()}}},
      {"injection",
       {{"clique_size", q.clique_size},
        {"clique_count", q.clique_count},
        {"attribute_anomaly_count", q.attribute_anomaly_count},
        {"candidate_pool_size", q.candidate_pool_size}}},
      {"sampler",
       {{"subgraph_size", t.subgraph_size},
        {"restart_prob", t.restart_prob},
        {"max_steps", t.max_steps}}},
      {"train",
       {{"epochs", t.epochs},
        {"batch_size", t.batch_size},
        {"learning_rate", t.learning_rate},
        {"gamma", t.gamma},
        {"lambda", t.lambda},
        {"epsilon", t.epsilon},
        {"rounds", t.rounds},
        {"embedding_dim", t.embedding_dim},
        {"spar_target_from_dense", t.spar_target_from_dense},
        {"normalization", detail::scope_name(t.normalization)}}},
      {"output_dir", cfg.output_dir.string()},
      {"checkpoint", cfg.checkpoint.string()},
      {"seed", cfg.seed}};
}

}  // namespace scala
