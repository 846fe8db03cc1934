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

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "scala/graph.hpp"

namespace scala::io {

// Shortest decimal text that parses back to the identical double.
inline std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

// CSV of n rows x f numeric cells.
inline AttributeMatrix read_attributes(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (rows == 0) cols = cells.size();
    if (cells.size() != cols) {
      throw ParseError(path.string() + ": row " + std::to_string(rows) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(cols));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_number(cells[c], v) || !std::isfinite(v)) {
        throw ParseError(path.string() + ": non-numeric attribute at row " +
                         std::to_string(rows) + ", col " + std::to_string(c) + " ('" +
                         std::string(cells[c]) + "')");
      }
      values.push_back(v);
    }
    ++rows;
  }
  AttributeMatrix x(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) x(r, c) = values[r * cols + c];
  }
  return x;
}

struct EdgeListFile {
  std::vector<Edge> edges;
  std::size_t self_loops = 0;
  NodeId max_id = 0;
};

// Whitespace-separated "src dst" pairs; self-loops are counted and dropped.
inline EdgeListFile read_edges(const std::filesystem::path& path) {
  auto in = open_input(path);
  EdgeListFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_whitespace(line);
    if (tokens.empty() || tokens.front().starts_with('#')) continue;
    NodeId u = 0;
    NodeId v = 0;
    if (tokens.size() != 2 || !parse_number(tokens[0], u) || !parse_number(tokens[1], v)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected two non-negative integer node ids");
    }
    if (u == v) {
      ++out.self_loops;
      continue;
    }
    out.max_id = std::max({out.max_id, u, v});
    out.edges.emplace_back(u, v);
  }
  return out;
}

struct LoadedGraph {
  AttributedGraph graph;
  std::size_t self_loops_dropped = 0;
};

inline LoadedGraph load_graph(const std::filesystem::path& edges_path,
                              const std::filesystem::path& attrs_path) {
  AttributeMatrix x = read_attributes(attrs_path);
  EdgeListFile edges = read_edges(edges_path);
  if (!edges.edges.empty() && edges.max_id >= static_cast<std::size_t>(x.rows())) {
    throw MalformedInputError(edges_path.string() + ": node id " +
                              std::to_string(edges.max_id) + " >= n=" +
                              std::to_string(x.rows()) + " implied by " +
                              attrs_path.string());
  }
  return {AttributedGraph(edges.edges, std::move(x)), edges.self_loops};
}

inline void write_edges(const std::filesystem::path& path, const std::vector<Edge>& edges) {
  auto out = open_output(path);
  for (const auto& [u, v] : edges) out << u << '\t' << v << '\n';
}

inline void write_edges(const std::filesystem::path& path, const AttributedGraph& g) {
  write_edges(path, g.edge_list());
}

inline void write_attributes(const std::filesystem::path& path, const AttributeMatrix& x) {
  auto out = open_output(path);
  std::string line;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (c > 0) line += ',';
      line += format_double(x(r, c));
    }
    line += '\n';
    out << line;
  }
}

inline void write_labels(const std::filesystem::path& path, const AnomalyLabels& labels) {
  auto out = open_output(path);
  out << "node_id,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << i << ',' << static_cast<int>(labels.kinds[i]) << '\n';
  }
}

inline AnomalyLabels read_labels(const std::filesystem::path& path, std::size_t n) {
  auto in = open_input(path);
  AnomalyLabels labels(n);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (line_no == 1 && cells.size() == 2 && cells[0] == "node_id") continue;
    std::size_t id = 0;
    int label = 0;
    if (cells.size() != 2 || !parse_number(cells[0], id) || !parse_number(cells[1], label) ||
        label < 0 || label > 2) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 'node_id,label' with label in {0,1,2}");
    }
    if (id >= n) {
      throw MalformedInputError(path.string() + ": node id " + std::to_string(id) +
                                " >= n=" + std::to_string(n));
    }
    labels.kinds[id] = static_cast<AnomalyKind>(label);
  }
  return labels;
}

}  // namespace scala::io
