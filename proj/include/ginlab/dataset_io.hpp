// Copyright 2026 The ginlab Authors
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

// Dataset ingestion: the TU Dortmund text layout and a small JSON format for
// synthetic fixtures.

#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ginlab/error.hpp"
#include "ginlab/graph.hpp"
#include "json.hpp"

namespace ginlab {

struct LoadOptions {
  bool allow_self_loops = false;
};

namespace detail {

struct NumberedLine {
  std::size_t line_no;
  std::string text;
};

inline std::vector<NumberedLine> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::vector<NumberedLine> lines;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    lines.push_back({line_no, text});
  }
  return lines;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline long long parse_int(std::string_view token, const std::filesystem::path& file,
                           std::size_t line_no) {
  token = trim(token);
  long long value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end || token.empty()) {
    throw FormatError(file.string() + ":" + std::to_string(line_no) + ": expected an integer, got '" +
                      std::string(token) + "'");
  }
  return value;
}

inline std::vector<long long> read_int_column(const std::filesystem::path& path) {
  std::vector<long long> out;
  for (const auto& [line_no, text] : read_lines(path)) {
    // Some TU files carry several comma-separated columns; the first is the value.
    const auto comma = text.find(',');
    out.push_back(parse_int(std::string_view(text).substr(0, comma), path, line_no));
  }
  return out;
}

/// Maps sorted distinct raw values onto 0..k-1.
inline std::map<long long, std::size_t> contiguous_ids(const std::vector<long long>& raw) {
  std::map<long long, std::size_t> ids;
  for (long long v : raw) ids.emplace(v, 0);
  std::size_t next = 0;
  for (auto& [v, id] : ids) id = next++;
  return ids;
}

}  // namespace detail

/// Loads `<prefix>_A.txt`, `<prefix>_graph_indicator.txt`,
/// `<prefix>_graph_labels.txt` and optionally `<prefix>_node_labels.txt`.
/// Node and graph ids become 0-based; edges are symmetrized and deduplicated;
/// node labels and graph labels are remapped onto contiguous ids.
inline Dataset load_tud_dataset(const std::filesystem::path& directory, const std::string& prefix,
                                LoadOptions options = {}) {
  namespace fs = std::filesystem;
  const fs::path a_file = directory / (prefix + "_A.txt");
  const fs::path indicator_file = directory / (prefix + "_graph_indicator.txt");
  const fs::path graph_label_file = directory / (prefix + "_graph_labels.txt");
  const fs::path node_label_file = directory / (prefix + "_node_labels.txt");
  for (const auto& required : {a_file, indicator_file, graph_label_file}) {
    if (!fs::exists(required)) throw LoadError("missing dataset file " + required.string());
  }

  const auto raw_graph_labels = detail::read_int_column(graph_label_file);
  const std::size_t num_graphs = raw_graph_labels.size();
  const auto indicator_lines = detail::read_lines(indicator_file);
  const std::size_t num_nodes = indicator_lines.size();

  // Global node -> (graph, local index), local indices in order of appearance.
  std::vector<std::size_t> node_graph(num_nodes);
  std::vector<std::size_t> node_local(num_nodes);
  std::vector<std::size_t> graph_sizes(num_graphs, 0);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    const auto& [line_no, text] = indicator_lines[i];
    const long long gid = detail::parse_int(text, indicator_file, line_no);
    if (gid < 1 || static_cast<std::size_t>(gid) > num_graphs) {
      throw FormatError(indicator_file.string() + ":" + std::to_string(line_no) + ": graph id " +
                        std::to_string(gid) + " outside 1.." + std::to_string(num_graphs));
    }
    node_graph[i] = static_cast<std::size_t>(gid - 1);
    node_local[i] = graph_sizes[node_graph[i]]++;
  }

  std::vector<std::vector<Edge>> graph_edges(num_graphs);
  for (const auto& [line_no, text] : detail::read_lines(a_file)) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
      throw FormatError(a_file.string() + ":" + std::to_string(line_no) +
                        ": expected 'i, j' edge line");
    }
    const long long i = detail::parse_int(std::string_view(text).substr(0, comma), a_file, line_no);
    const long long j = detail::parse_int(std::string_view(text).substr(comma + 1), a_file, line_no);
    for (long long id : {i, j}) {
      if (id < 1 || static_cast<std::size_t>(id) > num_nodes) {
        throw FormatError(a_file.string() + ":" + std::to_string(line_no) + ": node " +
                          std::to_string(id) + " outside 1.." + std::to_string(num_nodes));
      }
    }
    const std::size_t u = static_cast<std::size_t>(i - 1);
    const std::size_t v = static_cast<std::size_t>(j - 1);
    if (node_graph[u] != node_graph[v]) {
      throw FormatError(a_file.string() + ":" + std::to_string(line_no) + ": edge (" +
                        std::to_string(i) + ", " + std::to_string(j) +
                        ") connects nodes of different graphs");
    }
    if (u == v && !options.allow_self_loops) {
      throw FormatError(a_file.string() + ":" + std::to_string(line_no) + ": self-loop at node " +
                        std::to_string(i) + " (enable allow_self_loops to keep it)");
    }
    graph_edges[node_graph[u]].emplace_back(node_local[u], node_local[v]);
  }

  std::vector<std::vector<std::size_t>> graph_node_labels(num_graphs);
  std::size_t vocabulary = 1;
  if (fs::exists(node_label_file)) {
    const auto raw = detail::read_int_column(node_label_file);
    if (raw.size() != num_nodes) {
      throw FormatError(node_label_file.string() + ": has " + std::to_string(raw.size()) +
                        " labels for " + std::to_string(num_nodes) + " nodes");
    }
    const auto ids = detail::contiguous_ids(raw);
    vocabulary = ids.size();
    for (std::size_t g = 0; g < num_graphs; ++g) graph_node_labels[g].resize(graph_sizes[g]);
    for (std::size_t i = 0; i < num_nodes; ++i) {
      graph_node_labels[node_graph[i]][node_local[i]] = ids.at(raw[i]);
    }
  } else {
    for (std::size_t g = 0; g < num_graphs; ++g) graph_node_labels[g].assign(graph_sizes[g], 0);
  }

  const auto class_ids = detail::contiguous_ids(raw_graph_labels);
  std::vector<Graph> graphs;
  graphs.reserve(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    graphs.push_back(Graph::from_edges(
        graph_sizes[g], graph_edges[g],
        CategoricalFeatures{std::move(graph_node_labels[g]), vocabulary},
        class_ids.at(raw_graph_labels[g]), Graph::Options{options.allow_self_loops}));
  }
  return Dataset(std::move(graphs), class_ids.size(), prefix);
}

// ---------------------------------------------------------------------------
// JSON graph format:
//   {"graphs":[{"n":int,"edges":[[u,v],...],"node_labels":[...]|null,"label":int}],
//    "num_classes":int}

inline std::vector<Graph> graphs_from_json(const nlohmann::json& doc) {
  if (!doc.contains("graphs") || !doc["graphs"].is_array()) {
    throw FormatError("JSON graph document needs a \"graphs\" array");
  }
  std::size_t vocabulary = 1;
  for (const auto& g : doc["graphs"]) {
    if (g.contains("node_labels") && !g["node_labels"].is_null()) {
      for (const auto& l : g["node_labels"]) vocabulary = std::max(vocabulary, l.get<std::size_t>() + 1);
    }
  }
  if (doc.contains("vocabulary_size")) {
    vocabulary = std::max(vocabulary, doc["vocabulary_size"].get<std::size_t>());
  }
  std::vector<Graph> graphs;
  std::size_t index = 0;
  for (const auto& g : doc["graphs"]) {
    try {
      const auto n = g.at("n").get<std::size_t>();
      std::vector<Edge> edges;
      for (const auto& e : g.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw FormatError("edge must be a [u, v] pair");
        edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
      }
      CategoricalFeatures features = uniform_labels(n);
      features.vocabulary_size = vocabulary;
      if (g.contains("node_labels") && !g["node_labels"].is_null()) {
        features.labels = g["node_labels"].get<std::vector<std::size_t>>();
      }
      std::optional<std::size_t> label;
      if (g.contains("label") && !g["label"].is_null()) label = g["label"].get<std::size_t>();
      graphs.push_back(Graph::from_edges(n, edges, std::move(features), label));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("graph " + std::to_string(index) + ": " + e.what());
    } catch (const GraphInvariantError& e) {
      throw FormatError("graph " + std::to_string(index) + ": " + e.what());
    }
    ++index;
  }
  return graphs;
}

inline nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
  nlohmann::json out;
  out["n"] = g.num_nodes();
  out["edges"] = std::move(edges);
  out["node_labels"] = g.categorical().labels;
  out["label"] = g.label() ? nlohmann::json(*g.label()) : nlohmann::json(nullptr);
  return out;
}

inline nlohmann::json dataset_to_json(const Dataset& dataset) {
  nlohmann::json doc;
  doc["name"] = dataset.name();
  doc["num_classes"] = dataset.num_classes();
  doc["vocabulary_size"] = dataset.vocabulary_size();
  doc["graphs"] = nlohmann::json::array();
  for (const auto& g : dataset.graphs()) doc["graphs"].push_back(graph_to_json(g));
  return doc;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline std::vector<Graph> load_json_graphs(const std::filesystem::path& path) {
  return graphs_from_json(read_json_file(path));
}

inline Dataset load_json_dataset(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  auto graphs = graphs_from_json(doc);
  std::size_t num_classes = 0;
  if (doc.contains("num_classes")) {
    num_classes = doc["num_classes"].get<std::size_t>();
  } else {
    for (const auto& g : graphs) num_classes = std::max(num_classes, g.label().value_or(0) + 1);
  }
  const std::string name = doc.value("name", path.stem().string());
  return Dataset(std::move(graphs), num_classes, name);
}

inline void save_json_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  out << dataset_to_json(dataset).dump() << '\n';
}

}  // namespace ginlab
