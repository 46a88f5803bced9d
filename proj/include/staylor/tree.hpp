/*
 * Copyright 2026 The staylor Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "staylor/error.hpp"
#include "staylor/table.hpp"

namespace staylor {

// One node of a binary regression tree. feature < 0 marks a leaf.
// Internal nodes route `x <= threshold` to the left child; missing cells
// follow default_left.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double value = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  bool default_left = true;

  bool is_leaf() const { return feature < 0; }

  static TreeNode leaf(double value) {
    TreeNode n;
    n.value = value;
    return n;
  }

  static TreeNode split(std::int32_t feature, double threshold, std::int32_t left,
                        std::int32_t right, bool default_left) {
    TreeNode n;
    n.feature = feature;
    n.threshold = threshold;
    n.left = left;
    n.right = right;
    n.default_left = default_left;
    return n;
  }
};

// Single-rooted binary tree stored as a flat node array; node 0 is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const Cell> x) const {
    std::size_t idx = 0;
    while (true) {
      const TreeNode& n = nodes[idx];
      if (n.is_leaf()) return n.value;
      const Cell& c = x[static_cast<std::size_t>(n.feature)];
      const bool go_left = c ? (*c <= n.threshold) : n.default_left;
      idx = static_cast<std::size_t>(go_left ? n.left : n.right);
    }
  }
};

// Additive ensemble: prediction = base_score + sum of per-tree leaf values.
class TreeEnsemble {
 public:
  double base_score = 0.0;
  std::vector<std::string> feature_names;
  std::vector<Tree> trees;

  std::size_t num_features() const { return feature_names.size(); }

  double predict(std::span<const Cell> x) const {
    if (x.size() != feature_names.size()) {
      throw DimensionError("instance has " + std::to_string(x.size()) +
                           " cells, model expects " +
                           std::to_string(feature_names.size()));
    }
    double out = base_score;
    for (const Tree& t : trees) out += t.predict(x);
    return out;
  }

  ModelFn predictor() const {
    return [this](std::span<const Cell> x) { return predict(x); };
  }

  // Checks that every tree is a single-rooted acyclic binary structure whose
  // node ids are each reachable exactly once, and that split features lie in
  // [0, K).
  void validate() const {
    for (std::size_t t = 0; t < trees.size(); ++t) {
      const auto& nodes = trees[t].nodes;
      if (nodes.empty()) {
        throw SchemaError("tree " + std::to_string(t) + " has no nodes");
      }
      std::vector<bool> visited(nodes.size(), false);
      std::vector<std::size_t> stack{0};
      std::size_t count = 0;
      while (!stack.empty()) {
        const std::size_t idx = stack.back();
        stack.pop_back();
        if (visited[idx]) {
          throw SchemaError("tree " + std::to_string(t) + ": node " +
                            std::to_string(idx) + " is reached twice (cycle or shared child)");
        }
        visited[idx] = true;
        ++count;
        const TreeNode& n = nodes[idx];
        if (n.is_leaf()) continue;
        if (n.feature >= static_cast<std::int32_t>(num_features())) {
          throw SchemaError("tree " + std::to_string(t) + ": split feature " +
                            std::to_string(n.feature) + " out of range");
        }
        if (!std::isfinite(n.threshold)) {
          throw SchemaError("tree " + std::to_string(t) + ": non-finite threshold");
        }
        for (const std::int32_t child : {n.left, n.right}) {
          if (child < 0 || child >= static_cast<std::int32_t>(nodes.size())) {
            throw SchemaError("tree " + std::to_string(t) + ": child id " +
                              std::to_string(child) + " out of range");
          }
          stack.push_back(static_cast<std::size_t>(child));
        }
      }
      if (count != nodes.size()) {
        throw SchemaError("tree " + std::to_string(t) + ": unreachable nodes");
      }
    }
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) throw SchemaError(where + ": unknown field '" + item.key() + "'");
  }
}

}  // namespace detail

inline nlohmann::json model_to_json(const TreeEnsemble& model) {
  nlohmann::json doc;
  doc["base_score"] = model.base_score;
  doc["feature_names"] = model.feature_names;
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"leaf", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"default_left", n.default_left}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  doc["trees"] = std::move(trees);
  return doc;
}

inline TreeEnsemble model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("model document must be a JSON object");
  detail::reject_unknown_keys(doc, {"base_score", "feature_names", "trees"}, "model");
  TreeEnsemble model;
  if (!doc.contains("base_score") || !doc["base_score"].is_number()) {
    throw SchemaError("model: missing numeric 'base_score'");
  }
  model.base_score = doc["base_score"].get<double>();
  if (!doc.contains("feature_names") || !doc["feature_names"].is_array()) {
    throw SchemaError("model: missing 'feature_names' array");
  }
  for (const auto& n : doc["feature_names"]) {
    if (!n.is_string()) throw SchemaError("model: feature names must be strings");
    model.feature_names.push_back(n.get<std::string>());
  }
  if (!doc.contains("trees") || !doc["trees"].is_array()) {
    throw SchemaError("model: missing 'trees' array");
  }
  for (const auto& tree_doc : doc["trees"]) {
    if (!tree_doc.is_object()) throw SchemaError("model: each tree must be an object");
    detail::reject_unknown_keys(tree_doc, {"nodes"}, "tree");
    if (!tree_doc.contains("nodes") || !tree_doc["nodes"].is_array()) {
      throw SchemaError("tree: missing 'nodes' array");
    }
    Tree tree;
    for (const auto& node_doc : tree_doc["nodes"]) {
      if (!node_doc.is_object()) throw SchemaError("node: must be an object");
      if (node_doc.contains("leaf")) {
        detail::reject_unknown_keys(node_doc, {"leaf"}, "leaf node");
        if (!node_doc["leaf"].is_number()) throw SchemaError("leaf: value must be a number");
        tree.nodes.push_back(TreeNode::leaf(node_doc["leaf"].get<double>()));
      } else {
        detail::reject_unknown_keys(
            node_doc, {"feature", "threshold", "left", "right", "default_left"},
            "split node");
        for (const char* key : {"feature", "threshold", "left", "right", "default_left"}) {
          if (!node_doc.contains(key)) {
            throw SchemaError(std::string("split node: missing '") + key + "'");
          }
        }
        tree.nodes.push_back(TreeNode::split(
            node_doc["feature"].get<std::int32_t>(), node_doc["threshold"].get<double>(),
            node_doc["left"].get<std::int32_t>(), node_doc["right"].get<std::int32_t>(),
            node_doc["default_left"].get<bool>()));
      }
    }
    model.trees.push_back(std::move(tree));
  }
  model.validate();
  return model;
}

inline void save_model(const TreeEnsemble& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << model_to_json(model).dump(2) << '\n';
}

inline TreeEnsemble load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model '" + path + "': " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace staylor
