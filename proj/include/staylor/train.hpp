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

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "staylor/error.hpp"
#include "staylor/table.hpp"
#include "staylor/tree.hpp"

namespace staylor {

struct TrainConfig {
  std::size_t num_trees = 100;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  std::size_t min_samples_leaf = 1;
  // Reserved for subsampling variants; the exact greedy trainer is
  // deterministic and does not consume it.
  std::uint64_t seed = 0;

  void validate() const {
    if (max_depth < 1) throw DomainError("max_depth must be >= 1");
    if (!(learning_rate > 0.0) || learning_rate > 1.0) {
      throw DomainError("learning_rate must be in (0, 1]");
    }
    if (min_samples_leaf < 1) throw DomainError("min_samples_leaf must be >= 1");
  }
};

namespace detail {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  bool default_left = true;
  long double gain = 0.0L;
};

// Squared-error of a group around its own mean, from raw moments.
inline long double group_sse(long double sum, long double sumsq, std::size_t n) {
  if (n == 0) return 0.0L;
  const long double sse = sumsq - (sum * sum) / static_cast<long double>(n);
  return sse > 0.0L ? sse : 0.0L;
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureTable& table, std::span<const double> residuals,
              const TrainConfig& config)
      : table_(table), residuals_(residuals), config_(config) {}

  Tree build() {
    std::vector<std::uint32_t> all(table_.num_rows());
    for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
    Tree tree;
    grow(tree, all, 0);
    return tree;
  }

 private:
  std::size_t grow(Tree& tree, const std::vector<std::uint32_t>& rows, std::size_t depth) {
    const std::size_t id = tree.nodes.size();
    tree.nodes.emplace_back();
    SplitChoice split;
    if (depth < config_.max_depth && rows.size() >= 2 * config_.min_samples_leaf) {
      split = best_split(rows);
    }
    if (!split.found) {
      tree.nodes[id] = TreeNode::leaf(config_.learning_rate * mean(rows));
      return id;
    }
    std::vector<std::uint32_t> left, right;
    left.reserve(rows.size());
    right.reserve(rows.size());
    for (const std::uint32_t r : rows) {
      const Cell& c = table_.cell(r, split.feature);
      const bool go_left = c ? (*c <= split.threshold) : split.default_left;
      (go_left ? left : right).push_back(r);
    }
    const std::size_t left_id = grow(tree, left, depth + 1);
    const std::size_t right_id = grow(tree, right, depth + 1);
    tree.nodes[id] = TreeNode::split(
        static_cast<std::int32_t>(split.feature), split.threshold,
        static_cast<std::int32_t>(left_id), static_cast<std::int32_t>(right_id),
        split.default_left);
    return id;
  }

  double mean(const std::vector<std::uint32_t>& rows) const {
    long double sum = 0.0L;
    for (const std::uint32_t r : rows) sum += residuals_[r];
    return static_cast<double>(sum / static_cast<long double>(rows.size()));
  }

  // Exact greedy search over the midpoints of adjacent distinct values of
  // every feature. Rows with a missing value are sent, per candidate, to the
  // side that yields the larger variance reduction; the winning side is
  // recorded as default_left. Ties keep the first candidate in (feature,
  // threshold) order, which makes training deterministic.
  SplitChoice best_split(const std::vector<std::uint32_t>& rows) {
    SplitChoice best;
    long double total_sum = 0.0L, total_sumsq = 0.0L;
    for (const std::uint32_t r : rows) {
      const long double v = residuals_[r];
      total_sum += v;
      total_sumsq += v * v;
    }
    const long double parent_sse = group_sse(total_sum, total_sumsq, rows.size());
    if (!(parent_sse > 0.0L)) return best;
    const long double min_gain = parent_sse * 1e-12L;

    std::vector<std::pair<double, double>> present;  // (feature value, residual)
    for (std::size_t f = 0; f < table_.num_features(); ++f) {
      present.clear();
      std::size_t miss_n = 0;
      long double miss_sum = 0.0L, miss_sumsq = 0.0L;
      for (const std::uint32_t r : rows) {
        const Cell& c = table_.cell(r, f);
        const long double v = residuals_[r];
        if (c) {
          present.emplace_back(*c, residuals_[r]);
        } else {
          ++miss_n;
          miss_sum += v;
          miss_sumsq += v * v;
        }
      }
      if (present.size() < 2) continue;
      std::stable_sort(present.begin(), present.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });

      long double left_sum = 0.0L, left_sumsq = 0.0L;
      for (std::size_t i = 1; i < present.size(); ++i) {
        const long double v = present[i - 1].second;
        left_sum += v;
        left_sumsq += v * v;
        if (!(present[i - 1].first < present[i].first)) continue;
        const double threshold =
            present[i - 1].first + (present[i].first - present[i - 1].first) / 2.0;
        const long double right_sum = total_sum - miss_sum - left_sum;
        const long double right_sumsq = total_sumsq - miss_sumsq - left_sumsq;
        const std::size_t nl = i;
        const std::size_t nr = present.size() - i;
        // Two placements of the missing group; prefer left on equal gain.
        for (const bool missing_left : {true, false}) {
          const std::size_t cl = nl + (missing_left ? miss_n : 0);
          const std::size_t cr = nr + (missing_left ? 0 : miss_n);
          if (cl < config_.min_samples_leaf || cr < config_.min_samples_leaf) continue;
          const long double sl = left_sum + (missing_left ? miss_sum : 0.0L);
          const long double ql = left_sumsq + (missing_left ? miss_sumsq : 0.0L);
          const long double sr = right_sum + (missing_left ? 0.0L : miss_sum);
          const long double qr = right_sumsq + (missing_left ? 0.0L : miss_sumsq);
          const long double gain = parent_sse - group_sse(sl, ql, cl) - group_sse(sr, qr, cr);
          if (gain > min_gain && gain > best.gain) {
            best.found = true;
            best.feature = f;
            best.threshold = threshold;
            best.default_left = missing_left;
            best.gain = gain;
          }
        }
      }
    }
    return best;
  }

  const FeatureTable& table_;
  std::span<const double> residuals_;
  const TrainConfig& config_;
};

}  // namespace detail

// Least-squares gradient boosting: base score = mean(targets), then
// `num_trees` depth-limited regression trees fit to the running residuals,
// each leaf scaled by the learning rate. Training MSE is non-increasing
// per stage for any learning_rate in (0, 1].
inline TreeEnsemble train_gbdt(const FeatureTable& table, std::span<const double> targets,
                               const TrainConfig& config) {
  config.validate();
  if (targets.size() != table.num_rows()) {
    throw DimensionError("targets length " + std::to_string(targets.size()) +
                         " does not match row count " + std::to_string(table.num_rows()));
  }
  if (table.num_rows() < 2 * config.min_samples_leaf) {
    throw DomainError("need at least 2 * min_samples_leaf rows to train");
  }

  TreeEnsemble model;
  model.feature_names = table.names();
  long double sum = 0.0L;
  for (const double t : targets) sum += t;
  model.base_score = static_cast<double>(sum / static_cast<long double>(targets.size()));

  std::vector<double> residuals(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    residuals[i] = targets[i] - model.base_score;
  }
  for (std::size_t stage = 0; stage < config.num_trees; ++stage) {
    Tree tree = detail::TreeBuilder(table, residuals, config).build();
    for (std::size_t i = 0; i < residuals.size(); ++i) {
      residuals[i] -= tree.predict(table.row(i));
    }
    model.trees.push_back(std::move(tree));
  }
  model.validate();
  return model;
}

}  // namespace staylor
