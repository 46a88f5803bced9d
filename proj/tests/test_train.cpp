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

#include "staylor/train.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "builders.hpp"
#include "staylor/error.hpp"
#include "staylor/rng.hpp"
#include "staylor/table.hpp"

namespace {

using staylor::Cell;
using staylor::FeatureTable;
using staylor::TrainConfig;
using staylor::TreeEnsemble;

double mse(const TreeEnsemble& model, const FeatureTable& table,
           const std::vector<double>& targets) {
  double acc = 0.0;
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    const double d = model.predict(table.row(r)) - targets[r];
    acc += d * d;
  }
  return acc / static_cast<double>(table.num_rows());
}

TEST(Train, ConstantTargetsReproducedExactly) {
  staylor::Rng rng(31);
  const FeatureTable table = testutil::random_table(rng, 40, 3, 0.1);
  const std::vector<double> targets(40, 3.25);
  TrainConfig config;
  config.num_trees = 5;
  const TreeEnsemble model = staylor::train_gbdt(table, targets, config);
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    EXPECT_EQ(model.predict(table.row(r)), 3.25);
  }
}

TEST(Train, ZeroTreesGivesMeanPredictor) {
  staylor::Rng rng(32);
  const FeatureTable table = testutil::random_table(rng, 10, 2, 0.0);
  const std::vector<double> targets = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  TrainConfig config;
  config.num_trees = 0;
  const TreeEnsemble model = staylor::train_gbdt(table, targets, config);
  EXPECT_TRUE(model.trees.empty());
  EXPECT_DOUBLE_EQ(model.base_score, 5.5);
  EXPECT_DOUBLE_EQ(model.predict(table.row(3)), 5.5);
}

TEST(Train, TrainingLossNeverIncreasesWithMoreTrees) {
  staylor::Rng rng(33);
  const FeatureTable table = testutil::random_table(rng, 120, 4, 0.05);
  std::vector<double> targets;
  targets.reserve(table.num_rows());
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    const Cell a = table.cell(r, 0);
    const Cell b = table.cell(r, 1);
    const double va = a.has_value() ? *a : 0.0;
    const double vb = b.has_value() ? *b : 0.0;
    targets.push_back(va * 2.0 - vb + 0.2 * va * vb + rng.normal() * 0.1);
  }
  TrainConfig config;
  config.max_depth = 3;
  config.learning_rate = 0.2;
  double prev = std::numeric_limits<double>::infinity();
  for (const std::size_t rounds : {0u, 1u, 5u, 20u, 60u}) {
    config.num_trees = rounds;
    const TreeEnsemble model = staylor::train_gbdt(table, targets, config);
    const double loss = mse(model, table, targets);
    EXPECT_LE(loss, prev + 1e-12);
    prev = loss;
  }
  // Boosting on a learnable signal should actually reduce the loss too.
  config.num_trees = 60;
  EXPECT_LT(mse(staylor::train_gbdt(table, targets, config), table, targets),
            0.5 * mse(staylor::train_gbdt(table, targets, TrainConfig{0, 3, 0.1, 1, 0}),
                      table, targets));
}

TEST(Train, DeterministicAcrossRuns) {
  staylor::Rng rng(34);
  const FeatureTable table = testutil::random_table(rng, 60, 3, 0.1);
  std::vector<double> targets;
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    const Cell a = table.cell(r, 0);
    targets.push_back((a.has_value() ? *a : -1.0) + 0.01 * static_cast<double>(r));
  }
  TrainConfig config;
  config.num_trees = 15;
  const TreeEnsemble first = staylor::train_gbdt(table, targets, config);
  const TreeEnsemble second = staylor::train_gbdt(table, targets, config);
  EXPECT_EQ(staylor::model_to_json(first).dump(), staylor::model_to_json(second).dump());
}

TEST(Train, IdenticalRowsCannotSplit) {
  std::vector<std::vector<Cell>> cells(12, std::vector<Cell>{1.0, 2.0});
  const FeatureTable table = FeatureTable::from_rows({"a", "b"}, cells);
  std::vector<double> targets(12);
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = static_cast<double>(i);
  TrainConfig config;
  config.num_trees = 3;
  const TreeEnsemble model = staylor::train_gbdt(table, targets, config);
  for (const staylor::Tree& t : model.trees) {
    ASSERT_EQ(t.nodes.size(), 1u);
    EXPECT_TRUE(t.nodes[0].is_leaf());
  }
  EXPECT_DOUBLE_EQ(model.predict(table.row(0)), 5.5);
}

TEST(Train, SplitsSeparateTwoClusters) {
  // Half the rows at x=0 with target 0, half at x=10 with target 1.
  std::vector<std::vector<Cell>> cells;
  std::vector<double> targets;
  for (int i = 0; i < 10; ++i) {
    cells.push_back({static_cast<double>(i < 5 ? 0 : 10)});
    targets.push_back(i < 5 ? 0.0 : 1.0);
  }
  const FeatureTable table = FeatureTable::from_rows({"x"}, cells);
  TrainConfig config;
  config.num_trees = 1;
  config.learning_rate = 1.0;
  const TreeEnsemble model = staylor::train_gbdt(table, targets, config);
  EXPECT_NEAR(model.predict(std::vector<Cell>{0.0}), 0.0, 1e-12);
  EXPECT_NEAR(model.predict(std::vector<Cell>{10.0}), 1.0, 1e-12);
  // Split threshold sits at the midpoint between the distinct values.
  ASSERT_FALSE(model.trees.empty());
  const staylor::TreeNode& root = model.trees[0].nodes[0];
  ASSERT_FALSE(root.is_leaf());
  EXPECT_DOUBLE_EQ(root.threshold, 5.0);
}

TEST(Train, MissingRowsRoutedToReduceLoss) {
  // Missing rows share the target of the high cluster, so the best split
  // sends them right.
  std::vector<std::vector<Cell>> cells;
  std::vector<double> targets;
  for (int i = 0; i < 6; ++i) {
    cells.push_back({static_cast<double>(i)});
    targets.push_back(i < 3 ? 0.0 : 1.0);
  }
  cells.push_back({Cell{}});
  targets.push_back(1.0);
  cells.push_back({Cell{}});
  targets.push_back(1.0);
  const FeatureTable table = FeatureTable::from_rows({"x"}, cells);
  TrainConfig config;
  config.num_trees = 1;
  config.max_depth = 1;
  config.learning_rate = 1.0;
  const TreeEnsemble model = staylor::train_gbdt(table, targets, config);
  ASSERT_FALSE(model.trees.empty());
  const staylor::TreeNode& root = model.trees[0].nodes[0];
  ASSERT_FALSE(root.is_leaf());
  EXPECT_FALSE(root.default_left);
  EXPECT_NEAR(model.predict(std::vector<Cell>{Cell{}}), 1.0, 1e-12);
}

TEST(Train, MinSamplesLeafBlocksTinySplits) {
  std::vector<std::vector<Cell>> cells;
  std::vector<double> targets;
  for (int i = 0; i < 8; ++i) {
    cells.push_back({static_cast<double>(i)});
    targets.push_back(i == 7 ? 100.0 : 0.0);  // lone outlier invites a 7/1 split
  }
  const FeatureTable table = FeatureTable::from_rows({"x"}, cells);
  TrainConfig config;
  config.num_trees = 1;
  config.max_depth = 1;
  config.min_samples_leaf = 4;
  const TreeEnsemble model = staylor::train_gbdt(table, targets, config);
  ASSERT_FALSE(model.trees.empty());
  const staylor::TreeNode& root = model.trees[0].nodes[0];
  // The only legal split is 4/4; the outlier cannot be isolated.
  ASSERT_FALSE(root.is_leaf());
  EXPECT_DOUBLE_EQ(root.threshold, 3.5);
}

TEST(Train, RejectsBadInputs) {
  staylor::Rng rng(35);
  const FeatureTable table = testutil::random_table(rng, 10, 2, 0.0);
  const std::vector<double> short_targets(9, 0.0);
  EXPECT_THROW(staylor::train_gbdt(table, short_targets, TrainConfig{}),
               staylor::DimensionError);

  TrainConfig config;
  config.min_samples_leaf = 6;  // needs at least 12 rows
  const std::vector<double> targets(10, 0.0);
  EXPECT_THROW(staylor::train_gbdt(table, targets, config), staylor::DomainError);

  TrainConfig bad;
  bad.learning_rate = 0.0;
  EXPECT_THROW(bad.validate(), staylor::DomainError);
  bad = TrainConfig{};
  bad.max_depth = 0;
  EXPECT_THROW(bad.validate(), staylor::DomainError);
  bad = TrainConfig{};
  bad.min_samples_leaf = 0;
  EXPECT_THROW(bad.validate(), staylor::DomainError);
}

TEST(Train, DepthLimitRespected) {
  staylor::Rng rng(36);
  const FeatureTable table = testutil::random_table(rng, 200, 4, 0.0);
  std::vector<double> targets;
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    targets.push_back(rng.normal());
  }
  TrainConfig config;
  config.num_trees = 4;
  config.max_depth = 2;
  const TreeEnsemble model = staylor::train_gbdt(table, targets, config);
  for (const staylor::Tree& t : model.trees) {
    // Depth 2 allows at most 7 nodes.
    EXPECT_LE(t.nodes.size(), 7u);
  }
}

}  // namespace
