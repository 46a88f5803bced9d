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

#include "staylor/shapley.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

#include <gtest/gtest.h>

#include "builders.hpp"
#include "oracle.hpp"
#include "staylor/error.hpp"
#include "staylor/rng.hpp"

namespace {

using staylor::AttributionMethod;
using staylor::Cell;
using staylor::CohortAttributions;
using staylor::ExplainOptions;
using staylor::FeatureTable;
using staylor::ModelFn;
using staylor::TreeEnsemble;
using staylor::ValueContext;

staylor::Tree remap_feature(staylor::Tree tree, std::int32_t from, std::int32_t to) {
  for (staylor::TreeNode& n : tree.nodes) {
    if (!n.is_leaf() && n.feature == from) n.feature = to;
  }
  return tree;
}

TEST(Shapley, ConstantModelAttributesNothing) {
  staylor::Rng rng(51);
  TreeEnsemble model;
  model.base_score = 7.5;
  model.feature_names = {"a", "b", "c"};
  model.validate();
  const FeatureTable background = testutil::random_table(rng, 5, 3, 0.1);
  const FeatureTable points = testutil::random_table(rng, 1, 3, 0.0);
  ValueContext ctx(model, points.row(0), background);
  for (const double phi : staylor::shapley_exact(ctx)) {
    EXPECT_EQ(phi, 0.0);
  }
}

TEST(Shapley, LinearModelGivesMarginalContributions) {
  // f(x) = 2 x0 - 3 x1 + 0.5 x2: the marginal contribution of feature i is
  // c_i (x_i - mean of the background column) in every coalition, so the
  // Shapley value equals that product.
  const std::vector<double> coef = {2.0, -3.0, 0.5};
  const ModelFn fn = [coef](std::span<const Cell> x) {
    double out = 0.0;
    for (std::size_t f = 0; f < coef.size(); ++f) out += coef[f] * x[f].value();
    return out;
  };
  staylor::Rng rng(52);
  const FeatureTable background = testutil::random_table(rng, 13, 3, 0.0);
  const FeatureTable points = testutil::random_table(rng, 3, 3, 0.0);
  for (std::size_t r = 0; r < points.num_rows(); ++r) {
    ValueContext ctx(fn, 3, points.row(r), background);
    const std::vector<double> phi = staylor::shapley_exact(ctx);
    for (std::size_t f = 0; f < 3; ++f) {
      const auto stats = background.column_stats(f);
      const double want = coef[f] * (points.row(r)[f].value() - stats.mean);
      EXPECT_NEAR(phi[f], want, 1e-12);
    }
  }
}

TEST(Shapley, ProductOnSignCubeSplitsCreditEvenly) {
  // F = x y over the uniform background on {-1, 1}^2, explained at (1, 1):
  // both features carry 1/2.
  const ModelFn fn = [](std::span<const Cell> x) { return x[0].value() * x[1].value(); };
  const FeatureTable background = FeatureTable::from_rows(
      {"x", "y"}, {{1.0, 1.0}, {1.0, -1.0}, {-1.0, 1.0}, {-1.0, -1.0}});
  const std::vector<Cell> instance = {1.0, 1.0};
  ValueContext ctx(fn, 2, instance, background);
  const std::vector<double> phi = staylor::shapley_exact(ctx);
  EXPECT_NEAR(phi[0], 0.5, 1e-15);
  EXPECT_NEAR(phi[1], 0.5, 1e-15);
}

TEST(Shapley, MatchesIndependentOracle) {
  staylor::Rng rng(53);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t k = 2 + trial % 5;
    const TreeEnsemble model = testutil::random_ensemble(rng, k, k, 7, 3);
    const FeatureTable background = testutil::random_table(rng, 6, k, 0.15);
    const FeatureTable points = testutil::random_table(rng, 1, k, 0.15);
    ValueContext ctx(model, points.row(0), background);
    const std::vector<double> phi = staylor::shapley_exact(ctx);
    const ModelFn fn = model.predictor();
    for (std::size_t f = 0; f < k; ++f) {
      EXPECT_NEAR(phi[f], oracle::shapley(fn, points.row(0), background, f), 1e-12)
          << "trial " << trial << " feature " << f;
    }
  }
}

TEST(Shapley, EfficiencySumsToFullMinusEmpty) {
  staylor::Rng rng(54);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 1 + trial % 8;
    const TreeEnsemble model = testutil::random_ensemble(rng, k, k, 6, 4);
    const FeatureTable background = testutil::random_table(rng, 8, k, 0.1);
    const FeatureTable points = testutil::random_table(rng, 1, k, 0.1);
    ValueContext ctx(model, points.row(0), background);
    const std::vector<double> phi = staylor::shapley_exact(ctx);
    double total = 0.0;
    for (const double p : phi) total += p;
    EXPECT_NEAR(total, ctx.value(ctx.full_mask()) - ctx.value(0), 1e-9);
  }
}

TEST(Shapley, NullPlayerGetsZero) {
  staylor::Rng rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t k = 3 + trial % 4;
    // Trees only ever split the first k-1 features; the last one is inert.
    const TreeEnsemble model = testutil::random_ensemble(rng, k, k - 1, 6, 3);
    const FeatureTable background = testutil::random_table(rng, 7, k, 0.1);
    const FeatureTable points = testutil::random_table(rng, 1, k, 0.1);
    ValueContext ctx(model, points.row(0), background);
    const std::vector<double> phi = staylor::shapley_exact(ctx);
    EXPECT_NEAR(phi[k - 1], 0.0, 1e-12);
  }
}

TEST(Shapley, SymmetricFeaturesGetEqualCredit) {
  staylor::Rng rng(56);
  for (int trial = 0; trial < 10; ++trial) {
    // A model invariant under swapping features 0 and 1, explained at a point
    // with x0 == x1 against a background with equal first two columns.
    TreeEnsemble model;
    model.base_score = rng.uniform(-0.5, 0.5);
    model.feature_names = {"a", "b", "c"};
    for (int t = 0; t < 3; ++t) {
      const staylor::Tree on_first = testutil::random_tree(rng, 1, 3);
      model.trees.push_back(on_first);
      model.trees.push_back(remap_feature(on_first, 0, 1));
    }
    model.trees.push_back(remap_feature(testutil::random_tree(rng, 1, 3), 0, 2));
    model.validate();

    std::vector<std::vector<Cell>> rows;
    for (int r = 0; r < 6; ++r) {
      const double v = rng.uniform(-2.0, 2.0);
      rows.push_back({v, v, rng.uniform(-2.0, 2.0)});
    }
    const FeatureTable background = FeatureTable::from_rows({"a", "b", "c"}, rows);
    const double shared = rng.uniform(-2.0, 2.0);
    const std::vector<Cell> instance = {shared, shared, rng.uniform(-2.0, 2.0)};
    ValueContext ctx(model, instance, background);
    const std::vector<double> phi = staylor::shapley_exact(ctx);
    EXPECT_NEAR(phi[0], phi[1], 1e-12);
  }
}

TEST(Shapley, LinearInTheModel) {
  staylor::Rng rng(57);
  const std::size_t k = 4;
  const TreeEnsemble first = testutil::random_ensemble(rng, k, k, 5, 3);
  const TreeEnsemble second = testutil::random_ensemble(rng, k, k, 4, 3);
  TreeEnsemble combined;
  combined.base_score = first.base_score + second.base_score;
  combined.feature_names = first.feature_names;
  combined.trees = first.trees;
  combined.trees.insert(combined.trees.end(), second.trees.begin(), second.trees.end());
  combined.validate();

  const FeatureTable background = testutil::random_table(rng, 9, k, 0.1);
  const FeatureTable points = testutil::random_table(rng, 1, k, 0.1);
  ValueContext ctx_a(first, points.row(0), background);
  ValueContext ctx_b(second, points.row(0), background);
  ValueContext ctx_ab(combined, points.row(0), background);
  const std::vector<double> phi_a = staylor::shapley_exact(ctx_a);
  const std::vector<double> phi_b = staylor::shapley_exact(ctx_b);
  const std::vector<double> phi_ab = staylor::shapley_exact(ctx_ab);
  for (std::size_t f = 0; f < k; ++f) {
    EXPECT_NEAR(phi_ab[f], phi_a[f] + phi_b[f], 1e-9);
  }
}

TEST(Shapley, SampledAgreesWithExactWithinError) {
  staylor::Rng rng(58);
  const std::size_t k = 6;
  const TreeEnsemble model = testutil::random_ensemble(rng, k, k, 8, 4);
  const FeatureTable background = testutil::random_table(rng, 6, k, 0.1);
  const FeatureTable points = testutil::random_table(rng, 1, k, 0.1);

  ValueContext exact_ctx(model, points.row(0), background);
  const std::vector<double> exact = staylor::shapley_exact(exact_ctx);

  ValueContext sampled_ctx(model, points.row(0), background);
  const staylor::SampledShapley est = staylor::shapley_sampled(sampled_ctx, 4000, 7);
  for (std::size_t f = 0; f < k; ++f) {
    EXPECT_LE(std::abs(est.values[f] - exact[f]), 5.0 * est.std_errors[f] + 1e-9)
        << "feature " << f;
    EXPECT_GE(est.std_errors[f], 0.0);
  }
}

TEST(Shapley, SampledIsSeedDeterministic) {
  staylor::Rng rng(59);
  const TreeEnsemble model = testutil::random_ensemble(rng, 5, 5, 6, 3);
  const FeatureTable background = testutil::random_table(rng, 5, 5, 0.1);
  const FeatureTable points = testutil::random_table(rng, 1, 5, 0.0);

  ValueContext a(model, points.row(0), background);
  ValueContext b(model, points.row(0), background);
  ValueContext c(model, points.row(0), background);
  const auto ra = staylor::shapley_sampled(a, 200, 99);
  const auto rb = staylor::shapley_sampled(b, 200, 99);
  const auto rc = staylor::shapley_sampled(c, 200, 100);
  EXPECT_EQ(ra.values, rb.values);
  EXPECT_EQ(ra.std_errors, rb.std_errors);
  EXPECT_NE(ra.values, rc.values);
}

TEST(Shapley, SampledNeedsTwoSamples) {
  staylor::Rng rng(60);
  const TreeEnsemble model = testutil::random_ensemble(rng, 3, 3, 4, 3);
  const FeatureTable background = testutil::random_table(rng, 4, 3, 0.0);
  const FeatureTable points = testutil::random_table(rng, 1, 3, 0.0);
  ValueContext ctx(model, points.row(0), background);
  EXPECT_THROW(staylor::shapley_sampled(ctx, 1, 0), staylor::DomainError);
}

TEST(Shapley, CohortCenteringTelescopesToThePrediction) {
  staylor::Rng rng(61);
  const std::size_t k = 5;
  const TreeEnsemble model = testutil::random_ensemble(rng, k, k, 8, 4);
  const FeatureTable cohort = testutil::random_table(rng, 24, k, 0.1);

  const CohortAttributions out = staylor::shap_for_cohort(model, cohort, cohort);
  long double pred_mean = 0.0L;
  for (std::size_t r = 0; r < cohort.num_rows(); ++r) {
    pred_mean += model.predict(cohort.row(r));
  }
  pred_mean /= static_cast<long double>(cohort.num_rows());
  EXPECT_NEAR(out.baseline, static_cast<double>(pred_mean), 1e-12);

  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    double total = out.baseline;
    for (const double c : out.rows[r].centered) total += c;
    EXPECT_NEAR(total, out.rows[r].prediction, 1e-9) << "row " << r;
    EXPECT_EQ(out.rows[r].prediction, model.predict(cohort.row(r)));
  }

  // Centered columns average to zero by construction.
  for (std::size_t f = 0; f < k; ++f) {
    long double s = 0.0L;
    for (const auto& row : out.rows) s += row.centered[f];
    EXPECT_NEAR(static_cast<double>(s / static_cast<long double>(out.rows.size())), 0.0,
                1e-12);
  }
}

TEST(Shapley, CenteringTelescopesUnderForeignBackground) {
  // The telescoping identity does not require background == cohort: the empty
  // coalition value is the same constant for every explained row, so it
  // cancels in the centering.
  staylor::Rng rng(62);
  const std::size_t k = 4;
  const TreeEnsemble model = testutil::random_ensemble(rng, k, k, 6, 3);
  const FeatureTable cohort = testutil::random_table(rng, 12, k, 0.1);
  const FeatureTable background = testutil::random_table(rng, 9, k, 0.1);
  const CohortAttributions out = staylor::shap_for_cohort(model, cohort, background);
  for (const auto& row : out.rows) {
    double total = out.baseline;
    for (const double c : row.centered) total += c;
    EXPECT_NEAR(total, row.prediction, 1e-9);
  }
}

TEST(Shapley, SingleRowCohortCentersToZero) {
  staylor::Rng rng(63);
  const TreeEnsemble model = testutil::random_ensemble(rng, 3, 3, 4, 3);
  const FeatureTable cohort = testutil::random_table(rng, 1, 3, 0.0);
  const CohortAttributions out = staylor::shap_for_cohort(model, cohort, cohort);
  ASSERT_EQ(out.rows.size(), 1u);
  EXPECT_EQ(out.baseline, out.rows[0].prediction);
  for (std::size_t f = 0; f < 3; ++f) {
    EXPECT_EQ(out.rows[0].raw[f], out.raw_means[f]);
    EXPECT_EQ(out.rows[0].centered[f], 0.0);
  }
}

TEST(Shapley, SampledCohortRecordsUncertainty) {
  staylor::Rng rng(64);
  const TreeEnsemble model = testutil::random_ensemble(rng, 4, 4, 5, 3);
  const FeatureTable cohort = testutil::random_table(rng, 5, 4, 0.1);
  ExplainOptions options;
  options.method = AttributionMethod::kSampled;
  options.samples = 64;
  options.seed = 5;
  const CohortAttributions out = staylor::shap_for_cohort(model, cohort, cohort, options);
  EXPECT_EQ(out.method, AttributionMethod::kSampled);
  EXPECT_EQ(out.samples, 64u);
  EXPECT_EQ(out.seed, 5u);
  for (const auto& row : out.rows) {
    ASSERT_EQ(row.std_errors.size(), 4u);
  }
  // Rows draw independent streams from the cohort seed, so rerunning the
  // cohort reproduces every number.
  const CohortAttributions again = staylor::shap_for_cohort(model, cohort, cohort, options);
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    EXPECT_EQ(out.rows[r].raw, again.rows[r].raw);
  }
}

TEST(Shapley, CohortRejectsWidthMismatch) {
  staylor::Rng rng(65);
  const TreeEnsemble model = testutil::random_ensemble(rng, 4, 4, 3, 3);
  const FeatureTable narrow = testutil::random_table(rng, 4, 3, 0.0);
  const FeatureTable wide = testutil::random_table(rng, 4, 4, 0.0);
  EXPECT_THROW(staylor::shap_for_cohort(model, narrow, wide), staylor::DimensionError);
}

}  // namespace
