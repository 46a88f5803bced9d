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

#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "staylor/error.hpp"
#include "staylor/rng.hpp"
#include "staylor/table.hpp"
#include "staylor/tree.hpp"
#include "staylor/value.hpp"

namespace staylor {

// Exact Shapley values by full coalition enumeration:
//   Phi_i = sum over S not containing i of
//           |S|! (K - |S| - 1)! / K! * (v(S + i) - v(S)).
// Throws CapError via ensure_all() when K exceeds the exact cap.
inline std::vector<double> shapley_exact(ValueContext& ctx) {
  const std::size_t k = ctx.num_features();
  ctx.ensure_all();
  std::vector<double> weights(k);
  for (std::size_t s = 0; s < k; ++s) weights[s] = weight_shapley(s, k);
  const Coalition full = ctx.full_mask();
  std::vector<double> phi(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const Coalition bit = Coalition{1} << i;
    double acc = 0.0;
    for (Coalition s = 0;; ++s) {
      if (!(s & bit)) {
        acc += weights[static_cast<std::size_t>(std::popcount(s))] *
               (ctx.value(s | bit) - ctx.value(s));
      }
      if (s == full) break;
    }
    phi[i] = acc;
  }
  return phi;
}

struct SampledShapley {
  std::vector<double> values;
  std::vector<double> std_errors;  // standard error of each mean
};

// Permutation-sampling estimator: each sample draws a uniform random feature
// order and credits every feature with its marginal contribution when added
// along that order. The per-feature estimate is the mean over samples and the
// reported uncertainty is the standard error of that mean (sample standard
// deviation with the n-1 divisor, divided by sqrt(n)).
inline SampledShapley shapley_sampled(ValueContext& ctx, std::size_t samples,
                                      std::uint64_t seed) {
  const std::size_t k = ctx.num_features();
  if (samples < 2) throw DomainError("sampled estimator needs at least 2 samples");
  Rng rng(seed);
  std::vector<std::size_t> order(k);
  std::vector<double> marginals(samples * k);
  for (std::size_t n = 0; n < samples; ++n) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    Coalition mask = 0;
    double prev = ctx.value(0);
    for (const std::size_t f : order) {
      mask |= Coalition{1} << f;
      const double cur = ctx.value(mask);
      marginals[n * k + f] = cur - prev;
      prev = cur;
    }
  }
  SampledShapley out;
  out.values.resize(k);
  out.std_errors.resize(k);
  for (std::size_t f = 0; f < k; ++f) {
    double sum = 0.0;
    for (std::size_t n = 0; n < samples; ++n) sum += marginals[n * k + f];
    const double mean = sum / static_cast<double>(samples);
    double ss = 0.0;
    for (std::size_t n = 0; n < samples; ++n) {
      const double d = marginals[n * k + f] - mean;
      ss += d * d;
    }
    const double var = ss / static_cast<double>(samples - 1);
    out.values[f] = mean;
    out.std_errors[f] = std::sqrt(var / static_cast<double>(samples));
  }
  return out;
}

enum class AttributionMethod { kExact, kSampled };

struct ExplainOptions {
  AttributionMethod method = AttributionMethod::kExact;
  std::size_t samples = 2000;  // used by the sampled method only
  std::uint64_t seed = 0;
};

// Attribution of one explained row. `raw` holds the uncentered Shapley values
// Phi_i; `centered` subtracts the per-feature cohort mean of the raw values,
// so that baseline + sum(centered) telescopes to the prediction whenever the
// background equals the explained cohort. `std_errors` is empty for the exact
// method.
struct AttributionResult {
  std::vector<double> raw;
  std::vector<double> centered;
  std::vector<double> std_errors;
  double prediction = 0.0;
};

struct CohortAttributions {
  std::vector<std::string> feature_names;
  // Baseline phi_0: mean model prediction over the explained cohort.
  double baseline = 0.0;
  std::vector<double> raw_means;  // per-feature mean of raw values
  std::vector<AttributionResult> rows;
  AttributionMethod method = AttributionMethod::kExact;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

template <typename MakeContext>
CohortAttributions shap_cohort_impl(MakeContext&& make_context,
                                    const std::vector<std::string>& names,
                                    const FeatureTable& data, const ExplainOptions& options) {
  CohortAttributions out;
  out.feature_names = names;
  out.method = options.method;
  if (options.method == AttributionMethod::kSampled) {
    out.samples = options.samples;
    out.seed = options.seed;
  }
  const std::size_t k = names.size();
  const std::size_t n = data.num_rows();
  out.rows.resize(n);
  long double base_sum = 0.0L;
  for (std::size_t r = 0; r < n; ++r) {
    ValueContext ctx = make_context(data.row(r));
    AttributionResult& res = out.rows[r];
    if (options.method == AttributionMethod::kExact) {
      res.raw = shapley_exact(ctx);
    } else {
      SampledShapley est =
          shapley_sampled(ctx, options.samples, Rng::derive(options.seed, r));
      res.raw = std::move(est.values);
      res.std_errors = std::move(est.std_errors);
    }
    res.prediction = ctx.prediction();
    base_sum += res.prediction;
  }
  out.baseline = static_cast<double>(base_sum / static_cast<long double>(n));
  out.raw_means.assign(k, 0.0);
  for (std::size_t f = 0; f < k; ++f) {
    long double s = 0.0L;
    for (const AttributionResult& row : out.rows) s += row.raw[f];
    out.raw_means[f] = static_cast<double>(s / static_cast<long double>(n));
  }
  for (AttributionResult& row : out.rows) {
    row.centered.resize(k);
    for (std::size_t f = 0; f < k; ++f) row.centered[f] = row.raw[f] - out.raw_means[f];
  }
  return out;
}

}  // namespace detail

// SHAP-style cohort attribution: the baseline is the mean prediction over the
// explained table and each row's centered values are its Shapley values minus
// the cohort means, so baseline + sum_i centered_i = prediction row by row
// (up to accumulation error) when `background` is the explained table itself.
inline CohortAttributions shap_for_cohort(const TreeEnsemble& model, const FeatureTable& data,
                                          const FeatureTable& background,
                                          const ExplainOptions& options = {}) {
  if (data.num_features() != model.num_features()) {
    throw DimensionError("data has " + std::to_string(data.num_features()) +
                         " features, model expects " + std::to_string(model.num_features()));
  }
  return detail::shap_cohort_impl(
      [&](std::span<const Cell> row) { return ValueContext(model, row, background); },
      model.feature_names, data, options);
}

inline CohortAttributions shap_for_cohort(const ModelFn& fn,
                                          const std::vector<std::string>& feature_names,
                                          const FeatureTable& data,
                                          const FeatureTable& background,
                                          const ExplainOptions& options = {}) {
  if (data.num_features() != feature_names.size()) {
    throw DimensionError("data has " + std::to_string(data.num_features()) +
                         " features, expected " + std::to_string(feature_names.size()));
  }
  return detail::shap_cohort_impl(
      [&](std::span<const Cell> row) {
        return ValueContext(fn, feature_names.size(), row, background);
      },
      feature_names, data, options);
}

}  // namespace staylor
