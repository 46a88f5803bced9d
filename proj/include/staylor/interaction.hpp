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
#include <utility>
#include <vector>

#include "staylor/error.hpp"
#include "staylor/rng.hpp"
#include "staylor/shapley.hpp"
#include "staylor/table.hpp"
#include "staylor/tree.hpp"
#include "staylor/value.hpp"

namespace staylor {

// Which order-2 decomposition the off-diagonal terms follow. Both charge the
// pure second difference to pairs; they differ in the coalition weights and
// in how much of the Shapley value the diagonal keeps.
enum class InteractionMethod { kTaylor, kSiv };

inline std::string to_string(InteractionMethod m) {
  return m == InteractionMethod::kTaylor ? "taylor" : "siv";
}

inline InteractionMethod interaction_method_from(const std::string& name) {
  if (name == "taylor") return InteractionMethod::kTaylor;
  if (name == "siv") return InteractionMethod::kSiv;
  throw DomainError("unknown interaction method '" + name + "' (expected taylor or siv)");
}

namespace detail {

inline void check_pair(std::size_t i, std::size_t j, std::size_t k) {
  if (k < 2) throw DomainError("pair terms need at least two features");
  if (i >= k || j >= k) throw DomainError("feature index out of range");
  if (i == j) {
    throw DomainError("pair requires two distinct features; the diagonal is the main effect");
  }
}

inline double pair_weight(InteractionMethod m, std::size_t subset_size, std::size_t k) {
  return m == InteractionMethod::kTaylor ? weight_taylor(subset_size, k)
                                         : weight_siv(subset_size, k);
}

}  // namespace detail

// Off-diagonal interaction term: the coalition-weighted sum of the second
// difference v(S+i+j) - v(S+i) - v(S+j) + v(S) over all S avoiding i and j.
inline double interaction_pair(ValueContext& ctx, std::size_t i, std::size_t j,
                               InteractionMethod method) {
  const std::size_t k = ctx.num_features();
  detail::check_pair(i, j, k);
  ctx.ensure_all();
  std::vector<double> weights(k - 1);
  for (std::size_t s = 0; s + 2 <= k; ++s) weights[s] = detail::pair_weight(method, s, k);
  const Coalition bi = Coalition{1} << i;
  const Coalition bj = Coalition{1} << j;
  const Coalition full = ctx.full_mask();
  double acc = 0.0;
  for (Coalition s = 0;; ++s) {
    if (!(s & (bi | bj))) {
      const double second_diff =
          ctx.value(s | bi | bj) - ctx.value(s | bi) - ctx.value(s | bj) + ctx.value(s);
      acc += weights[static_cast<std::size_t>(std::popcount(s))] * second_diff;
    }
    if (s == full) break;
  }
  return acc;
}

inline double taylor_pair(ValueContext& ctx, std::size_t i, std::size_t j) {
  return interaction_pair(ctx, i, j, InteractionMethod::kTaylor);
}

inline double siv_pair(ValueContext& ctx, std::size_t i, std::size_t j) {
  return interaction_pair(ctx, i, j, InteractionMethod::kSiv);
}

// Diagonal (main) term derived from the Shapley value and the off-diagonal
// row sum. The Shapley-Taylor diagonal removes half of each pair term so the
// matrix total telescopes to v(full) - v(empty); the interaction-value
// diagonal removes pair terms whole.
inline double main_from_pairs(double shapley_i, double pair_row_sum, InteractionMethod method) {
  const double share = method == InteractionMethod::kTaylor ? 0.5 : 1.0;
  return shapley_i - share * pair_row_sum;
}

inline double taylor_main(ValueContext& ctx, std::size_t i) {
  const std::size_t k = ctx.num_features();
  if (i >= k) throw DomainError("feature index out of range");
  const std::vector<double> phi = shapley_exact(ctx);
  double row = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (j != i) row += taylor_pair(ctx, i, j);
  }
  return main_from_pairs(phi[i], row, InteractionMethod::kTaylor);
}

inline double siv_main(ValueContext& ctx, std::size_t i) {
  const std::size_t k = ctx.num_features();
  if (i >= k) throw DomainError("feature index out of range");
  const std::vector<double> phi = shapley_exact(ctx);
  double row = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (j != i) row += siv_pair(ctx, i, j);
  }
  return main_from_pairs(phi[i], row, InteractionMethod::kSiv);
}

// Symmetric K x K matrix: diagonal holds main effects, off-diagonal the pair
// interaction terms.
struct InteractionMatrix {
  std::size_t num_features = 0;
  InteractionMethod method = InteractionMethod::kTaylor;
  std::vector<double> entries;  // row-major K x K

  InteractionMatrix() = default;
  InteractionMatrix(std::size_t k, InteractionMethod m)
      : num_features(k), method(m), entries(k * k, 0.0) {}

  double at(std::size_t i, std::size_t j) const { return entries[i * num_features + j]; }
  double& at(std::size_t i, std::size_t j) { return entries[i * num_features + j]; }

  // Total of unique terms: all diagonals plus each unordered pair once.
  double total() const {
    double t = 0.0;
    for (std::size_t i = 0; i < num_features; ++i) {
      for (std::size_t j = i; j < num_features; ++j) t += at(i, j);
    }
    return t;
  }
};

// Full order-2 decomposition of one instance. Each unordered pair is computed
// once and mirrored; diagonals are derived from exact Shapley values so that
// the row identity Phi_i = M_ii + share * sum_{j != i} M_ij holds by
// construction.
inline InteractionMatrix interaction_matrix(ValueContext& ctx, InteractionMethod method) {
  const std::size_t k = ctx.num_features();
  InteractionMatrix m(k, method);
  const std::vector<double> phi = shapley_exact(ctx);
  if (k == 1) {
    m.at(0, 0) = phi[0];
    return m;
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double p = interaction_pair(ctx, i, j, method);
      m.at(i, j) = p;
      m.at(j, i) = p;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j != i) row += m.at(i, j);
    }
    m.at(i, i) = main_from_pairs(phi[i], row, method);
  }
  return m;
}

struct SampledValue {
  double value = 0.0;
  double std_error = 0.0;
};

// Sampled off-diagonal term for K beyond the exact cap. Subset sizes are
// strata: stratum s has total weight q_s = C(K-2, s) * w(s, K), computed by a
// recurrence that never forms a factorial, and receives a proportional share
// of the sample budget. Within a stratum, subsets of size s are drawn
// uniformly via a partial shuffle and the second difference is averaged.
// The estimate is sum_s q_s * mean_s with variance propagated per stratum.
inline SampledValue interaction_pair_sampled(ValueContext& ctx, std::size_t i, std::size_t j,
                                             InteractionMethod method, std::size_t samples,
                                             std::uint64_t seed) {
  const std::size_t k = ctx.num_features();
  detail::check_pair(i, j, k);
  if (samples < 2 * (k - 1)) {
    throw DomainError("sampled pair estimator needs at least 2 samples per subset size");
  }
  // Stratum masses. Taylor: q_0 = 2/K, q_{s+1} = q_s (K-2-s)/(K-s-1).
  // Interaction value: q_s = 1 / (2 (K-1)) for every s.
  std::vector<double> mass(k - 1);
  if (method == InteractionMethod::kTaylor) {
    mass[0] = 2.0 / static_cast<double>(k);
    for (std::size_t s = 0; s + 2 < k; ++s) {
      mass[s + 1] = mass[s] * static_cast<double>(k - 2 - s) / static_cast<double>(k - s - 1);
    }
  } else {
    const double q = 1.0 / (2.0 * static_cast<double>(k - 1));
    for (double& v : mass) v = q;
  }
  double mass_total = 0.0;
  for (const double v : mass) mass_total += v;

  Rng rng(seed);
  std::vector<std::size_t> candidates;
  candidates.reserve(k - 2);
  for (std::size_t f = 0; f < k; ++f) {
    if (f != i && f != j) candidates.push_back(f);
  }
  const Coalition bi = Coalition{1} << i;
  const Coalition bj = Coalition{1} << j;

  double estimate = 0.0;
  double variance = 0.0;
  std::vector<double> draws;
  for (std::size_t s = 0; s + 2 <= k; ++s) {
    const auto budget = static_cast<std::size_t>(
        std::llround(static_cast<double>(samples) * mass[s] / mass_total));
    const std::size_t n_s = budget < 2 ? 2 : budget;
    draws.clear();
    draws.reserve(n_s);
    for (std::size_t n = 0; n < n_s; ++n) {
      // Partial Fisher-Yates: the first s entries become a uniform subset.
      for (std::size_t t = 0; t < s; ++t) {
        const std::size_t swap_with =
            t + static_cast<std::size_t>(rng.below(candidates.size() - t));
        std::swap(candidates[t], candidates[swap_with]);
      }
      Coalition base = 0;
      for (std::size_t t = 0; t < s; ++t) base |= Coalition{1} << candidates[t];
      draws.push_back(ctx.value(base | bi | bj) - ctx.value(base | bi) -
                      ctx.value(base | bj) + ctx.value(base));
    }
    double sum = 0.0;
    for (const double d : draws) sum += d;
    const double mean = sum / static_cast<double>(n_s);
    double ss = 0.0;
    for (const double d : draws) {
      const double dd = d - mean;
      ss += dd * dd;
    }
    const double var_mean = ss / static_cast<double>(n_s - 1) / static_cast<double>(n_s);
    estimate += mass[s] * mean;
    variance += mass[s] * mass[s] * var_mean;
  }
  return {estimate, std::sqrt(variance)};
}

// Full decomposition via estimators only: sampled Shapley values for the
// diagonal base and one sampled pair term per unordered pair, each on its own
// derived seed stream. Usable beyond the exact enumeration cap.
inline InteractionMatrix interaction_matrix_sampled(ValueContext& ctx,
                                                    InteractionMethod method,
                                                    std::size_t samples, std::uint64_t seed) {
  const std::size_t k = ctx.num_features();
  InteractionMatrix m(k, method);
  const SampledShapley phi = shapley_sampled(ctx, samples, Rng::derive(seed, 0));
  if (k == 1) {
    m.at(0, 0) = phi.values[0];
    return m;
  }
  std::uint64_t stream = 1;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double p =
          interaction_pair_sampled(ctx, i, j, method, samples, Rng::derive(seed, stream++))
              .value;
      m.at(i, j) = p;
      m.at(j, i) = p;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j != i) row += m.at(i, j);
    }
    m.at(i, i) = main_from_pairs(phi.values[i], row, method);
  }
  return m;
}

// Per-instance matrices over a cohort plus their entrywise cohort centering,
// the interaction analogue of centering raw Shapley values.
struct CohortMatrices {
  std::vector<std::string> feature_names;
  InteractionMethod method = InteractionMethod::kTaylor;
  std::vector<InteractionMatrix> raw;
  std::vector<InteractionMatrix> centered;
  std::vector<double> entry_means;  // row-major K x K
};

namespace detail {

template <typename MakeContext, typename Builder>
CohortMatrices matrices_impl(MakeContext&& make_context, Builder&& build_matrix,
                             const std::vector<std::string>& names, const FeatureTable& data,
                             InteractionMethod method) {
  CohortMatrices out;
  out.feature_names = names;
  out.method = method;
  const std::size_t k = names.size();
  const std::size_t n = data.num_rows();
  out.raw.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    ValueContext ctx = make_context(data.row(r));
    out.raw.push_back(build_matrix(ctx, r));
  }
  out.entry_means.assign(k * k, 0.0);
  for (std::size_t e = 0; e < k * k; ++e) {
    long double s = 0.0L;
    for (const InteractionMatrix& m : out.raw) s += m.entries[e];
    out.entry_means[e] = static_cast<double>(s / static_cast<long double>(n));
  }
  out.centered.reserve(n);
  for (const InteractionMatrix& m : out.raw) {
    InteractionMatrix c(k, method);
    for (std::size_t e = 0; e < k * k; ++e) c.entries[e] = m.entries[e] - out.entry_means[e];
    out.centered.push_back(std::move(c));
  }
  return out;
}

}  // namespace detail

struct MatrixOptions {
  InteractionMethod method = InteractionMethod::kTaylor;
  AttributionMethod attribution = AttributionMethod::kExact;
  std::size_t samples = 2000;  // used by the sampled attribution method only
  std::uint64_t seed = 0;
};

namespace detail {

inline auto matrix_builder(const MatrixOptions& options) {
  return [options](ValueContext& ctx, std::size_t row) {
    if (options.attribution == AttributionMethod::kExact) {
      return interaction_matrix(ctx, options.method);
    }
    return interaction_matrix_sampled(ctx, options.method, options.samples,
                                      Rng::derive(options.seed, row));
  };
}

}  // namespace detail

inline CohortMatrices matrices_for_cohort(const TreeEnsemble& model, const FeatureTable& data,
                                          const FeatureTable& background,
                                          const MatrixOptions& options = {}) {
  if (data.num_features() != model.num_features()) {
    throw DimensionError("data has " + std::to_string(data.num_features()) +
                         " features, model expects " + std::to_string(model.num_features()));
  }
  return detail::matrices_impl(
      [&](std::span<const Cell> row) { return ValueContext(model, row, background); },
      detail::matrix_builder(options), model.feature_names, data, options.method);
}

inline CohortMatrices matrices_for_cohort(const ModelFn& fn,
                                          const std::vector<std::string>& feature_names,
                                          const FeatureTable& data,
                                          const FeatureTable& background,
                                          const MatrixOptions& options = {}) {
  if (data.num_features() != feature_names.size()) {
    throw DimensionError("data has " + std::to_string(data.num_features()) +
                         " features, expected " + std::to_string(feature_names.size()));
  }
  return detail::matrices_impl(
      [&](std::span<const Cell> row) {
        return ValueContext(fn, feature_names.size(), row, background);
      },
      detail::matrix_builder(options), feature_names, data, options.method);
}

}  // namespace staylor
