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
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "staylor/error.hpp"
#include "staylor/interaction.hpp"
#include "staylor/shapley.hpp"

namespace staylor {

// One ranked term. Single-feature importances use feature1 == feature2.
struct ImportanceEntry {
  std::size_t rank = 0;  // 1-based, assigned after sorting
  std::size_t index1 = 0;
  std::size_t index2 = 0;
  std::string feature1;
  std::string feature2;
  double importance = 0.0;
};

namespace detail {

// Population standard deviation (divisor n), two-pass.
inline double population_std(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  long double sum = 0.0L;
  for (const double x : xs) sum += x;
  const long double mean = sum / static_cast<long double>(n);
  long double ss = 0.0L;
  for (const double x : xs) {
    const long double d = x - mean;
    ss += d * d;
  }
  return static_cast<double>(std::sqrt(static_cast<double>(ss / static_cast<long double>(n))));
}

// Descending importance; ties fall back to ascending feature indices so the
// ranking is a total order.
inline std::vector<ImportanceEntry> rank_entries(std::vector<ImportanceEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const ImportanceEntry& a, const ImportanceEntry& b) {
              if (a.importance != b.importance) return a.importance > b.importance;
              if (a.index1 != b.index1) return a.index1 < b.index1;
              return a.index2 < b.index2;
            });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = i + 1;
  return entries;
}

}  // namespace detail

// Global importance of each feature: the spread (population standard
// deviation) of its centered attribution across the cohort. A feature the
// model never uses has zero spread and therefore zero importance.
inline std::vector<ImportanceEntry> feature_importance(const CohortAttributions& cohort) {
  if (cohort.rows.empty()) throw DomainError("importance needs a non-empty cohort");
  const std::size_t k = cohort.feature_names.size();
  std::vector<ImportanceEntry> entries(k);
  std::vector<double> column(cohort.rows.size());
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t r = 0; r < cohort.rows.size(); ++r) {
      column[r] = cohort.rows[r].centered[f];
    }
    entries[f] = {0, f, f, cohort.feature_names[f], cohort.feature_names[f],
                  detail::population_std(column)};
  }
  return detail::rank_entries(std::move(entries));
}

// Importance of every order-2 term (K mains plus K(K-1)/2 unordered pairs)
// as the spread of that term across the cohort. `centered` selects centered
// or raw entries; `half_off_diagonal` halves off-diagonal values first, the
// convention under which a pair's two halves sit on the same scale as the
// per-feature contributions they split between.
inline std::vector<ImportanceEntry> term_importance_with(const CohortMatrices& matrices,
                                                         bool centered,
                                                         bool half_off_diagonal) {
  if (matrices.raw.empty()) throw DomainError("importance needs a non-empty cohort");
  const std::size_t k = matrices.feature_names.size();
  const std::vector<InteractionMatrix>& source =
      centered ? matrices.centered : matrices.raw;
  std::vector<ImportanceEntry> entries;
  entries.reserve(k * (k + 1) / 2);
  std::vector<double> column(source.size());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const double scale = (half_off_diagonal && i != j) ? 0.5 : 1.0;
      for (std::size_t r = 0; r < source.size(); ++r) {
        column[r] = scale * source[r].at(i, j);
      }
      entries.push_back({0, i, j, matrices.feature_names[i], matrices.feature_names[j],
                         detail::population_std(column)});
    }
  }
  return detail::rank_entries(std::move(entries));
}

inline std::vector<ImportanceEntry> term_importance(const CohortMatrices& matrices) {
  return term_importance_with(matrices, /*centered=*/true, /*half_off_diagonal=*/false);
}

}  // namespace staylor
