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

#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "staylor/error.hpp"
#include "staylor/table.hpp"
#include "staylor/tree.hpp"

namespace staylor {

// Bitmask over feature indices; bit i set means feature i is in the coalition.
using Coalition = std::uint64_t;

namespace detail {

inline std::uint64_t factorial_u64(std::size_t n) {
  static constexpr std::uint64_t kTable[21] = {
      1ull,
      1ull,
      2ull,
      6ull,
      24ull,
      120ull,
      720ull,
      5040ull,
      40320ull,
      362880ull,
      3628800ull,
      39916800ull,
      479001600ull,
      6227020800ull,
      87178291200ull,
      1307674368000ull,
      20922789888000ull,
      355687428096000ull,
      6402373705728000ull,
      121645100408832000ull,
      2432902008176640000ull};
  if (n > 20) {
    throw CapError("factorial of " + std::to_string(n) + " exceeds the 64-bit range");
  }
  return kTable[n];
}

}  // namespace detail

// Shapley coalition weight |S|! (K - |S| - 1)! / K! for a coalition of size
// `subset_size` drawn from K = `num_features` players. Exact up to K = 20:
// the numerator and denominator are 64-bit factorial products and a single
// floating-point division is performed.
inline double weight_shapley(std::size_t subset_size, std::size_t num_features) {
  if (num_features == 0) throw DomainError("weights need at least one feature");
  if (subset_size + 1 > num_features) {
    throw DomainError("subset size " + std::to_string(subset_size) +
                      " out of range for " + std::to_string(num_features) + " features");
  }
  const std::uint64_t num = detail::factorial_u64(subset_size) *
                            detail::factorial_u64(num_features - subset_size - 1);
  return static_cast<double>(num) / static_cast<double>(detail::factorial_u64(num_features));
}

// Order-2 Shapley-Taylor weight 2 |S|! (K - |S| - 1)! / K! for S avoiding
// both members of the pair, so |S| <= K - 2.
inline double weight_taylor(std::size_t subset_size, std::size_t num_features) {
  if (num_features < 2) throw DomainError("pair weights need at least two features");
  if (subset_size + 2 > num_features) {
    throw DomainError("subset size " + std::to_string(subset_size) +
                      " out of range for a pair among " + std::to_string(num_features) +
                      " features");
  }
  const std::uint64_t num = 2ull * detail::factorial_u64(subset_size) *
                            detail::factorial_u64(num_features - subset_size - 1);
  return static_cast<double>(num) / static_cast<double>(detail::factorial_u64(num_features));
}

// Shapley interaction value weight |S|! (K - |S| - 2)! / (2 (K - 1)!).
inline double weight_siv(std::size_t subset_size, std::size_t num_features) {
  if (num_features < 2) throw DomainError("pair weights need at least two features");
  if (subset_size + 2 > num_features) {
    throw DomainError("subset size " + std::to_string(subset_size) +
                      " out of range for a pair among " + std::to_string(num_features) +
                      " features");
  }
  const std::uint64_t num = detail::factorial_u64(subset_size) *
                            detail::factorial_u64(num_features - subset_size - 2);
  const std::uint64_t den = 2ull * detail::factorial_u64(num_features - 1);
  return static_cast<double>(num) / static_cast<double>(den);
}

// Largest K for which full 2^K enumeration is permitted. Defaults to 20 (the
// 64-bit factorial limit); the STAYLOR_EXACT_CAP environment variable can
// lower it. Values above 20 still hit the factorial guard in the weights.
inline std::size_t exact_cap() {
  if (const char* env = std::getenv("STAYLOR_EXACT_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  return 20;
}

// Interventional coalition values for one explained instance against a
// background table: v(S) is the model prediction averaged over hybrids that
// take the coalition's cells from the instance and everything else from a
// background row. Missing cells of the instance stay missing inside hybrids.
// Values are cached; a cache entry is written once and never changes, so
// repeated queries are bitwise identical.
class ValueContext {
 public:
  ValueContext(const TreeEnsemble& model, std::span<const Cell> instance,
               const FeatureTable& background)
      : ensemble_(&model),
        fn_(model.predictor()),
        num_features_(model.num_features()),
        instance_(instance.begin(), instance.end()),
        background_(background) {
    init();
  }

  ValueContext(ModelFn fn, std::size_t num_features, std::span<const Cell> instance,
               const FeatureTable& background)
      : ensemble_(nullptr),
        fn_(std::move(fn)),
        num_features_(num_features),
        instance_(instance.begin(), instance.end()),
        background_(background) {
    init();
  }

  std::size_t num_features() const { return num_features_; }

  Coalition full_mask() const {
    return num_features_ == 64 ? ~0ull : ((1ull << num_features_) - 1ull);
  }

  std::span<const Cell> instance() const { return instance_; }
  const FeatureTable& background() const { return background_; }

  // Model prediction on the full instance; equals value(full_mask()) exactly.
  double prediction() const { return fn_(instance_); }

  // Number of coalition values computed so far (cache hits excluded).
  std::uint64_t evaluations() const { return evaluations_; }

  double value(Coalition s) {
    if (s > full_mask()) throw DomainError("coalition mask out of range");
    if (dense_) {
      if (!have_[s]) {
        values_[s] = compute(s);
        have_[s] = 1;
        ++evaluations_;
      }
      return values_[s];
    }
    const auto it = sparse_.find(s);
    if (it != sparse_.end()) return it->second;
    const double v = compute(s);
    sparse_.emplace(s, v);
    ++evaluations_;
    return v;
  }

  // Populates the cache for all 2^K coalitions. Throws CapError when K
  // exceeds exact_cap(). For tree ensembles a batched pass over
  // (background row, tree) pairs fills every coalition at once, which is far
  // cheaper than 2^K independent evaluations; the result is identical.
  void ensure_all() {
    if (all_cached_) return;
    if (num_features_ > exact_cap()) {
      throw CapError("exact enumeration needs 2^" + std::to_string(num_features_) +
                     " coalition values and is capped at " + std::to_string(exact_cap()) +
                     " features; use the sampled estimator instead");
    }
    if (ensemble_ && dense_ && evaluations_ == 0) {
      fill_from_trees();
    } else {
      const Coalition full = full_mask();
      for (Coalition s = 0;; ++s) {
        value(s);
        if (s == full) break;
      }
    }
    all_cached_ = true;
  }

 private:
  void init() {
    if (num_features_ == 0) throw DomainError("need at least one feature");
    if (num_features_ > 63) {
      throw CapError("coalition masks support at most 63 features, got " +
                     std::to_string(num_features_));
    }
    if (instance_.size() != num_features_) {
      throw DimensionError("instance has " + std::to_string(instance_.size()) +
                           " cells, model expects " + std::to_string(num_features_));
    }
    if (background_.num_features() != num_features_) {
      throw DimensionError("background has " + std::to_string(background_.num_features()) +
                           " features, model expects " + std::to_string(num_features_));
    }
    dense_ = num_features_ <= kDenseLimit && num_features_ <= exact_cap();
    if (dense_) {
      const std::size_t n = std::size_t{1} << num_features_;
      values_.assign(n, 0.0);
      have_.assign(n, 0);
    }
    hybrid_.resize(num_features_);
  }

  double compute(Coalition s) const {
    if (s == full_mask()) return fn_(instance_);  // no cells are replaced
    double acc = 0.0;
    const std::size_t rows = background_.num_rows();
    for (std::size_t r = 0; r < rows; ++r) {
      const std::span<const Cell> row = background_.row(r);
      for (std::size_t f = 0; f < num_features_; ++f) {
        hybrid_[f] = (s >> f) & 1u ? instance_[f] : row[f];
      }
      acc += fn_(hybrid_);
    }
    return acc / static_cast<double>(rows);
  }

  // For every (background row, tree) pair, walk the tree once. At a split
  // the instance and the background row each have a definite routing (missing
  // cells follow default_left); where they agree the walk continues down one
  // child, where they differ both children are explored under an include or
  // exclude constraint on that feature. Each leaf then contributes its value
  // to exactly the coalitions matching its constraints, a subcube of masks
  // enumerated via the (sub - 1) & free trick. Leaves with no constraints
  // accumulate into a shared scalar instead of 2^K slots.
  void fill_from_trees() {
    const std::size_t n = std::size_t{1} << num_features_;
    const Coalition full = full_mask();
    double common = 0.0;
    const std::size_t rows = background_.num_rows();
    for (std::size_t r = 0; r < rows; ++r) {
      const std::span<const Cell> row = background_.row(r);
      for (const Tree& tree : ensemble_->trees) {
        descend(tree, 0, row, 0, 0, common);
      }
    }
    const double inv_rows = 1.0 / static_cast<double>(rows);
    for (Coalition s = 0; s < n; ++s) {
      values_[s] = ensemble_->base_score + (common + values_[s]) * inv_rows;
      have_[s] = 1;
    }
    values_[full] = ensemble_->predict(instance_);  // exact, no replacement
    evaluations_ += n;
  }

  void descend(const Tree& tree, std::int32_t node, std::span<const Cell> row,
               Coalition include, Coalition exclude, double& common) {
    while (true) {
      const TreeNode& nd = tree.nodes[node];
      if (nd.is_leaf()) {
        if (include == 0 && exclude == 0) {
          common += nd.value;
          return;
        }
        const Coalition free = full_mask() & ~(include | exclude);
        Coalition sub = free;
        while (true) {
          values_[include | sub] += nd.value;
          if (sub == 0) break;
          sub = (sub - 1) & free;
        }
        return;
      }
      const Cell& xi = instance_[static_cast<std::size_t>(nd.feature)];
      const Cell& bi = row[static_cast<std::size_t>(nd.feature)];
      const bool x_left = xi ? (*xi <= nd.threshold) : nd.default_left;
      const bool b_left = bi ? (*bi <= nd.threshold) : nd.default_left;
      const Coalition bit = Coalition{1} << nd.feature;
      // A feature already constrained on this path keeps its routing: a
      // repeated split must follow the side the earlier divergence fixed.
      if (include & bit) {
        node = x_left ? nd.left : nd.right;
        continue;
      }
      if (exclude & bit) {
        node = b_left ? nd.left : nd.right;
        continue;
      }
      if (x_left == b_left) {
        node = x_left ? nd.left : nd.right;
        continue;
      }
      descend(tree, x_left ? nd.left : nd.right, row, include | bit, exclude, common);
      node = b_left ? nd.left : nd.right;
      exclude |= bit;
    }
  }

  static constexpr std::size_t kDenseLimit = 22;

  const TreeEnsemble* ensemble_;
  ModelFn fn_;
  std::size_t num_features_;
  std::vector<Cell> instance_;
  const FeatureTable& background_;
  bool dense_ = false;
  bool all_cached_ = false;
  std::vector<double> values_;
  std::vector<std::uint8_t> have_;
  std::unordered_map<Coalition, double> sparse_;
  mutable std::vector<Cell> hybrid_;
  std::uint64_t evaluations_ = 0;
};

}  // namespace staylor
