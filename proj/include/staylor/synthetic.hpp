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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "staylor/error.hpp"
#include "staylor/rng.hpp"
#include "staylor/table.hpp"

namespace staylor {

// A function of tabulated main effects and pairwise interactions over finite
// per-feature grids with uniform marginals:
//   F(x) = intercept + sum_i f_i(x_i) + sum_{i<j} g_ij(x_i, x_j).
// Components are stored canonically: every f_i has zero mean over its grid
// and every g_ij has zero mean along each axis (double centering), with the
// removed parts folded into lower-order terms at insertion time. Evaluation
// is unchanged by this; it makes the stored components the unique ground
// truth that an order-2 decomposition should recover.
class SeparableSpec {
 public:
  SeparableSpec(std::vector<std::string> names, std::vector<std::vector<double>> grids)
      : names_(std::move(names)), grids_(std::move(grids)) {
    if (names_.empty() || names_.size() != grids_.size()) {
      throw DimensionError("need one grid per feature name");
    }
    for (const auto& g : grids_) {
      if (g.size() < 2) throw DomainError("each grid needs at least two points");
      for (std::size_t i = 1; i < g.size(); ++i) {
        if (!(g[i - 1] < g[i])) throw DomainError("grid points must be strictly increasing");
      }
    }
    mains_.resize(grids_.size());
    for (std::size_t f = 0; f < grids_.size(); ++f) mains_[f].assign(grids_[f].size(), 0.0);
  }

  std::size_t num_features() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& grid(std::size_t f) const { return grids_.at(f); }
  double intercept() const { return intercept_; }

  // Adds f_i given as one value per grid point; the grid mean moves into the
  // intercept.
  void add_main(std::size_t f, const std::vector<double>& values) {
    if (f >= num_features()) throw DomainError("feature index out of range");
    if (values.size() != grids_[f].size()) {
      throw DimensionError("main effect table must match the grid size");
    }
    long double sum = 0.0L;
    for (const double v : values) sum += v;
    const double mean = static_cast<double>(sum / static_cast<long double>(values.size()));
    for (std::size_t a = 0; a < values.size(); ++a) mains_[f][a] += values[a] - mean;
    intercept_ += mean;
  }

  // Adds g_ij given as a row-major |grid_i| x |grid_j| table. The table is
  // double-centered; its row and column means move into the respective main
  // effects and the grand mean into the intercept, so F itself is unchanged.
  void add_pair(std::size_t i, std::size_t j, const std::vector<double>& table) {
    if (i >= num_features() || j >= num_features()) {
      throw DomainError("feature index out of range");
    }
    if (i == j) throw DomainError("pair components need two distinct features");
    if (i > j) {
      // Store transposed under the canonical (low, high) key.
      const std::size_t ni = grids_[i].size(), nj = grids_[j].size();
      if (table.size() != ni * nj) throw DimensionError("pair table must match the grids");
      std::vector<double> t(nj * ni);
      for (std::size_t a = 0; a < ni; ++a) {
        for (std::size_t b = 0; b < nj; ++b) t[b * ni + a] = table[a * nj + b];
      }
      add_pair(j, i, t);
      return;
    }
    const std::size_t ni = grids_[i].size(), nj = grids_[j].size();
    if (table.size() != ni * nj) throw DimensionError("pair table must match the grids");
    std::vector<double> row_mean(ni, 0.0), col_mean(nj, 0.0);
    long double grand = 0.0L;
    for (std::size_t a = 0; a < ni; ++a) {
      long double s = 0.0L;
      for (std::size_t b = 0; b < nj; ++b) s += table[a * nj + b];
      row_mean[a] = static_cast<double>(s / static_cast<long double>(nj));
      grand += s;
    }
    for (std::size_t b = 0; b < nj; ++b) {
      long double s = 0.0L;
      for (std::size_t a = 0; a < ni; ++a) s += table[a * nj + b];
      col_mean[b] = static_cast<double>(s / static_cast<long double>(ni));
    }
    const double grand_mean =
        static_cast<double>(grand / static_cast<long double>(ni * nj));
    std::vector<double>& target = pairs_[{i, j}];
    if (target.empty()) target.assign(ni * nj, 0.0);
    for (std::size_t a = 0; a < ni; ++a) {
      for (std::size_t b = 0; b < nj; ++b) {
        target[a * nj + b] += table[a * nj + b] - row_mean[a] - col_mean[b] + grand_mean;
      }
    }
    for (std::size_t a = 0; a < ni; ++a) mains_[i][a] += row_mean[a] - grand_mean;
    for (std::size_t b = 0; b < nj; ++b) mains_[j][b] += col_mean[b] - grand_mean;
    intercept_ += grand_mean;
  }

  // Index of x in feature f's grid; the instance must lie exactly on a grid
  // point.
  std::size_t grid_index(std::size_t f, double x) const {
    const std::vector<double>& g = grids_.at(f);
    for (std::size_t a = 0; a < g.size(); ++a) {
      if (g[a] == x) return a;
    }
    throw DomainError("value " + detail::render_double(x) + " is not on the grid of feature '" +
                      names_[f] + "'");
  }

  double main_component(std::size_t f, double x) const {
    return mains_.at(f)[grid_index(f, x)];
  }

  double pair_component(std::size_t i, std::size_t j, double xi, double xj) const {
    if (i == j) throw DomainError("pair components need two distinct features");
    if (i > j) return pair_component(j, i, xj, xi);
    const auto it = pairs_.find({i, j});
    if (it == pairs_.end()) return 0.0;
    return it->second[grid_index(i, xi) * grids_[j].size() + grid_index(j, xj)];
  }

  double evaluate(std::span<const Cell> x) const {
    if (x.size() != num_features()) {
      throw DimensionError("instance has " + std::to_string(x.size()) + " cells, expected " +
                           std::to_string(num_features()));
    }
    std::vector<std::size_t> idx(x.size());
    for (std::size_t f = 0; f < x.size(); ++f) {
      if (!x[f]) throw DomainError("synthetic functions need fully observed instances");
      idx[f] = grid_index(f, *x[f]);
    }
    double sum = intercept_;
    for (std::size_t f = 0; f < x.size(); ++f) sum += mains_[f][idx[f]];
    for (const auto& [key, table] : pairs_) {
      sum += table[idx[key.first] * grids_[key.second].size() + idx[key.second]];
    }
    return sum;
  }

  // Callable copy of this spec with shared ownership, safe to outlive it.
  ModelFn fn() const {
    auto spec = std::make_shared<const SeparableSpec>(*this);
    return [spec](std::span<const Cell> x) { return spec->evaluate(x); };
  }

  // Full product of the grids, in odometer order with the last feature
  // cycling fastest. Under this table the interventional coalition values
  // take expectations over exact uniform marginals.
  FeatureTable background_table() const {
    std::size_t total = 1;
    for (const auto& g : grids_) total *= g.size();
    std::vector<Cell> cells;
    cells.reserve(total * num_features());
    for (std::size_t r = 0; r < total; ++r) {
      std::size_t rem = r;
      std::vector<std::size_t> idx(num_features());
      for (std::size_t f = num_features(); f-- > 0;) {
        idx[f] = rem % grids_[f].size();
        rem /= grids_[f].size();
      }
      for (std::size_t f = 0; f < num_features(); ++f) cells.push_back(grids_[f][idx[f]]);
    }
    return FeatureTable(names_, std::move(cells));
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> grids_;
  std::vector<std::vector<double>> mains_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> pairs_;
  double intercept_ = 0.0;
};

// F(x, y, z) = a x + b y + c z + d x y + e x z over the cube {-1, +1}^3.
// All terms are already centered under the uniform cube marginals, so the
// coefficients are directly the ground-truth components.
inline SeparableSpec make_eq5_function(double a, double b, double c, double d, double e) {
  SeparableSpec spec({"x", "y", "z"}, {{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}});
  spec.add_main(0, {-a, a});
  spec.add_main(1, {-b, b});
  spec.add_main(2, {-c, c});
  spec.add_pair(0, 1, {d, -d, -d, d});
  spec.add_pair(0, 2, {e, -e, -e, e});
  return spec;
}

struct SyntheticCohort {
  FeatureTable features;
  std::vector<double> targets;
  std::vector<double> noise;
  nlohmann::json manifest;

  // Features plus a trailing "target" column, the on-disk layout.
  FeatureTable table_with_target() const {
    std::vector<std::string> names = features.names();
    names.push_back("target");
    std::vector<Cell> cells;
    cells.reserve(features.num_rows() * names.size());
    for (std::size_t r = 0; r < features.num_rows(); ++r) {
      const std::span<const Cell> row = features.row(r);
      cells.insert(cells.end(), row.begin(), row.end());
      cells.push_back(targets[r]);
    }
    return FeatureTable(std::move(names), std::move(cells));
  }
};

// Probability that a U(0.3, 2.0) draw exceeds the 1.2 threshold.
inline constexpr double kThresholdStepMass = 0.8 / 1.7;

// Noise-free target of the threshold preset. Only b and age enter; the three
// n* features are inert and should receive zero attribution.
inline double threshold_equation(double b, double age) {
  const double step = b > 1.2 ? 1.0 : 0.0;
  const double main = -0.3 * step;
  const double interaction =
      0.3 * (step - kThresholdStepMass) * ((70.0 - age) / 50.0 - 0.5);
  return main + interaction;
}

// Cohort with one step main effect on b, one step-by-slope interaction
// between b and age, three inert noise features, and about 4% missing cells
// in n2. Per row the generator draws, in this order: b, age, n0, n1, n2, the
// n2 missingness coin, and the noise normal.
inline SyntheticCohort make_threshold_cohort(std::size_t n, std::uint64_t seed,
                                             double noise_std = 0.05) {
  if (n < 100) throw DomainError("threshold cohort needs at least 100 rows");
  if (noise_std < 0.0) throw DomainError("noise_std must be non-negative");
  const std::vector<std::string> names = {"b", "age", "n0", "n1", "n2"};
  Rng rng(seed);
  std::vector<Cell> cells;
  cells.reserve(n * names.size());
  std::vector<double> targets(n);
  std::vector<double> noise(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double b = rng.uniform(0.3, 2.0);
    const double age = rng.uniform(20.0, 70.0);
    const double n0 = rng.uniform01();
    const double n1 = rng.uniform01();
    const double n2 = rng.uniform01();
    const bool n2_missing = rng.uniform01() < 0.04;
    noise[r] = noise_std * rng.normal();
    cells.push_back(b);
    cells.push_back(age);
    cells.push_back(n0);
    cells.push_back(n1);
    cells.push_back(n2_missing ? Cell{} : Cell{n2});
    targets[r] = threshold_equation(b, age) + noise[r];
  }
  SyntheticCohort out{FeatureTable(names, std::move(cells)), std::move(targets),
                      std::move(noise), nlohmann::json()};
  out.manifest = {
      {"preset", "threshold"},
      {"n", n},
      {"seed", seed},
      {"noise_std", noise_std},
      {"feature_names", names},
      {"target_column", "target"},
      {"equation",
       {{"main", "-0.3 * step(b > 1.2)"},
        {"interaction", "0.3 * (step(b > 1.2) - 8/17) * ((70 - age)/50 - 0.5)"},
        {"threshold", 1.2},
        {"step_mass", kThresholdStepMass},
        {"inert_features", {"n0", "n1", "n2"}},
        {"missing", {{"n2", 0.04}}}}},
  };
  return out;
}

// Cohort drawn uniformly from the cube of make_eq5_function(a..e), with
// optional additive Gaussian noise on the target. Per row the generator
// draws one grid index per feature and then the noise normal.
inline SyntheticCohort make_eq5_cohort(double a, double b, double c, double d, double e,
                                       std::size_t n, std::uint64_t seed,
                                       double noise_std = 0.0) {
  if (n < 1) throw DomainError("cohort needs at least one row");
  if (noise_std < 0.0) throw DomainError("noise_std must be non-negative");
  const SeparableSpec spec = make_eq5_function(a, b, c, d, e);
  Rng rng(seed);
  std::vector<Cell> cells;
  cells.reserve(n * spec.num_features());
  std::vector<double> targets(n);
  std::vector<double> noise(n);
  std::vector<Cell> row(spec.num_features());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < spec.num_features(); ++f) {
      const std::vector<double>& g = spec.grid(f);
      row[f] = g[static_cast<std::size_t>(rng.below(g.size()))];
      cells.push_back(row[f]);
    }
    noise[r] = noise_std * rng.normal();
    targets[r] = spec.evaluate(row) + noise[r];
  }
  SyntheticCohort out{FeatureTable(spec.names(), std::move(cells)), std::move(targets),
                      std::move(noise), nlohmann::json()};
  out.manifest = {
      {"preset", "eq5"},
      {"n", n},
      {"seed", seed},
      {"noise_std", noise_std},
      {"feature_names", spec.names()},
      {"target_column", "target"},
      {"coefficients", {{"a", a}, {"b", b}, {"c", c}, {"d", d}, {"e", e}}},
  };
  return out;
}

}  // namespace staylor
