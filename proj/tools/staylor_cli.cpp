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

// staylor: train small boosted tree models and explain any model on a cohort
// with exact or sampled Shapley values and order-2 main/interaction
// decompositions, emitting plot-ready CSV/JSON/SVG artifacts.
//
// Exit codes: 0 success, 1 usage error, 2 data or schema error, 3 exact
// enumeration cap exceeded.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "staylor/staylor.hpp"

namespace {

namespace fs = std::filesystem;
using staylor::Cell;
using staylor::FeatureTable;

// Command-line misuse that CLI11's option checks cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw staylor::IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Selects the named columns, in the given order. Lets data files carry extra
// columns (such as the training target) past model-driven commands.
FeatureTable project_features(const FeatureTable& table, const std::vector<std::string>& names) {
  std::vector<std::size_t> cols;
  cols.reserve(names.size());
  for (const std::string& name : names) cols.push_back(table.feature_index(name));
  std::vector<Cell> cells;
  cells.reserve(table.num_rows() * names.size());
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    for (const std::size_t c : cols) cells.push_back(table.cell(r, c));
  }
  return FeatureTable(names, std::move(cells));
}

std::pair<FeatureTable, std::vector<double>> split_target(const FeatureTable& table,
                                                          const std::string& target) {
  const std::size_t tcol = table.feature_index(target);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < table.names().size(); ++c) {
    if (c != tcol) names.push_back(table.names()[c]);
  }
  if (names.empty()) throw staylor::SchemaError("no feature columns besides the target");
  std::vector<double> targets(table.num_rows());
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    const Cell& c = table.cell(r, tcol);
    if (!c) {
      throw staylor::SchemaError("target column '" + target + "' is missing in row " +
                                 std::to_string(r));
    }
    targets[r] = *c;
  }
  return {project_features(table, names), std::move(targets)};
}

template <typename WriteFn>
void save_artifact(const std::string& path, WriteFn&& write) {
  std::ostringstream buf;
  write(buf);
  staylor::save_text(path, buf.str());
}

std::pair<std::string, std::string> parse_pair_arg(const std::string& arg) {
  const std::size_t comma = arg.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 >= arg.size() ||
      arg.find(',', comma + 1) != std::string::npos) {
    throw UsageError("--pair expects two comma-separated feature names");
  }
  const std::string a = arg.substr(0, comma);
  const std::string b = arg.substr(comma + 1);
  if (a == b) throw UsageError("--pair needs two distinct features");
  return {a, b};
}

// Sampled runs derive one seed stream per explained row.
struct SampleArgs {
  std::size_t samples = 0;  // 0 means exact
  std::uint64_t seed = 0;

  bool sampled() const { return samples > 0; }
  void check() const {
    if (samples == 1) throw UsageError("--sampled needs at least 2 samples");
  }
};

struct TrainArgs {
  std::string data, target = "target", out;
  staylor::TrainConfig config;
};

void run_train(const TrainArgs& args) {
  const FeatureTable table = FeatureTable::load_csv(args.data);
  auto [features, targets] = split_target(table, args.target);
  const staylor::TreeEnsemble model = staylor::train_gbdt(features, targets, args.config);
  staylor::save_model(model, args.out);
}

struct ExplainArgs {
  std::string model, data, background, out;
  std::string format = "csv";
  SampleArgs sampling;
};

staylor::CohortAttributions compute_attributions(const ExplainArgs& args) {
  args.sampling.check();
  const staylor::TreeEnsemble model = staylor::load_model(args.model);
  const FeatureTable data_raw = FeatureTable::load_csv(args.data);
  const FeatureTable data = project_features(data_raw, model.feature_names);
  const FeatureTable background =
      args.background.empty()
          ? data
          : project_features(FeatureTable::load_csv(args.background), model.feature_names);
  staylor::ExplainOptions options;
  if (args.sampling.sampled()) {
    options.method = staylor::AttributionMethod::kSampled;
    options.samples = args.sampling.samples;
    options.seed = args.sampling.seed;
  }
  return staylor::shap_for_cohort(model, data, background, options);
}

void run_explain(const ExplainArgs& args) {
  const staylor::CohortAttributions cohort = compute_attributions(args);
  const staylor::ArtifactFormat format = staylor::artifact_format_from(args.format);
  save_artifact(args.out,
                [&](std::ostream& os) { staylor::write_attributions(os, cohort, format); });
}

struct InteractArgs {
  std::string model, data, background, out;
  std::string method = "taylor";
  std::string pair;
  std::string scale = "full";
  std::string format;  // default depends on mode
  SampleArgs sampling;
};

void run_interact(const InteractArgs& args) {
  args.sampling.check();
  const staylor::TreeEnsemble model = staylor::load_model(args.model);
  const FeatureTable data_raw = FeatureTable::load_csv(args.data);
  const FeatureTable data = project_features(data_raw, model.feature_names);
  const FeatureTable background =
      args.background.empty()
          ? data
          : project_features(FeatureTable::load_csv(args.background), model.feature_names);
  const staylor::InteractionMethod method = staylor::interaction_method_from(args.method);
  const bool half = args.scale == "half";

  if (!args.pair.empty()) {
    // Single pair: a dependence-shaped series of the cohort-centered term,
    // colored by the partner.
    const auto [name_i, name_j] = parse_pair_arg(args.pair);
    const std::size_t fi = data.feature_index(name_i);
    const std::size_t fj = data.feature_index(name_j);
    std::vector<double> raw(data.num_rows());
    for (std::size_t r = 0; r < data.num_rows(); ++r) {
      staylor::ValueContext ctx(model, data.row(r), background);
      if (args.sampling.sampled()) {
        raw[r] = staylor::interaction_pair_sampled(
                     ctx, fi, fj, method, args.sampling.samples,
                     staylor::Rng::derive(args.sampling.seed, r))
                     .value;
      } else {
        raw[r] = staylor::interaction_pair(ctx, fi, fj, method);
      }
    }
    long double sum = 0.0L;
    for (const double v : raw) sum += v;
    const double mean = static_cast<double>(sum / static_cast<long double>(raw.size()));
    staylor::DependenceSeries series;
    series.x_feature = name_i;
    series.y_label = "interaction_" + name_i + "_" + name_j + (half ? "_half" : "");
    series.color_feature = name_j;
    const double scale = half ? 0.5 : 1.0;
    for (std::size_t r = 0; r < data.num_rows(); ++r) {
      series.points.push_back(
          {r, data.cell(r, fi), scale * (raw[r] - mean), data.cell(r, fj)});
    }
    const staylor::ArtifactFormat format =
        staylor::artifact_format_from(args.format.empty() ? "csv" : args.format);
    save_artifact(args.out,
                  [&](std::ostream& os) { staylor::write_dependence(os, series, format); });
    return;
  }

  staylor::MatrixOptions options;
  options.method = method;
  if (args.sampling.sampled()) {
    options.attribution = staylor::AttributionMethod::kSampled;
    options.samples = args.sampling.samples;
    options.seed = args.sampling.seed;
  }
  const staylor::CohortMatrices matrices =
      staylor::matrices_for_cohort(model, data, background, options);
  const staylor::ArtifactFormat format =
      staylor::artifact_format_from(args.format.empty() ? "json" : args.format);
  save_artifact(args.out,
                [&](std::ostream& os) { staylor::write_matrices(os, matrices, format); });
}

struct ImportanceArgs {
  std::string attributions, matrices, out, variants_out;
  std::string format = "csv";
};

void run_importance(const ImportanceArgs& args) {
  if (args.attributions.empty() == args.matrices.empty()) {
    throw UsageError("importance needs exactly one of --attributions or --matrices");
  }
  const staylor::ArtifactFormat format = staylor::artifact_format_from(args.format);
  if (!args.attributions.empty()) {
    const staylor::CohortAttributions cohort = staylor::read_attributions(args.attributions);
    const std::vector<staylor::ImportanceEntry> ranked = staylor::feature_importance(cohort);
    save_artifact(args.out,
                  [&](std::ostream& os) { staylor::write_importance(os, ranked, format); });
    return;
  }
  const staylor::CohortMatrices matrices = staylor::read_matrices(args.matrices);
  const std::vector<staylor::ImportanceEntry> ranked = staylor::term_importance(matrices);
  save_artifact(args.out,
                [&](std::ostream& os) { staylor::write_importance(os, ranked, format); });
  // The ranking convention is a judgment call, so the spread under all four
  // conventions ships alongside the primary (centered, unscaled) one.
  std::string variants_path = args.variants_out;
  if (variants_path.empty()) {
    fs::path p(args.out);
    const std::string ext = p.extension().string();
    p.replace_extension();
    variants_path = p.string() + "_variants" + (ext.empty() ? ".csv" : ext);
  }
  const std::vector<std::pair<std::string, std::vector<staylor::ImportanceEntry>>> variants = {
      {"centered_full", staylor::term_importance_with(matrices, true, false)},
      {"centered_half", staylor::term_importance_with(matrices, true, true)},
      {"raw_full", staylor::term_importance_with(matrices, false, false)},
      {"raw_half", staylor::term_importance_with(matrices, false, true)},
  };
  save_artifact(variants_path, [&](std::ostream& os) {
    staylor::write_importance_variants(os, variants, format);
  });
}

struct DependenceArgs {
  std::string data, attributions, matrices, out;
  std::string feature, variant, partner, color;
  std::string scale = "full";
  std::string format = "csv";
};

void run_dependence(const DependenceArgs& args) {
  const staylor::DependenceVariant variant = staylor::dependence_variant_from(args.variant);
  const FeatureTable data = FeatureTable::load_csv(args.data);
  const bool half = args.scale == "half";
  const bool wants_attr = variant == staylor::DependenceVariant::kShap;
  if (wants_attr && args.attributions.empty()) {
    throw UsageError("variant shap needs --attributions");
  }
  if (!wants_attr && args.matrices.empty()) {
    throw UsageError("variant " + args.variant + " needs --matrices");
  }
  if (variant == staylor::DependenceVariant::kInteraction && args.partner.empty()) {
    throw UsageError("variant interaction needs --partner");
  }
  if (variant != staylor::DependenceVariant::kInteraction && !args.partner.empty()) {
    throw UsageError("--partner only applies to variant interaction");
  }
  std::string color = args.color;
  if (color.empty()) {
    color = variant == staylor::DependenceVariant::kInteraction ? args.partner : args.feature;
  }
  staylor::DependenceSeries series;
  if (wants_attr) {
    const staylor::CohortAttributions cohort = staylor::read_attributions(args.attributions);
    series = staylor::dependence_from_attributions(data, cohort, args.feature, color);
  } else {
    const staylor::CohortMatrices matrices = staylor::read_matrices(args.matrices);
    series = staylor::dependence_from_matrices(data, matrices, variant, args.feature,
                                               args.partner, half, color);
  }
  const staylor::ArtifactFormat format = staylor::artifact_format_from(args.format);
  save_artifact(args.out,
                [&](std::ostream& os) { staylor::write_dependence(os, series, format); });
}

struct SummaryArgs {
  std::string data, attributions, out;
  std::string format = "csv";
};

void run_summary(const SummaryArgs& args) {
  const FeatureTable data = FeatureTable::load_csv(args.data);
  const staylor::CohortAttributions cohort = staylor::read_attributions(args.attributions);
  const staylor::SummaryData summary = staylor::summary_from_attributions(data, cohort);
  const staylor::ArtifactFormat format = staylor::artifact_format_from(args.format);
  save_artifact(args.out,
                [&](std::ostream& os) { staylor::write_summary(os, summary, format); });
}

struct SynthArgs {
  std::string preset, out;
  std::size_t n = 256;
  std::uint64_t seed = 1;
  std::optional<double> noise_std;
  std::vector<double> coef = {1.0, 0.5, -0.7, 2.0, -1.5};
};

staylor::SyntheticCohort generate_cohort(const SynthArgs& args) {
  if (args.preset == "eq5") {
    if (args.coef.size() != 5) throw UsageError("--coef expects five numbers a,b,c,d,e");
    return staylor::make_eq5_cohort(args.coef[0], args.coef[1], args.coef[2], args.coef[3],
                                    args.coef[4], args.n, args.seed,
                                    args.noise_std.value_or(0.0));
  }
  return staylor::make_threshold_cohort(args.n, args.seed, args.noise_std.value_or(0.05));
}

void run_synth(const SynthArgs& args) {
  const staylor::SyntheticCohort cohort = generate_cohort(args);
  fs::create_directories(args.out);
  cohort.table_with_target().save_csv((fs::path(args.out) / "cohort.csv").string());
  staylor::save_text((fs::path(args.out) / "manifest.json").string(),
                     cohort.manifest.dump(2) + "\n");
}

struct VerifyArgs {
  std::string dir;
};

// Re-derives the cohort from its manifest and checks that the stored file is
// byte-identical, then re-checks the preset's analytic structure. Any failed
// line flips the exit code to 2.
int run_verify(const VerifyArgs& args) {
  const fs::path dir(args.dir);
  nlohmann::json manifest;
  {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw staylor::IoError("cannot open '" + (dir / "manifest.json").string() + "'");
    try {
      in >> manifest;
    } catch (const nlohmann::json::exception& e) {
      throw staylor::ParseError(std::string("manifest.json: ") + e.what());
    }
  }
  bool ok = true;
  const auto report = [&ok](bool pass, const std::string& what) {
    std::cout << (pass ? "ok:   " : "FAIL: ") << what << '\n';
    ok = ok && pass;
  };
  std::string preset;
  SynthArgs synth;
  try {
    preset = manifest.at("preset").get<std::string>();
    synth.preset = preset;
    synth.n = manifest.at("n").get<std::size_t>();
    synth.seed = manifest.at("seed").get<std::uint64_t>();
    synth.noise_std = manifest.at("noise_std").get<double>();
    if (preset == "eq5") {
      const nlohmann::json& c = manifest.at("coefficients");
      synth.coef = {c.at("a").get<double>(), c.at("b").get<double>(), c.at("c").get<double>(),
                    c.at("d").get<double>(), c.at("e").get<double>()};
    } else if (preset != "threshold") {
      throw staylor::SchemaError("manifest.json: unknown preset '" + preset + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw staylor::SchemaError(std::string("manifest.json: ") + e.what());
  }
  const staylor::SyntheticCohort cohort = generate_cohort(synth);

  std::ostringstream regenerated;
  cohort.table_with_target().write_csv(regenerated);
  const std::string stored = read_file((dir / "cohort.csv").string());
  report(stored == regenerated.str(), "cohort.csv is byte-identical to its manifest replay");

  if (preset == "eq5") {
    const staylor::SeparableSpec spec = staylor::make_eq5_function(
        synth.coef[0], synth.coef[1], synth.coef[2], synth.coef[3], synth.coef[4]);
    const FeatureTable cube = spec.background_table();
    const staylor::CohortMatrices matrices =
        staylor::matrices_for_cohort(spec.fn(), spec.names(), cube, cube, {});
    double max_err = 0.0;
    double max_total_err = 0.0;
    for (std::size_t r = 0; r < cube.num_rows(); ++r) {
      const auto row = cube.row(r);
      const staylor::InteractionMatrix& m = matrices.raw[r];
      for (std::size_t i = 0; i < 3; ++i) {
        max_err = std::max(max_err,
                           std::abs(m.at(i, i) - spec.main_component(i, *row[i])));
        for (std::size_t j = i + 1; j < 3; ++j) {
          max_err = std::max(
              max_err, std::abs(m.at(i, j) - spec.pair_component(i, j, *row[i], *row[j])));
        }
      }
      max_total_err = std::max(
          max_total_err, std::abs(m.total() + spec.intercept() - spec.evaluate(row)));
    }
    report(max_err <= 1e-9,
           "order-2 decomposition recovers the additive components (max err " +
               staylor::detail::render_double(max_err) + ")");
    report(max_total_err <= 1e-9,
           "decomposition totals match the function (max err " +
               staylor::detail::render_double(max_total_err) + ")");
  } else {
    const FeatureTable& f = cohort.features;
    const std::size_t bcol = f.feature_index("b");
    const std::size_t acol = f.feature_index("age");
    double max_resid = 0.0;
    for (std::size_t r = 0; r < f.num_rows(); ++r) {
      const double eq = staylor::threshold_equation(*f.cell(r, bcol), *f.cell(r, acol));
      max_resid = std::max(max_resid, std::abs(cohort.targets[r] - eq - cohort.noise[r]));
    }
    report(max_resid <= 1e-12, "target minus equation equals the stored noise (max err " +
                                   staylor::detail::render_double(max_resid) + ")");
  }
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Exact and sampled Shapley attributions with order-2 main/interaction "
      "decompositions for tree ensembles"};
  app.require_subcommand(1);
  const auto format_check = CLI::IsMember({"csv", "json"});
  const auto plot_format_check = CLI::IsMember({"csv", "json", "svg"});

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "Fit a boosted-tree model to a CSV");
  train_cmd->add_option("--data", train.data, "Training CSV")->required();
  train_cmd->add_option("--target", train.target, "Target column (default: target)");
  train_cmd->add_option("--trees", train.config.num_trees, "Number of boosting stages");
  train_cmd->add_option("--depth", train.config.max_depth, "Maximum tree depth");
  train_cmd->add_option("--learning-rate", train.config.learning_rate, "Shrinkage in (0, 1]");
  train_cmd->add_option("--min-leaf", train.config.min_samples_leaf, "Minimum rows per leaf");
  train_cmd->add_option("--seed", train.config.seed, "Reserved; training is deterministic");
  train_cmd->add_option("--out", train.out, "Output model JSON")->required();

  ExplainArgs explain;
  CLI::App* explain_cmd =
      app.add_subcommand("explain", "Per-instance Shapley attributions for a cohort");
  explain_cmd->add_option("--model", explain.model, "Model JSON")->required();
  explain_cmd->add_option("--data", explain.data, "Cohort CSV to explain")->required();
  explain_cmd->add_option("--background", explain.background,
                          "Background CSV (default: the explained cohort)");
  explain_cmd->add_option("--sampled", explain.sampling.samples,
                          "Use N sampled permutations instead of exact enumeration");
  explain_cmd->add_option("--seed", explain.sampling.seed, "Sampling seed");
  explain_cmd->add_option("--format", explain.format, "csv or json")->check(format_check);
  explain_cmd->add_option("--out", explain.out, "Output artifact path")->required();

  InteractArgs interact;
  CLI::App* interact_cmd = app.add_subcommand(
      "interact", "Order-2 main/interaction decomposition for a cohort");
  interact_cmd->add_option("--model", interact.model, "Model JSON")->required();
  interact_cmd->add_option("--data", interact.data, "Cohort CSV to explain")->required();
  interact_cmd->add_option("--background", interact.background,
                           "Background CSV (default: the explained cohort)");
  interact_cmd->add_option("--method", interact.method, "taylor or siv")
      ->check(CLI::IsMember({"taylor", "siv"}));
  interact_cmd->add_option("--pair", interact.pair,
                           "Emit one pair's dependence series: feature1,feature2");
  interact_cmd->add_option("--scale", interact.scale, "full or half off-diagonal scale")
      ->check(CLI::IsMember({"full", "half"}));
  interact_cmd->add_option("--sampled", interact.sampling.samples,
                           "Use N samples per estimate instead of exact enumeration");
  interact_cmd->add_option("--seed", interact.sampling.seed, "Sampling seed");
  interact_cmd->add_option("--format", interact.format,
                           "csv or json (default: csv for --pair, json for matrices)")
      ->check(format_check);
  interact_cmd->add_option("--out", interact.out, "Output artifact path")->required();

  ImportanceArgs importance;
  CLI::App* importance_cmd =
      app.add_subcommand("importance", "Rank features or order-2 terms by cohort spread");
  importance_cmd->add_option("--attributions", importance.attributions,
                             "Attributions artifact from explain");
  importance_cmd->add_option("--matrices", importance.matrices,
                             "Matrices artifact from interact");
  importance_cmd->add_option("--format", importance.format, "csv or json")
      ->check(format_check);
  importance_cmd->add_option("--out", importance.out, "Output ranking path")->required();
  importance_cmd->add_option(
      "--variants", importance.variants_out,
      "Side-by-side rankings path for --matrices (default: <out>_variants)");

  DependenceArgs dependence;
  CLI::App* dependence_cmd =
      app.add_subcommand("dependence", "Per-feature dependence scatter data");
  dependence_cmd->add_option("--data", dependence.data, "Cohort CSV the artifacts describe")
      ->required();
  dependence_cmd->add_option("--feature", dependence.feature, "Feature on the x axis")
      ->required();
  dependence_cmd
      ->add_option("--variant", dependence.variant,
                   "shap, main, interaction, or main_plus_interaction")
      ->required()
      ->check(CLI::IsMember({"shap", "main", "interaction", "main_plus_interaction"}));
  dependence_cmd->add_option("--partner", dependence.partner,
                             "Partner feature (variant interaction only)");
  dependence_cmd->add_option("--color", dependence.color,
                             "Color feature (default: feature, or partner for interaction)");
  dependence_cmd->add_option("--attributions", dependence.attributions,
                             "Attributions artifact (variant shap)");
  dependence_cmd->add_option("--matrices", dependence.matrices,
                             "Matrices artifact (other variants)");
  dependence_cmd->add_option("--scale", dependence.scale, "full or half off-diagonal scale")
      ->check(CLI::IsMember({"full", "half"}));
  dependence_cmd->add_option("--format", dependence.format, "csv, json, or svg")
      ->check(plot_format_check);
  dependence_cmd->add_option("--out", dependence.out, "Output artifact path")->required();

  SummaryArgs summary;
  CLI::App* summary_cmd =
      app.add_subcommand("summary", "Cohort summary (beeswarm) data from attributions");
  summary_cmd->add_option("--data", summary.data, "Cohort CSV the attributions describe")
      ->required();
  summary_cmd->add_option("--attributions", summary.attributions,
                          "Attributions artifact from explain")
      ->required();
  summary_cmd->add_option("--format", summary.format, "csv, json, or svg")
      ->check(plot_format_check);
  summary_cmd->add_option("--out", summary.out, "Output artifact path")->required();

  SynthArgs synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic cohort with a manifest");
  synth_cmd->add_option("--preset", synth.preset, "eq5 or threshold")
      ->required()
      ->check(CLI::IsMember({"eq5", "threshold"}));
  synth_cmd->add_option("--n", synth.n, "Number of rows");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  double noise_value = 0.0;
  CLI::Option* noise_opt = synth_cmd->add_option(
      "--noise", noise_value, "Target noise stddev (default: 0 for eq5, 0.05 for threshold)");
  synth_cmd->add_option("--coef", synth.coef, "eq5 coefficients a b c d e")->expected(5);
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  VerifyArgs verify;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Check a synthetic cohort directory against its manifest");
  verify_cmd->add_option("--dir", verify.dir, "Directory with cohort.csv and manifest.json")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(train_cmd)) {
      run_train(train);
    } else if (app.got_subcommand(explain_cmd)) {
      run_explain(explain);
    } else if (app.got_subcommand(interact_cmd)) {
      run_interact(interact);
    } else if (app.got_subcommand(importance_cmd)) {
      run_importance(importance);
    } else if (app.got_subcommand(dependence_cmd)) {
      run_dependence(dependence);
    } else if (app.got_subcommand(summary_cmd)) {
      run_summary(summary);
    } else if (app.got_subcommand(synth_cmd)) {
      if (noise_opt->count() > 0) synth.noise_std = noise_value;
      run_synth(synth);
    } else if (app.got_subcommand(verify_cmd)) {
      return run_verify(verify);
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const staylor::CapError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const staylor::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
