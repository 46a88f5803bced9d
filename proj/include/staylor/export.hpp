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
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "staylor/error.hpp"
#include "staylor/importance.hpp"
#include "staylor/interaction.hpp"
#include "staylor/rng.hpp"
#include "staylor/shapley.hpp"
#include "staylor/table.hpp"

namespace staylor {

enum class ArtifactFormat { kCsv, kJson, kSvg };

inline ArtifactFormat artifact_format_from(const std::string& name) {
  if (name == "csv") return ArtifactFormat::kCsv;
  if (name == "json") return ArtifactFormat::kJson;
  if (name == "svg") return ArtifactFormat::kSvg;
  throw DomainError("unknown format '" + name + "' (expected csv, json, or svg)");
}

enum class DependenceVariant { kShap, kMain, kInteraction, kMainPlusInteraction };

inline DependenceVariant dependence_variant_from(const std::string& name) {
  if (name == "shap") return DependenceVariant::kShap;
  if (name == "main") return DependenceVariant::kMain;
  if (name == "interaction") return DependenceVariant::kInteraction;
  if (name == "main_plus_interaction") return DependenceVariant::kMainPlusInteraction;
  throw DomainError("unknown variant '" + name +
                    "' (expected shap, main, interaction, or main_plus_interaction)");
}

namespace detail {

inline std::string render_cell(const Cell& c) { return c ? render_double(*c) : "NA"; }

inline nlohmann::json json_cell(const Cell& c) {
  return c ? nlohmann::json(*c) : nlohmann::json(nullptr);
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char ch : s) {
    switch (ch) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += ch;
    }
  }
  return out;
}

// Fixed two-decimal coordinates keep the SVG compact and deterministic.
inline std::string svg_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// Palette: color01 = 0 maps to blue #0000ff, 1 to red #ff0000, linear in
// between; a missing color value is drawn black #000000.
inline std::string color_hex(const std::optional<double>& color01) {
  if (!color01) return "#000000";
  double c = *color01;
  if (c < 0.0) c = 0.0;
  if (c > 1.0) c = 1.0;
  const int r = static_cast<int>(std::lround(255.0 * c));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x00%02x", r, 255 - r);
  return buf;
}

struct ScatterPoint {
  Cell x;  // missing x lands in the NA band left of the plot
  double y = 0.0;
  std::optional<double> color01;
};

struct ScatterAxis {
  std::string label;
  // When tick labels are given they override the numeric ticks.
  std::vector<std::pair<double, std::string>> named_ticks;
};

inline void axis_range(double& lo, double& hi) {
  if (!(lo < hi)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = (hi - lo) * 0.05;
  lo -= pad;
  hi += pad;
}

// 640 x 480 scatter with 5 numeric ticks per axis (or named ticks), a title,
// and an NA band on the left when any point has a missing x.
inline void write_scatter_svg(std::ostream& out, const std::string& title,
                              const ScatterAxis& x_axis, const ScatterAxis& y_axis,
                              const std::vector<ScatterPoint>& points,
                              std::optional<std::pair<double, double>> y_range = {}) {
  const double width = 640.0, height = 480.0;
  const double top = 40.0, bottom = 430.0, left = 80.0, right = 616.0;
  bool any_missing_x = false;
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  bool first_x = true, first_y = true;
  for (const ScatterPoint& p : points) {
    if (!p.x) {
      any_missing_x = true;
    } else {
      x_lo = first_x ? *p.x : std::min(x_lo, *p.x);
      x_hi = first_x ? *p.x : std::max(x_hi, *p.x);
      first_x = false;
    }
    y_lo = first_y ? p.y : std::min(y_lo, p.y);
    y_hi = first_y ? p.y : std::max(y_hi, p.y);
    first_y = false;
  }
  if (first_x) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  if (first_y) {
    y_lo = 0.0;
    y_hi = 1.0;
  }
  axis_range(x_lo, x_hi);
  if (y_range) {
    y_lo = y_range->first;
    y_hi = y_range->second;
  } else {
    axis_range(y_lo, y_hi);
  }
  const double plot_left = any_missing_x ? left + 36.0 : left;
  const auto px = [&](double v) {
    return plot_left + (v - x_lo) / (x_hi - x_lo) * (right - plot_left);
  };
  const auto py = [&](double v) { return bottom - (v - y_lo) / (y_hi - y_lo) * (bottom - top); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << svg_coord(width / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << xml_escape(title) << "</text>\n";
  // Axes.
  out << "<line x1=\"" << svg_coord(left) << "\" y1=\"" << svg_coord(bottom) << "\" x2=\""
      << svg_coord(right) << "\" y2=\"" << svg_coord(bottom)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << svg_coord(left) << "\" y1=\"" << svg_coord(top) << "\" x2=\""
      << svg_coord(left) << "\" y2=\"" << svg_coord(bottom)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  // X ticks.
  if (x_axis.named_ticks.empty()) {
    for (int t = 0; t <= 4; ++t) {
      const double v = x_lo + (x_hi - x_lo) * t / 4.0;
      const double x = px(v);
      out << "<line x1=\"" << svg_coord(x) << "\" y1=\"" << svg_coord(bottom) << "\" x2=\""
          << svg_coord(x) << "\" y2=\"" << svg_coord(bottom + 5)
          << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
      out << "<text x=\"" << svg_coord(x) << "\" y=\"" << svg_coord(bottom + 20)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << tick_label(v) << "</text>\n";
    }
  } else {
    for (const auto& [v, label] : x_axis.named_ticks) {
      const double x = px(v);
      out << "<text x=\"" << svg_coord(x) << "\" y=\"" << svg_coord(bottom + 20)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << xml_escape(label) << "</text>\n";
    }
  }
  // Y ticks.
  if (y_axis.named_ticks.empty()) {
    for (int t = 0; t <= 4; ++t) {
      const double v = y_lo + (y_hi - y_lo) * t / 4.0;
      const double y = py(v);
      out << "<line x1=\"" << svg_coord(left - 5) << "\" y1=\"" << svg_coord(y) << "\" x2=\""
          << svg_coord(left) << "\" y2=\"" << svg_coord(y)
          << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
      out << "<text x=\"" << svg_coord(left - 8) << "\" y=\"" << svg_coord(y + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
          << tick_label(v) << "</text>\n";
    }
  } else {
    for (const auto& [v, label] : y_axis.named_ticks) {
      const double y = py(v);
      out << "<text x=\"" << svg_coord(left - 8) << "\" y=\"" << svg_coord(y + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
          << xml_escape(label) << "</text>\n";
    }
  }
  // Axis labels.
  out << "<text x=\"" << svg_coord((plot_left + right) / 2) << "\" y=\""
      << svg_coord(height - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << xml_escape(x_axis.label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << svg_coord((top + bottom) / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << svg_coord((top + bottom) / 2) << ")\">"
      << xml_escape(y_axis.label) << "</text>\n";
  if (any_missing_x) {
    out << "<text x=\"" << svg_coord(left + 18) << "\" y=\"" << svg_coord(bottom + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">NA</text>\n";
  }
  // Points; missing x sits in the band between the y axis and the plot area.
  for (const ScatterPoint& p : points) {
    const double x = p.x ? px(*p.x) : left + 18.0;
    out << "<circle cx=\"" << svg_coord(x) << "\" cy=\"" << svg_coord(py(p.y))
        << "\" r=\"3\" fill=\"" << color_hex(p.color01) << "\" fill-opacity=\"0.75\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Attribution artifacts

// CSV: instance,prediction,baseline,phi_<f>...,raw_<f>...[,se_<f>...]
// JSON: one object with cohort metadata and per-row arrays.
inline void write_attributions(std::ostream& out, const CohortAttributions& cohort,
                               ArtifactFormat format) {
  const std::size_t k = cohort.feature_names.size();
  const bool sampled = cohort.method == AttributionMethod::kSampled;
  if (format == ArtifactFormat::kCsv) {
    out << "instance,prediction,baseline";
    for (const auto& name : cohort.feature_names) out << ",phi_" << name;
    for (const auto& name : cohort.feature_names) out << ",raw_" << name;
    if (sampled) {
      for (const auto& name : cohort.feature_names) out << ",se_" << name;
    }
    out << '\n';
    for (std::size_t r = 0; r < cohort.rows.size(); ++r) {
      const AttributionResult& row = cohort.rows[r];
      out << r << ',' << detail::render_double(row.prediction) << ','
          << detail::render_double(cohort.baseline);
      for (std::size_t f = 0; f < k; ++f) out << ',' << detail::render_double(row.centered[f]);
      for (std::size_t f = 0; f < k; ++f) out << ',' << detail::render_double(row.raw[f]);
      if (sampled) {
        for (std::size_t f = 0; f < k; ++f) {
          out << ',' << detail::render_double(row.std_errors[f]);
        }
      }
      out << '\n';
    }
    return;
  }
  if (format != ArtifactFormat::kJson) {
    throw DomainError("attributions support csv or json output");
  }
  nlohmann::json j;
  j["feature_names"] = cohort.feature_names;
  j["baseline"] = cohort.baseline;
  j["raw_means"] = cohort.raw_means;
  j["method"] = sampled ? "sampled" : "exact";
  if (sampled) {
    j["samples"] = cohort.samples;
    j["seed"] = cohort.seed;
  }
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < cohort.rows.size(); ++r) {
    const AttributionResult& row = cohort.rows[r];
    nlohmann::json jr;
    jr["instance"] = r;
    jr["prediction"] = row.prediction;
    jr["phi"] = row.centered;
    jr["raw"] = row.raw;
    if (sampled) jr["se"] = row.std_errors;
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);
  out << j.dump(2) << '\n';
}

namespace detail {

inline CohortAttributions read_attributions_json(const nlohmann::json& j) {
  CohortAttributions out;
  try {
    out.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    out.baseline = j.at("baseline").get<double>();
    out.raw_means = j.at("raw_means").get<std::vector<double>>();
    const std::string method = j.at("method").get<std::string>();
    out.method = method == "sampled" ? AttributionMethod::kSampled : AttributionMethod::kExact;
    if (out.method == AttributionMethod::kSampled) {
      out.samples = j.at("samples").get<std::size_t>();
      out.seed = j.at("seed").get<std::uint64_t>();
    }
    for (const auto& jr : j.at("rows")) {
      AttributionResult row;
      row.prediction = jr.at("prediction").get<double>();
      row.centered = jr.at("phi").get<std::vector<double>>();
      row.raw = jr.at("raw").get<std::vector<double>>();
      if (jr.contains("se")) row.std_errors = jr.at("se").get<std::vector<double>>();
      out.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("attributions json: ") + e.what());
  }
  if (out.rows.empty()) throw SchemaError("attributions json: no rows");
  for (const AttributionResult& row : out.rows) {
    if (row.centered.size() != out.feature_names.size() ||
        row.raw.size() != out.feature_names.size()) {
      throw SchemaError("attributions json: row width does not match feature_names");
    }
  }
  return out;
}

inline CohortAttributions read_attributions_csv(std::istream& in) {
  const FeatureTable table = FeatureTable::parse_csv(in);
  CohortAttributions out;
  std::vector<std::size_t> phi_cols, raw_cols, se_cols;
  for (std::size_t c = 0; c < table.names().size(); ++c) {
    const std::string& name = table.names()[c];
    if (name.rfind("phi_", 0) == 0) {
      out.feature_names.push_back(name.substr(4));
      phi_cols.push_back(c);
    } else if (name.rfind("raw_", 0) == 0) {
      raw_cols.push_back(c);
    } else if (name.rfind("se_", 0) == 0) {
      se_cols.push_back(c);
    }
  }
  if (phi_cols.empty() || raw_cols.size() != phi_cols.size()) {
    throw SchemaError("attributions csv: need matching phi_* and raw_* columns");
  }
  const std::size_t pred_col = table.feature_index("prediction");
  const std::size_t base_col = table.feature_index("baseline");
  out.method = se_cols.empty() ? AttributionMethod::kExact : AttributionMethod::kSampled;
  const std::size_t k = phi_cols.size();
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    AttributionResult row;
    row.prediction = *table.cell(r, pred_col);
    row.centered.resize(k);
    row.raw.resize(k);
    for (std::size_t f = 0; f < k; ++f) {
      row.centered[f] = *table.cell(r, phi_cols[f]);
      row.raw[f] = *table.cell(r, raw_cols[f]);
    }
    if (!se_cols.empty()) {
      row.std_errors.resize(k);
      for (std::size_t f = 0; f < k; ++f) row.std_errors[f] = *table.cell(r, se_cols[f]);
    }
    out.rows.push_back(std::move(row));
  }
  out.baseline = *table.cell(0, base_col);
  out.raw_means.assign(k, 0.0);
  for (std::size_t f = 0; f < k; ++f) {
    long double s = 0.0L;
    for (const AttributionResult& row : out.rows) s += row.raw[f];
    out.raw_means[f] = static_cast<double>(s / static_cast<long double>(out.rows.size()));
  }
  return out;
}

}  // namespace detail

// Reads an attributions artifact in either format, sniffed from the first
// non-whitespace byte.
inline CohortAttributions read_attributions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  int ch = in.peek();
  while (ch == ' ' || ch == '\n' || ch == '\r' || ch == '\t') {
    in.get();
    ch = in.peek();
  }
  if (ch == '{') {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("attributions json: ") + e.what());
    }
    return detail::read_attributions_json(j);
  }
  return detail::read_attributions_csv(in);
}

// ---------------------------------------------------------------------------
// Interaction matrix artifacts

inline void write_matrices(std::ostream& out, const CohortMatrices& matrices,
                           ArtifactFormat format) {
  const std::size_t k = matrices.feature_names.size();
  if (format == ArtifactFormat::kCsv) {
    // Long form, one unique term per instance per line.
    out << "instance,feature1,feature2,raw,centered\n";
    for (std::size_t r = 0; r < matrices.raw.size(); ++r) {
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
          out << r << ',' << matrices.feature_names[i] << ',' << matrices.feature_names[j]
              << ',' << detail::render_double(matrices.raw[r].at(i, j)) << ','
              << detail::render_double(matrices.centered[r].at(i, j)) << '\n';
        }
      }
    }
    return;
  }
  if (format != ArtifactFormat::kJson) {
    throw DomainError("matrices support csv or json output");
  }
  const auto matrix_rows = [k](const InteractionMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < k; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < k; ++j) row.push_back(m.at(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  nlohmann::json j;
  j["feature_names"] = matrices.feature_names;
  j["method"] = to_string(matrices.method);
  nlohmann::json means = nlohmann::json::array();
  for (std::size_t i = 0; i < k; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t jj = 0; jj < k; ++jj) row.push_back(matrices.entry_means[i * k + jj]);
    means.push_back(std::move(row));
  }
  j["entry_means"] = std::move(means);
  nlohmann::json instances = nlohmann::json::array();
  for (std::size_t r = 0; r < matrices.raw.size(); ++r) {
    nlohmann::json jr;
    jr["instance"] = r;
    jr["raw"] = matrix_rows(matrices.raw[r]);
    jr["centered"] = matrix_rows(matrices.centered[r]);
    instances.push_back(std::move(jr));
  }
  j["instances"] = std::move(instances);
  out << j.dump(2) << '\n';
}

inline CohortMatrices read_matrices(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("matrices json: ") + e.what());
  }
  CohortMatrices out;
  try {
    out.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    out.method = interaction_method_from(j.at("method").get<std::string>());
    const std::size_t k = out.feature_names.size();
    const auto parse_matrix = [&](const nlohmann::json& rows) {
      InteractionMatrix m(k, out.method);
      if (rows.size() != k) throw SchemaError("matrices json: matrix must be K x K");
      for (std::size_t i = 0; i < k; ++i) {
        if (rows[i].size() != k) throw SchemaError("matrices json: matrix must be K x K");
        for (std::size_t jj = 0; jj < k; ++jj) m.at(i, jj) = rows[i][jj].get<double>();
      }
      return m;
    };
    const nlohmann::json& means = j.at("entry_means");
    if (means.size() != k) throw SchemaError("matrices json: entry_means must be K x K");
    out.entry_means.assign(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      if (means[i].size() != k) throw SchemaError("matrices json: entry_means must be K x K");
      for (std::size_t jj = 0; jj < k; ++jj) {
        out.entry_means[i * k + jj] = means[i][jj].get<double>();
      }
    }
    for (const auto& jr : j.at("instances")) {
      out.raw.push_back(parse_matrix(jr.at("raw")));
      out.centered.push_back(parse_matrix(jr.at("centered")));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("matrices json: ") + e.what());
  }
  if (out.raw.empty()) throw SchemaError("matrices json: no instances");
  return out;
}

// ---------------------------------------------------------------------------
// Dependence series

struct DependenceSeries {
  std::string x_feature;
  std::string y_label;
  std::string color_feature;
  struct Point {
    std::size_t instance = 0;
    Cell x;
    double y = 0.0;
    Cell color;
  };
  std::vector<Point> points;
};

// y = centered SHAP value of `feature`; x = that feature's value; color
// defaults to the feature itself.
inline DependenceSeries dependence_from_attributions(const FeatureTable& data,
                                                     const CohortAttributions& cohort,
                                                     const std::string& feature,
                                                     const std::string& color_feature) {
  if (data.num_rows() != cohort.rows.size()) {
    throw DimensionError("data rows and attribution rows do not match");
  }
  std::size_t f = cohort.feature_names.size();
  for (std::size_t i = 0; i < cohort.feature_names.size(); ++i) {
    if (cohort.feature_names[i] == feature) f = i;
  }
  if (f == cohort.feature_names.size()) {
    throw SchemaError("unknown feature '" + feature + "' in attributions");
  }
  const std::size_t xc = data.feature_index(feature);
  const std::size_t cc = data.feature_index(color_feature);
  DependenceSeries series;
  series.x_feature = feature;
  series.y_label = "phi_" + feature;
  series.color_feature = color_feature;
  series.points.reserve(data.num_rows());
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    series.points.push_back({r, data.cell(r, xc), cohort.rows[r].centered[f],
                             data.cell(r, cc)});
  }
  return series;
}

// y from the centered interaction matrices: the main effect of `feature`, one
// pair term against `partner`, or the main plus all its pair terms. `half`
// halves every off-diagonal contribution (under which main_plus_interaction
// reproduces the centered SHAP value).
inline DependenceSeries dependence_from_matrices(const FeatureTable& data,
                                                 const CohortMatrices& matrices,
                                                 DependenceVariant variant,
                                                 const std::string& feature,
                                                 const std::string& partner, bool half,
                                                 const std::string& color_feature) {
  if (variant == DependenceVariant::kShap) {
    throw DomainError("shap dependence reads an attributions artifact, not matrices");
  }
  if (data.num_rows() != matrices.raw.size()) {
    throw DimensionError("data rows and matrix rows do not match");
  }
  const std::size_t k = matrices.feature_names.size();
  const auto index_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < k; ++i) {
      if (matrices.feature_names[i] == name) return i;
    }
    throw SchemaError("unknown feature '" + name + "' in matrices");
  };
  const std::size_t fi = index_of(feature);
  std::size_t fj = k;
  if (variant == DependenceVariant::kInteraction) {
    if (partner.empty()) throw DomainError("interaction dependence needs a partner feature");
    fj = index_of(partner);
    if (fj == fi) throw DomainError("partner must differ from the feature");
  }
  const double off_scale = half ? 0.5 : 1.0;
  DependenceSeries series;
  series.x_feature = feature;
  series.color_feature = color_feature;
  switch (variant) {
    case DependenceVariant::kMain:
      series.y_label = "main_" + feature;
      break;
    case DependenceVariant::kInteraction:
      series.y_label = "interaction_" + feature + "_" + partner + (half ? "_half" : "");
      break;
    default:
      series.y_label = "main_plus_interaction_" + feature + (half ? "_half" : "");
  }
  const std::size_t xc = data.feature_index(feature);
  const std::size_t cc = data.feature_index(color_feature);
  series.points.reserve(data.num_rows());
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    const InteractionMatrix& m = matrices.centered[r];
    double y = 0.0;
    if (variant == DependenceVariant::kMain) {
      y = m.at(fi, fi);
    } else if (variant == DependenceVariant::kInteraction) {
      y = off_scale * m.at(fi, fj);
    } else {
      y = m.at(fi, fi);
      for (std::size_t j = 0; j < k; ++j) {
        if (j != fi) y += off_scale * m.at(fi, j);
      }
    }
    series.points.push_back({r, data.cell(r, xc), y, data.cell(r, cc)});
  }
  return series;
}

inline void write_dependence(std::ostream& out, const DependenceSeries& series,
                             ArtifactFormat format) {
  if (format == ArtifactFormat::kCsv) {
    out << "instance,x_" << series.x_feature << ",y_" << series.y_label << ",color_"
        << series.color_feature << '\n';
    for (const auto& p : series.points) {
      out << p.instance << ',' << detail::render_cell(p.x) << ','
          << detail::render_double(p.y) << ',' << detail::render_cell(p.color) << '\n';
    }
    return;
  }
  if (format == ArtifactFormat::kJson) {
    nlohmann::json j;
    j["x_feature"] = series.x_feature;
    j["y_label"] = series.y_label;
    j["color_feature"] = series.color_feature;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : series.points) {
      rows.push_back({{"instance", p.instance},
                      {"x", detail::json_cell(p.x)},
                      {"y", p.y},
                      {"color", detail::json_cell(p.color)}});
    }
    j["rows"] = std::move(rows);
    out << j.dump(2) << '\n';
    return;
  }
  // SVG: color is min-max normalized over the observed color values.
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& p : series.points) {
    if (!p.color) continue;
    lo = first ? *p.color : std::min(lo, *p.color);
    hi = first ? *p.color : std::max(hi, *p.color);
    first = false;
  }
  std::vector<detail::ScatterPoint> pts;
  pts.reserve(series.points.size());
  for (const auto& p : series.points) {
    std::optional<double> c;
    if (p.color) c = hi > lo ? (*p.color - lo) / (hi - lo) : 0.5;
    pts.push_back({p.x, p.y, c});
  }
  detail::write_scatter_svg(out, "dependence: " + series.y_label, {series.x_feature, {}},
                            {series.y_label, {}}, pts);
}

// ---------------------------------------------------------------------------
// Summary (beeswarm-style) data

struct SummaryData {
  struct Row {
    std::string feature;
    std::size_t rank = 0;
    std::size_t instance = 0;
    double phi = 0.0;
    Cell value;
    std::optional<double> color01;  // min-max normalized value; missing stays unset
  };
  std::size_t num_features = 0;
  std::vector<Row> rows;  // grouped by rank, then instance
};

// Rows ordered by global importance rank; each point is one instance's
// centered attribution for that feature, colored by the normalized feature
// value (black when missing).
inline SummaryData summary_from_attributions(const FeatureTable& data,
                                             const CohortAttributions& cohort) {
  if (data.num_rows() != cohort.rows.size()) {
    throw DimensionError("data rows and attribution rows do not match");
  }
  const std::vector<ImportanceEntry> ranked = feature_importance(cohort);
  SummaryData out;
  out.num_features = ranked.size();
  for (const ImportanceEntry& entry : ranked) {
    const std::size_t f = entry.index1;
    const std::size_t col = data.feature_index(entry.feature1);
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (std::size_t r = 0; r < data.num_rows(); ++r) {
      const Cell& c = data.cell(r, col);
      if (!c) continue;
      lo = first ? *c : std::min(lo, *c);
      hi = first ? *c : std::max(hi, *c);
      first = false;
    }
    for (std::size_t r = 0; r < data.num_rows(); ++r) {
      SummaryData::Row row;
      row.feature = entry.feature1;
      row.rank = entry.rank;
      row.instance = r;
      row.phi = cohort.rows[r].centered[f];
      row.value = data.cell(r, col);
      if (row.value) {
        row.color01 = hi > lo ? (*row.value - lo) / (hi - lo) : 0.5;
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

inline void write_summary(std::ostream& out, const SummaryData& summary,
                          ArtifactFormat format) {
  if (format == ArtifactFormat::kCsv) {
    out << "feature,rank,instance,phi,value,color\n";
    for (const auto& row : summary.rows) {
      out << row.feature << ',' << row.rank << ',' << row.instance << ','
          << detail::render_double(row.phi) << ',' << detail::render_cell(row.value) << ',';
      if (row.color01) {
        out << detail::render_double(*row.color01);
      } else {
        out << "NA";
      }
      out << '\n';
    }
    return;
  }
  if (format == ArtifactFormat::kJson) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : summary.rows) {
      rows.push_back({{"feature", row.feature},
                      {"rank", row.rank},
                      {"instance", row.instance},
                      {"phi", row.phi},
                      {"value", detail::json_cell(row.value)},
                      {"color", row.color01 ? nlohmann::json(*row.color01)
                                            : nlohmann::json(nullptr)}});
    }
    nlohmann::json j;
    j["num_features"] = summary.num_features;
    j["rows"] = std::move(rows);
    out << j.dump(2) << '\n';
    return;
  }
  // SVG: one horizontal band per feature, best rank on top, deterministic
  // vertical jitter inside the band.
  const double band = static_cast<double>(summary.num_features);
  Rng jitter(0x53744A69u);
  std::vector<detail::ScatterPoint> pts;
  pts.reserve(summary.rows.size());
  detail::ScatterAxis y_axis{"", {}};
  std::size_t seen_rank = 0;
  for (const auto& row : summary.rows) {
    const double center = band - static_cast<double>(row.rank) + 1.0;
    if (row.rank != seen_rank) {
      y_axis.named_ticks.push_back({center, row.feature});
      seen_rank = row.rank;
    }
    pts.push_back({Cell{row.phi}, center + jitter.uniform(-0.32, 0.32), row.color01});
  }
  detail::write_scatter_svg(out, "cohort summary", {"attribution (centered)", {}}, y_axis,
                            pts, std::pair{0.4, band + 0.6});
}

// ---------------------------------------------------------------------------
// Importance artifacts

// CSV header is fixed: rank,feature1,feature2,importance.
inline void write_importance(std::ostream& out, const std::vector<ImportanceEntry>& entries,
                             ArtifactFormat format) {
  if (format == ArtifactFormat::kCsv) {
    out << "rank,feature1,feature2,importance\n";
    for (const auto& e : entries) {
      out << e.rank << ',' << e.feature1 << ',' << e.feature2 << ','
          << detail::render_double(e.importance) << '\n';
    }
    return;
  }
  if (format != ArtifactFormat::kJson) throw DomainError("importance supports csv or json");
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : entries) {
    rows.push_back({{"rank", e.rank},
                    {"feature1", e.feature1},
                    {"feature2", e.feature2},
                    {"importance", e.importance}});
  }
  out << rows.dump(2) << '\n';
}

// All four spread conventions stacked in one long table, labeled by variant.
inline void write_importance_variants(
    std::ostream& out,
    const std::vector<std::pair<std::string, std::vector<ImportanceEntry>>>& variants,
    ArtifactFormat format) {
  if (format == ArtifactFormat::kCsv) {
    out << "variant,rank,feature1,feature2,importance\n";
    for (const auto& [name, entries] : variants) {
      for (const auto& e : entries) {
        out << name << ',' << e.rank << ',' << e.feature1 << ',' << e.feature2 << ','
            << detail::render_double(e.importance) << '\n';
      }
    }
    return;
  }
  if (format != ArtifactFormat::kJson) throw DomainError("importance supports csv or json");
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, entries] : variants) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : entries) {
      rows.push_back({{"rank", e.rank},
                      {"feature1", e.feature1},
                      {"feature2", e.feature2},
                      {"importance", e.importance}});
    }
    j[name] = std::move(rows);
  }
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

inline void save_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("failed while writing '" + path + "'");
}

}  // namespace staylor
