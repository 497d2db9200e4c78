/*
 * Copyright 2026 The Elim Authors.
 *
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

// Labelled feature tables: validation, CSV ingestion/export, splitting and
// JSON persistence.

#ifndef ELIM_DATASET_HPP_
#define ELIM_DATASET_HPP_

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/tokenizer.hpp>

#include "elim/core.hpp"
#include "elim/detail/random.hpp"

namespace elim {

inline constexpr int kFormatVersion = 1;

struct Dataset {
  std::string name;
  std::vector<std::string> class_names;
  std::vector<FeatureMeta> features;
  std::vector<FeatureVector> cases;
  std::vector<std::size_t> labels;

  std::size_t size() const { return cases.size(); }
  bool empty() const { return cases.empty(); }
  std::size_t num_classes() const { return class_names.size(); }
  std::size_t num_features() const { return features.size(); }

  ModelInfo info() const { return {class_names, features}; }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(num_classes(), 0);
    for (std::size_t label : labels) ++counts[label];
    return counts;
  }

  std::vector<double> class_frequencies() const {
    std::vector<double> freq(num_classes(), 0.0);
    if (empty()) return freq;
    const auto counts = class_counts();
    for (std::size_t k = 0; k < counts.size(); ++k) {
      freq[k] = static_cast<double>(counts[k]) / static_cast<double>(size());
    }
    return freq;
  }

  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out{name, class_names, features, {}, {}};
    out.cases.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) {
      out.cases.push_back(cases.at(i));
      out.labels.push_back(labels.at(i));
    }
    return out;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Throws a validation error describing the first broken invariant.
inline void validate(const Dataset& d) {
  require(d.num_classes() >= 2, ErrorCode::kValidation, "dataset needs at least 2 classes");
  require(d.cases.size() == d.labels.size(), ErrorCode::kValidation,
          "cases and labels differ in length");
  for (const FeatureMeta& f : d.features) {
    require(!f.continuous() || f.min <= f.max, ErrorCode::kValidation,
            "feature '" + f.name + "' has min > max");
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    require(d.cases[i].size() == d.num_features(), ErrorCode::kValidation,
            "case " + std::to_string(i) + " has the wrong number of features");
    require(d.labels[i] < d.num_classes(), ErrorCode::kValidation,
            "case " + std::to_string(i) + " has an out-of-range label");
    for (double v : d.cases[i]) {
      require(std::isfinite(v), ErrorCode::kValidation,
              "case " + std::to_string(i) + " has a non-finite value");
    }
  }
}

// Recomputes continuous feature ranges from the stored cases.
inline void compute_ranges(Dataset& d) {
  for (std::size_t j = 0; j < d.num_features(); ++j) {
    FeatureMeta& f = d.features[j];
    if (!f.continuous() || d.empty()) continue;
    f.min = std::numeric_limits<double>::infinity();
    f.max = -std::numeric_limits<double>::infinity();
    for (const auto& c : d.cases) {
      f.min = std::min(f.min, c[j]);
      f.max = std::max(f.max, c[j]);
    }
  }
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

namespace detail {

inline bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::string trimmed = line;
  if (!trimmed.empty() && trimmed.back() == '\r') trimmed.pop_back();
  Tokenizer tok(trimmed, boost::escaped_list_separator<char>('\\', ',', '"'));
  return {tok.begin(), tok.end()};
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\\\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

// Reads a headered CSV file. Columns listed in `categorical` are integer
// coded through a sorted code book; every other non-label column must be
// numeric. Class indices follow the sorted order of the label values.
inline Dataset ingest_csv(std::istream& in, const std::string& label_column,
                          const std::set<std::string>& categorical = {},
                          const std::string& name = "") {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kSchema, "missing CSV header row");
  const std::vector<std::string> header = detail::split_csv_line(line);

  std::size_t label_index = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == label_column) label_index = j;
  }
  require(label_index < header.size(), ErrorCode::kSchema,
          "label column '" + label_column + "' not found in header");
  for (const auto& c : categorical) {
    require(std::find(header.begin(), header.end(), c) != header.end(), ErrorCode::kSchema,
            "categorical column '" + c + "' not found in header");
  }

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = detail::split_csv_line(line);
    require(cells.size() == header.size(), ErrorCode::kParse,
            "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                " cells, found " + std::to_string(cells.size()));
    rows.push_back(std::move(cells));
    line_numbers.push_back(line_no);
  }

  Dataset d;
  d.name = name;
  std::vector<std::size_t> feature_columns;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j == label_index) continue;
    feature_columns.push_back(j);
    FeatureMeta f;
    f.name = header[j];
    f.kind = categorical.contains(header[j]) ? FeatureKind::kCategorical : FeatureKind::kContinuous;
    if (!f.continuous()) {
      std::set<std::string> values;
      for (const auto& r : rows) values.insert(r[j]);
      f.categories.assign(values.begin(), values.end());
    }
    d.features.push_back(std::move(f));
  }

  std::set<std::string> label_values;
  for (const auto& r : rows) label_values.insert(r[label_index]);
  d.class_names.assign(label_values.begin(), label_values.end());
  require(d.class_names.size() >= 2, ErrorCode::kValidation,
          "label column '" + label_column + "' has fewer than 2 classes");

  for (std::size_t r = 0; r < rows.size(); ++r) {
    FeatureVector x(feature_columns.size());
    for (std::size_t k = 0; k < feature_columns.size(); ++k) {
      const std::string& cell = rows[r][feature_columns[k]];
      const FeatureMeta& f = d.features[k];
      if (f.continuous()) {
        require(detail::parse_double(cell, x[k]), ErrorCode::kParse,
                "line " + std::to_string(line_numbers[r]) + ", column '" + f.name +
                    "': cannot parse '" + cell + "' as a number");
      } else {
        auto it = std::lower_bound(f.categories.begin(), f.categories.end(), cell);
        x[k] = static_cast<double>(it - f.categories.begin());
      }
    }
    const std::string& label = rows[r][label_index];
    d.labels.push_back(static_cast<std::size_t>(
        std::lower_bound(d.class_names.begin(), d.class_names.end(), label) -
        d.class_names.begin()));
    d.cases.push_back(std::move(x));
  }
  compute_ranges(d);
  validate(d);
  return d;
}

inline Dataset ingest_csv(const std::string& path, const std::string& label_column,
                          const std::set<std::string>& categorical = {}) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open '" + path + "'");
  std::string stem = path.substr(path.find_last_of('/') + 1);
  return ingest_csv(in, label_column, categorical, stem.substr(0, stem.find_last_of('.')));
}

// Writes the canonical CSV form: features in order, then the label column.
inline void export_csv(const Dataset& d, std::ostream& out, const std::string& label_column = "class") {
  for (const auto& f : d.features) out << detail::csv_escape(f.name) << ',';
  out << detail::csv_escape(label_column) << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.num_features(); ++j) {
      const FeatureMeta& f = d.features[j];
      if (f.continuous()) {
        out << format_double(d.cases[i][j]);
      } else {
        out << detail::csv_escape(f.categories.at(static_cast<std::size_t>(d.cases[i][j])));
      }
      out << ',';
    }
    out << detail::csv_escape(d.class_names[d.labels[i]]) << '\n';
  }
}

// Deterministic disjoint partition; the test part gets round(n * fraction)
// cases. Both parts keep the parent's feature metadata.
inline std::pair<Dataset, Dataset> split(const Dataset& d, double test_fraction, std::uint64_t seed) {
  require(test_fraction > 0 && test_fraction < 1, ErrorCode::kConfig,
          "test fraction must lie in (0, 1)");
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(d.size())));
  require(n_test > 0 && n_test < d.size(), ErrorCode::kValidation,
          "split would leave an empty train or test part");
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  detail::Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {d.subset(train), d.subset(test)};
}

// ---------------------------------------------------------------------------
// JSON persistence.

inline void check_format_version(const Json& j) {
  require(j.is_object() && j.contains("format_version"), ErrorCode::kCorruptFile,
          "document has no format_version");
  const int version = j.at("format_version").get<int>();
  require(version == kFormatVersion, ErrorCode::kVersionMismatch,
          "unsupported format_version " + std::to_string(version));
}

inline Json to_json(const Dataset& d) {
  Json features = Json::array();
  for (const auto& f : d.features) features.push_back(to_json(f));
  return {{"format_version", kFormatVersion},
          {"kind", "dataset"},
          {"name", d.name},
          {"class_names", d.class_names},
          {"features", features},
          {"cases", d.cases},
          {"labels", d.labels}};
}

inline Dataset dataset_from_json(const Json& j) {
  try {
    check_format_version(j);
    Dataset d;
    d.name = j.value("name", "");
    d.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& f : j.at("features")) d.features.push_back(feature_from_json(f));
    d.cases = j.at("cases").get<std::vector<FeatureVector>>();
    d.labels = j.at("labels").get<std::vector<std::size_t>>();
    validate(d);
    return d;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed dataset document: ") + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kCorruptFile, "'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::kIo, "cannot write '" + path + "'");
  out << text;
  require(out.good(), ErrorCode::kIo, "failed writing '" + path + "'");
}

inline void save_dataset(const Dataset& d, const std::string& path) {
  write_text_file(path, to_json(d).dump(1) + "\n");
}

inline Dataset load_dataset(const std::string& path) {
  return dataset_from_json(read_json_file(path));
}

}  // namespace elim

#endif  // ELIM_DATASET_HPP_
