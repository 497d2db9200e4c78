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

// Shared vocabulary: errors, class probability vectors, feature metadata and
// the abstract classifier interface every model implements.

#ifndef ELIM_CORE_HPP_
#define ELIM_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace elim {

using Json = nlohmann::json;
using FeatureVector = std::vector<double>;

// Stable error categories. The string form is what the CLI and the HTTP
// service report in their `code` fields.
enum class ErrorCode {
  kSchema,
  kParse,
  kValidation,
  kConfig,
  kDimension,
  kCorruptFile,
  kVersionMismatch,
  kDegenerate,
  kDivergence,
  kBorderline,
  kNotFound,
  kClassMismatch,
  kIo,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchema: return "schema_error";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kConfig: return "config_error";
    case ErrorCode::kDimension: return "dimension_mismatch";
    case ErrorCode::kCorruptFile: return "corrupt_file";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kDegenerate: return "degenerate_input";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kBorderline: return "borderline_case";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kClassMismatch: return "class_mismatch";
    case ErrorCode::kIo: return "io_error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  std::string_view code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

// ---------------------------------------------------------------------------
// Numeric helpers.

inline double sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// Derivative of the logistic function expressed through its value.
inline double sigmoid_slope(double u) {
  const double s = sigmoid(u);
  return s * (1.0 - s);
}

// Index of the largest value; ties resolve to the lowest index.
inline std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

// Indices sorted by decreasing value, lowest index first among ties.
inline std::vector<std::size_t> rank_descending(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] > values[b];
  });
  return order;
}

// ---------------------------------------------------------------------------

// A normalized probability assignment over K classes.
class ClassProbabilities {
 public:
  static constexpr double kTolerance = 1e-9;

  ClassProbabilities() = default;

  // Takes ownership of already-normalized values. Validation is explicit
  // through `is_valid` so hot loops do not pay for it.
  explicit ClassProbabilities(std::vector<double> values)
      : values_(std::move(values)) {}

  static ClassProbabilities one_hot(std::size_t num_classes, std::size_t index) {
    std::vector<double> v(num_classes, 0.0);
    v.at(index) = 1.0;
    return ClassProbabilities(std::move(v));
  }

  // Normalizes nonnegative scores. All-zero scores are rejected.
  static ClassProbabilities from_scores(std::vector<double> scores) {
    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    require(total > 0 && std::isfinite(total), ErrorCode::kDegenerate,
            "cannot normalize scores that sum to zero");
    for (double& s : scores) s /= total;
    return ClassProbabilities(std::move(scores));
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }

  std::size_t argmax() const { return elim::argmax(values_); }
  double max() const { return values_.empty() ? 0.0 : values_[argmax()]; }

  // True when the argmax is separated from the runner-up by more than `tol`.
  bool has_unique_argmax(double tol = kTolerance) const {
    if (values_.size() < 2) return true;
    const auto order = rank_descending(values_);
    return values_[order[0]] - values_[order[1]] > tol;
  }

  bool is_valid(double tol = kTolerance) const {
    if (values_.empty()) return false;
    double total = 0;
    for (double v : values_) {
      if (!(v >= -tol && v <= 1 + tol)) return false;
      total += v;
    }
    return std::abs(total - 1.0) <= tol;
  }

  friend bool operator==(const ClassProbabilities&, const ClassProbabilities&) = default;

 private:
  std::vector<double> values_;
};

enum class FeatureKind { kContinuous, kCategorical };

inline std::string_view feature_kind_name(FeatureKind kind) {
  return kind == FeatureKind::kContinuous ? "continuous" : "categorical";
}

inline FeatureKind parse_feature_kind(std::string_view name) {
  if (name == "continuous") return FeatureKind::kContinuous;
  if (name == "categorical") return FeatureKind::kCategorical;
  throw Error(ErrorCode::kSchema, "unknown feature kind '" + std::string(name) + "'");
}

// Per-feature metadata. Ranges are recorded for continuous features only;
// categorical features carry their code book instead.
struct FeatureMeta {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  double min = 0;
  double max = 0;
  std::vector<std::string> categories;

  bool continuous() const { return kind == FeatureKind::kContinuous; }
  double range() const { return continuous() ? max - min : 0.0; }

  friend bool operator==(const FeatureMeta&, const FeatureMeta&) = default;
};

inline Json to_json(const FeatureMeta& f) {
  Json j = {{"name", f.name}, {"kind", feature_kind_name(f.kind)}};
  if (f.continuous()) {
    j["min"] = f.min;
    j["max"] = f.max;
  } else {
    j["categories"] = f.categories;
  }
  return j;
}

inline FeatureMeta feature_from_json(const Json& j) {
  FeatureMeta f;
  f.name = j.at("name").get<std::string>();
  f.kind = parse_feature_kind(j.at("kind").get<std::string>());
  if (f.continuous()) {
    f.min = j.at("min").get<double>();
    f.max = j.at("max").get<double>();
    require(f.min <= f.max, ErrorCode::kValidation, "feature '" + f.name + "' has min > max");
  } else {
    f.categories = j.value("categories", std::vector<std::string>{});
  }
  return f;
}

// What every model knows about the problem it was built for.
struct ModelInfo {
  std::vector<std::string> class_names;
  std::vector<FeatureMeta> features;

  std::size_t num_classes() const { return class_names.size(); }
  std::size_t num_features() const { return features.size(); }

  friend bool operator==(const ModelInfo&, const ModelInfo&) = default;
};

// Anything mapping a feature vector to class probabilities. Crisp models emit
// one-hot vectors.
class Classifier {
 public:
  explicit Classifier(ModelInfo info) : info_(std::move(info)) {
    require(info_.num_classes() >= 2, ErrorCode::kValidation, "a classifier needs at least 2 classes");
  }
  virtual ~Classifier() = default;

  virtual ClassProbabilities predict(std::span<const double> x) const = 0;

  // Serialization tag, e.g. "mlp".
  virtual std::string_view kind() const = 0;

  virtual bool is_crisp() const { return false; }

  // Kind-specific parameters; the envelope is written by model_io.
  virtual Json params_to_json() const = 0;

  const ModelInfo& info() const { return info_; }
  std::size_t num_classes() const { return info_.num_classes(); }
  std::size_t num_features() const { return info_.num_features(); }
  const std::vector<std::string>& class_names() const { return info_.class_names; }

 protected:
  void check_dimension(std::span<const double> x) const {
    if (x.size() != num_features()) {
      throw Error(ErrorCode::kDimension, "expected " + std::to_string(num_features()) +
                                             " features, got " + std::to_string(x.size()));
    }
  }

 private:
  ModelInfo info_;
};

}  // namespace elim

#endif  // ELIM_CORE_HPP_
