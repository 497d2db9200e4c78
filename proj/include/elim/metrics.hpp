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

// Confusion matrices and chance-corrected agreement statistics.
//
// With F the K x K confusion matrix (rows predicted, columns true), N its
// total, F_i+ / F_+i the row / column sums:
//
//   kappa = (N sum_i F_ii - sum_i F_i+ F_+i) / (N^2 - sum_i F_i+ F_+i)
//   p0    = sum_i F_ii / N
//   tau   = (p0 - p_r) / (1 - p_r)       p_r = max_i F_+i / N by default
//   var(p0)  = p0 (1 - p0) / N
//   var(tau) = var(p0) / (1 - p_r)        (kAsPrinted)
//            = var(p0) / (1 - p_r)^2      (kDeltaMethod)
//   Z = (tau1 - tau2) / sqrt(var1 + var2), significant at |Z| >= 1.96.

#ifndef ELIM_METRICS_HPP_
#define ELIM_METRICS_HPP_

#include <functional>
#include <optional>

#include "elim/core.hpp"
#include "elim/dataset.hpp"

namespace elim {

class ConfusionMatrix {
 public:
  ConfusionMatrix(std::size_t k, std::vector<std::string> names = {})
      : k_(k), counts_(k * k, 0), names_(std::move(names)) {
    require(k >= 1, ErrorCode::kValidation, "confusion matrix needs at least one class");
    if (names_.empty()) {
      for (std::size_t i = 0; i < k; ++i) names_.push_back("C" + std::to_string(i + 1));
    }
    require(names_.size() == k, ErrorCode::kValidation, "one class name per row required");
  }

  // rows[predicted][true]; must be square.
  static ConfusionMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows,
                                   std::vector<std::string> names = {}) {
    ConfusionMatrix cm(rows.size(), std::move(names));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      require(rows[i].size() == rows.size(), ErrorCode::kDimension, "confusion matrix must be square");
      for (std::size_t j = 0; j < rows.size(); ++j) {
        require(rows[i][j] >= 0, ErrorCode::kValidation, "confusion counts must be nonnegative");
        cm.at(i, j) = rows[i][j];
      }
    }
    return cm;
  }

  std::size_t size() const { return k_; }
  const std::vector<std::string>& names() const { return names_; }

  std::int64_t& at(std::size_t predicted, std::size_t truth) { return counts_.at(predicted * k_ + truth); }
  std::int64_t at(std::size_t predicted, std::size_t truth) const { return counts_.at(predicted * k_ + truth); }

  std::int64_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0}); }
  std::int64_t diagonal() const {
    std::int64_t d = 0;
    for (std::size_t i = 0; i < k_; ++i) d += at(i, i);
    return d;
  }
  std::int64_t row_sum(std::size_t i) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < k_; ++j) s += at(i, j);
    return s;
  }
  std::int64_t col_sum(std::size_t j) const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < k_; ++i) s += at(i, j);
    return s;
  }

  std::vector<std::vector<std::int64_t>> rows() const {
    std::vector<std::vector<std::int64_t>> out(k_, std::vector<std::int64_t>(k_));
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = 0; j < k_; ++j) out[i][j] = at(i, j);
    return out;
  }

  ConfusionMatrix scaled(std::int64_t factor) const {
    ConfusionMatrix out = *this;
    for (auto& c : out.counts_) c *= factor;
    return out;
  }

  Json to_json() const { return {{"class_names", names_}, {"rows", rows()}}; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t k_;
  std::vector<std::int64_t> counts_;
  std::vector<std::string> names_;
};

inline ConfusionMatrix confusion(std::span<const std::size_t> preds, std::span<const std::size_t> truth,
                                 std::size_t k, std::vector<std::string> names = {}) {
  require(preds.size() == truth.size(), ErrorCode::kDimension, "predictions and labels differ in length");
  require(!preds.empty(), ErrorCode::kValidation, "confusion matrix needs at least one case");
  ConfusionMatrix cm(k, std::move(names));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require(preds[i] < k && truth[i] < k, ErrorCode::kValidation, "class index out of range");
    ++cm.at(preds[i], truth[i]);
  }
  return cm;
}

inline double accuracy(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  require(n > 0, ErrorCode::kDegenerate, "empty confusion matrix");
  return static_cast<double>(cm.diagonal()) / static_cast<double>(n);
}

inline double kappa(const ConfusionMatrix& cm) {
  const std::int64_t n = cm.total();
  require(n > 0, ErrorCode::kDegenerate, "empty confusion matrix");
  std::int64_t chance = 0;
  for (std::size_t i = 0; i < cm.size(); ++i) chance += cm.row_sum(i) * cm.col_sum(i);
  const std::int64_t num = n * cm.diagonal() - chance;
  const std::int64_t den = n * n - chance;
  require(den != 0, ErrorCode::kDegenerate,
          "kappa is undefined: all cases fall in a single predicted and true class");
  return static_cast<double>(num) / static_cast<double>(den);
}

// Largest true-class share.
inline double base_rate(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  require(n > 0, ErrorCode::kDegenerate, "empty confusion matrix");
  std::int64_t best = 0;
  for (std::size_t j = 0; j < cm.size(); ++j) best = std::max(best, cm.col_sum(j));
  return static_cast<double>(best) / static_cast<double>(n);
}

inline double tau(const ConfusionMatrix& cm, std::optional<double> p_r = std::nullopt) {
  const double pr = p_r.value_or(base_rate(cm));
  require(pr < 1, ErrorCode::kDegenerate, "tau is undefined for a base rate of 1");
  return (accuracy(cm) - pr) / (1 - pr);
}

enum class TauVarianceForm { kAsPrinted, kDeltaMethod };

struct Variances {
  double p0 = 0;
  double tau = 0;
};

inline Variances variances(const ConfusionMatrix& cm, std::optional<double> p_r = std::nullopt,
                           TauVarianceForm form = TauVarianceForm::kAsPrinted) {
  const double p0 = accuracy(cm);
  const double pr = p_r.value_or(base_rate(cm));
  require(pr < 1, ErrorCode::kDegenerate, "tau variance is undefined for a base rate of 1");
  const double var_p0 = p0 * (1 - p0) / static_cast<double>(cm.total());
  const double denom = form == TauVarianceForm::kAsPrinted ? (1 - pr) : (1 - pr) * (1 - pr);
  return {var_p0, var_p0 / denom};
}

struct ZScore {
  double z = 0;
  bool significant = false;

  Json to_json() const { return {{"z", z}, {"significant", significant}}; }
};

inline constexpr double kZCritical95 = 1.96;

inline ZScore z_score(double tau1, double var1, double tau2, double var2) {
  require(var1 >= 0 && var2 >= 0, ErrorCode::kValidation, "variances must be nonnegative");
  require(var1 + var2 > 0, ErrorCode::kDegenerate, "z-score is undefined when both variances are zero");
  const double z = (tau1 - tau2) / std::sqrt(var1 + var2);
  return {z, std::abs(z) >= kZCritical95};
}

struct MetricReport {
  std::int64_t n = 0;
  double p0 = 0;
  double kappa = 0;
  double tau = 0;
  double base_rate = 0;
  double var_p0 = 0;
  double var_tau = 0;

  Json to_json() const {
    return {{"n", n},         {"p0", p0},           {"kappa", kappa},     {"tau", tau},
            {"base_rate", base_rate}, {"var_p0", var_p0}, {"var_tau", var_tau}};
  }
};

inline MetricReport metric_report(const ConfusionMatrix& cm, TauVarianceForm form = TauVarianceForm::kAsPrinted) {
  MetricReport r;
  r.n = cm.total();
  r.p0 = accuracy(cm);
  r.kappa = kappa(cm);
  r.base_rate = base_rate(cm);
  r.tau = tau(cm);
  const Variances v = variances(cm, std::nullopt, form);
  r.var_p0 = v.p0;
  r.var_tau = v.tau;
  return r;
}

// ---------------------------------------------------------------------------
// Kernel-weighted error functionals.

enum class KernelShape { kUniform, kGaussian, kTriangular, kIndicator, kLinear };

// K(d) for d >= 0. `width` scales the distance; kLinear is d / width and
// reduces to the identity for width 1.
struct Kernel {
  KernelShape shape = KernelShape::kUniform;
  double width = 1.0;

  double operator()(double d) const {
    switch (shape) {
      case KernelShape::kUniform: return 1.0;
      case KernelShape::kGaussian: return std::exp(-0.5 * (d / width) * (d / width));
      case KernelShape::kTriangular: return std::max(0.0, 1.0 - std::abs(d) / width);
      case KernelShape::kIndicator: return d == 0 ? 1.0 : 0.0;
      case KernelShape::kLinear: return d / width;
    }
    return 0.0;
  }
};

// sum_p kernel(class_distance[pred_p][true_p]).
template <typename KernelFn = Kernel>
double similarity_weighted_error(std::span<const std::size_t> preds, std::span<const std::size_t> truth,
                                 const std::vector<std::vector<double>>& class_distance, const KernelFn& kernel) {
  require(preds.size() == truth.size(), ErrorCode::kDimension, "predictions and labels differ in length");
  const std::size_t k = class_distance.size();
  for (std::size_t i = 0; i < k; ++i) {
    require(class_distance[i].size() == k, ErrorCode::kDimension, "class distance must be square");
    require(class_distance[i][i] == 0, ErrorCode::kValidation, "class distance diagonal must be zero");
    for (std::size_t j = 0; j < i; ++j) {
      require(class_distance[i][j] == class_distance[j][i], ErrorCode::kValidation,
              "class distance must be symmetric");
    }
  }
  double e = 0;
  for (std::size_t p = 0; p < preds.size(); ++p) {
    require(preds[p] < k && truth[p] < k, ErrorCode::kValidation, "class index out of range");
    e += kernel(class_distance[preds[p]][truth[p]]);
  }
  return e;
}

// sum_p kernel(d_p) (prediction_p - target_p)^2.
template <typename KernelFn = Kernel>
double locally_weighted_error(std::span<const double> predictions, std::span<const double> targets,
                              std::span<const double> distances, const KernelFn& kernel) {
  require(predictions.size() == targets.size() && targets.size() == distances.size(), ErrorCode::kDimension,
          "predictions, targets and distances differ in length");
  double e = 0;
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    const double w = kernel(distances[p]);
    require(w >= 0, ErrorCode::kValidation, "kernel values must be nonnegative");
    const double r = predictions[p] - targets[p];
    e += w * r * r;
  }
  return e;
}

// ---------------------------------------------------------------------------
// CSV form: header "predicted/true,name1,name2,...", then one row per
// predicted class. The first header cell is ignored on reading.

inline void write_confusion_csv(const ConfusionMatrix& cm, std::ostream& out) {
  out << "predicted/true";
  for (const auto& n : cm.names()) out << ',' << detail::csv_escape(n);
  out << '\n';
  for (std::size_t i = 0; i < cm.size(); ++i) {
    out << detail::csv_escape(cm.names()[i]);
    for (std::size_t j = 0; j < cm.size(); ++j) out << ',' << cm.at(i, j);
    out << '\n';
  }
}

inline ConfusionMatrix read_confusion_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kSchema, "missing confusion matrix header");
  auto header = detail::split_csv_line(line);
  require(header.size() >= 2, ErrorCode::kSchema, "confusion matrix header has no class names");
  std::vector<std::string> names(header.begin() + 1, header.end());
  std::vector<std::vector<std::int64_t>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = detail::split_csv_line(line);
    require(cells.size() == names.size() + 1, ErrorCode::kParse,
            "line " + std::to_string(line_no) + ": wrong number of cells");
    std::vector<std::int64_t> row;
    for (std::size_t j = 1; j < cells.size(); ++j) {
      double v = 0;
      require(detail::parse_double(cells[j], v) && v >= 0 && v == std::floor(v), ErrorCode::kParse,
              "line " + std::to_string(line_no) + ", column '" + names[j - 1] + "': not a count");
      row.push_back(static_cast<std::int64_t>(v));
    }
    rows.push_back(std::move(row));
  }
  require(rows.size() == names.size(), ErrorCode::kDimension, "confusion matrix must be square");
  return ConfusionMatrix::from_rows(rows, names);
}

}  // namespace elim

#endif  // ELIM_METRICS_HPP_
