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

// Decisions of variable cardinality: elimination of improbable classes,
// confusion-pair discovery, the two-stage joint-class pipeline, rejection
// curves and relaxed top-k scoring.

#ifndef ELIM_ELIMINATOR_HPP_
#define ELIM_ELIMINATOR_HPP_

#include <memory>
#include <optional>

#include "elim/committee.hpp"
#include "elim/core.hpp"
#include "elim/dataset.hpp"
#include "elim/grouping.hpp"
#include "elim/metrics.hpp"
#include "elim/mlp.hpp"

namespace elim {

// max_retained == 0 means no cap.
struct EliminationPolicy {
  double accept_threshold = 0.9;
  double retain_threshold = 0.2;
  std::size_t max_retained = 0;

  void validate() const {
    require(accept_threshold > 0 && accept_threshold <= 1, ErrorCode::kConfig,
            "accept threshold must lie in (0, 1]");
    require(retain_threshold >= 0 && retain_threshold < 1, ErrorCode::kConfig,
            "retain threshold must lie in [0, 1)");
    require(retain_threshold < accept_threshold, ErrorCode::kConfig,
            "retain threshold must be below the accept threshold");
  }

  Json to_json() const {
    return {{"accept_threshold", accept_threshold},
            {"retain_threshold", retain_threshold},
            {"max_retained", max_retained}};
  }
  static EliminationPolicy from_json(const Json& j) { return from_json(j, EliminationPolicy()); }
  static EliminationPolicy from_json(const Json& j, EliminationPolicy p) {
    try {
      p.accept_threshold = j.value("accept_threshold", p.accept_threshold);
      p.retain_threshold = j.value("retain_threshold", p.retain_threshold);
      p.max_retained = j.value("max_retained", p.max_retained);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kSchema, std::string("malformed policy: ") + e.what());
    }
    p.validate();
    return p;
  }
};

enum class VerdictMode { kConfidentSingle, kSubset, kUndecided };

inline std::string_view verdict_mode_name(VerdictMode m) {
  switch (m) {
    case VerdictMode::kConfidentSingle: return "confident-single";
    case VerdictMode::kSubset: return "subset";
    case VerdictMode::kUndecided: return "undecided";
  }
  return "undecided";
}

struct RetainedClass {
  std::size_t index = 0;
  double prob = 0;
};

struct EliminationVerdict {
  std::vector<RetainedClass> retained;  // descending probability
  std::vector<std::size_t> eliminated;  // ascending index
  VerdictMode mode = VerdictMode::kUndecided;
  std::string trace;

  bool retains(std::size_t c) const {
    return std::any_of(retained.begin(), retained.end(), [c](const auto& r) { return r.index == c; });
  }
  std::vector<std::size_t> retained_indices() const {
    std::vector<std::size_t> out;
    for (const auto& r : retained) out.push_back(r.index);
    return out;
  }

  Json to_json(const std::vector<std::string>& class_names) const {
    Json ret = Json::array();
    for (const auto& r : retained) ret.push_back({{"class", class_names.at(r.index)}, {"index", r.index}, {"prob", r.prob}});
    Json elim = Json::array();
    for (std::size_t c : eliminated) elim.push_back(class_names.at(c));
    return {{"retained", ret}, {"eliminated", elim}, {"mode", verdict_mode_name(mode)}, {"trace", trace}};
  }
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline EliminationVerdict make_verdict(const ClassProbabilities& p, std::vector<std::size_t> keep, VerdictMode mode,
                                       std::string trace) {
  EliminationVerdict v;
  std::vector<bool> kept(p.size(), false);
  for (std::size_t c : keep) kept[c] = true;
  for (std::size_t c : keep) v.retained.push_back({c, p[c]});
  for (std::size_t c = 0; c < p.size(); ++c)
    if (!kept[c]) v.eliminated.push_back(c);
  v.mode = mode;
  v.trace = std::move(trace);
  return v;
}

}  // namespace detail

// Keeps only the argmax when it reaches the accept threshold; otherwise
// keeps the classes at or above the retain threshold, never fewer than the
// top two and never more than max_retained.
inline EliminationVerdict eliminate(const ClassProbabilities& p, const EliminationPolicy& policy) {
  policy.validate();
  const std::size_t k = p.size();
  const auto order = rank_descending(p.values());
  if (p[order[0]] >= policy.accept_threshold) {
    return detail::make_verdict(p, {order[0]}, VerdictMode::kConfidentSingle,
                                "max p = " + detail::fmt(p[order[0]]) + " >= accept " +
                                    detail::fmt(policy.accept_threshold));
  }
  const std::size_t cap = policy.max_retained == 0 ? k : std::min(policy.max_retained, k);
  std::size_t n = 0;
  while (n < k && p[order[n]] >= policy.retain_threshold) ++n;
  n = std::min(std::max<std::size_t>(n, 2), std::max<std::size_t>(cap, 2));
  n = std::min(n, k);
  std::vector<std::size_t> keep(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
  const VerdictMode mode = n == k ? VerdictMode::kUndecided : VerdictMode::kSubset;
  return detail::make_verdict(p, std::move(keep), mode,
                              "max p = " + detail::fmt(p[order[0]]) + " < accept " +
                                  detail::fmt(policy.accept_threshold) + "; kept " + std::to_string(n) +
                                  " classes with p >= retain " + detail::fmt(policy.retain_threshold) +
                                  " (min 2, max " + std::to_string(cap) + ")");
}

// ---------------------------------------------------------------------------
// Confusion pairs.

struct ConfusedPair {
  std::size_t first = 0;
  std::size_t second = 0;
  std::int64_t score = 0;

  friend bool operator==(const ConfusedPair&, const ConfusedPair&) = default;
};

// Pairs ranked by F_ij + F_ji, ties in index order.
inline std::vector<ConfusedPair> confused_pairs(const ConfusionMatrix& cm) {
  std::vector<ConfusedPair> out;
  for (std::size_t i = 0; i < cm.size(); ++i)
    for (std::size_t j = i + 1; j < cm.size(); ++j) out.push_back({i, j, cm.at(i, j) + cm.at(j, i)});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  return out;
}

inline Json to_json(const std::vector<ConfusedPair>& pairs, const std::vector<std::string>& names) {
  Json out = Json::array();
  for (const auto& p : pairs) {
    out.push_back({{"pair", {names.at(p.first), names.at(p.second)}},
                   {"indices", {p.first, p.second}},
                   {"score", p.score}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-stage pipeline.

struct TwoStageConfig {
  double reliability_threshold = 0.9;
  std::size_t hidden = 8;
  TrainConfig train;

  void validate() const {
    require(reliability_threshold >= 0 && reliability_threshold <= 1, ErrorCode::kConfig,
            "reliability threshold must lie in [0, 1]");
    require(hidden >= 1, ErrorCode::kConfig, "hidden layer needs at least one unit");
  }
};

class TwoStagePipeline {
 public:
  TwoStagePipeline(ClassifierPtr stage1, std::vector<std::shared_ptr<const MlpModel>> stage2,
                   double reliability_threshold)
      : stage1_(std::move(stage1)), stage2_(std::move(stage2)), threshold_(reliability_threshold) {
    require(stage1_ != nullptr, ErrorCode::kValidation, "two-stage pipeline needs a first stage");
    require(threshold_ >= 0 && threshold_ <= 1, ErrorCode::kConfig, "reliability threshold must lie in [0, 1]");
    for (const auto& m : stage2_) {
      require(m && m->joint().has_value(), ErrorCode::kValidation, "second-stage models must be joint-class models");
      require(m->joint()->original_class_names == stage1_->class_names(), ErrorCode::kClassMismatch,
              "second-stage model classes differ from the first stage");
    }
  }

  const Classifier& stage1() const { return *stage1_; }
  const std::vector<std::shared_ptr<const MlpModel>>& stage2() const { return stage2_; }
  double reliability_threshold() const { return threshold_; }
  std::size_t num_classes() const { return stage1_->num_classes(); }

 private:
  ClassifierPtr stage1_;
  std::vector<std::shared_ptr<const MlpModel>> stage2_;
  double threshold_;
};

inline TwoStagePipeline build_two_stage(ClassifierPtr stage1, const std::vector<ClassGrouping>& groupings,
                                        const Dataset& train, const TwoStageConfig& cfg) {
  cfg.validate();
  require(stage1 != nullptr, ErrorCode::kValidation, "two-stage pipeline needs a first stage");
  require(train.class_names == stage1->class_names(), ErrorCode::kClassMismatch,
          "training data classes differ from the first stage");
  std::vector<std::shared_ptr<const MlpModel>> stage2;
  for (std::size_t g = 0; g < groupings.size(); ++g) {
    const auto& grouping = groupings[g];
    const std::string id = "grouping " + std::to_string(g + 1);
    require(grouping.num_classes() == train.num_classes(), ErrorCode::kValidation,
            id + " does not partition the " + std::to_string(train.num_classes()) + " classes");
    require(!grouping.all_singletons(), ErrorCode::kValidation, id + " merges no classes");
    try {
      TrainConfig tc = cfg.train;
      tc.seed = detail::derive_seed(cfg.train.seed, g);
      stage2.push_back(std::make_shared<MlpModel>(train_joint(train, grouping, cfg.hidden, tc).model));
    } catch (const Error& e) {
      throw Error(e.code(), id + " (" + grouping.to_json().dump() + "): " + e.what());
    }
  }
  return TwoStagePipeline(std::move(stage1), std::move(stage2), cfg.reliability_threshold);
}

// Stage 1 answers alone when its top probability reaches the reliability
// threshold. Otherwise every merged group (size >= 2) that contains the
// stage-1 argmax is scored by its joint model; the best group wins, ties to
// the earlier model. Retained probabilities are the stage-1 values.
inline EliminationVerdict two_stage_classify(const TwoStagePipeline& pipe, std::span<const double> x) {
  for (double v : x) require(std::isfinite(v), ErrorCode::kValidation, "feature values must be finite");
  const ClassProbabilities p1 = pipe.stage1().predict(x);
  const std::size_t top = p1.argmax();
  const std::string s1 = "stage 1: max p = " + detail::fmt(p1[top]);
  if (p1[top] >= pipe.reliability_threshold()) {
    return detail::make_verdict(p1, {top}, VerdictMode::kConfidentSingle,
                                s1 + " >= " + detail::fmt(pipe.reliability_threshold()) + "; stage 2 skipped");
  }

  std::optional<std::size_t> best_model;
  std::size_t best_group = 0;
  double best_prob = -1;
  for (std::size_t m = 0; m < pipe.stage2().size(); ++m) {
    const auto& model = *pipe.stage2()[m];
    const auto& grouping = model.joint()->grouping;
    const std::size_t g = grouping.group_of(top);
    if (grouping.groups()[g].size() < 2) continue;
    const double q = model.predict(x)[g];
    if (q > best_prob) {
      best_prob = q;
      best_model = m;
      best_group = g;
    }
  }
  const std::string s1b = s1 + " < " + detail::fmt(pipe.reliability_threshold());
  if (!best_model) {
    std::size_t largest = 2;
    for (const auto& m : pipe.stage2()) largest = std::max(largest, m->joint()->grouping.largest_group());
    EliminationPolicy fallback;
    fallback.accept_threshold = 1;
    fallback.retain_threshold = 0.2;
    fallback.max_retained = largest;
    auto v = eliminate(p1, fallback);
    v.trace = s1b + "; stage 2: no merged group holds the argmax; " + v.trace;
    return v;
  }
  const auto& grouping = pipe.stage2()[*best_model]->joint()->grouping;
  auto members = grouping.groups()[best_group];
  std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) { return p1[a] > p1[b]; });
  const VerdictMode mode = members.size() == p1.size() ? VerdictMode::kUndecided : VerdictMode::kSubset;
  return detail::make_verdict(p1, std::move(members), mode,
                              s1b + "; stage 2: joint model " + std::to_string(*best_model + 1) + " gives " +
                                  grouping.names()[best_group] + " p = " + detail::fmt(best_prob));
}

// ---------------------------------------------------------------------------
// Rejection curves and relaxed criteria.

struct RejectionPoint {
  double threshold = 0;
  double rejection_rate = 0;
  std::optional<double> accuracy;  // empty when every case is rejected
};

inline void check_thresholds(std::span<const double> thresholds) {
  require(!thresholds.empty(), ErrorCode::kConfig, "threshold list is empty");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    require(thresholds[i] >= 0 && thresholds[i] <= 1, ErrorCode::kConfig, "thresholds must lie in [0, 1]");
    require(i == 0 || thresholds[i] > thresholds[i - 1], ErrorCode::kConfig, "thresholds must be increasing");
  }
}

// A case is rejected at t iff its confidence is below t.
inline std::vector<RejectionPoint> rejection_curve(std::span<const double> confidence, const std::vector<bool>& correct,
                                                   std::span<const double> thresholds) {
  check_thresholds(thresholds);
  require(confidence.size() == correct.size(), ErrorCode::kDimension, "confidences and outcomes differ in length");
  require(!confidence.empty(), ErrorCode::kValidation, "rejection curve needs at least one case");
  std::vector<RejectionPoint> out;
  for (double t : thresholds) {
    std::size_t kept = 0, hits = 0;
    for (std::size_t i = 0; i < confidence.size(); ++i) {
      if (confidence[i] < t) continue;
      ++kept;
      if (correct[i]) ++hits;
    }
    RejectionPoint pt;
    pt.threshold = t;
    pt.rejection_rate = static_cast<double>(confidence.size() - kept) / static_cast<double>(confidence.size());
    if (kept > 0) pt.accuracy = static_cast<double>(hits) / static_cast<double>(kept);
    out.push_back(pt);
  }
  return out;
}

inline std::vector<RejectionPoint> rejection_curve(const Classifier& model, const Dataset& data,
                                                   std::span<const double> thresholds) {
  std::vector<double> conf;
  std::vector<bool> correct;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = model.predict(data.cases[i]);
    conf.push_back(p.max());
    correct.push_back(p.argmax() == data.labels[i]);
  }
  return rejection_curve(conf, correct, thresholds);
}

inline void write_rejection_csv(const std::vector<RejectionPoint>& curve, std::ostream& out) {
  out << "threshold,rejection_rate,accuracy\n";
  for (const auto& p : curve) {
    out << format_double(p.threshold) << ',' << format_double(p.rejection_rate) << ','
        << (p.accuracy ? format_double(*p.accuracy) : std::string("NA")) << '\n';
  }
}

inline Json to_json(const std::vector<RejectionPoint>& curve) {
  Json out = Json::array();
  for (const auto& p : curve) {
    out.push_back({{"threshold", p.threshold},
                   {"rejection_rate", p.rejection_rate},
                   {"accuracy", p.accuracy ? Json(*p.accuracy) : Json(nullptr)}});
  }
  return out;
}

inline std::vector<double> parse_thresholds(std::string_view text) {
  std::vector<double> out;
  for (const auto& cell : detail::split_csv_line(std::string(text))) {
    double v = 0;
    require(detail::parse_double(cell, v), ErrorCode::kConfig, "malformed threshold '" + cell + "'");
    out.push_back(v);
  }
  check_thresholds(out);
  return out;
}

// True class among the k most probable (ties to the lower index).
inline bool in_top_k(const ClassProbabilities& p, std::size_t truth, std::size_t k) {
  const auto order = rank_descending(p.values());
  return std::find(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), truth) !=
         order.begin() + static_cast<std::ptrdiff_t>(k);
}

inline double relaxed_accuracy(const Classifier& model, const Dataset& data, std::size_t k) {
  require(k >= 1 && k <= model.num_classes(), ErrorCode::kConfig, "k must lie in [1, K]");
  require(data.size() > 0, ErrorCode::kValidation, "dataset is empty");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) hits += in_top_k(model.predict(data.cases[i]), data.labels[i], k) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

// How a case whose runner-up falls below the threshold is counted:
// kSingleton keeps only the top class; kMiss counts the case as a failure.
enum class SubThresholdRule { kSingleton, kMiss };

inline SubThresholdRule parse_sub_threshold_rule(std::string_view s) {
  if (s == "singleton") return SubThresholdRule::kSingleton;
  if (s == "miss") return SubThresholdRule::kMiss;
  throw Error(ErrorCode::kConfig, "unknown sub-threshold rule '" + std::string(s) + "'");
}

// Top-2 success where the runner-up only counts when its probability is at
// least `threshold`.
inline double thresholded_top2_accuracy(const Classifier& model, const Dataset& data, double threshold,
                                        SubThresholdRule rule) {
  require(threshold >= 0 && threshold <= 1, ErrorCode::kConfig, "threshold must lie in [0, 1]");
  require(data.size() > 0, ErrorCode::kValidation, "dataset is empty");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = model.predict(data.cases[i]);
    const auto order = rank_descending(p.values());
    const bool second_ok = p[order[1]] >= threshold;
    const std::size_t y = data.labels[i];
    bool hit = false;
    if (second_ok) {
      hit = order[0] == y || order[1] == y;
    } else if (rule == SubThresholdRule::kSingleton) {
      hit = order[0] == y;
    }
    hits += hit ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

// Fraction of cases whose two-stage verdict retains the true class.
inline double pipeline_retained_accuracy(const TwoStagePipeline& pipe, const Dataset& data) {
  require(data.size() > 0, ErrorCode::kValidation, "dataset is empty");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) hits += two_stage_classify(pipe, data.cases[i]).retains(data.labels[i]);
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

struct HighConfidenceErrors {
  std::size_t count = 0;
  double fraction = 0;
};

inline HighConfidenceErrors high_confidence_errors(const Classifier& model, const Dataset& data, double threshold) {
  require(threshold > 0 && threshold < 1, ErrorCode::kConfig, "threshold must lie in (0, 1)");
  require(data.size() > 0, ErrorCode::kValidation, "dataset is empty");
  HighConfidenceErrors out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = model.predict(data.cases[i]);
    if (p.max() >= threshold && p.argmax() != data.labels[i]) ++out.count;
  }
  out.fraction = static_cast<double>(out.count) / static_cast<double>(data.size());
  return out;
}

inline ConfusionMatrix confusion(const Classifier& model, const Dataset& data) {
  std::vector<std::size_t> preds;
  for (const auto& x : data.cases) preds.push_back(model.predict(x).argmax());
  return confusion(preds, data.labels, data.num_classes(), data.class_names);
}

}  // namespace elim

#endif  // ELIM_ELIMINATOR_HPP_
