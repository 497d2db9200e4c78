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

#ifndef ELIM_KNN_HPP_
#define ELIM_KNN_HPP_

#include <optional>

#include "elim/core.hpp"
#include "elim/dataset.hpp"

namespace elim {

enum class DistanceMetric { kManhattan, kEuclidean };
enum class VoteMode { kCrisp, kVote };

inline std::string_view metric_name(DistanceMetric m) {
  return m == DistanceMetric::kManhattan ? "manhattan" : "euclidean";
}
inline DistanceMetric parse_metric(std::string_view s) {
  if (s == "manhattan") return DistanceMetric::kManhattan;
  if (s == "euclidean") return DistanceMetric::kEuclidean;
  throw Error(ErrorCode::kConfig, "unknown metric '" + std::string(s) + "'");
}
inline std::string_view vote_mode_name(VoteMode m) { return m == VoteMode::kCrisp ? "crisp" : "vote"; }
inline VoteMode parse_vote_mode(std::string_view s) {
  if (s == "crisp") return VoteMode::kCrisp;
  if (s == "vote") return VoteMode::kVote;
  throw Error(ErrorCode::kConfig, "unknown vote mode '" + std::string(s) + "'");
}

inline double distance(std::span<const double> a, std::span<const double> b, DistanceMetric metric) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d += metric == DistanceMetric::kManhattan ? std::abs(diff) : diff * diff;
  }
  return metric == DistanceMetric::kManhattan ? d : std::sqrt(d);
}

// k nearest neighbours over a stored training set. Neighbours are ordered
// by (distance, class index, case index); vote ties go to the lowest class.
class KnnClassifier final : public Classifier {
 public:
  KnnClassifier(Dataset train, std::size_t k, DistanceMetric metric, VoteMode mode)
      : Classifier(train.info()), train_(std::move(train)), k_(k), metric_(metric), mode_(mode) {
    require(!train_.empty(), ErrorCode::kValidation, "kNN needs a non-empty training set");
    require(k_ >= 1 && k_ <= train_.size(), ErrorCode::kConfig, "k must lie in [1, training size]");
  }

  ClassProbabilities predict(std::span<const double> x) const override {
    check_dimension(x);
    return predict_excluding(x, std::nullopt);
  }

  // Leave-one-out prediction for training case `skip`.
  ClassProbabilities predict_excluding(std::span<const double> x, std::optional<std::size_t> skip) const {
    struct Neighbour {
      double dist;
      std::size_t label;
      std::size_t index;
    };
    std::vector<Neighbour> all;
    all.reserve(train_.size());
    for (std::size_t i = 0; i < train_.size(); ++i) {
      if (skip && *skip == i) continue;
      all.push_back({distance(x, train_.cases[i], metric_), train_.labels[i], i});
    }
    const std::size_t k = std::min(k_, all.size());
    require(k >= 1, ErrorCode::kValidation, "no neighbours available");
    auto by_rank = [](const Neighbour& a, const Neighbour& b) {
      if (a.dist != b.dist) return a.dist < b.dist;
      if (a.label != b.label) return a.label < b.label;
      return a.index < b.index;
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), by_rank);
    std::vector<double> votes(num_classes(), 0.0);
    for (std::size_t i = 0; i < k; ++i) votes[all[i].label] += 1.0;
    if (mode_ == VoteMode::kCrisp) return ClassProbabilities::one_hot(num_classes(), argmax(votes));
    for (double& v : votes) v /= static_cast<double>(k);
    return ClassProbabilities(std::move(votes));
  }

  std::string_view kind() const override { return "knn"; }
  bool is_crisp() const override { return mode_ == VoteMode::kCrisp; }

  Json params_to_json() const override {
    return {{"k", k_},
            {"metric", metric_name(metric_)},
            {"mode", vote_mode_name(mode_)},
            {"cases", train_.cases},
            {"labels", train_.labels}};
  }

  const Dataset& training_set() const { return train_; }
  std::size_t k() const { return k_; }
  DistanceMetric metric() const { return metric_; }
  VoteMode mode() const { return mode_; }

 private:
  Dataset train_;
  std::size_t k_;
  DistanceMetric metric_;
  VoteMode mode_;
};

inline ClassProbabilities knn_predict(const Dataset& train, std::span<const double> x, std::size_t k,
                                      DistanceMetric metric, VoteMode mode) {
  return KnnClassifier(train, k, metric, mode).predict(x);
}

// Leave-one-out accuracy on the stored training set.
inline double knn_leave_one_out_accuracy(const KnnClassifier& model) {
  const Dataset& d = model.training_set();
  require(d.size() >= 2, ErrorCode::kValidation, "leave-one-out needs at least 2 cases");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (model.predict_excluding(d.cases[i], i).argmax() == d.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

}  // namespace elim

#endif  // ELIM_KNN_HPP_
