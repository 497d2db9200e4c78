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

#ifndef ELIM_COMMITTEE_HPP_
#define ELIM_COMMITTEE_HPP_

#include <memory>

#include "elim/core.hpp"
#include "elim/mlp.hpp"

namespace elim {

using ClassifierPtr = std::shared_ptr<const Classifier>;

// Arithmetic mean of member probabilities.
class Committee final : public Classifier {
 public:
  explicit Committee(std::vector<ClassifierPtr> members)
      : Classifier(checked_info(members)), members_(std::move(members)) {}

  ClassProbabilities predict(std::span<const double> x) const override {
    check_dimension(x);
    std::vector<double> mean(num_classes(), 0.0);
    for (const auto& m : members_) {
      const auto p = m->predict(x);
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += p[i];
    }
    for (double& v : mean) v /= static_cast<double>(members_.size());
    return ClassProbabilities(std::move(mean));
  }

  std::string_view kind() const override { return "committee"; }
  Json params_to_json() const override;  // defined in model_io.hpp

  const std::vector<ClassifierPtr>& members() const { return members_; }

 private:
  static ModelInfo checked_info(const std::vector<ClassifierPtr>& members) {
    require(!members.empty(), ErrorCode::kValidation, "committee needs at least one member");
    for (const auto& m : members) {
      require(m != nullptr, ErrorCode::kValidation, "null committee member");
      require(m->class_names() == members.front()->class_names() &&
                  m->num_features() == members.front()->num_features(),
              ErrorCode::kClassMismatch, "committee members disagree on classes or features");
    }
    return members.front()->info();
  }

  std::vector<ClassifierPtr> members_;
};

struct TrainedCommittee {
  std::shared_ptr<const Committee> committee;
  std::vector<TrainingLog> logs;
};

// Members differ only in their derived seeds.
inline TrainedCommittee committee_train(const Dataset& train, std::size_t members, std::size_t hidden,
                                        const TrainConfig& cfg) {
  require(members >= 1, ErrorCode::kConfig, "committee needs at least one member");
  std::vector<ClassifierPtr> trained;
  std::vector<TrainingLog> logs;
  for (std::size_t i = 0; i < members; ++i) {
    TrainConfig member_cfg = cfg;
    member_cfg.seed = detail::derive_seed(cfg.seed, i);
    auto result = train_mlp(train, hidden, member_cfg);
    trained.push_back(std::make_shared<MlpModel>(std::move(result.model)));
    logs.push_back(std::move(result.log));
  }
  return {std::make_shared<Committee>(std::move(trained)), std::move(logs)};
}

// Sum of R(predicted, true) over cases, with predicted = argmax.
inline double risk_weighted_loss(std::span<const ClassProbabilities> preds, std::span<const std::size_t> truth,
                                 const RiskMatrix& risk) {
  require(preds.size() == truth.size(), ErrorCode::kDimension, "predictions and labels differ in length");
  const std::size_t k = risk.size();
  for (std::size_t i = 0; i < k; ++i) {
    require(risk[i].size() == k, ErrorCode::kDimension, "risk matrix must be square");
    require(risk[i][i] == 0, ErrorCode::kValidation, "risk matrix diagonal must be zero");
  }
  double total = 0;
  for (std::size_t p = 0; p < preds.size(); ++p) {
    require(preds[p].size() == k && truth[p] < k, ErrorCode::kDimension,
            "prediction does not match the risk matrix shape");
    total += risk[preds[p].argmax()][truth[p]];
  }
  return total;
}

}  // namespace elim

#endif  // ELIM_COMMITTEE_HPP_
