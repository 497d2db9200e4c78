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

// Builds any model kind from a dataset and a JSON config.
//
//   mlp        hidden, training fields
//   joint      groups ("1,2|3|4", one-based), hidden, training fields
//   committee  members, hidden, training fields
//   lda        slope, ridge, tune_slope
//   knn        k, metric, mode
//   rules      rules document ({default_class, rules: [...]})
//   soft_rules rules document, rho, tune (bool), training fields
//   bayes      mixture
//
// Training fields are those of TrainConfig (seed, epochs, learning_rate...).

#ifndef ELIM_FACTORY_HPP_
#define ELIM_FACTORY_HPP_

#include "elim/committee.hpp"
#include "elim/core.hpp"
#include "elim/dataset.hpp"
#include "elim/eliminator.hpp"
#include "elim/grouping.hpp"
#include "elim/knn.hpp"
#include "elim/lda.hpp"
#include "elim/mixture.hpp"
#include "elim/mlp.hpp"
#include "elim/model_io.hpp"
#include "elim/rules.hpp"
#include "elim/soft_rules.hpp"
#include "elim/uncertainty.hpp"

namespace elim {

struct BuiltModel {
  ClassifierPtr model;
  Json log = Json::object();
};

inline const std::vector<std::string>& model_kinds() {
  static const std::vector<std::string> kinds = {"mlp",   "joint", "committee",  "lda",
                                                 "knn",   "rules", "soft_rules", "bayes"};
  return kinds;
}

namespace detail {

inline ClassGrouping grouping_from_config(const Json& g, const std::vector<std::string>& class_names) {
  if (g.is_string()) return ClassGrouping::parse(g.get<std::string>(), class_names);
  auto groups = g.get<std::vector<std::vector<std::size_t>>>();
  for (auto& grp : groups)
    for (auto& c : grp) {
      require(c >= 1, ErrorCode::kConfig, "group members are one-based class indices");
      --c;
    }
  return ClassGrouping::named(std::move(groups), class_names);
}

}  // namespace detail

inline BuiltModel build_model(const Dataset& train, const std::string& kind, const Json& config) {
  validate(train);
  try {
    const TrainConfig tc = train_config_from_json(config);
    const std::size_t hidden = config.value("hidden", std::size_t{8});
    if (kind == "mlp") {
      auto r = train_mlp(train, hidden, tc);
      return {std::make_shared<MlpModel>(std::move(r.model)), r.log.to_json()};
    }
    if (kind == "joint") {
      require(config.contains("groups"), ErrorCode::kConfig, "joint models need 'groups'");
      auto grouping = detail::grouping_from_config(config.at("groups"), train.class_names);
      auto r = train_joint(train, grouping, hidden, tc);
      return {std::make_shared<MlpModel>(std::move(r.model)), r.log.to_json()};
    }
    if (kind == "committee") {
      auto r = committee_train(train, config.value("members", std::size_t{5}), hidden, tc);
      Json logs = Json::array();
      for (const auto& l : r.logs) logs.push_back(l.to_json());
      return {r.committee, {{"members", logs}}};
    }
    if (kind == "lda") {
      auto m = train_lda(train, config.value("slope", 1.0), config.value("ridge", 0.0));
      if (config.value("tune_slope", false)) m = tune_lda_slope(m, train);
      const double err = logistic_quadratic_error(m, train);
      return {std::make_shared<LinearLogisticModel>(std::move(m)), {{"quadratic_error", err}}};
    }
    if (kind == "knn") {
      auto m = std::make_shared<KnnClassifier>(train, config.value("k", std::size_t{5}),
                                               parse_metric(config.value("metric", std::string("euclidean"))),
                                               parse_vote_mode(config.value("mode", std::string("vote"))));
      return {m, {{"leave_one_out_accuracy", knn_leave_one_out_accuracy(*m)}}};
    }
    if (kind == "rules" || kind == "soft_rules") {
      require(config.contains("rules"), ErrorCode::kConfig, kind + " models need 'rules'");
      auto rules = rule_set_from_json(config.at("rules"));
      if (kind == "rules") return {std::make_shared<RuleClassifier>(train.info(), std::move(rules))};
      auto profile = UncertaintyProfile::global(config.value("rho", 0.05));
      Json log = Json::object();
      if (config.value("tune", false)) {
        auto t = tune_soft_rules(rules, train.info(), train, profile, tc);
        rules = std::move(t.rules);
        profile.rho = t.rho;
        log = {{"steps", t.log_to_json()}, {"best_loss", t.best_loss}, {"rho", t.rho}};
      }
      auto s = dispersions(profile, train.features);
      return {std::make_shared<SoftRuleClassifier>(train.info(), std::move(rules), std::move(s)), log};
    }
    if (kind == "bayes") {
      require(config.contains("mixture"), ErrorCode::kConfig, "bayes models need 'mixture'");
      GaussianMixture mix(mixture_spec_from_json(config.at("mixture")));
      ModelInfo info = mixture_info(mix);
      // Feature ranges come from the data; the spec alone carries none.
      if (info.num_features() == train.num_features()) info.features = train.features;
      auto m = std::make_shared<BayesClassifier>(std::move(info), std::move(mix));
      require(m->class_names() == train.class_names, ErrorCode::kClassMismatch,
              "mixture classes differ from the dataset's");
      return {m};
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed model config: ") + e.what());
  }
  throw Error(ErrorCode::kConfig, "unknown model kind '" + kind + "'");
}

// Class sets must match exactly, in order.
inline void check_compatible(const Classifier& model, const Dataset& data) {
  require(model.class_names() == data.class_names, ErrorCode::kClassMismatch,
          "model and dataset have different class sets");
  require(model.num_features() == data.num_features(), ErrorCode::kDimension,
          "model and dataset have different feature counts");
}

}  // namespace elim

#endif  // ELIM_FACTORY_HPP_
