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

#ifndef ELIM_RULES_HPP_
#define ELIM_RULES_HPP_

#include "elim/core.hpp"

namespace elim {

// X[feature] in [a, b], closed on both ends.
struct IntervalCondition {
  std::size_t feature = 0;
  double a = 0;
  double b = 0;

  bool holds(std::span<const double> x) const { return x[feature] >= a && x[feature] <= b; }
  friend bool operator==(const IntervalCondition&, const IntervalCondition&) = default;
};

struct IntervalRule {
  std::size_t class_index = 0;
  std::vector<IntervalCondition> conditions;  // conjunction

  bool fires(std::span<const double> x) const {
    return std::all_of(conditions.begin(), conditions.end(),
                       [&](const IntervalCondition& c) { return c.holds(x); });
  }
  friend bool operator==(const IntervalRule&, const IntervalRule&) = default;
};

// Ordered crisp rules; the first rule that fires decides, otherwise the
// default class.
struct IntervalRuleSet {
  std::vector<IntervalRule> rules;
  std::size_t default_class = 0;

  friend bool operator==(const IntervalRuleSet&, const IntervalRuleSet&) = default;
};

inline void validate(const IntervalRuleSet& rules, const ModelInfo& info) {
  require(rules.default_class < info.num_classes(), ErrorCode::kValidation,
          "default class out of range");
  for (std::size_t r = 0; r < rules.rules.size(); ++r) {
    const IntervalRule& rule = rules.rules[r];
    const std::string where = "rule " + std::to_string(r);
    require(rule.class_index < info.num_classes(), ErrorCode::kValidation, where + ": class out of range");
    for (const auto& c : rule.conditions) {
      require(c.feature < info.num_features(), ErrorCode::kValidation, where + ": feature out of range");
      require(info.features[c.feature].continuous(), ErrorCode::kValidation,
              where + ": conditions must reference continuous features");
      require(c.a <= c.b, ErrorCode::kValidation, where + ": interval has a > b");
    }
  }
}

inline std::size_t crisp_decision(const IntervalRuleSet& rules, std::span<const double> x) {
  for (const auto& rule : rules.rules) {
    if (rule.fires(x)) return rule.class_index;
  }
  return rules.default_class;
}

class RuleClassifier final : public Classifier {
 public:
  RuleClassifier(ModelInfo info, IntervalRuleSet rules)
      : Classifier(std::move(info)), rules_(std::move(rules)) {
    validate(rules_, this->info());
  }

  ClassProbabilities predict(std::span<const double> x) const override {
    check_dimension(x);
    return ClassProbabilities::one_hot(num_classes(), crisp_decision(rules_, x));
  }

  std::string_view kind() const override { return "rules"; }
  bool is_crisp() const override { return true; }

  Json params_to_json() const override {
    Json rules = Json::array();
    for (const auto& r : rules_.rules) {
      Json conds = Json::array();
      for (const auto& c : r.conditions) conds.push_back({{"feature", c.feature}, {"a", c.a}, {"b", c.b}});
      rules.push_back({{"class", r.class_index}, {"conditions", conds}});
    }
    return {{"default_class", rules_.default_class}, {"rules", rules}};
  }

  const IntervalRuleSet& rules() const { return rules_; }

 private:
  IntervalRuleSet rules_;
};

inline IntervalRuleSet rule_set_from_json(const Json& params) {
  IntervalRuleSet out;
  out.default_class = params.at("default_class").get<std::size_t>();
  for (const auto& r : params.at("rules")) {
    IntervalRule rule;
    rule.class_index = r.at("class").get<std::size_t>();
    for (const auto& c : r.at("conditions")) {
      rule.conditions.push_back(
          {c.at("feature").get<std::size_t>(), c.at("a").get<double>(), c.at("b").get<double>()});
    }
    out.rules.push_back(std::move(rule));
  }
  return out;
}

}  // namespace elim

#endif  // ELIM_RULES_HPP_
