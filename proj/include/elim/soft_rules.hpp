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

// Analytic class probabilities of crisp interval rules under Gaussian input
// noise. A condition X in [a, b] holds for a Gaussian number centred at x
// with dispersion s with probability close to the soft trapezoid
//
//   L(x; a, b) = sigmoid(beta (x - a)) - sigmoid(beta (x - b)),
//   beta = 2.4 / (sqrt(2) s).
//
// Conventions for combining conditions and rules:
//   * a rule's probability is the product over its conditions;
//   * a class scores the max over its rules; the default class also scores
//     the probability that no rule fires, prod_r (1 - P_r);
//   * probabilities are the scores normalised by their sum, and all-zero
//     scores fall back to the default class.
//
// Interval endpoints and the global rho are differentiable parameters of
//
//   E = 1/2 sum_X sum_i (p(C_i|X) - delta(C_i, C(X)))^2,
//
// which tune_soft_rules minimises by projected gradient descent.

#ifndef ELIM_SOFT_RULES_HPP_
#define ELIM_SOFT_RULES_HPP_

#include "elim/core.hpp"
#include "elim/dataset.hpp"
#include "elim/mlp.hpp"
#include "elim/rules.hpp"
#include "elim/uncertainty.hpp"

namespace elim {

inline constexpr double kSoftRuleSlopeFactor = 2.4 / 1.4142135623730951;

inline double soft_rule_beta(double s) { return kSoftRuleSlopeFactor / s; }

inline double analytic_condition_probability(double a, double b, double x, double s) {
  require(a <= b, ErrorCode::kValidation, "interval has a > b");
  require(s >= 0, ErrorCode::kConfig, "dispersion must be nonnegative");
  if (s == 0) return (x >= a && x <= b) ? 1.0 : 0.0;
  const double beta = soft_rule_beta(s);
  return std::clamp(sigmoid(beta * (x - a)) - sigmoid(beta * (x - b)), 0.0, 1.0);
}

namespace detail {

// Rule probabilities and class scores for one case.
struct SoftRuleForward {
  std::vector<double> rule_prob;
  std::vector<double> scores;
  // Source of each class score: a rule index, or kNoFire for the default
  // class's no-rule-fires term, or kNone when the score is zero.
  std::vector<std::size_t> source;
  double no_fire = 1;

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  static constexpr std::size_t kNoFire = static_cast<std::size_t>(-2);
};

inline SoftRuleForward soft_rule_forward(const IntervalRuleSet& rules, std::size_t num_classes,
                                         std::span<const double> x, std::span<const double> s) {
  SoftRuleForward f;
  f.rule_prob.resize(rules.rules.size());
  f.scores.assign(num_classes, 0.0);
  f.source.assign(num_classes, SoftRuleForward::kNone);
  for (std::size_t r = 0; r < rules.rules.size(); ++r) {
    double p = 1;
    for (const auto& c : rules.rules[r].conditions) {
      p *= analytic_condition_probability(c.a, c.b, x[c.feature], s[c.feature]);
    }
    f.rule_prob[r] = p;
    f.no_fire *= 1 - p;
    const std::size_t cls = rules.rules[r].class_index;
    if (p > f.scores[cls]) {
      f.scores[cls] = p;
      f.source[cls] = r;
    }
  }
  if (f.no_fire > f.scores[rules.default_class]) {
    f.scores[rules.default_class] = f.no_fire;
    f.source[rules.default_class] = SoftRuleForward::kNoFire;
  }
  return f;
}

}  // namespace detail

inline ClassProbabilities soft_rules_predict(const IntervalRuleSet& rules, const ModelInfo& info,
                                             std::span<const double> x, std::span<const double> dispersion) {
  require(x.size() == info.num_features() && dispersion.size() == info.num_features(), ErrorCode::kDimension,
          "case and dispersion vectors must match the rule set's features");
  const auto f = detail::soft_rule_forward(rules, info.num_classes(), x, dispersion);
  const double total = std::accumulate(f.scores.begin(), f.scores.end(), 0.0);
  if (!(total > 0)) return ClassProbabilities::one_hot(info.num_classes(), rules.default_class);
  std::vector<double> p = f.scores;
  for (double& v : p) v /= total;
  return ClassProbabilities(std::move(p));
}

inline ClassProbabilities soft_rules_predict(const IntervalRuleSet& rules, const ModelInfo& info,
                                             std::span<const double> x, const UncertaintyProfile& profile) {
  return soft_rules_predict(rules, info, x, dispersions(profile, info.features));
}

// Interval rules evaluated through soft trapezoids at fixed dispersions.
class SoftRuleClassifier final : public Classifier {
 public:
  SoftRuleClassifier(ModelInfo info, IntervalRuleSet rules, std::vector<double> dispersion)
      : Classifier(std::move(info)), rules_(std::move(rules)), dispersion_(std::move(dispersion)) {
    validate(rules_, this->info());
    require(dispersion_.size() == num_features(), ErrorCode::kValidation, "one dispersion per feature required");
    for (double s : dispersion_) require(s >= 0, ErrorCode::kValidation, "dispersions must be nonnegative");
  }

  ClassProbabilities predict(std::span<const double> x) const override {
    check_dimension(x);
    return soft_rules_predict(rules_, info(), x, dispersion_);
  }
  std::string_view kind() const override { return "soft_rules"; }
  Json params_to_json() const override {
    Json j = RuleClassifier(info(), rules_).params_to_json();
    j["dispersions"] = dispersion_;
    return j;
  }

  const IntervalRuleSet& rules() const { return rules_; }
  const std::vector<double>& dispersion() const { return dispersion_; }

 private:
  IntervalRuleSet rules_;
  std::vector<double> dispersion_;
};

// ---------------------------------------------------------------------------
// Error function and gradient.

// Tunable parameters flattened as [a, b of every condition in rule order...,
// rho].
inline std::vector<double> soft_rule_params(const IntervalRuleSet& rules, double rho) {
  std::vector<double> p;
  for (const auto& r : rules.rules)
    for (const auto& c : r.conditions) {
      p.push_back(c.a);
      p.push_back(c.b);
    }
  p.push_back(rho);
  return p;
}

inline void set_soft_rule_params(IntervalRuleSet& rules, double& rho, std::span<const double> p) {
  std::size_t at = 0;
  for (auto& r : rules.rules)
    for (auto& c : r.conditions) {
      c.a = p[at++];
      c.b = p[at++];
    }
  rho = p[at];
}

struct SoftRuleLoss {
  double loss = 0;
  std::vector<double> gradient;  // soft_rule_params order
};

// E and dE/dparams. Overrides and group dispersions are held fixed; only
// features governed by the global rho feel its gradient. Every feature used
// by a rule must have a positive dispersion.
inline SoftRuleLoss soft_rules_loss_and_gradient(const IntervalRuleSet& rules, const ModelInfo& info,
                                                 const Dataset& data, const UncertaintyProfile& profile) {
  validate(rules, info);
  const std::vector<double> s = dispersions(profile, info.features);
  std::vector<double> ds_drho(info.num_features(), 0.0);
  for (std::size_t i = 0; i < info.num_features(); ++i) {
    if (dispersion_source(profile, i, info.features) == DispersionSource::kGlobal) {
      ds_drho[i] = info.features[i].range();
    }
  }
  for (const auto& r : rules.rules)
    for (const auto& c : r.conditions) {
      require(s[c.feature] > 0, ErrorCode::kConfig,
              "soft rule gradients need positive dispersions (crisp limit is not differentiable)");
    }

  const std::size_t k = info.num_classes();
  const std::size_t n_rules = rules.rules.size();
  SoftRuleLoss out;
  out.gradient.assign(soft_rule_params(rules, profile.rho).size(), 0.0);
  double& grad_rho = out.gradient.back();

  std::vector<double> d_rule(n_rules);
  for (std::size_t idx = 0; idx < data.size(); ++idx) {
    std::span<const double> x = data.cases[idx];
    const std::size_t label = data.labels[idx];
    const auto f = detail::soft_rule_forward(rules, k, x, s);
    const double total = std::accumulate(f.scores.begin(), f.scores.end(), 0.0);
    if (!(total > 0)) {
      for (std::size_t c = 0; c < k; ++c) {
        const double d = (c == rules.default_class ? 1.0 : 0.0) - (c == label ? 1.0 : 0.0);
        out.loss += 0.5 * d * d;
      }
      continue;
    }
    std::vector<double> resid(k);
    double resid_dot_p = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double p = f.scores[c] / total;
      resid[c] = p - (c == label ? 1.0 : 0.0);
      out.loss += 0.5 * resid[c] * resid[c];
      resid_dot_p += resid[c] * p;
    }
    // dE/dO_c for the normalisation p = O / sum O.
    std::fill(d_rule.begin(), d_rule.end(), 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      const double d_score = (resid[c] - resid_dot_p) / total;
      if (f.source[c] == detail::SoftRuleForward::kNoFire) {
        for (std::size_t r = 0; r < n_rules; ++r) {
          double others = 1;
          for (std::size_t q = 0; q < n_rules; ++q)
            if (q != r) others *= 1 - f.rule_prob[q];
          d_rule[r] -= d_score * others;
        }
      } else if (f.source[c] != detail::SoftRuleForward::kNone) {
        d_rule[f.source[c]] += d_score;
      }
    }
    std::size_t at = 0;
    for (std::size_t r = 0; r < n_rules; ++r) {
      const auto& conds = rules.rules[r].conditions;
      std::vector<double> l(conds.size());
      for (std::size_t j = 0; j < conds.size(); ++j) {
        l[j] = analytic_condition_probability(conds[j].a, conds[j].b, x[conds[j].feature], s[conds[j].feature]);
      }
      for (std::size_t j = 0; j < conds.size(); ++j, at += 2) {
        if (d_rule[r] == 0) continue;
        double others = 1;
        for (std::size_t q = 0; q < conds.size(); ++q)
          if (q != j) others *= l[q];
        const double weight = d_rule[r] * others;
        const std::size_t fi = conds[j].feature;
        const double beta = soft_rule_beta(s[fi]);
        const double ua = beta * (x[fi] - conds[j].a);
        const double ub = beta * (x[fi] - conds[j].b);
        out.gradient[at] += weight * (-beta * sigmoid_slope(ua));
        out.gradient[at + 1] += weight * (beta * sigmoid_slope(ub));
        const double dl_dbeta = (x[fi] - conds[j].a) * sigmoid_slope(ua) - (x[fi] - conds[j].b) * sigmoid_slope(ub);
        grad_rho += weight * dl_dbeta * (-beta / s[fi]) * ds_drho[fi];
      }
    }
  }
  return out;
}

struct SoftRuleStep {
  std::size_t step = 0;
  double loss = 0;
  double best_loss = 0;
};

struct SoftRuleTuning {
  IntervalRuleSet rules;
  double rho = 0;
  std::vector<SoftRuleStep> log;
  double best_loss = 0;

  Json log_to_json() const {
    Json rows = Json::array();
    for (const auto& s : log) rows.push_back({{"step", s.step}, {"loss", s.loss}, {"best_loss", s.best_loss}});
    return rows;
  }
};

// Projected gradient descent with momentum on the interval endpoints and
// the global rho. Endpoint steps are preconditioned by the squared feature
// range so that both parameter families move in range units. Crossed
// endpoints are projected to their midpoint; rho stays above `min_rho`.
// cfg.epochs counts steps and the error transform is ignored (E is
// quadratic by definition).
inline SoftRuleTuning tune_soft_rules(const IntervalRuleSet& rules, const ModelInfo& info, const Dataset& train,
                                      const UncertaintyProfile& profile, const TrainConfig& cfg,
                                      double min_rho = 1e-4) {
  require(!train.empty(), ErrorCode::kValidation, "training set is empty");
  require(cfg.learning_rate > 0, ErrorCode::kConfig, "learning rate must be positive");
  require(cfg.epochs >= 1, ErrorCode::kConfig, "epochs must be at least 1");
  require(cfg.momentum >= 0 && cfg.momentum < 1, ErrorCode::kConfig, "momentum must lie in [0, 1)");
  require(train.info().class_names == info.class_names, ErrorCode::kClassMismatch,
          "training data and rules disagree on classes");

  std::vector<double> precondition;
  for (const auto& r : rules.rules)
    for (const auto& c : r.conditions) {
      const double range = std::max(info.features[c.feature].range(), 1e-12);
      precondition.push_back(range * range);
      precondition.push_back(range * range);
    }
  precondition.push_back(1.0);

  UncertaintyProfile current = profile;
  IntervalRuleSet working = rules;
  std::vector<double> params = soft_rule_params(working, current.rho);
  std::vector<double> velocity(params.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(train.size());

  SoftRuleLoss eval = soft_rules_loss_and_gradient(working, info, train, current);
  SoftRuleTuning out{working, current.rho, {}, eval.loss};
  out.log.push_back({0, eval.loss, eval.loss});

  for (std::size_t step = 1; step <= cfg.epochs; ++step) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * precondition[i] * eval.gradient[i] * inv_n;
      params[i] += velocity[i];
    }
    for (std::size_t i = 0; i + 1 < params.size(); i += 2) {
      if (params[i] > params[i + 1]) {
        params[i] = params[i + 1] = 0.5 * (params[i] + params[i + 1]);
        velocity[i] = velocity[i + 1] = 0;
      }
    }
    if (params.back() < min_rho) {
      params.back() = min_rho;
      velocity.back() = 0;
    }
    set_soft_rule_params(working, current.rho, params);
    eval = soft_rules_loss_and_gradient(working, info, train, current);
    require(std::isfinite(eval.loss), ErrorCode::kDivergence,
            "soft rule tuning diverged at step " + std::to_string(step));
    if (eval.loss < out.best_loss) {
      out.best_loss = eval.loss;
      out.rules = working;
      out.rho = current.rho;
    }
    out.log.push_back({step, eval.loss, out.best_loss});
  }
  return out;
}

}  // namespace elim

#endif  // ELIM_SOFT_RULES_HPP_
