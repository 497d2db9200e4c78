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

// Gaussian class-conditional mixtures with a shared covariance: sampling,
// exact Bayes posteriors and the equivalent two-class logistic form.

#ifndef ELIM_MIXTURE_HPP_
#define ELIM_MIXTURE_HPP_

#include <Eigen/Dense>

#include "elim/core.hpp"
#include "elim/dataset.hpp"
#include "elim/detail/random.hpp"

namespace elim {

struct GaussianMixtureSpec {
  std::vector<FeatureVector> means;            // one per class
  std::vector<std::vector<double>> covariance;  // shared, N x N
  std::vector<double> priors;
  std::uint64_t seed = 0;
  std::vector<std::string> class_names;  // optional; defaults to C1..CK
  std::vector<std::string> feature_names;  // optional; defaults to x1..xN

  std::size_t num_classes() const { return means.size(); }
  std::size_t dimension() const { return means.empty() ? 0 : means.front().size(); }
};

// A validated mixture with its Cholesky factor cached.
class GaussianMixture {
 public:
  explicit GaussianMixture(GaussianMixtureSpec spec) : spec_(std::move(spec)) {
    const std::size_t k = spec_.num_classes();
    const std::size_t n = spec_.dimension();
    require(k >= 2, ErrorCode::kValidation, "mixture needs at least 2 classes");
    require(n >= 1, ErrorCode::kValidation, "mixture needs at least 1 dimension");
    require(spec_.priors.size() == k, ErrorCode::kValidation, "one prior per class required");
    double total = 0;
    for (double p : spec_.priors) {
      require(p >= 0, ErrorCode::kValidation, "priors must be nonnegative");
      total += p;
    }
    require(std::abs(total - 1.0) <= 1e-12, ErrorCode::kValidation, "priors must sum to 1");
    for (const auto& m : spec_.means) {
      require(m.size() == n, ErrorCode::kValidation, "all means must share one dimension");
    }
    require(spec_.covariance.size() == n, ErrorCode::kValidation, "covariance must be N x N");
    covariance_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      require(spec_.covariance[i].size() == n, ErrorCode::kValidation, "covariance must be N x N");
      for (std::size_t j = 0; j < n; ++j) {
        covariance_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = spec_.covariance[i][j];
      }
    }
    require(covariance_.isApprox(covariance_.transpose(), 1e-12), ErrorCode::kValidation,
            "covariance must be symmetric");
    llt_.compute(covariance_);
    require(llt_.info() == Eigen::Success, ErrorCode::kValidation,
            "covariance is not positive definite");
    if (spec_.class_names.empty()) {
      for (std::size_t c = 0; c < k; ++c) spec_.class_names.push_back("C" + std::to_string(c + 1));
    }
    if (spec_.feature_names.empty()) {
      for (std::size_t j = 0; j < n; ++j) spec_.feature_names.push_back("x" + std::to_string(j + 1));
    }
    require(spec_.class_names.size() == k && spec_.feature_names.size() == n,
            ErrorCode::kValidation, "name lists do not match the mixture shape");
  }

  const GaussianMixtureSpec& spec() const { return spec_; }
  std::size_t num_classes() const { return spec_.num_classes(); }
  std::size_t dimension() const { return spec_.dimension(); }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::LLT<Eigen::MatrixXd>& cholesky() const { return llt_; }

  Eigen::VectorXd mean(std::size_t c) const {
    return Eigen::Map<const Eigen::VectorXd>(spec_.means[c].data(),
                                             static_cast<Eigen::Index>(dimension()));
  }

  // ln p(x|C_c) up to the constant shared by every class.
  double log_density(std::size_t c, std::span<const double> x) const {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::VectorXd d = xv - mean(c);
    return -0.5 * d.dot(llt_.solve(d));
  }

 private:
  GaussianMixtureSpec spec_;
  Eigen::MatrixXd covariance_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Exact posterior: class density times prior, normalized in log space.
inline ClassProbabilities bayes_posterior(const GaussianMixture& mix, std::span<const double> x) {
  require(x.size() == mix.dimension(), ErrorCode::kDimension,
          "expected " + std::to_string(mix.dimension()) + " features, got " + std::to_string(x.size()));
  const std::size_t k = mix.num_classes();
  std::vector<double> log_joint(k, -std::numeric_limits<double>::infinity());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double prior = mix.spec().priors[c];
    if (prior <= 0) continue;
    log_joint[c] = mix.log_density(c, x) + std::log(prior);
    peak = std::max(peak, log_joint[c]);
  }
  std::vector<double> p(k, 0.0);
  double total = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (std::isinf(log_joint[c])) continue;
    p[c] = std::exp(log_joint[c] - peak);
    total += p[c];
  }
  for (double& v : p) v /= total;
  return ClassProbabilities(std::move(p));
}

// Weights and threshold of the two-class logistic posterior
// p(C1|x) = sigmoid(w.x - theta), derived from the log density ratio.
struct LogisticParameters {
  FeatureVector w;
  double theta = 0;
};

inline LogisticParameters logistic_parameters(const GaussianMixture& mix) {
  require(mix.num_classes() == 2, ErrorCode::kValidation, "logistic form needs exactly 2 classes");
  const Eigen::VectorXd m1 = mix.mean(0);
  const Eigen::VectorXd m2 = mix.mean(1);
  const Eigen::VectorXd s1 = mix.cholesky().solve(m1);
  const Eigen::VectorXd s2 = mix.cholesky().solve(m2);
  const Eigen::VectorXd w = s1 - s2;
  const double p1 = mix.spec().priors[0];
  const double p2 = mix.spec().priors[1];
  require(p1 > 0 && p2 > 0, ErrorCode::kValidation, "logistic form needs nonzero priors");
  LogisticParameters out;
  out.w.assign(w.data(), w.data() + w.size());
  out.theta = 0.5 * (m1.dot(s1) - m2.dot(s2)) - std::log(p1 / p2);
  return out;
}

inline ModelInfo mixture_info(const GaussianMixture& mix) {
  ModelInfo info;
  info.class_names = mix.spec().class_names;
  for (const auto& name : mix.spec().feature_names) {
    info.features.push_back({name, FeatureKind::kContinuous, 0.0, 0.0, {}});
  }
  return info;
}

// Draws n labelled cases; class from the priors, features from the class
// Gaussian. Feature ranges are taken from the sample.
inline Dataset sample_mixture(const GaussianMixture& mix, std::size_t n) {
  require(n >= 1, ErrorCode::kConfig, "sample size must be at least 1");
  detail::Rng rng(mix.spec().seed);
  std::discrete_distribution<std::size_t> pick(mix.spec().priors.begin(), mix.spec().priors.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::MatrixXd lower = mix.cholesky().matrixL();
  const auto dim = static_cast<Eigen::Index>(mix.dimension());

  const ModelInfo info = mixture_info(mix);
  Dataset d{"mixture", info.class_names, info.features, {}, {}};
  d.cases.reserve(n);
  d.labels.reserve(n);
  Eigen::VectorXd z(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = pick(rng);
    for (Eigen::Index j = 0; j < dim; ++j) z(j) = normal(rng);
    const Eigen::VectorXd x = mix.mean(c) + lower * z;
    d.cases.emplace_back(x.data(), x.data() + dim);
    d.labels.push_back(c);
  }
  compute_ranges(d);
  return d;
}

// The Bayes-optimal classifier of a known mixture.
class BayesClassifier final : public Classifier {
 public:
  BayesClassifier(ModelInfo info, GaussianMixture mixture)
      : Classifier(std::move(info)), mixture_(std::move(mixture)) {
    require(num_classes() == mixture_.num_classes() && num_features() == mixture_.dimension(),
            ErrorCode::kValidation, "model info does not match the mixture");
  }

  ClassProbabilities predict(std::span<const double> x) const override {
    check_dimension(x);
    return bayes_posterior(mixture_, x);
  }
  std::string_view kind() const override { return "bayes"; }
  Json params_to_json() const override;

  const GaussianMixture& mixture() const { return mixture_; }

 private:
  GaussianMixture mixture_;
};

inline Json to_json(const GaussianMixtureSpec& s) {
  return {{"means", s.means},         {"covariance", s.covariance},
          {"priors", s.priors},       {"seed", s.seed},
          {"class_names", s.class_names}, {"feature_names", s.feature_names}};
}

inline GaussianMixtureSpec mixture_spec_from_json(const Json& j) {
  try {
    GaussianMixtureSpec s;
    s.means = j.at("means").get<std::vector<FeatureVector>>();
    s.covariance = j.at("covariance").get<std::vector<std::vector<double>>>();
    s.priors = j.at("priors").get<std::vector<double>>();
    s.seed = j.value("seed", std::uint64_t{0});
    s.class_names = j.value("class_names", std::vector<std::string>{});
    s.feature_names = j.value("feature_names", std::vector<std::string>{});
    return s;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed mixture spec: ") + e.what());
  }
}

inline Json BayesClassifier::params_to_json() const { return {{"mixture", to_json(mixture_.spec())}}; }

}  // namespace elim

#endif  // ELIM_MIXTURE_HPP_
