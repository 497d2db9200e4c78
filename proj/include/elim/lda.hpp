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

// Two-class linear discriminant with a soft logistic output instead of a
// sharp border. Only the slope is adjusted after the closed-form fit.

#ifndef ELIM_LDA_HPP_
#define ELIM_LDA_HPP_

#include <array>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "elim/core.hpp"
#include "elim/dataset.hpp"
#include "elim/mixture.hpp"

namespace elim {

// p(C1|x) = sigmoid(slope * (w.x - theta)); class 0 is C1.
class LinearLogisticModel final : public Classifier {
 public:
  LinearLogisticModel(ModelInfo info, FeatureVector w, double theta, double slope)
      : Classifier(std::move(info)), w_(std::move(w)), theta_(theta), slope_(slope) {
    require(num_classes() == 2, ErrorCode::kValidation, "logistic model needs exactly 2 classes");
    require(w_.size() == num_features(), ErrorCode::kValidation, "weight vector has the wrong length");
    require(slope_ > 0 && std::isfinite(slope_), ErrorCode::kConfig, "slope must be positive");
  }

  // Discriminant value w.x - theta.
  double discriminant(std::span<const double> x) const {
    double y = -theta_;
    for (std::size_t i = 0; i < w_.size(); ++i) y += w_[i] * x[i];
    return y;
  }

  ClassProbabilities predict(std::span<const double> x) const override {
    check_dimension(x);
    const double u = slope_ * discriminant(x);
    // Both terms evaluated directly so neither saturates to an exact 1 early.
    return ClassProbabilities({sigmoid(u), sigmoid(-u)});
  }

  std::string_view kind() const override { return "lda"; }
  Json params_to_json() const override { return {{"w", w_}, {"theta", theta_}, {"slope", slope_}}; }

  const FeatureVector& w() const { return w_; }
  double theta() const { return theta_; }
  double slope() const { return slope_; }
  LinearLogisticModel with_slope(double slope) const { return {info(), w_, theta_, slope}; }

 private:
  FeatureVector w_;
  double theta_;
  double slope_;
};

// Logistic model carrying the true parameters of a two-class mixture.
inline LinearLogisticModel logistic_from_mixture(const GaussianMixture& mix, ModelInfo info) {
  const LogisticParameters p = logistic_parameters(mix);
  return {std::move(info), p.w, p.theta, 1.0};
}

// Pooled-covariance fit. `ridge` is added to the covariance diagonal.
inline LinearLogisticModel train_lda(const Dataset& train, double slope = 1.0, double ridge = 0.0) {
  require(train.num_classes() == 2, ErrorCode::kValidation, "LDA needs exactly 2 classes");
  const auto counts = train.class_counts();
  require(counts[0] >= 1 && counts[1] >= 1, ErrorCode::kValidation, "LDA needs cases of both classes");
  require(train.size() > 2, ErrorCode::kValidation, "LDA needs more than 2 cases");
  const auto n = static_cast<Eigen::Index>(train.num_features());

  std::array<Eigen::VectorXd, 2> mean{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  for (std::size_t i = 0; i < train.size(); ++i) {
    mean[train.labels[i]] += Eigen::Map<const Eigen::VectorXd>(train.cases[i].data(), n);
  }
  for (int c = 0; c < 2; ++c) mean[c] /= static_cast<double>(counts[c]);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const Eigen::VectorXd d =
        Eigen::Map<const Eigen::VectorXd>(train.cases[i].data(), n) - mean[train.labels[i]];
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(train.size() - 2);
  cov.diagonal().array() += ridge;

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const double scale = std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
  bool singular = llt.info() != Eigen::Success;
  if (!singular) {
    const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
    singular = diag.minCoeff() <= 1e-12 * std::sqrt(scale);
  }
  require(!singular, ErrorCode::kDegenerate,
          "pooled covariance is singular; retry with a ridge term (e.g. ridge = 1e-6)");

  const Eigen::VectorXd s1 = llt.solve(mean[0]);
  const Eigen::VectorXd s2 = llt.solve(mean[1]);
  const Eigen::VectorXd w = s1 - s2;
  const double prior_ratio = static_cast<double>(counts[0]) / static_cast<double>(counts[1]);
  const double theta = 0.5 * (mean[0].dot(s1) - mean[1].dot(s2)) - std::log(prior_ratio);
  return {train.info(), FeatureVector(w.data(), w.data() + n), theta, slope};
}

// Quadratic error of the logistic output over a dataset.
inline double logistic_quadratic_error(const LinearLogisticModel& m, const Dataset& data) {
  double e = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = m.predict(data.cases[i]);
    for (std::size_t c = 0; c < 2; ++c) {
      const double t = data.labels[i] == c ? 1.0 : 0.0;
      e += (p[c] - t) * (p[c] - t);
    }
  }
  return 0.5 * e;
}

// Brent search over log(slope) in [log(lo), log(hi)].
inline LinearLogisticModel tune_lda_slope(const LinearLogisticModel& m, const Dataset& data,
                                          double lo = 1e-3, double hi = 1e3) {
  require(lo > 0 && lo < hi, ErrorCode::kConfig, "invalid slope search range");
  auto objective = [&](double log_slope) {
    return logistic_quadratic_error(m.with_slope(std::exp(log_slope)), data);
  };
  const auto best = boost::math::tools::brent_find_minima(objective, std::log(lo), std::log(hi), 40);
  return m.with_slope(std::exp(best.first));
}

}  // namespace elim

#endif  // ELIM_LDA_HPP_
