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

// Single hidden layer perceptron with logistic hidden units and a softmax
// output, trained by mini-batch gradient descent with momentum on
//
//   E = mean_X sum_i w_i(X) H(p(C_i|X) - delta(C_i, C(X))) + l2/2 |W|^2
//
// where H is quadratic or cross-entropy and w_i(X) comes from an optional
// risk matrix (w = 1 for the true class, R(i, C(X)) otherwise; R = 1 - delta
// reproduces the plain cost). Joint-class training reuses the same machinery
// on relabelled data, one output per group.

#ifndef ELIM_MLP_HPP_
#define ELIM_MLP_HPP_

#include <optional>

#include <Eigen/Dense>

#include "elim/core.hpp"
#include "elim/dataset.hpp"
#include "elim/detail/random.hpp"
#include "elim/grouping.hpp"

namespace elim {

enum class ErrorTransform { kQuadratic, kCrossEntropy };

inline std::string_view error_transform_name(ErrorTransform e) {
  return e == ErrorTransform::kQuadratic ? "quadratic" : "cross-entropy";
}
inline ErrorTransform parse_error_transform(std::string_view s) {
  if (s == "quadratic") return ErrorTransform::kQuadratic;
  if (s == "cross-entropy" || s == "entropy") return ErrorTransform::kCrossEntropy;
  throw Error(ErrorCode::kConfig, "unknown error transform '" + std::string(s) + "'");
}

using RiskMatrix = std::vector<std::vector<double>>;

struct TrainConfig {
  ErrorTransform error = ErrorTransform::kQuadratic;
  double learning_rate = 0.1;
  double momentum = 0.9;
  double l2 = 0.0;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  // Early stopping on a held-out part of the training data; both must be
  // set to enable it.
  std::size_t patience = 0;
  double validation_fraction = 0.0;
  std::uint64_t seed = 0;
  std::optional<RiskMatrix> risk;

  void validate(std::size_t num_outputs) const {
    require(learning_rate > 0 && std::isfinite(learning_rate), ErrorCode::kConfig,
            "learning rate must be positive");
    require(momentum >= 0 && momentum < 1, ErrorCode::kConfig, "momentum must lie in [0, 1)");
    require(l2 >= 0, ErrorCode::kConfig, "L2 coefficient must be nonnegative");
    require(epochs >= 1, ErrorCode::kConfig, "epochs must be at least 1");
    require(batch_size >= 1, ErrorCode::kConfig, "batch size must be at least 1");
    require(validation_fraction >= 0 && validation_fraction < 1, ErrorCode::kConfig,
            "validation fraction must lie in [0, 1)");
    if (risk) {
      require(risk->size() == num_outputs, ErrorCode::kConfig, "risk matrix must be K x K");
      for (std::size_t i = 0; i < num_outputs; ++i) {
        require((*risk)[i].size() == num_outputs, ErrorCode::kConfig, "risk matrix must be K x K");
        require((*risk)[i][i] == 0, ErrorCode::kConfig, "risk matrix diagonal must be zero");
        for (double r : (*risk)[i]) require(r >= 0, ErrorCode::kConfig, "risk entries must be nonnegative");
      }
    }
  }
};

inline Json to_json(const TrainConfig& c) {
  Json j = {{"error", error_transform_name(c.error)},
            {"learning_rate", c.learning_rate},
            {"momentum", c.momentum},
            {"l2", c.l2},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"patience", c.patience},
            {"validation_fraction", c.validation_fraction},
            {"seed", c.seed}};
  if (c.risk) j["risk"] = *c.risk;
  return j;
}

// Missing keys keep their defaults.
inline TrainConfig train_config_from_json(const Json& j, TrainConfig c = {}) {
  try {
    if (j.contains("error")) c.error = parse_error_transform(j.at("error").get<std::string>());
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.momentum = j.value("momentum", c.momentum);
    c.l2 = j.value("l2", c.l2);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.patience = j.value("patience", c.patience);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    c.seed = j.value("seed", c.seed);
    if (j.contains("risk")) c.risk = j.at("risk").get<RiskMatrix>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed training config: ") + e.what());
  }
  return c;
}

// Present on models trained against merged classes.
struct JointInfo {
  ClassGrouping grouping;
  std::vector<std::string> original_class_names;

  friend bool operator==(const JointInfo&, const JointInfo&) = default;
};

class MlpModel final : public Classifier {
 public:
  // Randomly initialised network; inputs are standardised with the given
  // offset and scale before the first layer.
  MlpModel(ModelInfo info, std::size_t hidden, Eigen::VectorXd offset, Eigen::VectorXd scale,
           detail::Rng& rng)
      : Classifier(std::move(info)), offset_(std::move(offset)), scale_(std::move(scale)) {
    require(hidden >= 1, ErrorCode::kConfig, "hidden layer needs at least 1 unit");
    const auto n = static_cast<Eigen::Index>(num_features());
    const auto h = static_cast<Eigen::Index>(hidden);
    const auto k = static_cast<Eigen::Index>(num_classes());
    require(offset_.size() == n && scale_.size() == n, ErrorCode::kValidation,
            "standardisation vectors have the wrong length");
    w1_.resize(h, n);
    w2_.resize(k, h);
    b1_ = Eigen::VectorXd::Zero(h);
    b2_ = Eigen::VectorXd::Zero(k);
    std::uniform_real_distribution<double> u1(-1.0 / std::sqrt(double(std::max<Eigen::Index>(n, 1))),
                                              1.0 / std::sqrt(double(std::max<Eigen::Index>(n, 1))));
    for (Eigen::Index i = 0; i < h; ++i)
      for (Eigen::Index j = 0; j < n; ++j) w1_(i, j) = u1(rng);
    std::uniform_real_distribution<double> u2(-1.0 / std::sqrt(double(h)), 1.0 / std::sqrt(double(h)));
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < h; ++j) w2_(i, j) = u2(rng);
  }

  MlpModel(ModelInfo info, Eigen::VectorXd offset, Eigen::VectorXd scale, Eigen::MatrixXd w1,
           Eigen::VectorXd b1, Eigen::MatrixXd w2, Eigen::VectorXd b2)
      : Classifier(std::move(info)),
        offset_(std::move(offset)),
        scale_(std::move(scale)),
        w1_(std::move(w1)),
        b1_(std::move(b1)),
        w2_(std::move(w2)),
        b2_(std::move(b2)) {
    const auto n = static_cast<Eigen::Index>(num_features());
    const auto k = static_cast<Eigen::Index>(num_classes());
    require(w1_.cols() == n && w1_.rows() >= 1 && b1_.size() == w1_.rows() && w2_.rows() == k &&
                w2_.cols() == w1_.rows() && b2_.size() == k && offset_.size() == n && scale_.size() == n,
            ErrorCode::kValidation, "inconsistent MLP parameter shapes");
    require(all_finite(), ErrorCode::kValidation, "MLP parameters must be finite");
  }

  // Output-layer pre-activations.
  Eigen::VectorXd logits(std::span<const double> x) const {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::VectorXd z = (xv - offset_).cwiseProduct(scale_);
    const Eigen::VectorXd h = (w1_ * z + b1_).unaryExpr([](double u) { return sigmoid(u); });
    return w2_ * h + b2_;
  }

  ClassProbabilities predict(std::span<const double> x) const override {
    check_dimension(x);
    return ClassProbabilities(softmax(logits(x)));
  }

  static std::vector<double> softmax(const Eigen::VectorXd& o) {
    const double peak = o.maxCoeff();
    std::vector<double> p(static_cast<std::size_t>(o.size()));
    double total = 0;
    for (Eigen::Index i = 0; i < o.size(); ++i) {
      p[static_cast<std::size_t>(i)] = std::exp(o(i) - peak);
      total += p[static_cast<std::size_t>(i)];
    }
    for (double& v : p) v /= total;
    return p;
  }

  std::string_view kind() const override { return "mlp"; }

  Json params_to_json() const override {
    auto rows = [](const Eigen::MatrixXd& m) {
      std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(m(i, j));
      return out;
    };
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    Json j = {{"hidden", hidden()},       {"input_offset", vec(offset_)},
              {"input_scale", vec(scale_)}, {"w1", rows(w1_)},
              {"b1", vec(b1_)},           {"w2", rows(w2_)},
              {"b2", vec(b2_)}};
    if (joint_) {
      j["joint"] = {{"grouping", joint_->grouping.to_json()},
                    {"original_class_names", joint_->original_class_names}};
    }
    return j;
  }

  std::size_t hidden() const { return static_cast<std::size_t>(w1_.rows()); }
  std::size_t num_params() const {
    return static_cast<std::size_t>(w1_.size() + b1_.size() + w2_.size() + b2_.size());
  }

  // Flattened parameters: W1 (row-major), b1, W2 (row-major), b2.
  std::vector<double> params() const {
    std::vector<double> out;
    out.reserve(num_params());
    for (Eigen::Index i = 0; i < w1_.rows(); ++i)
      for (Eigen::Index j = 0; j < w1_.cols(); ++j) out.push_back(w1_(i, j));
    for (Eigen::Index i = 0; i < b1_.size(); ++i) out.push_back(b1_(i));
    for (Eigen::Index i = 0; i < w2_.rows(); ++i)
      for (Eigen::Index j = 0; j < w2_.cols(); ++j) out.push_back(w2_(i, j));
    for (Eigen::Index i = 0; i < b2_.size(); ++i) out.push_back(b2_(i));
    return out;
  }

  void set_params(std::span<const double> p) {
    require(p.size() == num_params(), ErrorCode::kDimension, "parameter vector has the wrong length");
    std::size_t at = 0;
    for (Eigen::Index i = 0; i < w1_.rows(); ++i)
      for (Eigen::Index j = 0; j < w1_.cols(); ++j) w1_(i, j) = p[at++];
    for (Eigen::Index i = 0; i < b1_.size(); ++i) b1_(i) = p[at++];
    for (Eigen::Index i = 0; i < w2_.rows(); ++i)
      for (Eigen::Index j = 0; j < w2_.cols(); ++j) w2_(i, j) = p[at++];
    for (Eigen::Index i = 0; i < b2_.size(); ++i) b2_(i) = p[at++];
  }

  bool all_finite() const {
    return w1_.allFinite() && b1_.allFinite() && w2_.allFinite() && b2_.allFinite();
  }

  const Eigen::VectorXd& input_offset() const { return offset_; }
  const Eigen::VectorXd& input_scale() const { return scale_; }
  const Eigen::MatrixXd& w1() const { return w1_; }
  const Eigen::VectorXd& b1() const { return b1_; }
  const Eigen::MatrixXd& w2() const { return w2_; }
  const Eigen::VectorXd& b2() const { return b2_; }
  Eigen::VectorXd& mutable_b2() { return b2_; }

  const std::optional<JointInfo>& joint() const { return joint_; }
  void set_joint(JointInfo joint) {
    require(joint.grouping.num_groups() == num_classes(), ErrorCode::kValidation,
            "grouping does not match the output layer");
    joint_ = std::move(joint);
  }

 private:
  Eigen::VectorXd offset_, scale_;
  Eigen::MatrixXd w1_;
  Eigen::VectorXd b1_;
  Eigen::MatrixXd w2_;
  Eigen::VectorXd b2_;
  std::optional<JointInfo> joint_;
};

namespace detail {

struct MlpGradients {
  Eigen::MatrixXd w1, w2;
  Eigen::VectorXd b1, b2;

  explicit MlpGradients(const MlpModel& m)
      : w1(Eigen::MatrixXd::Zero(m.w1().rows(), m.w1().cols())),
        w2(Eigen::MatrixXd::Zero(m.w2().rows(), m.w2().cols())),
        b1(Eigen::VectorXd::Zero(m.b1().size())),
        b2(Eigen::VectorXd::Zero(m.b2().size())) {}

  std::vector<double> flatten() const {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < w1.rows(); ++i)
      for (Eigen::Index j = 0; j < w1.cols(); ++j) out.push_back(w1(i, j));
    for (Eigen::Index i = 0; i < b1.size(); ++i) out.push_back(b1(i));
    for (Eigen::Index i = 0; i < w2.rows(); ++i)
      for (Eigen::Index j = 0; j < w2.cols(); ++j) out.push_back(w2(i, j));
    for (Eigen::Index i = 0; i < b2.size(); ++i) out.push_back(b2(i));
    return out;
  }
};

inline constexpr double kProbFloor = 1e-15;

// Loss of one case (without regularisation) and dLoss/dp per output.
inline double case_loss(std::span<const double> p, std::size_t label, const TrainConfig& cfg,
                        std::vector<double>* grad_p) {
  double loss = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double weight = i == label ? 1.0 : (cfg.risk ? (*cfg.risk)[i][label] : 1.0);
    double h = 0, dh = 0;
    if (cfg.error == ErrorTransform::kQuadratic) {
      const double d = p[i] - (i == label ? 1.0 : 0.0);
      h = d * d;
      dh = 2 * d;
    } else if (i == label) {
      const double q = std::max(p[i], kProbFloor);
      h = -std::log(q);
      dh = -1.0 / q;
    } else {
      // 1 - p_i summed from the other outputs keeps precision near p_i = 1.
      double rest = 0;
      for (std::size_t j = 0; j < p.size(); ++j)
        if (j != i) rest += p[j];
      rest = std::max(rest, kProbFloor);
      h = -std::log(rest);
      dh = 1.0 / rest;
    }
    loss += weight * h;
    if (grad_p) (*grad_p)[i] = weight * dh;
  }
  return loss;
}

// Mean loss over `indices` plus the L2 term; accumulates gradients when
// `grads` is non-null.
inline double batch_objective(const MlpModel& m, const Dataset& data, std::span<const std::size_t> indices,
                              const TrainConfig& cfg, MlpGradients* grads) {
  const auto n = static_cast<Eigen::Index>(m.num_features());
  const std::size_t k = m.num_classes();
  const double inv = 1.0 / static_cast<double>(indices.size());
  double total = 0;
  std::vector<double> gp(k);
  Eigen::VectorXd delta_o(static_cast<Eigen::Index>(k));
  for (std::size_t idx : indices) {
    Eigen::Map<const Eigen::VectorXd> xv(data.cases[idx].data(), n);
    const Eigen::VectorXd z = (xv - m.input_offset()).cwiseProduct(m.input_scale());
    const Eigen::VectorXd h = (m.w1() * z + m.b1()).unaryExpr([](double u) { return sigmoid(u); });
    const std::vector<double> p = MlpModel::softmax(m.w2() * h + m.b2());
    total += case_loss(p, data.labels[idx], cfg, grads ? &gp : nullptr);
    if (!grads) continue;
    double gdotp = 0;
    for (std::size_t i = 0; i < k; ++i) gdotp += gp[i] * p[i];
    for (std::size_t i = 0; i < k; ++i) delta_o(static_cast<Eigen::Index>(i)) = p[i] * (gp[i] - gdotp) * inv;
    const Eigen::VectorXd delta_h =
        (m.w2().transpose() * delta_o).cwiseProduct(h.cwiseProduct((1.0 - h.array()).matrix()));
    grads->w2.noalias() += delta_o * h.transpose();
    grads->b2 += delta_o;
    grads->w1.noalias() += delta_h * z.transpose();
    grads->b1 += delta_h;
  }
  double loss = total * inv;
  if (cfg.l2 > 0) {
    loss += 0.5 * cfg.l2 * (m.w1().squaredNorm() + m.w2().squaredNorm());
    if (grads) {
      grads->w1 += cfg.l2 * m.w1();
      grads->w2 += cfg.l2 * m.w2();
    }
  }
  return loss;
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace detail

struct LossGradient {
  double loss = 0;
  std::vector<double> gradient;  // in MlpModel::params() order
};

// Full-batch objective and its analytic gradient.
inline LossGradient mlp_loss_and_gradient(const MlpModel& m, const Dataset& data, const TrainConfig& cfg) {
  require(!data.empty(), ErrorCode::kValidation, "empty dataset");
  detail::MlpGradients g(m);
  const auto idx = detail::all_indices(data.size());
  const double loss = detail::batch_objective(m, data, idx, cfg, &g);
  return {loss, g.flatten()};
}

inline double mlp_loss(const MlpModel& m, const Dataset& data, const TrainConfig& cfg) {
  const auto idx = detail::all_indices(data.size());
  return detail::batch_objective(m, data, idx, cfg, nullptr);
}

inline double accuracy(const Classifier& m, const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (m.predict(data.cases[i]).argmax() == data.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0;
  double train_accuracy = 0;
  std::optional<double> validation_loss;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;

  Json to_json() const {
    Json rows = Json::array();
    for (const auto& e : epochs) {
      Json r = {{"epoch", e.epoch}, {"loss", e.loss}, {"train_accuracy", e.train_accuracy}};
      if (e.validation_loss) r["validation_loss"] = *e.validation_loss;
      rows.push_back(r);
    }
    return {{"epochs", rows}, {"best_epoch", best_epoch}};
  }
};

struct TrainedMlp {
  MlpModel model;
  TrainingLog log;
};

// Standardisation parameters: per-feature mean and inverse std (1 for
// constant features).
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> standardisation(const Dataset& d) {
  const auto n = static_cast<Eigen::Index>(d.num_features());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(n);
  for (const auto& c : d.cases) mean += Eigen::Map<const Eigen::VectorXd>(c.data(), n);
  mean /= static_cast<double>(d.size());
  for (const auto& c : d.cases) {
    sq += (Eigen::Map<const Eigen::VectorXd>(c.data(), n) - mean).cwiseAbs2();
  }
  Eigen::VectorXd scale(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double sd = std::sqrt(sq(j) / static_cast<double>(d.size()));
    scale(j) = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  return {mean, scale};
}

inline TrainedMlp train_mlp(const Dataset& train, std::size_t hidden, const TrainConfig& cfg) {
  cfg.validate(train.num_classes());
  require(!train.empty(), ErrorCode::kValidation, "training set is empty");
  require(hidden >= 1, ErrorCode::kConfig, "hidden layer needs at least 1 unit");

  detail::Rng rng(cfg.seed);
  auto [offset, scale] = standardisation(train);
  MlpModel model(train.info(), hidden, offset, scale, rng);

  std::vector<std::size_t> fit_idx = detail::all_indices(train.size());
  std::vector<std::size_t> val_idx;
  const bool early_stopping = cfg.patience > 0 && cfg.validation_fraction > 0;
  if (early_stopping) {
    detail::Rng split_rng(detail::derive_seed(cfg.seed, 1));
    std::shuffle(fit_idx.begin(), fit_idx.end(), split_rng);
    const auto n_val = static_cast<std::size_t>(
        std::llround(cfg.validation_fraction * static_cast<double>(train.size())));
    require(n_val >= 1 && n_val < train.size(), ErrorCode::kConfig,
            "validation fraction leaves an empty part");
    val_idx.assign(fit_idx.begin(), fit_idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    fit_idx.erase(fit_idx.begin(), fit_idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(fit_idx.begin(), fit_idx.end());
  }

  std::vector<double> params = model.params();
  std::vector<double> velocity(params.size(), 0.0);
  std::vector<double> best_params = params;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  TrainingLog log;
  std::vector<std::size_t> order = fit_idx;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      detail::MlpGradients g(model);
      detail::batch_objective(model, train, std::span(order).subspan(start, end - start), cfg, &g);
      const std::vector<double> grad = g.flatten();
      for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * grad[i];
        params[i] += velocity[i];
      }
      model.set_params(params);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = detail::batch_objective(model, train, fit_idx, cfg, nullptr);
    if (!std::isfinite(rec.loss) || !model.all_finite()) {
      throw Error(ErrorCode::kDivergence, "training diverged at epoch " + std::to_string(epoch));
    }
    std::size_t hits = 0;
    for (std::size_t i : fit_idx) hits += model.predict(train.cases[i]).argmax() == train.labels[i];
    rec.train_accuracy = static_cast<double>(hits) / static_cast<double>(fit_idx.size());
    if (early_stopping) {
      rec.validation_loss = detail::batch_objective(model, train, val_idx, cfg, nullptr);
      if (*rec.validation_loss < best_val) {
        best_val = *rec.validation_loss;
        best_params = params;
        log.best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
      }
    } else {
      log.best_epoch = epoch;
    }
    log.epochs.push_back(rec);
    if (early_stopping && since_best >= cfg.patience) break;
  }
  if (early_stopping) model.set_params(best_params);
  return {std::move(model), std::move(log)};
}

// Relabels a dataset onto the groups of `grouping`.
inline Dataset group_dataset(const Dataset& d, const ClassGrouping& grouping) {
  require(grouping.num_classes() == d.num_classes(), ErrorCode::kValidation,
          "grouping does not partition the dataset's classes");
  Dataset out = d;
  out.class_names = grouping.names();
  for (auto& label : out.labels) label = grouping.group_of(label);
  return out;
}

// Trains one output per group; a case contributes target 1 to the group
// containing its class.
inline TrainedMlp train_joint(const Dataset& train, const ClassGrouping& grouping, std::size_t hidden,
                              const TrainConfig& cfg) {
  TrainedMlp out = train_mlp(group_dataset(train, grouping), hidden, cfg);
  out.model.set_joint({grouping, train.class_names});
  return out;
}

}  // namespace elim

#endif  // ELIM_MLP_HPP_
