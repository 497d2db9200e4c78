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

// Versioned JSON documents for every classifier kind:
//
//   {"format_version": 1, "kind": "mlp", "class_names": [...],
//    "features": [...], "params": {...}}
//
// Doubles are written in shortest round-trip form, so a reloaded model
// reproduces the original probabilities bit for bit.

#ifndef ELIM_MODEL_IO_HPP_
#define ELIM_MODEL_IO_HPP_

#include "elim/committee.hpp"
#include "elim/core.hpp"
#include "elim/dataset.hpp"
#include "elim/knn.hpp"
#include "elim/lda.hpp"
#include "elim/mixture.hpp"
#include "elim/mlp.hpp"
#include "elim/rules.hpp"
#include "elim/soft_rules.hpp"

namespace elim {

inline Json model_to_json(const Classifier& m) {
  Json features = Json::array();
  for (const auto& f : m.info().features) features.push_back(to_json(f));
  return {{"format_version", kFormatVersion},
          {"kind", m.kind()},
          {"class_names", m.class_names()},
          {"features", features},
          {"params", m.params_to_json()}};
}

inline Json Committee::params_to_json() const {
  Json members = Json::array();
  for (const auto& m : members_) members.push_back(model_to_json(*m));
  return {{"members", members}};
}

namespace detail {

inline Eigen::VectorXd eigen_vector(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Eigen::MatrixXd eigen_matrix(const Json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size());
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    require(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) == c, ErrorCode::kSchema,
            "ragged matrix");
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  return m;
}

}  // namespace detail

inline std::shared_ptr<const Classifier> model_from_json(const Json& j) {
  try {
    check_format_version(j);
    ModelInfo info;
    info.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& f : j.at("features")) info.features.push_back(feature_from_json(f));
    const std::string kind = j.at("kind").get<std::string>();
    const Json& p = j.at("params");

    if (kind == "mlp") {
      auto m = std::make_shared<MlpModel>(info, detail::eigen_vector(p.at("input_offset")),
                                          detail::eigen_vector(p.at("input_scale")),
                                          detail::eigen_matrix(p.at("w1")), detail::eigen_vector(p.at("b1")),
                                          detail::eigen_matrix(p.at("w2")), detail::eigen_vector(p.at("b2")));
      if (p.contains("joint")) {
        const Json& jj = p.at("joint");
        auto original = jj.at("original_class_names").get<std::vector<std::string>>();
        m->set_joint({ClassGrouping::from_json(jj.at("grouping"), original.size()), original});
      }
      return m;
    }
    if (kind == "lda") {
      return std::make_shared<LinearLogisticModel>(info, p.at("w").get<FeatureVector>(),
                                                   p.at("theta").get<double>(), p.at("slope").get<double>());
    }
    if (kind == "rules") {
      return std::make_shared<RuleClassifier>(info, rule_set_from_json(p));
    }
    if (kind == "soft_rules") {
      return std::make_shared<SoftRuleClassifier>(info, rule_set_from_json(p),
                                                  p.at("dispersions").get<std::vector<double>>());
    }
    if (kind == "knn") {
      Dataset train{"", info.class_names, info.features, p.at("cases").get<std::vector<FeatureVector>>(),
                    p.at("labels").get<std::vector<std::size_t>>()};
      validate(train);
      return std::make_shared<KnnClassifier>(std::move(train), p.at("k").get<std::size_t>(),
                                             parse_metric(p.at("metric").get<std::string>()),
                                             parse_vote_mode(p.at("mode").get<std::string>()));
    }
    if (kind == "committee") {
      std::vector<ClassifierPtr> members;
      for (const auto& mj : p.at("members")) members.push_back(model_from_json(mj));
      auto c = std::make_shared<Committee>(std::move(members));
      require(c->info() == info, ErrorCode::kSchema, "committee envelope disagrees with its members");
      return c;
    }
    if (kind == "bayes") {
      return std::make_shared<BayesClassifier>(info, GaussianMixture(mixture_spec_from_json(p.at("mixture"))));
    }
    throw Error(ErrorCode::kSchema, "unknown model kind '" + kind + "'");
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("malformed model document: ") + e.what());
  }
}

inline std::string serialize_model(const Classifier& m) { return model_to_json(m).dump(1) + "\n"; }

inline void save_model(const Classifier& m, const std::string& path) { write_text_file(path, serialize_model(m)); }

inline std::shared_ptr<const Classifier> load_model(const std::string& path) {
  return model_from_json(read_json_file(path));
}

}  // namespace elim

#endif  // ELIM_MODEL_IO_HPP_
