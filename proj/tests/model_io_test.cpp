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

#include "test_helpers.hpp"

namespace elim {
namespace {

using testing::TempDir;

void expect_same_outputs(const Classifier& a, const Classifier& b, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(1, 3);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(dim);
    for (auto& v : x) v = n(rng);
    EXPECT_EQ(a.predict(x).vector(), b.predict(x).vector());
  }
}

ClassifierPtr reload(const Classifier& m, const TempDir& dir) {
  save_model(m, dir.file("m.json"));
  return load_model(dir.file("m.json"));
}

TrainConfig cfg(std::size_t epochs = 10) {
  TrainConfig c;
  c.seed = 3;
  c.epochs = epochs;
  return c;
}

TEST(ModelIo, MlpRoundTripIsBitExact) {
  TempDir dir;
  const auto d = testing::blobs(60, 1, 1);
  const auto m = train_mlp(d, 4, cfg()).model;
  const auto back = reload(m, dir);
  EXPECT_EQ(back->kind(), "mlp");
  expect_same_outputs(m, *back, 2, 1);
  EXPECT_EQ(serialize_model(*back), serialize_model(m));
}

TEST(ModelIo, JointModelKeepsGrouping) {
  TempDir dir;
  const auto d = sample_mixture(GaussianMixture(testing::overlap_mixture()), 60);
  const auto m = train_joint(d, ClassGrouping::parse("2,3|1|4", d.class_names), 3, cfg()).model;
  const auto back = std::dynamic_pointer_cast<const MlpModel>(reload(m, dir));
  ASSERT_TRUE(back && back->joint());
  EXPECT_EQ(*back->joint(), *m.joint());
  expect_same_outputs(m, *back, 2, 2);
}

TEST(ModelIo, RuleSetRoundTripOnGrid) {
  TempDir dir;
  IntervalRuleSet r;
  r.rules = {{0, {{0, 0.0, 1.0}, {1, -1.0, 0.5}}}, {2, {{1, 0.2, 3.0}}}};
  r.default_class = 1;
  const ModelInfo info{{"A", "B", "C"}, {testing::continuous("x", -2, 3), testing::continuous("y", -2, 3)}};
  const RuleClassifier m(info, r);
  const auto back = reload(m, dir);
  for (double x = -2; x <= 3; x += 0.125)
    for (double y = -2; y <= 3; y += 0.125) {
      const std::vector<double> p = {x, y};
      EXPECT_EQ(back->predict(p).argmax(), m.predict(p).argmax());
    }
}

TEST(ModelIo, EveryKindRoundTrips) {
  TempDir dir;
  const auto d = testing::blobs(40, 1, 5);
  std::vector<ClassifierPtr> models;
  models.push_back(std::make_shared<LinearLogisticModel>(train_lda(d, 2.5)));
  models.push_back(std::make_shared<KnnClassifier>(d, 3, DistanceMetric::kManhattan, VoteMode::kVote));
  models.push_back(committee_train(d, 2, 2, cfg(3)).committee);
  models.push_back(std::make_shared<BayesClassifier>(mixture_info(GaussianMixture(testing::two_gaussians_2d())),
                                                     GaussianMixture(testing::two_gaussians_2d())));
  IntervalRuleSet r;
  r.rules = {{0, {{0, -1.0, 0.5}}}};
  r.default_class = 1;
  models.push_back(std::make_shared<SoftRuleClassifier>(d.info(), r, std::vector<double>{0.2, 0.1}));
  for (const auto& m : models) {
    const auto back = reload(*m, dir);
    EXPECT_EQ(back->kind(), m->kind());
    expect_same_outputs(*m, *back, 2, 3);
  }
}

TEST(ModelIo, CorruptAndMismatchedFiles) {
  TempDir dir;
  const auto m = train_mlp(testing::blobs(20, 1, 1), 2, cfg(2)).model;
  const std::string text = serialize_model(m);
  write_text_file(dir.file("cut.json"), text.substr(0, text.size() - 40));
  try {
    load_model(dir.file("cut.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruptFile);
  }
  auto j = Json::parse(text);
  j["format_version"] = 2;
  write_text_file(dir.file("v.json"), j.dump());
  try {
    load_model(dir.file("v.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
  }
  j = Json::parse(text);
  j["params"].erase("w1");
  write_text_file(dir.file("p.json"), j.dump());
  EXPECT_THROW(load_model(dir.file("p.json")), Error);
  j = Json::parse(text);
  j["kind"] = "forest";
  write_text_file(dir.file("k.json"), j.dump());
  EXPECT_THROW(load_model(dir.file("k.json")), Error);
}

}  // namespace
}  // namespace elim
