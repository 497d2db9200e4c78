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

#include <sstream>

#include "test_helpers.hpp"

namespace elim {
namespace {

using testing::TempDir;

Dataset ingest(const std::string& text, std::set<std::string> cats = {}) {
  std::istringstream in(text);
  return ingest_csv(in, "label", cats, "t");
}

TEST(Ingest, ReadsSmallFile) {
  const auto d = ingest("x,y,label\n1,2,A\n3,4,B\n5,6,A\n0,-1,B\n");
  EXPECT_EQ(d.num_classes(), 2u);
  EXPECT_EQ(d.num_features(), 2u);
  EXPECT_EQ(d.size(), 4u);
  EXPECT_EQ(d.labels, (std::vector<std::size_t>{0, 1, 0, 1}));
  EXPECT_DOUBLE_EQ(d.features[0].min, 0);
  EXPECT_DOUBLE_EQ(d.features[0].max, 5);
  EXPECT_DOUBLE_EQ(d.features[1].min, -1);
  EXPECT_DOUBLE_EQ(d.features[1].max, 6);
}

TEST(Ingest, ClassNamesAreSorted) {
  const auto d = ingest("x,label\n1,zeta\n2,alpha\n3,mid\n");
  EXPECT_EQ(d.class_names, (std::vector<std::string>{"alpha", "mid", "zeta"}));
  EXPECT_EQ(d.labels, (std::vector<std::size_t>{2, 0, 1}));
}

TEST(Ingest, NonNumericCellNamesLineAndColumn) {
  try {
    ingest("x,y,label\n1,2,A\n3,oops,B\n");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("'y'"), std::string::npos);
  }
}

TEST(Ingest, MissingCellsAreRejected) {
  try {
    ingest("x,y,label\n1,,A\n3,4,B\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
  }
  try {
    ingest("x,y,label\n1,A\n3,4,B\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
  }
}

TEST(Ingest, MissingLabelColumnIsSchemaError) {
  std::istringstream in("x,y\n1,2\n");
  try {
    ingest_csv(in, "label");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
  }
}

TEST(Ingest, SingleClassIsValidationError) {
  try {
    ingest("x,label\n1,A\n2,A\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
  }
}

TEST(Ingest, NineTestsAndSex) {
  std::ostringstream csv;
  for (int j = 1; j <= 9; ++j) csv << "t" << j << ',';
  csv << "sex,label\n";
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 100);
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 9; ++j) csv << u(rng) << ',';
    csv << (i % 2 ? "M" : "F") << ',' << (i % 4 < 2 ? "AL" : "PH") << '\n';
  }
  const auto d = ingest(csv.str(), {"sex"});
  ASSERT_EQ(d.num_features(), 10u);
  std::size_t n_cont = 0;
  for (const auto& f : d.features) n_cont += f.continuous();
  EXPECT_EQ(n_cont, 9u);
  EXPECT_EQ(d.features[9].categories, (std::vector<std::string>{"F", "M"}));
  EXPECT_DOUBLE_EQ(d.cases[0][9], 0.0);
  EXPECT_DOUBLE_EQ(d.cases[1][9], 1.0);
}

TEST(Ingest, ExportReingestIsIdentity) {
  const auto d = ingest("a,b,label,c\n1.5,x,A,0.1\n-2,y,B,1e-3\n3,x,B,7\n", {"b"});
  std::ostringstream out;
  export_csv(d, out, "label");
  std::istringstream in(out.str());
  const auto again = ingest_csv(in, "label", {"b"}, "t");
  std::ostringstream out2;
  export_csv(again, out2, "label");
  EXPECT_EQ(again, d);
  EXPECT_EQ(out.str(), out2.str());
}

TEST(Split, SeventyThirtyAndDeterministic) {
  const auto d = testing::blobs(100, 2, 1);
  const auto [tr, te] = split(d, 0.3, 7);
  EXPECT_EQ(tr.size(), 70u);
  EXPECT_EQ(te.size(), 30u);
  const auto [tr2, te2] = split(d, 0.3, 7);
  EXPECT_EQ(tr, tr2);
  EXPECT_EQ(te, te2);
  EXPECT_EQ(tr.class_names, d.class_names);
  // Disjoint cover: every original case lands in exactly one part.
  std::multiset<std::vector<double>> all(d.cases.begin(), d.cases.end()), parts;
  parts.insert(tr.cases.begin(), tr.cases.end());
  parts.insert(te.cases.begin(), te.cases.end());
  EXPECT_EQ(all, parts);
  const auto [tr3, te3] = split(d, 0.3, 8);
  EXPECT_NE(te, te3);
}

TEST(Split, RejectsBadFractions) {
  const auto d = testing::blobs(10, 2, 1);
  EXPECT_THROW(split(d, 0.0, 1), Error);
  EXPECT_THROW(split(d, 1.0, 1), Error);
}

TEST(Split, HoldsOutExactCount) {
  const auto d = testing::blobs(536, 2, 1);
  EXPECT_EQ(split(d, 163.0 / 536.0, 1).second.size(), 163u);
}

TEST(Mixture, DegeneratePriorGivesOneClass) {
  auto s = testing::two_gaussians_2d();
  s.priors = {1, 0};
  const auto d = sample_mixture(GaussianMixture(s), 200);
  for (auto l : d.labels) EXPECT_EQ(l, 0u);
  const GaussianMixture mix(s);
  for (double x : {-5.0, 0.0, 3.0, 40.0}) {
    const auto p = bayes_posterior(mix, std::vector<double>{x, 1.0});
    EXPECT_EQ(p[0], 1.0);
    EXPECT_EQ(p[1], 0.0);
  }
}

TEST(Mixture, ClassFrequenciesWithinBinomialBound) {
  const auto d = sample_mixture(GaussianMixture(testing::two_gaussians_2d(5)), 10000);
  const double f = d.class_frequencies()[0];
  EXPECT_NEAR(f, 0.5, 3 * std::sqrt(0.25 / 10000));
}

TEST(Mixture, ClassMeansWithinCltBound) {
  const auto d = sample_mixture(GaussianMixture(testing::two_gaussians_2d(9)), 10000);
  const auto counts = d.class_counts();
  std::vector<std::vector<double>> mean(2, std::vector<double>(2, 0));
  for (std::size_t i = 0; i < d.size(); ++i)
    for (int j = 0; j < 2; ++j) mean[d.labels[i]][j] += d.cases[i][j] / double(counts[d.labels[i]]);
  const std::vector<std::vector<double>> expected = {{0, 0}, {2, 0}};
  for (int c = 0; c < 2; ++c)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(mean[c][j], expected[c][j], 3 / std::sqrt(double(counts[c])));
}

TEST(Mixture, DeterministicPerSeed) {
  const auto a = sample_mixture(GaussianMixture(testing::two_gaussians_2d(4)), 50);
  const auto b = sample_mixture(GaussianMixture(testing::two_gaussians_2d(4)), 50);
  const auto c = sample_mixture(GaussianMixture(testing::two_gaussians_2d(5)), 50);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.cases, c.cases);
}

TEST(Mixture, RejectsBadSpecs) {
  auto s = testing::two_gaussians_2d();
  s.covariance = {{1, 2}, {2, 1}};  // indefinite
  EXPECT_THROW(GaussianMixture{s}, Error);
  s = testing::two_gaussians_2d();
  s.priors = {0.5, 0.6};
  EXPECT_THROW(GaussianMixture{s}, Error);
  s = testing::two_gaussians_2d();
  s.covariance = {{1, 0.1}, {0, 1}};
  EXPECT_THROW(GaussianMixture{s}, Error);
}

TEST(BayesPosterior, OneDimensionalOracles) {
  GaussianMixtureSpec s;
  s.means = {{0}, {2}};
  s.covariance = {{1}};
  s.priors = {0.5, 0.5};
  const GaussianMixture mix(s);
  const auto mid = bayes_posterior(mix, std::vector<double>{1.0});
  EXPECT_NEAR(mid[0], 0.5, 1e-15);
  // Density ratio at 0: exp(-0) / exp(-2) -> sigma(2).
  EXPECT_NEAR(bayes_posterior(mix, std::vector<double>{0.0})[0], 0.8807970779778823, 1e-14);
  EXPECT_THROW(bayes_posterior(mix, std::vector<double>{0.0, 1.0}), Error);
}

TEST(BayesPosterior, MatchesClosedFormLogistic) {
  GaussianMixtureSpec s;
  s.means = {{0.3, -1}, {1.7, 0.4}};
  s.covariance = {{1.5, 0.4}, {0.4, 0.8}};
  s.priors = {0.3, 0.7};
  const GaussianMixture mix(s);
  const auto lp = logistic_parameters(mix);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 2);
  for (int t = 0; t < 200; ++t) {
    const std::vector<double> x = {n(rng), n(rng)};
    const auto p = bayes_posterior(mix, x);
    testing::expect_valid(p);
    const double y = lp.w[0] * x[0] + lp.w[1] * x[1] - lp.theta;
    EXPECT_NEAR(p[0], sigmoid(y), 1e-10);
  }
}

TEST(Persistence, DatasetRoundTrip) {
  TempDir dir;
  const auto d = testing::blobs(30, 2, 3);
  save_dataset(d, dir.file("d.json"));
  EXPECT_EQ(load_dataset(dir.file("d.json")), d);
}

TEST(Persistence, TruncatedAndMismatchedFiles) {
  TempDir dir;
  save_dataset(testing::blobs(30, 2, 3), dir.file("d.json"));
  std::string text;
  {
    std::ifstream in(dir.file("d.json"));
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  write_text_file(dir.file("cut.json"), text.substr(0, text.size() / 2));
  try {
    load_dataset(dir.file("cut.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruptFile);
  }
  auto j = Json::parse(text);
  j["format_version"] = 99;
  write_text_file(dir.file("v.json"), j.dump());
  try {
    load_dataset(dir.file("v.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
  }
  EXPECT_THROW(load_dataset(dir.file("absent.json")), Error);
}

}  // namespace
}  // namespace elim
