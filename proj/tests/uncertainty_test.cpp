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

#include <boost/math/distributions/normal.hpp>

#include "test_helpers.hpp"

namespace elim {
namespace {

double phi(double z) { return boost::math::cdf(boost::math::normal(), z); }

// Crisp 1-D step on one feature: class 0 below t (inclusive), class 1 above.
class Threshold final : public Classifier {
 public:
  Threshold(ModelInfo info, std::size_t feature, double t) : Classifier(std::move(info)), f_(feature), t_(t) {}
  ClassProbabilities predict(std::span<const double> x) const override {
    check_dimension(x);
    return ClassProbabilities::one_hot(2, x[f_] <= t_ ? 0 : 1);
  }
  std::string_view kind() const override { return "threshold"; }
  Json params_to_json() const override { return {{"t", t_}}; }
  bool is_crisp() const override { return true; }

 private:
  std::size_t f_;
  double t_;
};

class Constant final : public Classifier {
 public:
  explicit Constant(ModelInfo info) : Classifier(std::move(info)) {}
  ClassProbabilities predict(std::span<const double> x) const override {
    check_dimension(x);
    return ClassProbabilities({0.7, 0.3});
  }
  std::string_view kind() const override { return "constant"; }
  Json params_to_json() const override { return Json::object(); }
};

ModelInfo three_features() {
  FeatureMeta cat;
  cat.name = "sex";
  cat.kind = FeatureKind::kCategorical;
  cat.categories = {"F", "M"};
  return {{"A", "B"}, {testing::continuous("a", 0, 10), testing::continuous("b", -1, 1), cat}};
}

TEST(Dispersions, FormulaAndPrecedence) {
  const auto info = three_features();
  EXPECT_EQ(dispersions(UncertaintyProfile::global(0), info.features), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(dispersions(UncertaintyProfile::global(0.1), info.features), (std::vector<double>{1.0, 0.2, 0}));
  UncertaintyProfile p = UncertaintyProfile::global(0.1);
  p.overrides[1] = 0.5;
  EXPECT_EQ(dispersions(p, info.features), (std::vector<double>{1.0, 0.5, 0}));
  p.groups = {{"lab", {0, 1}, 0.3}};
  const auto s = dispersions(p, info.features);
  EXPECT_DOUBLE_EQ(s[0], 3.0);  // group beats global
  EXPECT_DOUBLE_EQ(s[1], 0.5);  // override beats group
  p.overrides[2] = 4.0;         // categorical stays unperturbed
  EXPECT_EQ(dispersions(p, info.features)[2], 0.0);
  p.overrides[1] = -0.1;
  EXPECT_THROW(dispersions(p, info.features), Error);
}

TEST(Mc, ZeroDispersionIsExact) {
  const GaussianMixture mix(testing::two_gaussians_2d());
  const BayesClassifier m(mixture_info(mix), mix);
  const std::vector<double> x = {0.7, -0.3};
  const auto e = mc_probabilities(m, x, UncertaintyProfile::global(0), {100, 1});
  EXPECT_EQ(e.probs.vector(), m.predict(x).vector());
  EXPECT_EQ(e.standard_error, (std::vector<double>{0, 0}));
}

TEST(Mc, CrispBorderIsHalf) {
  IntervalRuleSet r;
  r.rules = {{0, {{0, 0.0, 1.0}}}};
  r.default_class = 1;
  const RuleClassifier m(testing::info_1d(), r);
  const std::vector<double> s = {0.2};
  const auto e = mc_probabilities(m, std::vector<double>{1.0}, s, {100000, 3});
  const double oracle = phi(0) - phi(-5);
  EXPECT_NEAR(e.probs[0], oracle, 3 * e.standard_error[0]);
  testing::expect_valid(e.probs);
}

// E[sigma(2 - 2 (x0 + e))], e ~ N(0, s^2), by trapezoid quadrature.
double perturbed_posterior(double x0, double s) {
  constexpr int kPoints = 4001;
  const double lo = -10 * s, hi = 10 * s, h = (hi - lo) / (kPoints - 1);
  double total = 0, weight = 0;
  for (int i = 0; i < kPoints; ++i) {
    const double e = lo + i * h;
    const double w = (i == 0 || i == kPoints - 1 ? 0.5 : 1.0) * std::exp(-0.5 * (e / s) * (e / s));
    total += w * sigmoid(2 - 2 * (x0 + e));
    weight += w;
  }
  return total / weight;
}

TEST(Mc, BayesMatchesQuadrature) {
  const GaussianMixture mix(testing::two_gaussians_2d());
  const BayesClassifier m(mixture_info(mix), mix);
  const std::vector<double> s = {0.3, 0.3};
  for (double x0 : {-1.0, 0.4, 1.0, 2.5}) {
    const std::vector<double> x = {x0, 0.2};
    const auto e = mc_probabilities(m, x, s, {20000, 7});
    EXPECT_NEAR(e.probs[0], perturbed_posterior(x0, 0.3), 3 * e.standard_error[0]) << x0;
  }
}

TEST(Mc, DeterministicPerSeedAndCategoricalUntouched) {
  auto info = three_features();
  const Threshold on_cat(info, 2, 0.5);
  const std::vector<double> x = {5, 0, 1};
  UncertaintyProfile p = UncertaintyProfile::global(0.5);
  const auto e = mc_probabilities(on_cat, x, p, {500, 1});
  EXPECT_EQ(e.probs.vector(), (std::vector<double>{0, 1}));
  const Threshold on_a(info, 0, 5.2);
  const auto a = mc_probabilities(on_a, x, p, {500, 9});
  const auto b = mc_probabilities(on_a, x, p, {500, 9});
  EXPECT_EQ(a.probs.vector(), b.probs.vector());
  EXPECT_EQ(a.standard_error, b.standard_error);
  const auto c = mc_probabilities(on_a, x, p, {500, 10});
  EXPECT_NE(a.probs.vector(), c.probs.vector());
}

TEST(Mc, StandardErrorShrinksWithSqrtN) {
  const GaussianMixture mix(testing::two_gaussians_2d());
  const BayesClassifier m(mixture_info(mix), mix);
  const std::vector<double> x = {1.2, 0};
  const std::vector<double> s = {0.5, 0.5};
  const auto small = mc_probabilities(m, x, s, {2000, 1});
  const auto large = mc_probabilities(m, x, s, {20000, 1});
  EXPECT_NEAR(small.standard_error[0] / large.standard_error[0], std::sqrt(10.0), 0.5);
  const double truth = perturbed_posterior(1.2, 0.5);
  EXPECT_LT(std::abs(large.probs[0] - truth), 3 * large.standard_error[0]);
}

TEST(Sweep, ZeroGridIsModelOutput) {
  const GaussianMixture mix(testing::two_gaussians_2d());
  const BayesClassifier m(mixture_info(mix), mix);
  const std::vector<double> x = {0.4, 0.1};
  const auto c = rho_sweep(m, x, std::vector<double>{0.0}, {100, 1});
  ASSERT_EQ(c.probs.size(), 1u);
  EXPECT_EQ(c.probs[0], m.predict(x).vector());
}

TEST(Sweep, DeepInteriorStaysConfident) {
  GaussianMixtureSpec spec = testing::two_gaussians_2d();
  const GaussianMixture mix(spec);
  const auto info = sample_mixture(mix, 500).info();  // realistic ranges
  const BayesClassifier m(info, mix);
  const std::vector<double> x = {-1.5, 0};
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.02 * i);
  const auto c = rho_sweep(m, x, grid, {4000, 2});
  for (const auto& row : c.probs) EXPECT_GE(row[0], 0.9);
}

TEST(Sweep, BorderChangesAtFirstNonzeroRho) {
  const Threshold m(testing::info_1d({"A", "B"}, 0, 2), 0, 1.0);
  const auto c = rho_sweep(m, std::vector<double>{1.0}, std::vector<double>{0, 0.05, 0.1, 0.2, 0.4}, {4000, 5});
  EXPECT_EQ(c.change_index, 1u);
  EXPECT_THROW(rho_sweep(m, std::vector<double>{1.0}, std::vector<double>{0.1, 0.1}, {10, 1}), Error);
  EXPECT_THROW(rho_sweep(m, std::vector<double>{1.0}, std::vector<double>{}, {10, 1}), Error);
}

TEST(Sensitivity, IgnoredFeatureIsFlat) {
  const auto info = three_features();
  const Threshold m(info, 0, 5.5);
  const std::vector<double> x = {5, 0, 0};
  const auto c = sensitivity_sweep(m, x, 0.05, 1, std::vector<double>{0, 0.5, 1, 2, 4}, {4000, 3});
  for (std::size_t i = 1; i < c.probs.size(); ++i) {
    const double se = std::hypot(c.standard_error[i][0], c.standard_error[0][0]);
    EXPECT_LE(std::abs(c.probs[i][0] - c.probs[0][0]), 3 * se + 1e-12);
  }
}

TEST(Sensitivity, ThresholdFollowsGaussianCdf) {
  const auto info = testing::info_1d({"A", "B"}, 0, 2);
  const double t = 1.0, x = 0.8;
  const Threshold m(info, 0, t);
  const std::vector<double> grid = {0, 0.1, 0.2, 0.5, 1, 3};
  const auto c = sensitivity_sweep(m, std::vector<double>{x}, 0.0, 0, grid, {20000, 4});
  EXPECT_EQ(c.probs[0], (std::vector<double>{1, 0}));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    EXPECT_NEAR(c.probs[i][0], phi((t - x) / grid[i]), 3 * c.standard_error[i][0] + 1e-9);
    EXPECT_GE(c.probs[i][0], 0.5 - 3 * c.standard_error[i][0]);
  }
}

TEST(Sensitivity, CategoricalFeatureRejected) {
  const auto info = three_features();
  const Threshold m(info, 0, 5);
  EXPECT_THROW(sensitivity_sweep(m, std::vector<double>{5, 0, 0}, 0.1, 2, std::vector<double>{0, 1}, {10, 1}), Error);
}

TEST(Interval, ConstantClassifierGetsFullBound) {
  const Constant m(testing::info_1d({"A", "B"}, 0, 10));
  const auto ci = confidence_interval(m, std::vector<double>{4}, 0);
  EXPECT_DOUBLE_EQ(ci.low, -10);
  EXPECT_DOUBLE_EQ(ci.high, 20);
}

TEST(Interval, RuleBoundaries) {
  IntervalRuleSet r;
  r.rules = {{0, {{0, 0.0, 1.0}}}};
  r.default_class = 1;
  const RuleClassifier m(testing::info_1d({"A", "B"}, -1, 3), r);
  const auto ci = confidence_interval(m, std::vector<double>{0.5}, 0);
  EXPECT_NEAR(ci.low, 0.0, 1e-3);
  EXPECT_NEAR(ci.high, 1.0, 1e-3);
  for (int k = 0; k < 64; ++k) {
    const double v = ci.low + (ci.high - ci.low) * k / 63.0;
    EXPECT_EQ(m.predict(std::vector<double>{v}).argmax(), 0u);
  }
}

TEST(Interval, NarrowNearBorder) {
  const GaussianMixture mix(testing::two_gaussians_2d());
  const auto info = sample_mixture(mix, 500).info();
  const BayesClassifier m(info, mix);
  const auto near = confidence_interval(m, std::vector<double>{0.9, 0}, 0);
  const auto typical = confidence_interval(m, std::vector<double>{0.0, 0}, 0);
  EXPECT_LT(near.high - near.low, typical.high - typical.low);
  EXPECT_LE(near.low, 0.9);
  EXPECT_GE(near.high, 0.9);
  EXPECT_NEAR(near.high, 1.0, 1e-3 * info.features[0].range());
}

TEST(Interval, BorderlineCaseIsReported) {
  const GaussianMixture mix(testing::two_gaussians_2d());
  const BayesClassifier m(mixture_info(mix), mix);
  try {
    confidence_interval(m, std::vector<double>{1.0, 0}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBorderline);
  }
}

TEST(PriorRecovery, ConstantModelDivergesFromPriors) {
  const Constant m(testing::info_1d());
  const auto r = prior_recovery(m, std::vector<double>{1}, std::vector<double>{0.5, 0.5}, 100, {200, 1});
  EXPECT_TRUE(r.diverges);
  EXPECT_NEAR(r.total_variation, 0.2, 1e-12);
}

}  // namespace
}  // namespace elim
