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

// Class probabilities of an arbitrary classifier under Gaussian input
// uncertainty. A case x is replaced by samples from N(x, diag(s^2)) where the
// per-feature dispersion s_i is a fraction rho of the feature's range; the
// estimate is the mean model output (winning-class frequency for crisp
// models). Sweeps over rho or over one s_i show how close x lies to a class
// border, and per-feature confidence intervals give the largest deviation
// of one feature that keeps the winning class.

#ifndef ELIM_UNCERTAINTY_HPP_
#define ELIM_UNCERTAINTY_HPP_

#include <map>
#include <optional>

#include "elim/core.hpp"
#include "elim/dataset.hpp"
#include "elim/detail/random.hpp"

namespace elim {

struct FeatureGroup {
  std::string name;
  std::vector<std::size_t> features;
  double rho = 0;
};

struct UncertaintyProfile {
  double rho = 0;                          // fraction of each feature's range
  std::map<std::size_t, double> overrides;  // explicit s_i in feature units
  std::vector<FeatureGroup> groups;         // shared rho per group

  static UncertaintyProfile global(double rho) { return {rho, {}, {}}; }
};

// Which parameter controls a feature's dispersion.
enum class DispersionSource { kNone, kOverride, kGroup, kGlobal };

// Precedence is override > group > global; categorical features are never
// perturbed.
inline DispersionSource dispersion_source(const UncertaintyProfile& profile, std::size_t feature,
                                          std::span<const FeatureMeta> features) {
  if (!features[feature].continuous()) return DispersionSource::kNone;
  if (profile.overrides.contains(feature)) return DispersionSource::kOverride;
  for (const auto& g : profile.groups) {
    if (std::find(g.features.begin(), g.features.end(), feature) != g.features.end()) {
      return DispersionSource::kGroup;
    }
  }
  return DispersionSource::kGlobal;
}

inline std::vector<double> dispersions(const UncertaintyProfile& profile, std::span<const FeatureMeta> features) {
  require(profile.rho >= 0 && std::isfinite(profile.rho), ErrorCode::kConfig, "rho must be nonnegative");
  for (const auto& [i, s] : profile.overrides) {
    require(i < features.size(), ErrorCode::kConfig, "override references an unknown feature");
    require(s >= 0 && std::isfinite(s), ErrorCode::kConfig,
            "dispersion override for feature " + std::to_string(i) + " is negative");
  }
  for (const auto& g : profile.groups) {
    require(g.rho >= 0, ErrorCode::kConfig, "group '" + g.name + "' has negative rho");
    for (std::size_t i : g.features) {
      require(i < features.size(), ErrorCode::kConfig, "group '" + g.name + "' references an unknown feature");
    }
  }
  std::vector<double> s(features.size(), 0.0);
  for (std::size_t i = 0; i < features.size(); ++i) {
    switch (dispersion_source(profile, i, features)) {
      case DispersionSource::kNone:
        break;
      case DispersionSource::kOverride:
        s[i] = profile.overrides.at(i);
        break;
      case DispersionSource::kGroup:
        for (const auto& g : profile.groups) {
          if (std::find(g.features.begin(), g.features.end(), i) != g.features.end()) {
            s[i] = features[i].range() * g.rho;
            break;
          }
        }
        break;
      case DispersionSource::kGlobal:
        s[i] = features[i].range() * profile.rho;
        break;
    }
  }
  return s;
}

struct McConfig {
  std::size_t n_samples = 5000;
  std::uint64_t seed = 0;
};

struct McEstimate {
  ClassProbabilities probs;
  std::vector<double> standard_error;
};

inline void check_finite(std::span<const double> x) {
  for (double v : x) require(std::isfinite(v), ErrorCode::kValidation, "feature values must be finite");
}

inline McEstimate mc_probabilities(const Classifier& model, std::span<const double> x,
                                   std::span<const double> dispersion, const McConfig& mc) {
  require(x.size() == model.num_features() && dispersion.size() == model.num_features(), ErrorCode::kDimension,
          "case and dispersion vectors must match the model's features");
  require(mc.n_samples >= 1, ErrorCode::kConfig, "n_samples must be at least 1");
  check_finite(x);
  const std::size_t k = model.num_classes();

  std::vector<std::size_t> perturbed;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(dispersion[i] >= 0, ErrorCode::kConfig, "dispersions must be nonnegative");
    if (dispersion[i] > 0 && model.info().features[i].continuous()) perturbed.push_back(i);
  }
  if (perturbed.empty()) return {model.predict(x), std::vector<double>(k, 0.0)};

  detail::Rng rng(mc.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> y(x.begin(), x.end());
  std::vector<double> mean(k, 0.0), m2(k, 0.0);
  for (std::size_t n = 1; n <= mc.n_samples; ++n) {
    for (std::size_t i : perturbed) y[i] = x[i] + dispersion[i] * normal(rng);
    ClassProbabilities p = model.predict(y);
    if (model.is_crisp()) p = ClassProbabilities::one_hot(k, p.argmax());
    for (std::size_t c = 0; c < k; ++c) {
      const double delta = p[c] - mean[c];
      mean[c] += delta / static_cast<double>(n);
      m2[c] += delta * (p[c] - mean[c]);
    }
  }
  std::vector<double> se(k, 0.0);
  if (mc.n_samples > 1) {
    const double n = static_cast<double>(mc.n_samples);
    for (std::size_t c = 0; c < k; ++c) se[c] = std::sqrt(std::max(m2[c], 0.0) / (n - 1) / n);
  }
  // Renormalise away accumulated rounding.
  const double total = std::accumulate(mean.begin(), mean.end(), 0.0);
  for (double& v : mean) v /= total;
  return {ClassProbabilities(std::move(mean)), std::move(se)};
}

inline McEstimate mc_probabilities(const Classifier& model, std::span<const double> x,
                                   const UncertaintyProfile& profile, const McConfig& mc) {
  const auto s = dispersions(profile, model.info().features);
  return mc_probabilities(model, x, s, mc);
}

// ---------------------------------------------------------------------------
// Sweeps.

struct SweepCurve {
  std::vector<double> abscissa;
  std::vector<std::vector<double>> probs;
  std::vector<std::vector<double>> standard_error;
  // Grid point ending the largest total-variation jump between neighbours;
  // index 0 when the grid has a single point.
  std::size_t change_index = 0;
  double max_change = 0;

  Json to_json() const {
    Json rows = Json::array();
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      rows.push_back({{"abscissa", abscissa[i]}, {"probs", probs[i]}, {"stderr", standard_error[i]}});
    }
    return {{"rows", rows}, {"change_index", change_index},
            {"change_abscissa", abscissa.empty() ? 0.0 : abscissa[change_index]}, {"max_change", max_change}};
  }
};

// Columns: abscissa, p_<class>..., se_<class>...
inline void write_sweep_csv(const SweepCurve& curve, const std::vector<std::string>& class_names,
                            const std::string& abscissa_name, std::ostream& out) {
  out << detail::csv_escape(abscissa_name);
  for (const auto& c : class_names) out << ',' << detail::csv_escape("p_" + c);
  for (const auto& c : class_names) out << ',' << detail::csv_escape("se_" + c);
  out << '\n';
  for (std::size_t i = 0; i < curve.abscissa.size(); ++i) {
    out << format_double(curve.abscissa[i]);
    for (double v : curve.probs[i]) out << ',' << format_double(v);
    for (double v : curve.standard_error[i]) out << ',' << format_double(v);
    out << '\n';
  }
}

inline void check_grid(std::span<const double> grid) {
  require(!grid.empty(), ErrorCode::kConfig, "grid must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] >= 0 && std::isfinite(grid[i]), ErrorCode::kConfig, "grid values must be nonnegative");
    require(i == 0 || grid[i] > grid[i - 1], ErrorCode::kConfig, "grid must be strictly increasing");
  }
}

namespace detail {

inline void mark_change_point(SweepCurve& curve) {
  for (std::size_t i = 1; i < curve.probs.size(); ++i) {
    double tv = 0;
    for (std::size_t c = 0; c < curve.probs[i].size(); ++c) tv += std::abs(curve.probs[i][c] - curve.probs[i - 1][c]);
    tv *= 0.5;
    if (tv > curve.max_change) {
      curve.max_change = tv;
      curve.change_index = i;
    }
  }
}

}  // namespace detail

// One estimate per rho, all sharing the base seed.
inline SweepCurve rho_sweep(const Classifier& model, std::span<const double> x, std::span<const double> rho_grid,
                            const McConfig& mc) {
  check_grid(rho_grid);
  SweepCurve curve;
  for (double rho : rho_grid) {
    const McEstimate e = mc_probabilities(model, x, UncertaintyProfile::global(rho), mc);
    curve.abscissa.push_back(rho);
    curve.probs.push_back(e.probs.vector());
    curve.standard_error.push_back(e.standard_error);
  }
  detail::mark_change_point(curve);
  return curve;
}

// Every feature at its rho0 dispersion except `feature`, which sweeps s_grid.
inline SweepCurve sensitivity_sweep(const Classifier& model, std::span<const double> x, double rho0,
                                    std::size_t feature, std::span<const double> s_grid, const McConfig& mc) {
  require(feature < model.num_features(), ErrorCode::kConfig, "feature index out of range");
  require(model.info().features[feature].continuous(), ErrorCode::kConfig,
          "sensitivity is defined for continuous features only");
  check_grid(s_grid);
  std::vector<double> s = dispersions(UncertaintyProfile::global(rho0), model.info().features);
  SweepCurve curve;
  for (double si : s_grid) {
    s[feature] = si;
    const McEstimate e = mc_probabilities(model, x, s, mc);
    curve.abscissa.push_back(si);
    curve.probs.push_back(e.probs.vector());
    curve.standard_error.push_back(e.standard_error);
  }
  detail::mark_change_point(curve);
  return curve;
}

// Compares the large-rho limit with class priors. Only a diagnostic: the
// limit equals the priors only for models whose decision regions capture
// them under unbounded sampling.
struct PriorRecoveryReport {
  std::vector<double> probs;
  std::vector<double> priors;
  double total_variation = 0;
  bool diverges = false;
};

inline PriorRecoveryReport prior_recovery(const Classifier& model, std::span<const double> x,
                                          std::span<const double> priors, double large_rho, const McConfig& mc,
                                          double tolerance = 0.1) {
  require(priors.size() == model.num_classes(), ErrorCode::kDimension, "one prior per class required");
  const McEstimate e = mc_probabilities(model, x, UncertaintyProfile::global(large_rho), mc);
  PriorRecoveryReport r{e.probs.vector(), {priors.begin(), priors.end()}, 0, false};
  for (std::size_t c = 0; c < priors.size(); ++c) r.total_variation += 0.5 * std::abs(r.probs[c] - priors[c]);
  r.diverges = r.total_variation > tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// Per-feature confidence intervals.

struct ConfidenceInterval {
  std::size_t feature = 0;
  double low = 0;
  double high = 0;
  double search_low = 0;
  double search_high = 0;

  Json to_json() const {
    return {{"feature", feature}, {"low", low}, {"high", high},
            {"search_low", search_low}, {"search_high", search_high}};
  }
};

// Largest [low, high] around x_i, inside [min - m*range, max + m*range],
// over which the winning class does not change. Each edge is located by a
// coarse scan plus bisection to 1e-4 * range, then a 64-point probe grid
// inside the interval is checked and the interval shrunk if a probe fails.
inline ConfidenceInterval confidence_interval(const Classifier& model, std::span<const double> x,
                                              std::size_t feature, double bound_multiplier = 1.0) {
  require(x.size() == model.num_features(), ErrorCode::kDimension, "case does not match the model's features");
  require(feature < model.num_features(), ErrorCode::kConfig, "feature index out of range");
  const FeatureMeta& meta = model.info().features[feature];
  require(meta.continuous(), ErrorCode::kConfig, "confidence intervals need a continuous feature");
  require(bound_multiplier >= 0, ErrorCode::kConfig, "bound multiplier must be nonnegative");
  check_finite(x);

  const ClassProbabilities p0 = model.predict(x);
  require(p0.has_unique_argmax(), ErrorCode::kBorderline,
          "borderline case: the most probable class is not unique; inspect it with a rho sweep");
  const std::size_t winner = p0.argmax();

  const double xi = x[feature];
  const double range = meta.range();
  const double scale = range > 0 ? range : std::max(1.0, std::abs(xi));
  const double tol = 1e-4 * scale;
  ConfidenceInterval ci;
  ci.feature = feature;
  ci.search_low = std::min(meta.min - bound_multiplier * range, xi);
  ci.search_high = std::max(meta.max + bound_multiplier * range, xi);

  std::vector<double> y(x.begin(), x.end());
  auto keeps_class = [&](double v) {
    y[feature] = v;
    return model.predict(y).argmax() == winner;
  };

  // Last point from xi towards `limit` that keeps the class.
  auto find_edge = [&](double limit) {
    constexpr int kScan = 64;
    double inside = xi;
    for (int k = 1; k <= kScan; ++k) {
      const double v = xi + (limit - xi) * k / kScan;
      if (keeps_class(v)) {
        inside = v;
        continue;
      }
      double outside = v;
      while (std::abs(outside - inside) > tol) {
        const double mid = 0.5 * (inside + outside);
        (keeps_class(mid) ? inside : outside) = mid;
      }
      return inside;
    }
    return limit;
  };

  double low_limit = ci.search_low;
  double high_limit = ci.search_high;
  ci.low = find_edge(low_limit);
  ci.high = find_edge(high_limit);
  constexpr int kProbes = 64;
  for (int round = 0; round < 64; ++round) {
    bool clean = true;
    for (int k = 0; k < kProbes && clean; ++k) {
      const double v = ci.low + (ci.high - ci.low) * (k + 0.5) / kProbes;
      if (keeps_class(v)) continue;
      clean = false;
      if (v < xi) {
        low_limit = v;
        ci.low = find_edge(low_limit);
      } else {
        high_limit = v;
        ci.high = find_edge(high_limit);
      }
    }
    if (clean) break;
  }
  return ci;
}

}  // namespace elim

#endif  // ELIM_UNCERTAINTY_HPP_
