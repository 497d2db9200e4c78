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

// Shared fixtures for the unit tests.

#ifndef ELIM_TESTS_TEST_HELPERS_HPP_
#define ELIM_TESTS_TEST_HELPERS_HPP_

#include <gtest/gtest.h>

#include <filesystem>
#include <atomic>
#include <fstream>
#include <random>

#include <unistd.h>

#include "elim/elim.hpp"

namespace elim::testing {

inline FeatureMeta continuous(std::string name, double min, double max) {
  FeatureMeta f;
  f.name = std::move(name);
  f.min = min;
  f.max = max;
  return f;
}

inline ModelInfo info_1d(std::vector<std::string> classes = {"A", "B"}, double min = -1, double max = 3) {
  return {std::move(classes), {continuous("x", min, max)}};
}

inline GaussianMixtureSpec two_gaussians_2d(std::uint64_t seed = 1) {
  GaussianMixtureSpec s;
  s.means = {{0, 0}, {2, 0}};
  s.covariance = {{1, 0}, {0, 1}};
  s.priors = {0.5, 0.5};
  s.seed = seed;
  return s;
}

// Four classes; the first two share a mean.
inline GaussianMixtureSpec overlap_mixture(std::uint64_t seed = 1) {
  GaussianMixtureSpec s;
  s.means = {{0, 0}, {0, 0}, {3, 0}, {0, 3}};
  s.covariance = {{1, 0}, {0, 1}};
  s.priors = {0.25, 0.25, 0.25, 0.25};
  s.seed = seed;
  s.class_names = {"AL", "PH", "LC", "CH"};
  return s;
}

inline Dataset blobs(std::size_t n, double separation, std::uint64_t seed) {
  GaussianMixtureSpec s = two_gaussians_2d(seed);
  s.means = {{0, 0}, {separation, separation}};
  s.covariance = {{0.25, 0}, {0, 0.25}};
  return sample_mixture(GaussianMixture(s), n);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("elim_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void expect_valid(const ClassProbabilities& p) {
  double total = 0;
  for (double v : p.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    total += v;
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
}

inline std::vector<std::vector<std::int64_t>> liver_matrix() {
  return {{70, 6, 3, 3}, {3, 121, 3, 1}, {1, 8, 77, 2}, {0, 0, 0, 72}};
}

inline std::vector<std::string> liver_classes() { return {"AL", "PH", "LC", "CH"}; }

}  // namespace elim::testing

#endif  // ELIM_TESTS_TEST_HELPERS_HPP_
