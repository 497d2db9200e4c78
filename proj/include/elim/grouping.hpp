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

#ifndef ELIM_GROUPING_HPP_
#define ELIM_GROUPING_HPP_

#include <sstream>

#include "elim/core.hpp"

namespace elim {

// A partition of the original classes into joint classes, e.g.
// {{AL, PH}, {LC}, {CH}} whose first group is displayed as "AL+PH".
class ClassGrouping {
 public:
  ClassGrouping() = default;

  ClassGrouping(std::vector<std::vector<std::size_t>> groups, std::size_t num_classes,
                std::vector<std::string> names = {})
      : groups_(std::move(groups)), names_(std::move(names)), group_of_(num_classes, kUnassigned) {
    require(!groups_.empty(), ErrorCode::kValidation, "grouping has no groups");
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      require(!groups_[g].empty(), ErrorCode::kValidation, "grouping contains an empty group");
      for (std::size_t c : groups_[g]) {
        require(c < num_classes, ErrorCode::kValidation,
                "grouping references class " + std::to_string(c + 1) + " of " + std::to_string(num_classes));
        require(group_of_[c] == kUnassigned, ErrorCode::kValidation,
                "class " + std::to_string(c + 1) + " appears in two groups");
        group_of_[c] = g;
      }
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
      require(group_of_[c] != kUnassigned, ErrorCode::kValidation,
              "grouping does not cover class " + std::to_string(c + 1));
    }
    if (names_.empty()) {
      for (const auto& g : groups_) {
        std::string n;
        for (std::size_t c : g) n += (n.empty() ? "" : "+") + std::to_string(c + 1);
        names_.push_back(n);
      }
    }
    require(names_.size() == groups_.size(), ErrorCode::kValidation, "one display name per group required");
  }

  // Groups named by joining the constituent class names with '+'.
  static ClassGrouping named(std::vector<std::vector<std::size_t>> groups,
                             const std::vector<std::string>& class_names) {
    ClassGrouping tmp(groups, class_names.size());
    std::vector<std::string> names;
    for (const auto& g : tmp.groups()) {
      std::string n;
      for (std::size_t c : g) n += (n.empty() ? "" : "+") + class_names[c];
      names.push_back(n);
    }
    return ClassGrouping(std::move(groups), class_names.size(), std::move(names));
  }

  // One-based textual form: "1,2|3|4".
  static ClassGrouping parse(std::string_view text, const std::vector<std::string>& class_names) {
    std::vector<std::vector<std::size_t>> groups;
    std::stringstream whole{std::string(text)};
    std::string part;
    while (std::getline(whole, part, '|')) {
      std::vector<std::size_t> group;
      std::stringstream ps(part);
      std::string item;
      while (std::getline(ps, item, ',')) {
        std::size_t pos = 0;
        long v = 0;
        try {
          v = std::stol(item, &pos);
        } catch (const std::exception&) {
          pos = 0;
        }
        require(pos > 0 && v >= 1, ErrorCode::kConfig, "malformed grouping '" + std::string(text) + "'");
        group.push_back(static_cast<std::size_t>(v - 1));
      }
      groups.push_back(std::move(group));
    }
    return named(std::move(groups), class_names);
  }

  std::size_t num_groups() const { return groups_.size(); }
  std::size_t num_classes() const { return group_of_.size(); }
  const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t group_of(std::size_t class_index) const { return group_of_.at(class_index); }

  bool all_singletons() const {
    return std::all_of(groups_.begin(), groups_.end(), [](const auto& g) { return g.size() == 1; });
  }
  std::size_t largest_group() const {
    std::size_t m = 0;
    for (const auto& g : groups_) m = std::max(m, g.size());
    return m;
  }

  Json to_json() const { return {{"groups", groups_}, {"names", names_}}; }
  static ClassGrouping from_json(const Json& j, std::size_t num_classes) {
    return ClassGrouping(j.at("groups").get<std::vector<std::vector<std::size_t>>>(), num_classes,
                         j.value("names", std::vector<std::string>{}));
  }

  friend bool operator==(const ClassGrouping&, const ClassGrouping&) = default;

 private:
  static constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::string> names_;
  std::vector<std::size_t> group_of_;
};

}  // namespace elim

#endif  // ELIM_GROUPING_HPP_
