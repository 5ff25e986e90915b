// Copyright 2026 The Mixseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mixseg/labelspace.h"

#include <cctype>
#include <unordered_set>

#include "mixseg/error.h"

namespace mixseg {

std::string normalize_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

LabelSpace::LabelSpace(std::optional<int> index,
                       std::vector<SegCategory> categories, std::string name)
    : index_(index), name_(std::move(name)), categories_(std::move(categories)) {
  if (categories_.empty()) {
    throw Error(ErrorKind::kConfig, "label space '" + name_ + "' is empty");
  }
  std::unordered_set<int> ids;
  std::unordered_set<std::string> names;
  for (const SegCategory& c : categories_) {
    const std::string key = normalize_name(c.name);
    if (key.empty()) {
      throw Error(ErrorKind::kConfig,
                  "category id " + std::to_string(c.id) + " has no name");
    }
    if (!ids.insert(c.id).second) {
      throw Error(ErrorKind::kConfig,
                  "duplicate category id " + std::to_string(c.id));
    }
    if (!names.insert(key).second) {
      throw Error(ErrorKind::kConfig, "duplicate category name '" + c.name + "'");
    }
  }
}

std::optional<int> LabelSpace::position_of_id(int id) const {
  for (int i = 0; i < size(); ++i) {
    if (categories_[i].id == id) return i;
  }
  return std::nullopt;
}

std::optional<int> LabelSpace::position_of_name(std::string_view name) const {
  const std::string key = normalize_name(name);
  for (int i = 0; i < size(); ++i) {
    if (normalize_name(categories_[i].name) == key) return i;
  }
  return std::nullopt;
}

const SegCategory& LabelSpace::by_id(int id) const {
  const auto pos = position_of_id(id);
  if (!pos) {
    throw Error(ErrorKind::kNotFound,
                "category id " + std::to_string(id) + " not in label space '" +
                    name_ + "'");
  }
  return categories_[*pos];
}

std::vector<std::string> LabelSpace::names() const {
  std::vector<std::string> out;
  out.reserve(categories_.size());
  for (const auto& c : categories_) out.push_back(c.name);
  return out;
}

}  // namespace mixseg
