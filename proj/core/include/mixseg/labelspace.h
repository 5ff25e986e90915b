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

#ifndef MIXSEG_LABELSPACE_H_
#define MIXSEG_LABELSPACE_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mixseg {

struct SegCategory {
  int id = 0;
  std::string name;
  bool is_thing = false;
  // Training label space index k (1-based); nullopt for a test-time space.
  std::optional<int> source_labelspace;

  bool operator==(const SegCategory&) const = default;
};

// Lowercases and collapses internal whitespace runs to one space, trimming
// both ends. "Upper  Clothes " and "upper clothes" compare equal.
std::string normalize_name(std::string_view name);

// Ordered category list of one dataset (index k ≥ 1) or of a test-time
// mixture (index nullopt).
class LabelSpace {
 public:
  LabelSpace() = default;
  // Throws kConfig for an empty list, an empty name, a duplicate id or a
  // duplicate (normalized) name.
  LabelSpace(std::optional<int> index, std::vector<SegCategory> categories,
             std::string name = {});

  const std::optional<int>& index() const { return index_; }
  const std::string& name() const { return name_; }
  const std::vector<SegCategory>& categories() const { return categories_; }
  int size() const { return static_cast<int>(categories_.size()); }
  const SegCategory& operator[](int position) const {
    return categories_[position];
  }

  // Position of a category by id / by normalized name.
  std::optional<int> position_of_id(int id) const;
  std::optional<int> position_of_name(std::string_view name) const;
  bool contains_name(std::string_view name) const {
    return position_of_name(name).has_value();
  }
  // Throws kNotFound.
  const SegCategory& by_id(int id) const;

  std::vector<std::string> names() const;

 private:
  std::optional<int> index_;
  std::string name_;
  std::vector<SegCategory> categories_;
};

}  // namespace mixseg

#endif  // MIXSEG_LABELSPACE_H_
