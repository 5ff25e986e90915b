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

#include "mixseg/panoptic.h"

#include <unordered_map>

#include "mixseg/error.h"

namespace mixseg {

PanopticMap::PanopticMap(MaskShape shape)
    : PanopticMap(shape,
                  std::vector<std::uint32_t>(
                      shape.valid() ? shape.pixels() : 0, kVoidSegment),
                  {}) {}

PanopticMap::PanopticMap(MaskShape shape, std::vector<std::uint32_t> ids,
                         std::vector<PanopticSegment> segments)
    : shape_(shape), ids_(std::move(ids)), segments_(std::move(segments)) {
  if (!shape_.valid()) {
    throw Error(ErrorKind::kDimension,
                "panoptic map: dimensions must be positive, got " +
                    to_string(shape_));
  }
  if (static_cast<std::int64_t>(ids_.size()) != shape_.pixels()) {
    throw Error(ErrorKind::kDimension,
                "panoptic map: " + std::to_string(ids_.size()) +
                    " ids for canvas " + to_string(shape_));
  }
  std::unordered_map<std::uint32_t, std::int64_t> counts;
  for (std::uint32_t id : ids_) {
    if (id != kVoidSegment) ++counts[id];
  }
  std::unordered_map<std::uint32_t, bool> listed;
  for (const PanopticSegment& s : segments_) {
    if (s.id == kVoidSegment) {
      throw Error(ErrorKind::kIntegrity, "segment table uses the void id 0");
    }
    if (listed.count(s.id)) {
      throw Error(ErrorKind::kIntegrity,
                  "segment id " + std::to_string(s.id) + " listed twice");
    }
    listed[s.id] = true;
    const auto it = counts.find(s.id);
    const std::int64_t actual = it == counts.end() ? 0 : it->second;
    if (actual != s.area) {
      throw Error(ErrorKind::kIntegrity,
                  "segment " + std::to_string(s.id) + " claims area " +
                      std::to_string(s.area) + " but covers " +
                      std::to_string(actual) + " pixels");
    }
  }
  for (const auto& [id, count] : counts) {
    if (!listed.count(id)) {
      throw Error(ErrorKind::kIntegrity,
                  "pixel id " + std::to_string(id) +
                      " has no segment entry");
    }
  }
}

const PanopticSegment* PanopticMap::find(std::uint32_t id) const {
  for (const PanopticSegment& s : segments_) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

BinaryMask PanopticMap::segment_mask(std::uint32_t id) const {
  RleBuilder builder(shape_);
  for (int c = 0; c < shape_.width; ++c) {
    for (int r = 0; r < shape_.height; ++r) builder.push(at(r, c) == id, 1);
  }
  return std::move(builder).finish();
}

bool PanopticMap::has_dense_ids() const {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].id != i + 1) return false;
  }
  return true;
}

}  // namespace mixseg
