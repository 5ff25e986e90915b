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

#ifndef MIXSEG_PANOPTIC_H_
#define MIXSEG_PANOPTIC_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mixseg/mask.h"

namespace mixseg {

inline constexpr std::uint32_t kVoidSegment = 0;

struct PanopticSegment {
  std::uint32_t id = 0;
  int category_id = 0;
  std::int64_t area = 0;
  bool is_thing = false;

  bool operator==(const PanopticSegment&) const = default;
};

// Per-pixel segment ids (row-major, 0 = void) plus the segment table.
class PanopticMap {
 public:
  PanopticMap() = default;
  // All void.
  explicit PanopticMap(MaskShape shape);
  // Validates that every non-zero id has exactly one segment entry, every
  // entry has a non-zero id, and areas equal pixel counts (kIntegrity).
  PanopticMap(MaskShape shape, std::vector<std::uint32_t> ids,
              std::vector<PanopticSegment> segments);

  const MaskShape& shape() const { return shape_; }
  std::uint32_t at(int row, int col) const {
    return ids_[static_cast<std::size_t>(row) * shape_.width + col];
  }
  std::span<const std::uint32_t> ids() const { return ids_; }
  const std::vector<PanopticSegment>& segments() const { return segments_; }

  const PanopticSegment* find(std::uint32_t id) const;
  BinaryMask segment_mask(std::uint32_t id) const;
  // Segment ids are exactly 1..n in table order.
  bool has_dense_ids() const;

  bool operator==(const PanopticMap&) const = default;

 private:
  MaskShape shape_;
  std::vector<std::uint32_t> ids_;
  std::vector<PanopticSegment> segments_;
};

}  // namespace mixseg

#endif  // MIXSEG_PANOPTIC_H_
