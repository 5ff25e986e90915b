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

// Binary mask primitives. Masks are stored run-length encoded in column-major
// scan order, alternating zero-runs and one-runs and always starting with the
// zero-run (which may have length 0). This is the layout used by COCO-style
// uncompressed RLE, so externally produced masks interoperate bit-exactly.
//
// All set operations below walk the two run lists in lockstep and never
// materialize pixels.

#ifndef MIXSEG_MASK_H_
#define MIXSEG_MASK_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mixseg {

struct MaskShape {
  int height = 0;
  int width = 0;

  std::int64_t pixels() const {
    return static_cast<std::int64_t>(height) * width;
  }
  bool valid() const { return height > 0 && width > 0; }
  bool operator==(const MaskShape&) const = default;
};

std::string to_string(const MaskShape& shape);

// Throws kDimension unless `a == b`. `what` names the caller in the message.
void require_same_shape(const MaskShape& a, const MaskShape& b,
                        const char* what);

// Row-major per-pixel bit grid. Used at the edges (decoding, painting, file
// formats); geometry runs on BinaryMask.
class DenseMask {
 public:
  DenseMask() = default;
  explicit DenseMask(MaskShape shape);  // all zero
  DenseMask(MaskShape shape, std::vector<std::uint8_t> bits);

  const MaskShape& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }

  bool at(int row, int col) const {
    return bits_[static_cast<std::size_t>(row) * shape_.width + col] != 0;
  }
  void set(int row, int col, bool value = true) {
    bits_[static_cast<std::size_t>(row) * shape_.width + col] = value ? 1 : 0;
  }
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::int64_t count() const;

  bool operator==(const DenseMask&) const = default;

 private:
  MaskShape shape_;
  std::vector<std::uint8_t> bits_;
};

class BinaryMask {
 public:
  using Run = std::uint32_t;

  // A 0x0 placeholder; every operation rejects it.
  BinaryMask() = default;

  // Validates the run list: it must be non-empty, sum to height*width, and
  // only the leading zero-run may have length 0. Throws kCorruption otherwise
  // and kDimension for non-positive dimensions.
  static BinaryMask from_runs(MaskShape shape, std::vector<Run> runs);
  static BinaryMask empty(MaskShape shape);
  static BinaryMask full(MaskShape shape);
  // Axis-aligned box covering rows [row0, row1) and columns [col0, col1),
  // clipped to the canvas.
  static BinaryMask box(MaskShape shape, int row0, int col0, int row1,
                        int col1);

  const MaskShape& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  const std::vector<Run>& runs() const { return runs_; }

  // Number of set pixels.
  std::int64_t area() const { return area_; }
  bool is_empty() const { return area_ == 0; }

  bool operator==(const BinaryMask& other) const {
    return shape_ == other.shape_ && runs_ == other.runs_;
  }

 private:
  BinaryMask(MaskShape shape, std::vector<Run> runs, std::int64_t area)
      : shape_(shape), runs_(std::move(runs)), area_(area) {}

  friend class RleBuilder;

  MaskShape shape_;
  std::vector<Run> runs_;
  std::int64_t area_ = 0;
};

// Appends bits in column-major order and emits canonical runs.
class RleBuilder {
 public:
  explicit RleBuilder(MaskShape shape);

  void push(bool bit, std::int64_t length);
  // Fails with kCorruption if fewer than height*width pixels were pushed.
  BinaryMask finish() &&;

 private:
  MaskShape shape_;
  std::vector<BinaryMask::Run> runs_;
  bool current_bit_ = false;
  std::int64_t pushed_ = 0;
  std::int64_t area_ = 0;
};

// Throws kDimension for an empty grid.
BinaryMask encode_rle(const DenseMask& dense);
DenseMask decode_rle(const BinaryMask& mask);

// |a ∩ b|. Throws kDimension on shape mismatch.
std::int64_t intersection_area(const BinaryMask& a, const BinaryMask& b);

// |a ∩ b| / |a ∪ b|, and 0 when both masks are empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b);
// a ∖ b
BinaryMask mask_difference(const BinaryMask& a, const BinaryMask& b);

// Decoder output m ∈ [0,1]^{H×W}, row-major.
class SoftMask {
 public:
  SoftMask() = default;
  // Throws kDimension for non-positive dimensions or a size mismatch and
  // kConfig for values outside [0,1] (NaN included).
  SoftMask(MaskShape shape, std::vector<float> values);

  static SoftMask from_binary(const BinaryMask& mask);

  const MaskShape& shape() const { return shape_; }
  float at(int row, int col) const {
    return values_[static_cast<std::size_t>(row) * shape_.width + col];
  }
  std::span<const float> values() const { return values_; }

 private:
  MaskShape shape_;
  std::vector<float> values_;
};

inline constexpr double kDefaultBinarizeThreshold = 0.5;

// Pixel set iff value > threshold. Throws kConfig unless threshold ∈ (0,1).
BinaryMask binarize_soft_mask(const SoftMask& mask,
                              double threshold = kDefaultBinarizeThreshold);

// True iff |small ∩ big| / |small| ≥ 1 − slack. Throws kDegenerateInput for an
// empty `small` and kConfig unless slack ∈ [0,1).
bool contains_with_slack(const BinaryMask& big, const BinaryMask& small,
                         double slack);

}  // namespace mixseg

#endif  // MIXSEG_MASK_H_
