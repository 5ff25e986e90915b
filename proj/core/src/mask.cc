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

#include "mixseg/mask.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixseg/error.h"

namespace mixseg {

namespace {

constexpr std::int64_t kMaxPixels = std::numeric_limits<BinaryMask::Run>::max();

void require_valid_shape(const MaskShape& shape, const char* what) {
  if (!shape.valid()) {
    throw Error(ErrorKind::kDimension,
                std::string(what) + ": dimensions must be positive, got " +
                    to_string(shape));
  }
  if (shape.pixels() > kMaxPixels) {
    throw Error(ErrorKind::kDimension,
                std::string(what) + ": canvas too large " + to_string(shape));
  }
}

// Position inside a run list, skipping zero-length runs.
class RunCursor {
 public:
  explicit RunCursor(const std::vector<BinaryMask::Run>& runs) : runs_(runs) {
    left_ = runs_[0];
    skip_empty();
  }

  bool done() const { return left_ == 0; }
  bool bit() const { return bit_; }
  std::int64_t left() const { return left_; }

  void advance(std::int64_t n) {
    left_ -= n;
    skip_empty();
  }

 private:
  void skip_empty() {
    while (left_ == 0 && index_ + 1 < runs_.size()) {
      ++index_;
      left_ = runs_[index_];
      bit_ = !bit_;
    }
  }

  const std::vector<BinaryMask::Run>& runs_;
  std::size_t index_ = 0;
  std::int64_t left_ = 0;
  bool bit_ = false;
};

// Calls visit(bit_a, bit_b, length) over maximal stretches where both masks
// are constant.
template <typename Visit>
void walk_pair(const BinaryMask& a, const BinaryMask& b, const char* what,
               Visit&& visit) {
  require_valid_shape(a.shape(), what);
  require_same_shape(a.shape(), b.shape(), what);
  RunCursor ca(a.runs());
  RunCursor cb(b.runs());
  while (!ca.done() && !cb.done()) {
    const std::int64_t len = std::min(ca.left(), cb.left());
    visit(ca.bit(), cb.bit(), len);
    ca.advance(len);
    cb.advance(len);
  }
}

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, const char* what,
                   Op op) {
  RleBuilder builder(a.shape());
  walk_pair(a, b, what, [&](bool x, bool y, std::int64_t len) {
    builder.push(op(x, y), len);
  });
  return std::move(builder).finish();
}

}  // namespace

std::string to_string(const MaskShape& shape) {
  return std::to_string(shape.height) + "x" + std::to_string(shape.width);
}

void require_same_shape(const MaskShape& a, const MaskShape& b,
                        const char* what) {
  if (a != b) {
    throw Error(ErrorKind::kDimension, std::string(what) + ": shape " +
                                           to_string(a) + " vs " + to_string(b));
  }
}

DenseMask::DenseMask(MaskShape shape)
    : DenseMask(shape, std::vector<std::uint8_t>(
                           shape.valid() ? shape.pixels() : 0, 0)) {}

DenseMask::DenseMask(MaskShape shape, std::vector<std::uint8_t> bits)
    : shape_(shape), bits_(std::move(bits)) {
  require_valid_shape(shape_, "DenseMask");
  if (static_cast<std::int64_t>(bits_.size()) != shape_.pixels()) {
    throw Error(ErrorKind::kDimension,
                "DenseMask: " + std::to_string(bits_.size()) +
                    " bits for canvas " + to_string(shape_));
  }
}

std::int64_t DenseMask::count() const {
  return std::count_if(bits_.begin(), bits_.end(),
                       [](std::uint8_t b) { return b != 0; });
}

RleBuilder::RleBuilder(MaskShape shape) : shape_(shape) {
  require_valid_shape(shape_, "RleBuilder");
}

void RleBuilder::push(bool bit, std::int64_t length) {
  if (length <= 0) return;
  if (pushed_ + length > shape_.pixels()) {
    throw Error(ErrorKind::kCorruption,
                "run lengths exceed canvas " + to_string(shape_));
  }
  if (runs_.empty()) {
    if (bit) runs_.push_back(0);
    runs_.push_back(static_cast<BinaryMask::Run>(length));
  } else if (bit == current_bit_) {
    runs_.back() += static_cast<BinaryMask::Run>(length);
  } else {
    runs_.push_back(static_cast<BinaryMask::Run>(length));
  }
  current_bit_ = bit;
  pushed_ += length;
  if (bit) area_ += length;
}

BinaryMask RleBuilder::finish() && {
  if (pushed_ != shape_.pixels()) {
    throw Error(ErrorKind::kCorruption,
                "runs cover " + std::to_string(pushed_) + " of " +
                    std::to_string(shape_.pixels()) + " pixels");
  }
  return BinaryMask(shape_, std::move(runs_), area_);
}

BinaryMask BinaryMask::from_runs(MaskShape shape, std::vector<Run> runs) {
  require_valid_shape(shape, "BinaryMask");
  if (runs.empty()) {
    throw Error(ErrorKind::kCorruption, "empty run list");
  }
  std::int64_t total = 0;
  std::int64_t area = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i] == 0 && i != 0) {
      throw Error(ErrorKind::kCorruption,
                  "zero-length run at position " + std::to_string(i));
    }
    total += runs[i];
    if (i % 2 == 1) area += runs[i];
  }
  if (total != shape.pixels()) {
    throw Error(ErrorKind::kCorruption,
                "run sum " + std::to_string(total) + " != " +
                    std::to_string(shape.pixels()) + " pixels of " +
                    to_string(shape));
  }
  return BinaryMask(shape, std::move(runs), area);
}

BinaryMask BinaryMask::empty(MaskShape shape) {
  require_valid_shape(shape, "BinaryMask::empty");
  return BinaryMask(shape, {static_cast<Run>(shape.pixels())}, 0);
}

BinaryMask BinaryMask::full(MaskShape shape) {
  require_valid_shape(shape, "BinaryMask::full");
  return BinaryMask(shape, {0, static_cast<Run>(shape.pixels())},
                    shape.pixels());
}

BinaryMask BinaryMask::box(MaskShape shape, int row0, int col0, int row1,
                           int col1) {
  RleBuilder builder(shape);
  row0 = std::clamp(row0, 0, shape.height);
  row1 = std::clamp(row1, row0, shape.height);
  col0 = std::clamp(col0, 0, shape.width);
  col1 = std::clamp(col1, col0, shape.width);
  for (int c = 0; c < shape.width; ++c) {
    if (c < col0 || c >= col1) {
      builder.push(false, shape.height);
      continue;
    }
    builder.push(false, row0);
    builder.push(true, row1 - row0);
    builder.push(false, shape.height - row1);
  }
  return std::move(builder).finish();
}

BinaryMask encode_rle(const DenseMask& dense) {
  require_valid_shape(dense.shape(), "encode_rle");
  RleBuilder builder(dense.shape());
  bool bit = false;
  std::int64_t run = 0;
  for (int c = 0; c < dense.width(); ++c) {
    for (int r = 0; r < dense.height(); ++r) {
      const bool v = dense.at(r, c);
      if (v != bit) {
        builder.push(bit, run);
        bit = v;
        run = 0;
      }
      ++run;
    }
  }
  builder.push(bit, run);
  return std::move(builder).finish();
}

DenseMask decode_rle(const BinaryMask& mask) {
  require_valid_shape(mask.shape(), "decode_rle");
  DenseMask dense(mask.shape());
  const int h = mask.height();
  std::int64_t pos = 0;
  bool bit = false;
  for (BinaryMask::Run run : mask.runs()) {
    if (bit) {
      for (std::int64_t p = pos; p < pos + run; ++p) {
        dense.set(static_cast<int>(p % h), static_cast<int>(p / h));
      }
    }
    pos += run;
    bit = !bit;
  }
  return dense;
}

std::int64_t intersection_area(const BinaryMask& a, const BinaryMask& b) {
  std::int64_t inter = 0;
  walk_pair(a, b, "intersection_area", [&](bool x, bool y, std::int64_t len) {
    if (x && y) inter += len;
  });
  return inter;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  const std::int64_t inter = intersection_area(a, b);
  const std::int64_t uni = a.area() + b.area() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask_union", [](bool x, bool y) { return x || y; });
}

BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask_intersection",
                 [](bool x, bool y) { return x && y; });
}

BinaryMask mask_difference(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask_difference",
                 [](bool x, bool y) { return x && !y; });
}

SoftMask::SoftMask(MaskShape shape, std::vector<float> values)
    : shape_(shape), values_(std::move(values)) {
  require_valid_shape(shape_, "SoftMask");
  if (static_cast<std::int64_t>(values_.size()) != shape_.pixels()) {
    throw Error(ErrorKind::kDimension,
                "SoftMask: " + std::to_string(values_.size()) +
                    " values for canvas " + to_string(shape_));
  }
  for (float v : values_) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error(ErrorKind::kConfig,
                  "SoftMask: activation " + std::to_string(v) +
                      " outside [0,1]");
    }
  }
}

SoftMask SoftMask::from_binary(const BinaryMask& mask) {
  const DenseMask dense = decode_rle(mask);
  std::vector<float> values(dense.bits().begin(), dense.bits().end());
  return SoftMask(mask.shape(), std::move(values));
}

BinaryMask binarize_soft_mask(const SoftMask& mask, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorKind::kConfig, "binarize threshold " +
                                        std::to_string(threshold) +
                                        " outside (0,1)");
  }
  const MaskShape shape = mask.shape();
  require_valid_shape(shape, "binarize_soft_mask");
  RleBuilder builder(shape);
  bool bit = false;
  std::int64_t run = 0;
  for (int c = 0; c < shape.width; ++c) {
    for (int r = 0; r < shape.height; ++r) {
      const bool v = mask.at(r, c) > threshold;
      if (v != bit) {
        builder.push(bit, run);
        bit = v;
        run = 0;
      }
      ++run;
    }
  }
  builder.push(bit, run);
  return std::move(builder).finish();
}

bool contains_with_slack(const BinaryMask& big, const BinaryMask& small,
                         double slack) {
  if (!(slack >= 0.0 && slack < 1.0)) {
    throw Error(ErrorKind::kConfig,
                "containment slack " + std::to_string(slack) +
                    " outside [0,1)");
  }
  require_same_shape(big.shape(), small.shape(), "contains_with_slack");
  if (small.is_empty()) {
    throw Error(ErrorKind::kDegenerateInput,
                "contains_with_slack: contained mask is empty");
  }
  const auto inter = static_cast<double>(intersection_area(big, small));
  const auto area = static_cast<double>(small.area());
  // The tolerance absorbs the rounding of (1 - slack) so that exact integer
  // ratios such as 9/10 against slack 0.1 compare as equal.
  return inter >= (1.0 - slack) * area - 1e-9 * area;
}

}  // namespace mixseg
