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

// Set-prediction loss: predictions are paired one-to-one with ground truth by
// a minimum-cost assignment, then every prediction pays a classification
// cross-entropy and matched predictions additionally pay a per-pixel binary
// cross-entropy against their partner's mask. Unmatched predictions are
// supervised towards the no-object class only.

#ifndef MIXSEG_MATCHING_H_
#define MIXSEG_MATCHING_H_

#include <span>
#include <vector>

#include "mixseg/mask.h"
#include "mixseg/semantics.h"

namespace mixseg {

inline constexpr double kProbabilityClamp = 1e-7;

struct GroundTruthSegment {
  // Position of the category in the active label space (0-based), i.e. the
  // slot of p* in a prediction's class distribution.
  int class_index = 0;
  BinaryMask mask;
};

// Dense rows × cols cost matrix, rows = ground truth, cols = predictions.
class CostMatrix {
 public:
  CostMatrix(int rows, int cols, double fill = 0.0);
  // Throws kDimension for ragged input.
  static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) { return data_[index(r, c)]; }
  double operator()(int r, int c) const { return data_[index(r, c)]; }

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }

  int rows_;
  int cols_;
  std::vector<double> data_;
};

struct Assignment {
  // pairs[g] = prediction matched to ground truth g.
  std::vector<int> pairs;
  // Ascending.
  std::vector<int> unmatched_predictions;
  // Σ_g cost(g, pairs[g]), summed in ground-truth order.
  double total_cost = 0.0;
};

struct LossBreakdown {
  double total = 0.0;
  double classification_part = 0.0;
  double mask_part = 0.0;
};

// −log p[class], with p floored at kProbabilityClamp.
double classification_loss(std::span<const double> class_probs, int class_index);

// Mean per-pixel BCE between soft and binary masks; log arguments floored at
// kProbabilityClamp.
double mask_bce_loss(const SoftMask& soft, const BinaryMask& target);

// Classification loss plus mask BCE for one pair. Throws kNotFound if class_probs is missing and
// kDimension on a mask shape mismatch or out-of-range class index.
double pair_cost(const Prediction& pred, const GroundTruthSegment& gt);

// Minimum-cost injective map from rows to columns (shortest augmenting path
// with potentials, O(rows² · cols)). Throws kInfeasible when rows > cols and
// kConfig for non-finite costs.
Assignment hungarian_assign(const CostMatrix& cost);

// The set loss summed over all predictions.
LossBreakdown set_loss(std::span<const Prediction> preds,
                       std::span<const GroundTruthSegment> gts);

}  // namespace mixseg

#endif  // MIXSEG_MATCHING_H_
