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

#include "mixseg/matching.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixseg/error.h"

namespace mixseg {

namespace {

// -log(p) with p floored at the clamp; a certain correct prediction costs 0.
double neg_log(double p) { return -std::log(std::max(p, kProbabilityClamp)); }

const std::vector<double>& require_probs(const Prediction& pred) {
  if (!pred.class_probs) {
    throw Error(ErrorKind::kNotFound, "prediction has no class probabilities");
  }
  return *pred.class_probs;
}

}  // namespace

CostMatrix::CostMatrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) {
    throw Error(ErrorKind::kDimension, "negative cost matrix size");
  }
  data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const int n = static_cast<int>(rows.size());
  const int m = n == 0 ? 0 : static_cast<int>(rows.front().size());
  CostMatrix out(n, m);
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(rows[r].size()) != m) {
      throw Error(ErrorKind::kDimension, "ragged cost matrix");
    }
    for (int c = 0; c < m; ++c) out(r, c) = rows[r][c];
  }
  return out;
}

double classification_loss(std::span<const double> class_probs,
                           int class_index) {
  if (class_index < 0 || class_index >= static_cast<int>(class_probs.size())) {
    throw Error(ErrorKind::kDimension,
                "class index " + std::to_string(class_index) +
                    " outside distribution of length " +
                    std::to_string(class_probs.size()));
  }
  return neg_log(class_probs[class_index]);
}

double mask_bce_loss(const SoftMask& soft, const BinaryMask& target) {
  require_same_shape(soft.shape(), target.shape(), "mask_bce_loss");
  const DenseMask truth = decode_rle(target);
  const std::span<const float> values = soft.values();
  const std::span<const std::uint8_t> bits = truth.bits();
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double p = values[i];
    sum += bits[i] ? neg_log(p) : neg_log(1.0 - p);
  }
  return sum / static_cast<double>(values.size());
}

double pair_cost(const Prediction& pred, const GroundTruthSegment& gt) {
  const std::vector<double>& probs = require_probs(pred);
  if (gt.class_index >= static_cast<int>(probs.size()) - 1) {
    throw Error(ErrorKind::kDimension,
                "ground-truth class index " + std::to_string(gt.class_index) +
                    " addresses the no-object slot or beyond");
  }
  return classification_loss(probs, gt.class_index) +
         mask_bce_loss(pred.soft_mask, gt.mask);
}

Assignment hungarian_assign(const CostMatrix& cost) {
  const int n = cost.rows();
  const int m = cost.cols();
  if (n > m) {
    throw Error(ErrorKind::kInfeasible,
                std::to_string(n) + " ground-truth segments but only " +
                    std::to_string(m) + " predictions");
  }
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < m; ++c) {
      if (!std::isfinite(cost(r, c))) {
        throw Error(ErrorKind::kConfig, "non-finite assignment cost");
      }
    }
  }

  // 1-based potentials; column_owner[j] is the row assigned to column j.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> column_owner(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    column_owner[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = column_owner[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[column_owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (column_owner[j0] != 0);
    do {
      const int j1 = way[j0];
      column_owner[j0] = column_owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  out.pairs.assign(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (column_owner[j] != 0) {
      out.pairs[column_owner[j] - 1] = j - 1;
    } else {
      out.unmatched_predictions.push_back(j - 1);
    }
  }
  for (int r = 0; r < n; ++r) out.total_cost += cost(r, out.pairs[r]);
  return out;
}

LossBreakdown set_loss(std::span<const Prediction> preds,
                       std::span<const GroundTruthSegment> gts) {
  const int n = static_cast<int>(preds.size());
  const int g = static_cast<int>(gts.size());
  CostMatrix cost(g, n);
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < n; ++c) cost(r, c) = pair_cost(preds[c], gts[r]);
  }
  const Assignment assignment = hungarian_assign(cost);

  LossBreakdown loss;
  for (int r = 0; r < g; ++r) {
    const Prediction& p = preds[assignment.pairs[r]];
    loss.classification_part +=
        classification_loss(require_probs(p), gts[r].class_index);
    loss.mask_part += mask_bce_loss(p.soft_mask, gts[r].mask);
  }
  for (int c : assignment.unmatched_predictions) {
    const std::vector<double>& probs = require_probs(preds[c]);
    loss.classification_part +=
        classification_loss(probs, static_cast<int>(probs.size()) - 1);
  }
  loss.total = loss.classification_part + loss.mask_part;
  return loss;
}

}  // namespace mixseg
