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

// Panoptic fusion of scored, possibly overlapping mask predictions.
//
// Two algorithms are provided. `original_fusion` keeps masks whose arg-max
// class is not background and whose confidence passes a threshold, then paints
// them greedily by descending score, accepting a mask only if enough of it is
// still unclaimed. `esf_omi_fusion` filters on the best non-background
// confidence, removes near-duplicate masks with mask-level NMS, and in
// addition lets a mask that lies (almost) entirely inside one already placed
// segment be painted on top of it, so small objects on large ones survive.
//
// Placement order for both: score descending, then mask area descending, then
// input position ascending.

#ifndef MIXSEG_POSTPROC_H_
#define MIXSEG_POSTPROC_H_

#include <span>
#include <vector>

#include "mixseg/labelspace.h"
#include "mixseg/mask.h"
#include "mixseg/panoptic.h"
#include "mixseg/semantics.h"

namespace mixseg {

struct ScoredMask {
  BinaryMask mask;
  // Arg-max slot over C+1 classes; C means background.
  int label = 0;
  double score = 0.0;
  bool is_background = false;
  // Arg-max over the C foreground slots only, and its probability.
  int fg_label = 0;
  double fg_score = 0.0;
};

struct FusionConfig {
  double score_threshold = 0.5;
  double nms_iou_threshold = 0.8;
  double containment_slack = 0.1;
  double min_visible_ratio = 0.8;
  double binarize_threshold = kDefaultBinarizeThreshold;

  static FusionConfig original_defaults();
  static FusionConfig esf_omi_defaults();

  // Throws kConfig unless every field lies in (0,1).
  void validate() const;
};

enum class FusionAlgorithm { kOriginal, kEsfOmi };

// Ties in probability go to the lowest class index. Throws kNotFound without
// class probabilities and kConfig for a distribution of length < 2.
ScoredMask score_and_label(const Prediction& pred,
                           double binarize_threshold = kDefaultBinarizeThreshold);

PanopticMap original_fusion(std::span<const ScoredMask> masks,
                            const LabelSpace& space, const FusionConfig& cfg);

// Greedy pass in placement order; a mask is dropped if its IoU with any kept
// mask exceeds `iou_threshold`. Masks of different classes are compared too.
// The result is in placement order.
std::vector<ScoredMask> mask_nms(std::span<const ScoredMask> masks,
                                 double iou_threshold);

PanopticMap esf_omi_fusion(std::span<const ScoredMask> masks,
                           const LabelSpace& space, const FusionConfig& cfg);

PanopticMap fuse(FusionAlgorithm algorithm, std::span<const ScoredMask> masks,
                 const LabelSpace& space, const FusionConfig& cfg);

}  // namespace mixseg

#endif  // MIXSEG_POSTPROC_H_
