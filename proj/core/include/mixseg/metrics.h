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

// Evaluation: semantic segmentation scores from a confusion matrix, panoptic
// quality, COCO-style mask AP, and panoptic instance quality (PIQ), which
// scores thing categories by AP on raw (possibly overlapping) instance
// predictions and stuff categories by PQ, then macro-averages per category.
//
// All accumulators (SemanticConfusion, PQStats, InstanceEvaluator) are
// associative and commutative, so images may be processed in any order or in
// parallel and merged.

#ifndef MIXSEG_METRICS_H_
#define MIXSEG_METRICS_H_

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixseg/labelspace.h"
#include "mixseg/mask.h"
#include "mixseg/panoptic.h"

namespace mixseg {

// ---------------------------------------------------------------------------
// Semantic segmentation

inline constexpr int kVoidClass = -1;

// Per-pixel class positions (0..C-1) in row-major order; kVoidClass = void.
struct ClassMap {
  MaskShape shape;
  std::vector<int> classes;
};

ClassMap class_map_from_panoptic(const PanopticMap& map,
                                 const LabelSpace& space);

// (C+1)×(C+1) pixel counts indexed [gt][pred]; the last row/column is void.
class SemanticConfusion {
 public:
  explicit SemanticConfusion(int num_classes);

  // Pixels with void ground truth are not counted. Throws kDimension on a
  // shape mismatch and kNotFound for class ids outside [0, C) ∪ {void}.
  void add(const ClassMap& pred, const ClassMap& gt);
  void merge(const SemanticConfusion& other);

  int num_classes() const { return num_classes_; }
  std::int64_t at(int gt, int pred) const {
    return counts_[static_cast<std::size_t>(gt) * (num_classes_ + 1) + pred];
  }
  std::int64_t total() const;

 private:
  int num_classes_;
  std::vector<std::int64_t> counts_;
};

struct SemanticScores {
  double miou = 0.0;
  double fwiou = 0.0;
  double macc = 0.0;
  double pacc = 0.0;
};

// Classes absent from both prediction and ground truth are left out of the
// mIoU mean; classes without ground truth pixels are left out of mACC.
SemanticScores summarize(const SemanticConfusion& confusion);

SemanticScores semantic_metrics(const ClassMap& pred, const ClassMap& gt,
                                const LabelSpace& space);

// ---------------------------------------------------------------------------
// Area bands

struct AreaRange {
  double min = 0.0;
  double max = std::numeric_limits<double>::infinity();

  // Half-open [min, max).
  bool contains(std::int64_t area) const {
    return static_cast<double>(area) >= min &&
           static_cast<double>(area) < max;
  }
};

inline constexpr AreaRange kAreaAll{};
inline constexpr AreaRange kAreaSmall{0.0, 32.0 * 32.0};
inline constexpr AreaRange kAreaMedium{32.0 * 32.0, 96.0 * 96.0};
inline constexpr AreaRange kAreaLarge{96.0 * 96.0,
                                      std::numeric_limits<double>::infinity()};

// ---------------------------------------------------------------------------
// Panoptic quality

struct PQCategoryStats {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  double iou_sum = 0.0;
};

struct PQOptions {
  // Segments match iff same category and IoU > match_iou. Must be ≥ 0.5 so
  // that matches are unique.
  double match_iou = 0.5;
  // Ground truth outside the band is ignored, as are predictions matched to it
  // and unmatched predictions outside the band.
  AreaRange area = kAreaAll;
};

class PQStats {
 public:
  // Throws kDimension on shape mismatch, kConfig for match_iou < 0.5 and
  // kNotFound for segment categories missing from `space`.
  void add(const PanopticMap& pred, const PanopticMap& gt,
           const LabelSpace& space, const PQOptions& options = {});
  void merge(const PQStats& other);

  // Keyed by category id.
  const std::map<int, PQCategoryStats>& per_category() const {
    return per_category_;
  }

 private:
  std::map<int, PQCategoryStats> per_category_;
};

struct PQValues {
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  int num_categories = 0;
};

struct PQReport {
  std::map<int, PQValues> per_category;
  PQValues all;
  PQValues things;
  PQValues stuff;
};

// Per-category values for every category with TP + FP + FN > 0; aggregates
// average over those categories.
PQReport summarize(const PQStats& stats, const LabelSpace& space);

PQReport panoptic_quality(const PanopticMap& pred, const PanopticMap& gt,
                          const LabelSpace& space,
                          const PQOptions& options = {});

// ---------------------------------------------------------------------------
// Instance segmentation AP

struct DetectionRecord {
  int image_id = 0;
  int category_id = 0;
  double score = 0.0;
  BinaryMask mask;
};

struct InstanceAnnotation {
  int image_id = 0;
  int category_id = 0;
  BinaryMask mask;
};

// 0.50, 0.55, …, 0.95
std::vector<double> coco_iou_thresholds();

struct APOptions {
  std::vector<double> iou_thresholds = coco_iou_thresholds();
  int max_detections_per_image = 100;
};

// Score-ranked greedy matching per image, then 101-point interpolated
// precision per (category, threshold, area band).
class InstanceEvaluator {
 public:
  explicit InstanceEvaluator(APOptions options = {});

  // Evaluates one image. Throws kDimension on mask shape mismatch and
  // kConfig for scores outside [0,1].
  void add_image(int image_id, std::span<const DetectionRecord> dets,
                 std::span<const InstanceAnnotation> gts);
  void merge(const InstanceEvaluator& other);

  const APOptions& options() const { return options_; }

  // AP of one category at threshold index `t` within `area`; nullopt when the
  // category has no ground truth in the band.
  std::optional<double> average_precision(int category_id, std::size_t t,
                                          const AreaRange& area) const;
  // Mean over all thresholds; nullopt as above.
  std::optional<double> mean_average_precision(int category_id,
                                               const AreaRange& area) const;
  // Index of `iou` in the threshold list; throws kNotFound.
  std::size_t threshold_index(double iou) const;
  // Categories seen in any detection or ground truth, ascending.
  std::vector<int> categories() const;
  // Number of ground-truth instances of a category (all areas).
  std::int64_t num_ground_truth(int category_id) const;

 private:
  struct Key {
    int category;
    int band;  // index into kBands
    std::size_t threshold;
    auto operator<=>(const Key&) const = default;
  };
  struct DetEntry {
    double score;
    int image_id;
    int rank;  // position within its image after score sorting
    bool matched;
    bool ignored;
  };
  struct Accumulated {
    std::vector<DetEntry> dets;
    std::int64_t num_positives = 0;
  };

  APOptions options_;
  std::map<Key, Accumulated> acc_;
  std::map<int, std::int64_t> gt_count_;
};

// Summary value when no category has ground truth (COCO convention).
inline constexpr double kUndefinedScore = -1.0;

// Summary values are kUndefinedScore when no category has ground truth in
// the band.
struct APReport {
  double ap = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  double ap_s = 0.0;
  double ap_m = 0.0;
  double ap_l = 0.0;
  // Mean over thresholds, categories with ground truth only.
  std::map<int, double> per_category;
};

APReport summarize(const InstanceEvaluator& evaluator);

// Groups by image and runs an InstanceEvaluator.
APReport instance_ap(std::span<const DetectionRecord> dets,
                     std::span<const InstanceAnnotation> gts,
                     const APOptions& options = {});

// ---------------------------------------------------------------------------
// Panoptic instance quality

enum class PiqAggregation {
  // Every category counts once: AP_c for things, PQ_c for stuff.
  kCategoryMacro,
  // Mean of (mean thing AP, mean stuff PQ).
  kThingStuffSplit,
  // Categories weighted by their ground-truth instance / segment count.
  kInstanceWeighted,
};

struct PIQReport {
  // Percentages in [0, 100], or kUndefinedScore for an empty band.
  double piq = 0.0;
  double piq50 = 0.0;
  double piq75 = 0.0;
  double piq_s = 0.0;
  double piq_m = 0.0;
  double piq_l = 0.0;
  // The two alternative aggregations of the headline value.
  double piq_split = 0.0;
  double piq_instance = 0.0;
  // Per-category contribution in [0,1] (AP_c or PQ_c).
  std::map<int, double> per_category;
};

// One evaluated image: fused panoptic prediction and ground truth.
struct PanopticPair {
  int image_id = 0;
  PanopticMap pred;
  PanopticMap gt;
};

struct PiqInputs {
  std::span<const DetectionRecord> thing_detections;
  std::span<const InstanceAnnotation> thing_ground_truth;
  std::span<const PanopticPair> panoptic;
};

// Throws kNotFound if a detection or segment references a category missing
// from `space`.
PIQReport piq_score(const PiqInputs& inputs, const LabelSpace& space);

// Combines per-category scores; exposed so aggregation can be checked on its
// own. `thing_scores` / `stuff_scores` map category id → score in [0,1];
// `weights` (optional) maps category id → instance count.
double piq_aggregate(const std::map<int, double>& thing_scores,
                     const std::map<int, double>& stuff_scores,
                     PiqAggregation aggregation,
                     const std::map<int, double>& weights = {});

// ---------------------------------------------------------------------------
// Benchmark averaging

// Unweighted mean. Throws kDegenerateInput for an empty list.
double benchmark_average(std::span<const double> values);

// Key-wise unweighted mean over sub-dataset reports; keys missing from any
// report are dropped. Throws kDegenerateInput for an empty list.
std::map<std::string, double> benchmark_average(
    std::span<const std::map<std::string, double>> reports);

}  // namespace mixseg

#endif  // MIXSEG_METRICS_H_
