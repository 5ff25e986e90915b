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

#include "mixseg/postproc.h"

#include <algorithm>
#include <map>
#include <numeric>

#include "mixseg/error.h"

namespace mixseg {

namespace {

void require_unit_interval(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    throw Error(ErrorKind::kConfig, std::string(name) + " = " +
                                        std::to_string(v) +
                                        " outside (0,1)");
  }
}

std::vector<std::size_t> placement_order(std::span<const ScoredMask> masks) {
  std::vector<std::size_t> order(masks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     if (masks[a].score != masks[b].score) {
                       return masks[a].score > masks[b].score;
                     }
                     return masks[a].mask.area() > masks[b].mask.area();
                   });
  return order;
}

// Segment ownership in column-major order, so masks can be applied run by
// run.
class Canvas {
 public:
  explicit Canvas(MaskShape shape)
      : shape_(shape), owner_(shape.pixels(), kVoidSegment) {}

  template <typename F>
  void for_each_pixel(const BinaryMask& mask, F&& f) {
    std::int64_t pos = 0;
    bool bit = false;
    for (BinaryMask::Run run : mask.runs()) {
      if (bit) {
        for (std::int64_t p = pos; p < pos + run; ++p) f(owner_[p]);
      }
      pos += run;
      bit = !bit;
    }
  }

  std::int64_t count_free(const BinaryMask& mask) {
    std::int64_t n = 0;
    for_each_pixel(mask, [&](std::uint32_t& o) { n += o == kVoidSegment; });
    return n;
  }

  // Overlap of `mask` with every segment id in [1, num_ids].
  std::vector<std::int64_t> overlap_by_owner(const BinaryMask& mask,
                                             std::uint32_t num_ids) {
    std::vector<std::int64_t> counts(num_ids + 1, 0);
    for_each_pixel(mask, [&](std::uint32_t& o) { ++counts[o]; });
    return counts;
  }

  BinaryMask owned_by(std::uint32_t id) const {
    RleBuilder builder(shape_);
    bool bit = false;
    std::int64_t run = 0;
    for (std::uint32_t o : owner_) {
      const bool v = o == id;
      if (v != bit) {
        builder.push(bit, run);
        bit = v;
        run = 0;
      }
      ++run;
    }
    builder.push(bit, run);
    return std::move(builder).finish();
  }

  std::vector<std::uint32_t>& owner() { return owner_; }
  const MaskShape& shape() const { return shape_; }

 private:
  MaskShape shape_;
  std::vector<std::uint32_t> owner_;
};

struct PlacedSegment {
  int category_id;
  bool is_thing;
};

// Merges same-category stuff segments, drops segments that lost all their
// pixels and renumbers ids densely in placement order.
PanopticMap finish(Canvas& canvas, const std::vector<PlacedSegment>& placed) {
  const auto n = static_cast<std::uint32_t>(placed.size());
  std::vector<std::uint32_t> merged(n + 1, kVoidSegment);
  std::map<int, std::uint32_t> stuff_host;
  for (std::uint32_t id = 1; id <= n; ++id) {
    const PlacedSegment& s = placed[id - 1];
    merged[id] = id;
    if (!s.is_thing) {
      auto [it, inserted] = stuff_host.emplace(s.category_id, id);
      if (!inserted) merged[id] = it->second;
    }
  }

  std::vector<std::int64_t> area(n + 1, 0);
  for (std::uint32_t& o : canvas.owner()) {
    o = merged[o];
    ++area[o];
  }
  std::vector<std::uint32_t> dense(n + 1, kVoidSegment);
  std::vector<PanopticSegment> segments;
  for (std::uint32_t id = 1; id <= n; ++id) {
    if (merged[id] != id || area[id] == 0) continue;
    const auto new_id = static_cast<std::uint32_t>(segments.size() + 1);
    dense[id] = new_id;
    segments.push_back({new_id, placed[id - 1].category_id, area[id],
                        placed[id - 1].is_thing});
  }

  const MaskShape shape = canvas.shape();
  std::vector<std::uint32_t> ids(shape.pixels(), kVoidSegment);
  const std::vector<std::uint32_t>& owner = canvas.owner();
  for (int c = 0; c < shape.width; ++c) {
    for (int r = 0; r < shape.height; ++r) {
      ids[static_cast<std::size_t>(r) * shape.width + c] =
          dense[owner[static_cast<std::size_t>(c) * shape.height + r]];
    }
  }
  return PanopticMap(shape, std::move(ids), std::move(segments));
}

MaskShape common_shape(std::span<const ScoredMask> masks, const char* what) {
  if (masks.empty()) {
    throw Error(ErrorKind::kDegenerateInput,
                std::string(what) + ": no masks, canvas size unknown");
  }
  const MaskShape shape = masks.front().mask.shape();
  for (const ScoredMask& m : masks) {
    require_same_shape(shape, m.mask.shape(), what);
  }
  return shape;
}

const SegCategory& category_for(const LabelSpace& space, int label) {
  if (label < 0 || label >= space.size()) {
    throw Error(ErrorKind::kDimension,
                "class slot " + std::to_string(label) +
                    " outside label space of size " +
                    std::to_string(space.size()));
  }
  return space[label];
}

bool passes_visible_ratio(std::int64_t visible, std::int64_t area,
                          double min_visible_ratio) {
  return area > 0 && visible > 0 &&
         static_cast<double>(visible) / static_cast<double>(area) >=
             min_visible_ratio;
}

}  // namespace

FusionConfig FusionConfig::original_defaults() {
  FusionConfig cfg;
  cfg.score_threshold = 0.8;
  return cfg;
}

FusionConfig FusionConfig::esf_omi_defaults() { return FusionConfig{}; }

void FusionConfig::validate() const {
  require_unit_interval(score_threshold, "score_threshold");
  require_unit_interval(nms_iou_threshold, "nms_iou_threshold");
  require_unit_interval(containment_slack, "containment_slack");
  require_unit_interval(min_visible_ratio, "min_visible_ratio");
  require_unit_interval(binarize_threshold, "binarize_threshold");
}

ScoredMask score_and_label(const Prediction& pred, double binarize_threshold) {
  if (!pred.class_probs) {
    throw Error(ErrorKind::kNotFound, "prediction has no class probabilities");
  }
  const std::vector<double>& probs = *pred.class_probs;
  if (probs.size() < 2) {
    throw Error(ErrorKind::kConfig,
                "class distribution needs at least one class plus background");
  }
  const int background = static_cast<int>(probs.size()) - 1;
  // max_element returns the first maximum, i.e. the lowest index on ties.
  const auto best = std::max_element(probs.begin(), probs.end());
  const auto best_fg = std::max_element(probs.begin(), probs.end() - 1);

  ScoredMask out;
  out.mask = binarize_soft_mask(pred.soft_mask, binarize_threshold);
  out.label = static_cast<int>(best - probs.begin());
  out.score = *best;
  out.is_background = out.label == background;
  out.fg_label = static_cast<int>(best_fg - probs.begin());
  out.fg_score = *best_fg;
  return out;
}

PanopticMap original_fusion(std::span<const ScoredMask> masks,
                            const LabelSpace& space, const FusionConfig& cfg) {
  cfg.validate();
  Canvas canvas(common_shape(masks, "original_fusion"));
  std::vector<PlacedSegment> placed;
  for (std::size_t i : placement_order(masks)) {
    const ScoredMask& m = masks[i];
    if (m.is_background || m.score < cfg.score_threshold) continue;
    const SegCategory& category = category_for(space, m.label);
    const std::int64_t visible = canvas.count_free(m.mask);
    if (!passes_visible_ratio(visible, m.mask.area(), cfg.min_visible_ratio)) {
      continue;
    }
    placed.push_back({category.id, category.is_thing});
    const auto id = static_cast<std::uint32_t>(placed.size());
    canvas.for_each_pixel(m.mask, [id](std::uint32_t& o) {
      if (o == kVoidSegment) o = id;
    });
  }
  return finish(canvas, placed);
}

std::vector<ScoredMask> mask_nms(std::span<const ScoredMask> masks,
                                 double iou_threshold) {
  if (!masks.empty()) common_shape(masks, "mask_nms");
  std::vector<ScoredMask> kept;
  for (std::size_t i : placement_order(masks)) {
    const ScoredMask& candidate = masks[i];
    const bool duplicate =
        std::any_of(kept.begin(), kept.end(), [&](const ScoredMask& k) {
          return mask_iou(k.mask, candidate.mask) > iou_threshold;
        });
    if (!duplicate) kept.push_back(candidate);
  }
  return kept;
}

PanopticMap esf_omi_fusion(std::span<const ScoredMask> masks,
                           const LabelSpace& space, const FusionConfig& cfg) {
  cfg.validate();
  Canvas canvas(common_shape(masks, "esf_omi_fusion"));

  // Background is ignored when filtering: each mask competes with its best
  // foreground class.
  std::vector<ScoredMask> candidates;
  for (const ScoredMask& m : masks) {
    if (m.fg_score < cfg.score_threshold) continue;
    ScoredMask relabeled = m;
    relabeled.label = m.fg_label;
    relabeled.score = m.fg_score;
    relabeled.is_background = false;
    candidates.push_back(std::move(relabeled));
  }
  const std::vector<ScoredMask> kept =
      mask_nms(candidates, cfg.nms_iou_threshold);

  std::vector<PlacedSegment> placed;
  for (const ScoredMask& m : kept) {
    const SegCategory& category = category_for(space, m.label);
    const std::int64_t area = m.mask.area();
    if (area == 0) continue;
    const std::int64_t visible = canvas.count_free(m.mask);
    if (passes_visible_ratio(visible, area, cfg.min_visible_ratio)) {
      placed.push_back({category.id, category.is_thing});
      const auto id = static_cast<std::uint32_t>(placed.size());
      canvas.for_each_pixel(m.mask, [id](std::uint32_t& o) {
        if (o == kVoidSegment) o = id;
      });
      continue;
    }

    // Valid selective overlap: the only segment that can contain the mask is
    // the one it overlaps most (earliest placed on ties).
    const auto num_ids = static_cast<std::uint32_t>(placed.size());
    if (num_ids == 0) continue;
    const std::vector<std::int64_t> overlap =
        canvas.overlap_by_owner(m.mask, num_ids);
    const auto host = static_cast<std::uint32_t>(
        std::max_element(overlap.begin() + 1, overlap.end()) - overlap.begin());
    if (overlap[host] == 0) continue;
    if (!contains_with_slack(canvas.owned_by(host), m.mask,
                             cfg.containment_slack)) {
      continue;
    }
    placed.push_back({category.id, category.is_thing});
    const auto id = static_cast<std::uint32_t>(placed.size());
    canvas.for_each_pixel(m.mask, [id, host](std::uint32_t& o) {
      if (o == host || o == kVoidSegment) o = id;
    });
  }
  return finish(canvas, placed);
}

PanopticMap fuse(FusionAlgorithm algorithm, std::span<const ScoredMask> masks,
                 const LabelSpace& space, const FusionConfig& cfg) {
  switch (algorithm) {
    case FusionAlgorithm::kOriginal:
      return original_fusion(masks, space, cfg);
    case FusionAlgorithm::kEsfOmi:
      return esf_omi_fusion(masks, space, cfg);
  }
  throw Error(ErrorKind::kConfig, "unknown fusion algorithm");
}

}  // namespace mixseg
