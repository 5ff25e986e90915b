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

#include "mixseg/metrics.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "mixseg/error.h"

namespace mixseg {

namespace {

constexpr std::array<AreaRange, 4> kBands = {kAreaAll, kAreaSmall, kAreaMedium,
                                             kAreaLarge};
constexpr int kRecallPoints = 101;

int band_index(const AreaRange& area) {
  for (std::size_t i = 0; i < kBands.size(); ++i) {
    if (kBands[i].min == area.min && kBands[i].max == area.max) {
      return static_cast<int>(i);
    }
  }
  throw Error(ErrorKind::kConfig, "unsupported area band");
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

// kUndefinedScore when nothing contributes.
double mean_or_undefined(const std::vector<double>& v) {
  return v.empty() ? kUndefinedScore : mean(v);
}

double percent(double v) { return v < 0.0 ? v : 100.0 * v; }

template <typename T>
std::map<int, std::vector<const T*>> group_by_image(std::span<const T> items) {
  std::map<int, std::vector<const T*>> out;
  for (const T& item : items) out[item.image_id].push_back(&item);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Semantic

ClassMap class_map_from_panoptic(const PanopticMap& map,
                                 const LabelSpace& space) {
  std::unordered_map<std::uint32_t, int> position;
  for (const PanopticSegment& s : map.segments()) {
    const auto pos = space.position_of_id(s.category_id);
    if (!pos) {
      throw Error(ErrorKind::kNotFound,
                  "segment category " + std::to_string(s.category_id) +
                      " not in label space");
    }
    position[s.id] = *pos;
  }
  ClassMap out{map.shape(), std::vector<int>(map.ids().size(), kVoidClass)};
  for (std::size_t i = 0; i < map.ids().size(); ++i) {
    const std::uint32_t id = map.ids()[i];
    if (id != kVoidSegment) out.classes[i] = position.at(id);
  }
  return out;
}

SemanticConfusion::SemanticConfusion(int num_classes)
    : num_classes_(num_classes) {
  if (num_classes <= 0) {
    throw Error(ErrorKind::kConfig, "confusion matrix needs ≥ 1 class");
  }
  counts_.assign(static_cast<std::size_t>(num_classes + 1) * (num_classes + 1),
                 0);
}

void SemanticConfusion::add(const ClassMap& pred, const ClassMap& gt) {
  require_same_shape(pred.shape, gt.shape, "semantic_metrics");
  if (pred.classes.size() != gt.classes.size() ||
      static_cast<std::int64_t>(gt.classes.size()) != gt.shape.pixels()) {
    throw Error(ErrorKind::kDimension, "class map size disagrees with shape");
  }
  auto slot = [this](int c) {
    if (c == kVoidClass) return num_classes_;
    if (c < 0 || c >= num_classes_) {
      throw Error(ErrorKind::kNotFound,
                  "class " + std::to_string(c) + " outside label space");
    }
    return c;
  };
  for (std::size_t i = 0; i < gt.classes.size(); ++i) {
    const int g = slot(gt.classes[i]);
    const int p = slot(pred.classes[i]);
    if (g == num_classes_) continue;
    ++counts_[static_cast<std::size_t>(g) * (num_classes_ + 1) + p];
  }
}

void SemanticConfusion::merge(const SemanticConfusion& other) {
  if (other.num_classes_ != num_classes_) {
    throw Error(ErrorKind::kDimension, "merging confusion matrices of "
                                       "different sizes");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::int64_t SemanticConfusion::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

SemanticScores summarize(const SemanticConfusion& confusion) {
  const int c = confusion.num_classes();
  const std::int64_t total = confusion.total();
  SemanticScores out;
  if (total == 0) return out;

  std::vector<double> ious, accs;
  double fw = 0.0;
  std::int64_t correct = 0;
  for (int k = 0; k < c; ++k) {
    const std::int64_t tp = confusion.at(k, k);
    std::int64_t gt_count = 0;
    for (int p = 0; p <= c; ++p) gt_count += confusion.at(k, p);
    std::int64_t pred_count = 0;
    for (int g = 0; g < c; ++g) pred_count += confusion.at(g, k);
    const std::int64_t uni = gt_count + pred_count - tp;
    correct += tp;
    if (uni > 0) {
      const double iou = static_cast<double>(tp) / static_cast<double>(uni);
      ious.push_back(iou);
      fw += static_cast<double>(gt_count) / static_cast<double>(total) * iou;
    }
    if (gt_count > 0) {
      accs.push_back(static_cast<double>(tp) / static_cast<double>(gt_count));
    }
  }
  out.miou = mean(ious);
  out.fwiou = fw;
  out.macc = mean(accs);
  out.pacc = static_cast<double>(correct) / static_cast<double>(total);
  return out;
}

SemanticScores semantic_metrics(const ClassMap& pred, const ClassMap& gt,
                                const LabelSpace& space) {
  SemanticConfusion confusion(space.size());
  confusion.add(pred, gt);
  return summarize(confusion);
}

// ---------------------------------------------------------------------------
// Panoptic quality

void PQStats::add(const PanopticMap& pred, const PanopticMap& gt,
                  const LabelSpace& space, const PQOptions& options) {
  require_same_shape(pred.shape(), gt.shape(), "panoptic_quality");
  if (!(options.match_iou >= 0.5 && options.match_iou < 1.0)) {
    throw Error(ErrorKind::kConfig,
                "PQ match threshold must lie in [0.5, 1), got " +
                    std::to_string(options.match_iou));
  }
  auto check = [&](const PanopticSegment& s) {
    if (!space.position_of_id(s.category_id)) {
      throw Error(ErrorKind::kNotFound,
                  "segment category " + std::to_string(s.category_id) +
                      " not in label space");
    }
  };
  std::for_each(pred.segments().begin(), pred.segments().end(), check);
  std::for_each(gt.segments().begin(), gt.segments().end(), check);

  // (gt id, pred id) → overlapping pixels, gt id 0 included for void.
  std::unordered_map<std::uint64_t, std::int64_t> overlap;
  const auto gt_ids = gt.ids();
  const auto pred_ids = pred.ids();
  for (std::size_t i = 0; i < gt_ids.size(); ++i) {
    if (pred_ids[i] == kVoidSegment) continue;
    ++overlap[(static_cast<std::uint64_t>(gt_ids[i]) << 32) | pred_ids[i]];
  }
  auto overlap_of = [&](std::uint32_t g, std::uint32_t p) -> std::int64_t {
    const auto it = overlap.find((static_cast<std::uint64_t>(g) << 32) | p);
    return it == overlap.end() ? 0 : it->second;
  };

  std::unordered_map<std::uint32_t, bool> gt_matched, pred_matched;
  for (const PanopticSegment& g : gt.segments()) {
    for (const PanopticSegment& p : pred.segments()) {
      if (g.category_id != p.category_id) continue;
      const std::int64_t inter = overlap_of(g.id, p.id);
      if (inter == 0) continue;
      const std::int64_t uni =
          p.area + g.area - inter - overlap_of(kVoidSegment, p.id);
      const double iou = static_cast<double>(inter) / static_cast<double>(uni);
      if (iou <= options.match_iou) continue;
      gt_matched[g.id] = true;
      pred_matched[p.id] = true;
      if (options.area.contains(g.area)) {
        PQCategoryStats& s = per_category_[g.category_id];
        ++s.tp;
        s.iou_sum += iou;
      }
    }
  }
  for (const PanopticSegment& g : gt.segments()) {
    if (g.area == 0 || gt_matched.count(g.id)) continue;
    if (!options.area.contains(g.area)) continue;
    ++per_category_[g.category_id].fn;
  }
  for (const PanopticSegment& p : pred.segments()) {
    if (p.area == 0 || pred_matched.count(p.id)) continue;
    const std::int64_t on_void = overlap_of(kVoidSegment, p.id);
    if (static_cast<double>(on_void) / static_cast<double>(p.area) > 0.5) {
      continue;
    }
    if (!options.area.contains(p.area)) continue;
    ++per_category_[p.category_id].fp;
  }
}

void PQStats::merge(const PQStats& other) {
  for (const auto& [category, s] : other.per_category_) {
    PQCategoryStats& mine = per_category_[category];
    mine.tp += s.tp;
    mine.fp += s.fp;
    mine.fn += s.fn;
    mine.iou_sum += s.iou_sum;
  }
}

PQReport summarize(const PQStats& stats, const LabelSpace& space) {
  PQReport report;
  std::vector<double> pq_all, sq_all, rq_all, pq_th, sq_th, rq_th, pq_st,
      sq_st, rq_st;
  for (const auto& [category, s] : stats.per_category()) {
    if (s.tp + s.fp + s.fn == 0) continue;
    const double denom = static_cast<double>(s.tp) + 0.5 * s.fp + 0.5 * s.fn;
    PQValues v;
    v.pq = s.iou_sum / denom;
    v.sq = s.tp > 0 ? s.iou_sum / static_cast<double>(s.tp) : 0.0;
    v.rq = static_cast<double>(s.tp) / denom;
    v.num_categories = 1;
    report.per_category[category] = v;
    pq_all.push_back(v.pq);
    sq_all.push_back(v.sq);
    rq_all.push_back(v.rq);
    const bool thing = space.by_id(category).is_thing;
    (thing ? pq_th : pq_st).push_back(v.pq);
    (thing ? sq_th : sq_st).push_back(v.sq);
    (thing ? rq_th : rq_st).push_back(v.rq);
  }
  auto pack = [](const std::vector<double>& pq, const std::vector<double>& sq,
                 const std::vector<double>& rq) {
    return PQValues{mean(pq), mean(sq), mean(rq), static_cast<int>(pq.size())};
  };
  report.all = pack(pq_all, sq_all, rq_all);
  report.things = pack(pq_th, sq_th, rq_th);
  report.stuff = pack(pq_st, sq_st, rq_st);
  return report;
}

PQReport panoptic_quality(const PanopticMap& pred, const PanopticMap& gt,
                          const LabelSpace& space, const PQOptions& options) {
  PQStats stats;
  stats.add(pred, gt, space, options);
  return summarize(stats, space);
}

// ---------------------------------------------------------------------------
// Instance AP

std::vector<double> coco_iou_thresholds() {
  std::vector<double> out;
  for (int i = 0; i < 10; ++i) out.push_back(0.5 + 0.05 * i);
  return out;
}

InstanceEvaluator::InstanceEvaluator(APOptions options)
    : options_(std::move(options)) {
  if (options_.iou_thresholds.empty()) {
    throw Error(ErrorKind::kConfig, "no IoU thresholds");
  }
  for (double t : options_.iou_thresholds) {
    if (!(t > 0.0 && t < 1.0)) {
      throw Error(ErrorKind::kConfig,
                  "IoU threshold " + std::to_string(t) + " outside (0,1)");
    }
  }
  if (options_.max_detections_per_image <= 0) {
    throw Error(ErrorKind::kConfig, "max detections must be positive");
  }
}

void InstanceEvaluator::add_image(int image_id,
                                  std::span<const DetectionRecord> dets,
                                  std::span<const InstanceAnnotation> gts) {
  std::map<int, std::vector<const DetectionRecord*>> dets_by_cat;
  std::map<int, std::vector<const InstanceAnnotation*>> gts_by_cat;
  for (const DetectionRecord& d : dets) {
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw Error(ErrorKind::kConfig,
                  "detection score " + std::to_string(d.score) +
                      " outside [0,1]");
    }
    dets_by_cat[d.category_id].push_back(&d);
  }
  for (const InstanceAnnotation& g : gts) gts_by_cat[g.category_id].push_back(&g);

  std::map<int, bool> categories;
  for (const auto& [c, _] : dets_by_cat) categories[c] = true;
  for (const auto& [c, _] : gts_by_cat) categories[c] = true;

  const std::size_t num_thresholds = options_.iou_thresholds.size();
  for (const auto& [category, unused] : categories) {
    std::vector<const DetectionRecord*> cd = dets_by_cat[category];
    const std::vector<const InstanceAnnotation*>& cg = gts_by_cat[category];
    std::stable_sort(cd.begin(), cd.end(),
                     [](const DetectionRecord* a, const DetectionRecord* b) {
                       return a->score > b->score;
                     });
    if (static_cast<int>(cd.size()) > options_.max_detections_per_image) {
      cd.resize(options_.max_detections_per_image);
    }
    gt_count_[category] += static_cast<std::int64_t>(cg.size());

    std::vector<double> iou(cd.size() * cg.size());
    for (std::size_t d = 0; d < cd.size(); ++d) {
      for (std::size_t g = 0; g < cg.size(); ++g) {
        iou[d * cg.size() + g] = mask_iou(cd[d]->mask, cg[g]->mask);
      }
    }

    for (std::size_t b = 0; b < kBands.size(); ++b) {
      const AreaRange& band = kBands[b];
      // Non-ignored ground truth first so that a detection prefers them.
      std::vector<std::size_t> gorder(cg.size());
      std::iota(gorder.begin(), gorder.end(), 0);
      std::vector<char> g_ignored(cg.size());
      for (std::size_t g = 0; g < cg.size(); ++g) {
        g_ignored[g] = !band.contains(cg[g]->mask.area());
      }
      std::stable_sort(gorder.begin(), gorder.end(),
                       [&](std::size_t a, std::size_t c) {
                         return g_ignored[a] < g_ignored[c];
                       });
      const auto positives = static_cast<std::int64_t>(
          std::count(g_ignored.begin(), g_ignored.end(), 0));

      for (std::size_t t = 0; t < num_thresholds; ++t) {
        const double threshold = options_.iou_thresholds[t];
        std::vector<char> g_taken(cg.size(), 0);
        Accumulated& acc = acc_[Key{category, static_cast<int>(b), t}];
        acc.num_positives += positives;
        for (std::size_t d = 0; d < cd.size(); ++d) {
          double best = std::min(threshold, 1.0 - 1e-10);
          int match = -1;
          for (std::size_t gi : gorder) {
            if (g_taken[gi]) continue;
            if (match > -1 && !g_ignored[match] && g_ignored[gi]) break;
            const double v = iou[d * cg.size() + gi];
            if (v < best) continue;
            best = v;
            match = static_cast<int>(gi);
          }
          DetEntry entry{cd[d]->score, image_id, static_cast<int>(d), false,
                         false};
          if (match >= 0) {
            g_taken[match] = 1;
            entry.matched = true;
            entry.ignored = g_ignored[match] != 0;
          } else {
            entry.ignored = !band.contains(cd[d]->mask.area());
          }
          acc.dets.push_back(entry);
        }
      }
    }
  }
}

void InstanceEvaluator::merge(const InstanceEvaluator& other) {
  for (const auto& [key, a] : other.acc_) {
    Accumulated& mine = acc_[key];
    mine.dets.insert(mine.dets.end(), a.dets.begin(), a.dets.end());
    mine.num_positives += a.num_positives;
  }
  for (const auto& [c, n] : other.gt_count_) gt_count_[c] += n;
}

std::optional<double> InstanceEvaluator::average_precision(
    int category_id, std::size_t t, const AreaRange& area) const {
  const auto it = acc_.find(Key{category_id, band_index(area), t});
  if (it == acc_.end() || it->second.num_positives == 0) return std::nullopt;

  std::vector<DetEntry> dets;
  for (const DetEntry& d : it->second.dets) {
    if (!d.ignored) dets.push_back(d);
  }
  std::sort(dets.begin(), dets.end(), [](const DetEntry& a, const DetEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.rank < b.rank;
  });

  const std::int64_t npos = it->second.num_positives;
  // tp_count[i] and precision after the first i+1 detections.
  std::vector<std::int64_t> tp_count(dets.size());
  std::vector<double> precision(dets.size());
  std::int64_t tp = 0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    tp += dets[i].matched ? 1 : 0;
    tp_count[i] = tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  // Recall level r/100 is reached once tp/npos >= r/100, tested in integers
  // so that exact recalls such as 3/10 hit their grid point.
  double sum = 0.0;
  std::size_t pos = 0;
  for (int r = 0; r < kRecallPoints; ++r) {
    while (pos < tp_count.size() && tp_count[pos] * 100 < r * npos) ++pos;
    if (pos == tp_count.size()) break;
    sum += precision[pos];
  }
  return sum / kRecallPoints;
}

std::optional<double> InstanceEvaluator::mean_average_precision(
    int category_id, const AreaRange& area) const {
  double sum = 0.0;
  for (std::size_t t = 0; t < options_.iou_thresholds.size(); ++t) {
    const auto ap = average_precision(category_id, t, area);
    if (!ap) return std::nullopt;
    sum += *ap;
  }
  return sum / static_cast<double>(options_.iou_thresholds.size());
}

std::size_t InstanceEvaluator::threshold_index(double iou) const {
  for (std::size_t t = 0; t < options_.iou_thresholds.size(); ++t) {
    if (std::abs(options_.iou_thresholds[t] - iou) < 1e-9) return t;
  }
  throw Error(ErrorKind::kNotFound,
              "IoU threshold " + std::to_string(iou) + " not evaluated");
}

std::vector<int> InstanceEvaluator::categories() const {
  std::vector<int> out;
  for (const auto& [key, unused] : acc_) {
    if (out.empty() || out.back() != key.category) out.push_back(key.category);
  }
  return out;
}

std::int64_t InstanceEvaluator::num_ground_truth(int category_id) const {
  const auto it = gt_count_.find(category_id);
  return it == gt_count_.end() ? 0 : it->second;
}

APReport summarize(const InstanceEvaluator& evaluator) {
  APReport report;
  const std::size_t t50 = evaluator.threshold_index(0.5);
  const std::size_t t75 = evaluator.threshold_index(0.75);
  std::vector<double> ap, ap50, ap75, s, m, l;
  for (int c : evaluator.categories()) {
    if (const auto v = evaluator.mean_average_precision(c, kAreaAll)) {
      ap.push_back(*v);
      report.per_category[c] = *v;
    }
    if (const auto v = evaluator.average_precision(c, t50, kAreaAll)) {
      ap50.push_back(*v);
    }
    if (const auto v = evaluator.average_precision(c, t75, kAreaAll)) {
      ap75.push_back(*v);
    }
    if (const auto v = evaluator.mean_average_precision(c, kAreaSmall)) {
      s.push_back(*v);
    }
    if (const auto v = evaluator.mean_average_precision(c, kAreaMedium)) {
      m.push_back(*v);
    }
    if (const auto v = evaluator.mean_average_precision(c, kAreaLarge)) {
      l.push_back(*v);
    }
  }
  report.ap = mean_or_undefined(ap);
  report.ap50 = mean_or_undefined(ap50);
  report.ap75 = mean_or_undefined(ap75);
  report.ap_s = mean_or_undefined(s);
  report.ap_m = mean_or_undefined(m);
  report.ap_l = mean_or_undefined(l);
  return report;
}

APReport instance_ap(std::span<const DetectionRecord> dets,
                     std::span<const InstanceAnnotation> gts,
                     const APOptions& options) {
  InstanceEvaluator evaluator(options);
  const auto dets_by_image = group_by_image(dets);
  const auto gts_by_image = group_by_image(gts);
  std::map<int, bool> images;
  for (const auto& [id, unused] : dets_by_image) images[id] = true;
  for (const auto& [id, unused] : gts_by_image) images[id] = true;
  for (const auto& [id, unused] : images) {
    std::vector<DetectionRecord> d;
    std::vector<InstanceAnnotation> g;
    if (auto it = dets_by_image.find(id); it != dets_by_image.end()) {
      for (const DetectionRecord* p : it->second) d.push_back(*p);
    }
    if (auto it = gts_by_image.find(id); it != gts_by_image.end()) {
      for (const InstanceAnnotation* p : it->second) g.push_back(*p);
    }
    evaluator.add_image(id, d, g);
  }
  return summarize(evaluator);
}

// ---------------------------------------------------------------------------
// PIQ

double piq_aggregate(const std::map<int, double>& thing_scores,
                     const std::map<int, double>& stuff_scores,
                     PiqAggregation aggregation,
                     const std::map<int, double>& weights) {
  switch (aggregation) {
    case PiqAggregation::kCategoryMacro: {
      std::vector<double> all;
      for (const auto& [c, v] : thing_scores) all.push_back(v);
      for (const auto& [c, v] : stuff_scores) all.push_back(v);
      return mean_or_undefined(all);
    }
    case PiqAggregation::kThingStuffSplit: {
      std::vector<double> groups;
      for (const auto* scores : {&thing_scores, &stuff_scores}) {
        if (scores->empty()) continue;
        std::vector<double> v;
        for (const auto& [c, s] : *scores) v.push_back(s);
        groups.push_back(mean(v));
      }
      return mean_or_undefined(groups);
    }
    case PiqAggregation::kInstanceWeighted: {
      double num = 0.0, den = 0.0;
      for (const auto* scores : {&thing_scores, &stuff_scores}) {
        for (const auto& [c, s] : *scores) {
          const auto it = weights.find(c);
          const double w = it == weights.end() ? 1.0 : it->second;
          num += w * s;
          den += w;
        }
      }
      return den > 0.0 ? num / den : kUndefinedScore;
    }
  }
  return 0.0;
}

PIQReport piq_score(const PiqInputs& inputs, const LabelSpace& space) {
  auto require_category = [&](int id) -> const SegCategory& {
    return space.by_id(id);
  };

  // Things: AP on raw instance predictions.
  InstanceEvaluator evaluator;
  {
    std::vector<DetectionRecord> dets;
    std::vector<InstanceAnnotation> gts;
    for (const DetectionRecord& d : inputs.thing_detections) {
      if (require_category(d.category_id).is_thing) dets.push_back(d);
    }
    for (const InstanceAnnotation& g : inputs.thing_ground_truth) {
      if (require_category(g.category_id).is_thing) gts.push_back(g);
    }
    const auto dets_by_image = group_by_image<DetectionRecord>(dets);
    const auto gts_by_image = group_by_image<InstanceAnnotation>(gts);
    std::map<int, bool> images;
    for (const auto& [id, unused] : dets_by_image) images[id] = true;
    for (const auto& [id, unused] : gts_by_image) images[id] = true;
    for (const auto& [id, unused] : images) {
      std::vector<DetectionRecord> d;
      std::vector<InstanceAnnotation> g;
      if (auto it = dets_by_image.find(id); it != dets_by_image.end()) {
        for (const DetectionRecord* p : it->second) d.push_back(*p);
      }
      if (auto it = gts_by_image.find(id); it != gts_by_image.end()) {
        for (const InstanceAnnotation* p : it->second) g.push_back(*p);
      }
      evaluator.add_image(id, d, g);
    }
  }

  // Stuff: PQ on fused panoptic output.
  PQStats pq50, pq75, pq_s, pq_m, pq_l;
  for (const PanopticPair& pair : inputs.panoptic) {
    pq50.add(pair.pred, pair.gt, space, {0.5, kAreaAll});
    pq75.add(pair.pred, pair.gt, space, {0.75, kAreaAll});
    pq_s.add(pair.pred, pair.gt, space, {0.5, kAreaSmall});
    pq_m.add(pair.pred, pair.gt, space, {0.5, kAreaMedium});
    pq_l.add(pair.pred, pair.gt, space, {0.5, kAreaLarge});
  }
  auto stuff_pq = [&](const PQStats& stats) {
    std::map<int, double> out;
    for (const auto& [c, v] : summarize(stats, space).per_category) {
      if (!space.by_id(c).is_thing) out[c] = v.pq;
    }
    return out;
  };

  const std::size_t t50 = evaluator.threshold_index(0.5);
  const std::size_t t75 = evaluator.threshold_index(0.75);
  std::map<int, double> th_all, th_50, th_75, th_s, th_m, th_l;
  std::map<int, double> weights;
  for (const SegCategory& c : space.categories()) {
    if (!c.is_thing) continue;
    if (auto v = evaluator.mean_average_precision(c.id, kAreaAll)) th_all[c.id] = *v;
    if (auto v = evaluator.average_precision(c.id, t50, kAreaAll)) th_50[c.id] = *v;
    if (auto v = evaluator.average_precision(c.id, t75, kAreaAll)) th_75[c.id] = *v;
    if (auto v = evaluator.mean_average_precision(c.id, kAreaSmall)) th_s[c.id] = *v;
    if (auto v = evaluator.mean_average_precision(c.id, kAreaMedium)) th_m[c.id] = *v;
    if (auto v = evaluator.mean_average_precision(c.id, kAreaLarge)) th_l[c.id] = *v;
    weights[c.id] = static_cast<double>(evaluator.num_ground_truth(c.id));
  }
  for (const auto& [c, s] : pq50.per_category()) {
    if (!space.by_id(c).is_thing) {
      weights[c] = static_cast<double>(s.tp + s.fn);
    }
  }

  const std::map<int, double> st_all = stuff_pq(pq50);
  PIQReport report;
  const auto macro = PiqAggregation::kCategoryMacro;
  report.piq = percent(piq_aggregate(th_all, st_all, macro));
  report.piq50 = percent(piq_aggregate(th_50, st_all, macro));
  report.piq75 = percent(piq_aggregate(th_75, stuff_pq(pq75), macro));
  report.piq_s = percent(piq_aggregate(th_s, stuff_pq(pq_s), macro));
  report.piq_m = percent(piq_aggregate(th_m, stuff_pq(pq_m), macro));
  report.piq_l = percent(piq_aggregate(th_l, stuff_pq(pq_l), macro));
  report.piq_split =
      percent(piq_aggregate(th_all, st_all, PiqAggregation::kThingStuffSplit));
  report.piq_instance = percent(piq_aggregate(
                                    th_all, st_all,
                                    PiqAggregation::kInstanceWeighted, weights));
  report.per_category = th_all;
  report.per_category.insert(st_all.begin(), st_all.end());
  return report;
}

// ---------------------------------------------------------------------------
// Benchmarks

double benchmark_average(std::span<const double> values) {
  if (values.empty()) {
    throw Error(ErrorKind::kDegenerateInput, "no sub-dataset values to average");
  }
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

std::map<std::string, double> benchmark_average(
    std::span<const std::map<std::string, double>> reports) {
  if (reports.empty()) {
    throw Error(ErrorKind::kDegenerateInput, "no sub-dataset reports");
  }
  std::map<std::string, double> out;
  for (const auto& [key, unused] : reports.front()) {
    std::vector<double> values;
    for (const auto& r : reports) {
      const auto it = r.find(key);
      if (it == r.end()) break;
      values.push_back(it->second);
    }
    if (values.size() == reports.size()) out[key] = benchmark_average(values);
  }
  return out;
}

}  // namespace mixseg
