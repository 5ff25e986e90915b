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


#include "support/oracles.h"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>

namespace mixseg::testing {

DenseMask random_dense(Rng& rng, MaskShape shape) {
  DenseMask out(shape);
  if (rng.coin(0.2)) {
    for (int r = 0; r < shape.height; ++r) {
      for (int c = 0; c < shape.width; ++c) out.set(r, c, rng.coin(0.25));
    }
    return out;
  }
  const int boxes = rng.uniform_int(1, 3);
  for (int b = 0; b < boxes; ++b) {
    const int r0 = rng.uniform_int(0, shape.height - 1);
    const int c0 = rng.uniform_int(0, shape.width - 1);
    const int r1 = rng.uniform_int(r0 + 1, shape.height);
    const int c1 = rng.uniform_int(c0 + 1, shape.width);
    for (int r = r0; r < r1; ++r) {
      for (int c = c0; c < c1; ++c) out.set(r, c);
    }
  }
  return out;
}

BinaryMask random_mask(Rng& rng, MaskShape shape) {
  return encode_rle(random_dense(rng, shape));
}

LabelSpace numbered_space(int n, int things) {
  std::vector<SegCategory> categories;
  for (int i = 1; i <= n; ++i) {
    categories.push_back({i, "class " + std::to_string(i), i <= things, std::nullopt});
  }
  return LabelSpace(std::nullopt, std::move(categories), "numbered");
}

PanopticMap random_panoptic(Rng& rng, MaskShape shape, int max_segments,
                            const LabelSpace& space) {
  std::vector<std::uint32_t> ids(shape.pixels(), kVoidSegment);
  const int n = rng.uniform_int(0, max_segments);
  std::vector<int> categories;
  for (int s = 1; s <= n; ++s) {
    const DenseMask m = random_dense(rng, shape);
    for (int r = 0; r < shape.height; ++r) {
      for (int c = 0; c < shape.width; ++c) {
        if (m.at(r, c)) ids[static_cast<std::size_t>(r) * shape.width + c] = s;
      }
    }
    categories.push_back(space[rng.uniform_int(0, space.size() - 1)].id);
  }
  std::vector<std::int64_t> area(n + 1, 0);
  for (std::uint32_t id : ids) ++area[id];
  std::vector<PanopticSegment> segments;
  for (int s = 1; s <= n; ++s) {
    if (area[s] == 0) continue;
    const int cat = categories[s - 1];
    segments.push_back({static_cast<std::uint32_t>(s), cat, area[s],
                        space[*space.position_of_id(cat)].is_thing});
  }
  return PanopticMap(shape, std::move(ids), std::move(segments));
}

EmbeddingVector random_unit(Rng& rng, int dim) {
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  double norm2 = 0.0;
  while (norm2 == 0.0) {
    norm2 = 0.0;
    for (double& x : v) {
      x = normal(rng.engine());
      norm2 += x * x;
    }
  }
  return EmbeddingVector(std::move(v)).normalized();
}

ClassEmbeddingTable make_table(std::optional<int> index, const std::string& name,
                               const std::vector<std::string>& names,
                               std::vector<EmbeddingVector> vectors) {
  std::vector<SegCategory> categories;
  for (std::size_t i = 0; i < names.size(); ++i) {
    categories.push_back({static_cast<int>(i + 1), names[i], true, index});
  }
  return ClassEmbeddingTable(LabelSpace(index, std::move(categories), name),
                             std::move(vectors));
}

std::vector<double> softmax_reference(const std::vector<double>& logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double brute_force_assignment_cost(const std::vector<std::vector<double>>& cost) {
  const std::size_t rows = cost.size();
  const std::size_t cols = rows == 0 ? 0 : cost[0].size();
  std::vector<std::size_t> perm(cols);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) total += cost[r][perm[r]];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

ReferencePQ reference_pq(const PanopticMap& pred, const PanopticMap& gt,
                         double match_iou) {
  const auto pid = pred.ids();
  const auto gid = gt.ids();
  const auto count = [&](auto&& predicate) {
    std::int64_t n = 0;
    for (std::size_t i = 0; i < pid.size(); ++i) n += predicate(gid[i], pid[i]);
    return n;
  };
  ReferencePQ out;
  std::map<std::uint32_t, bool> gt_hit, pred_hit;
  for (const PanopticSegment& g : gt.segments()) {
    for (const PanopticSegment& p : pred.segments()) {
      if (g.category_id != p.category_id) continue;
      const std::int64_t inter =
          count([&](std::uint32_t a, std::uint32_t b) { return a == g.id && b == p.id; });
      const std::int64_t uni = count([&](std::uint32_t a, std::uint32_t b) {
        return a == g.id || (b == p.id && a != kVoidSegment);
      });
      if (uni == 0) continue;
      const double iou = static_cast<double>(inter) / static_cast<double>(uni);
      if (iou > match_iou) {
        gt_hit[g.id] = pred_hit[p.id] = true;
        ++out.per_category[g.category_id].tp;
        out.per_category[g.category_id].iou_sum += iou;
      }
    }
  }
  for (const PanopticSegment& g : gt.segments()) {
    if (!gt_hit[g.id]) ++out.per_category[g.category_id].fn;
  }
  for (const PanopticSegment& p : pred.segments()) {
    if (pred_hit[p.id]) continue;
    const std::int64_t on_void = count(
        [&](std::uint32_t a, std::uint32_t b) { return b == p.id && a == kVoidSegment; });
    if (2 * on_void > p.area) continue;
    ++out.per_category[p.category_id].fp;
  }
  int n = 0;
  for (const auto& [c, s] : out.per_category) {
    if (s.tp + s.fp + s.fn == 0) continue;
    const double denom = s.tp + 0.5 * s.fp + 0.5 * s.fn;
    out.pq += s.iou_sum / denom;
    out.sq += s.tp ? s.iou_sum / s.tp : 0.0;
    out.rq += s.tp / denom;
    ++n;
  }
  if (n > 0) {
    out.pq /= n;
    out.sq /= n;
    out.rq /= n;
  }
  return out;
}

double reference_ap(const std::vector<DetectionRecord>& dets,
                    const std::vector<InstanceAnnotation>& gts, int category,
                    double threshold) {
  struct Hit {
    double score;
    int image;
    int rank;
    bool tp;
  };
  std::map<int, std::vector<const DetectionRecord*>> d_by_image;
  std::map<int, std::vector<const InstanceAnnotation*>> g_by_image;
  for (const DetectionRecord& d : dets) {
    if (d.category_id == category) d_by_image[d.image_id].push_back(&d);
  }
  std::int64_t npos = 0;
  for (const InstanceAnnotation& g : gts) {
    if (g.category_id != category) continue;
    g_by_image[g.image_id].push_back(&g);
    ++npos;
  }
  if (npos == 0) return -1.0;

  const auto dense_iou = [](const BinaryMask& a, const BinaryMask& b) {
    const DenseMask da = decode_rle(a), db = decode_rle(b);
    std::int64_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < da.bits().size(); ++i) {
      inter += da.bits()[i] && db.bits()[i];
      uni += da.bits()[i] || db.bits()[i];
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
  };

  std::vector<Hit> hits;
  for (auto& [image, list] : d_by_image) {
    std::stable_sort(list.begin(), list.end(),
                     [](auto* a, auto* b) { return a->score > b->score; });
    if (list.size() > 100) list.resize(100);
    const auto& image_gts = g_by_image[image];
    std::vector<bool> used(image_gts.size(), false);
    for (std::size_t k = 0; k < list.size(); ++k) {
      double best = -1.0;
      int pick = -1;
      for (std::size_t g = 0; g < image_gts.size(); ++g) {
        if (used[g]) continue;
        const double v = dense_iou(list[k]->mask, image_gts[g]->mask);
        if (v >= std::min(threshold, 1.0 - 1e-10) && v >= best) {
          best = v;
          pick = static_cast<int>(g);
        }
      }
      if (pick >= 0) used[pick] = true;
      hits.push_back({list[k]->score, image, static_cast<int>(k), pick >= 0});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.image != b.image) return a.image < b.image;
    return a.rank < b.rank;
  });
  double total = 0.0;
  for (int r = 0; r <= 100; ++r) {
    double best = 0.0;
    std::int64_t tp = 0;
    for (std::size_t i = 0; i < hits.size(); ++i) {
      tp += hits[i].tp;
      if (tp * 100 >= r * npos) {
        best = std::max(best, static_cast<double>(tp) / static_cast<double>(i + 1));
      }
    }
    total += best;
  }
  return total / 101.0;
}

PanopticMap perturb_panoptic(Rng& rng, const PanopticMap& gt, const LabelSpace& space) {
  const MaskShape s = gt.shape();
  std::vector<std::uint32_t> ids(gt.ids().begin(), gt.ids().end());
  std::map<std::uint32_t, int> category;
  for (const PanopticSegment& seg : gt.segments()) {
    category[seg.id] = rng.coin(0.1) ? space[rng.uniform_int(0, space.size() - 1)].id
                                     : seg.category_id;
  }
  std::uint32_t next = 100;
  const int edits = rng.uniform_int(0, 3);
  for (int e = 0; e < edits; ++e) {
    std::uint32_t id = kVoidSegment;
    const double kind = rng.uniform();
    if (kind < 0.4 && !category.empty()) {
      auto it = category.begin();
      std::advance(it, rng.uniform_int(0, static_cast<int>(category.size()) - 1));
      id = it->first;
    } else if (kind < 0.8) {
      id = next++;
      category[id] = space[rng.uniform_int(0, space.size() - 1)].id;
    }
    const int r0 = rng.uniform_int(0, s.height - 1), c0 = rng.uniform_int(0, s.width - 1);
    const int r1 = rng.uniform_int(r0 + 1, std::min(s.height, r0 + 6));
    const int c1 = rng.uniform_int(c0 + 1, std::min(s.width, c0 + 6));
    for (int r = r0; r < r1; ++r) {
      for (int c = c0; c < c1; ++c) ids[static_cast<std::size_t>(r) * s.width + c] = id;
    }
  }
  std::map<std::uint32_t, std::int64_t> area;
  for (std::uint32_t id : ids) {
    if (id != kVoidSegment) ++area[id];
  }
  std::vector<PanopticSegment> segments;
  for (const auto& [id, a] : area) {
    const int cat = category[id];
    segments.push_back({id, cat, a, space[*space.position_of_id(cat)].is_thing});
  }
  return PanopticMap(s, std::move(ids), std::move(segments));
}

std::vector<ScoredMask> random_scored_set(Rng& rng, MaskShape shape, int num_labels) {
  std::vector<ScoredMask> out;
  const int n = rng.uniform_int(1, 8);
  for (int i = 0; i < n; ++i) {
    std::vector<double> probs(num_labels + 1);
    double sum = 0.0;
    for (double& p : probs) {
      p = std::pow(rng.uniform(), 3.0);
      sum += p;
    }
    for (double& p : probs) p /= sum;
    Prediction pred;
    pred.soft_mask = SoftMask::from_binary(random_mask(rng, shape));
    pred.class_probs = probs;
    out.push_back(score_and_label(pred));
  }
  return out;
}

}  // namespace mixseg::testing
