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


// One PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mixseg/benchgen.h"
#include "mixseg/error.h"
#include "mixseg/io.h"
#include "mixseg/matching.h"
#include "mixseg/metrics.h"
#include "mixseg/postproc.h"
#include "mixseg/semantics.h"
#include "mixseg_cli/cli.h"
#include "support/oracles.h"

namespace mixseg {
namespace {

using testing::Rng;

// Pinned tolerances.
constexpr double kProbSumTol = 1e-6;
constexpr double kUniformTol = 1e-9;
constexpr double kSelfMatchFloor = 1.0 - 1e-6;
constexpr double kSelfMatchTau = 0.01;
constexpr double kPerfectLossCeiling = 1e-6;
constexpr double kIndicatorTol = 1e-12;
constexpr double kPqIdentityTol = 1e-9;
constexpr double kApTol = 1e-9;
constexpr double kChiSquaredAlpha = 0.001;

// Trial counts.
constexpr int kSoftmaxTrials = 1000;
constexpr int kHungarianTrials = 500;
constexpr int kFusionTrials = 200;
constexpr int kThresholdSweep = 10;
constexpr int kPqTrials = 200;
constexpr int kApTrials = 200;
constexpr int kRoundTripMaps = 100;
constexpr std::int64_t kSamplerDraws = 10000;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

EmbeddingVector axis(int dim, int i) {
  std::vector<double> v(dim, 0.0);
  v[i] = 1.0;
  return EmbeddingVector(std::move(v));
}

std::vector<std::string> numbered_names(int n, const std::string& stem) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

// Random orthonormal set of `count` vectors in `dim` dimensions.
std::vector<EmbeddingVector> orthonormal(Rng& rng, int count, int dim) {
  std::vector<EmbeddingVector> out;
  while (static_cast<int>(out.size()) < count) {
    EmbeddingVector v = testing::random_unit(rng, dim);
    for (const EmbeddingVector& u : out) {
      std::vector<double> w(v.values().begin(), v.values().end());
      const double d = v.dot(u);
      for (int i = 0; i < dim; ++i) w[i] -= d * u[i];
      v = EmbeddingVector(std::move(w));
    }
    if (v.norm() > 1e-6) out.push_back(v.normalized());
  }
  return out;
}

void softmax_suite(Outcome& o) {
  Rng rng(1001);
  double worst_sum = 0.0, worst_uniform = 0.0, worst_self = 1.0;
  for (int trial = 0; trial < kSoftmaxTrials; ++trial) {
    const int c = rng.uniform_int(1, 20);
    const int d = rng.uniform_int(c + 1, 64);
    std::vector<EmbeddingVector> entries;
    for (int i = 0; i < c; ++i) entries.push_back(testing::random_unit(rng, d));
    const auto table = testing::make_table(1, "t", numbered_names(c, "c"), entries);
    const double tau = rng.uniform(0.005, 1.0);
    const auto probs = class_probabilities(testing::random_unit(rng, d), table, tau);
    o.require(static_cast<int>(probs.size()) == c + 1, "probability count");
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(probs.begin(), probs.end(), 0.0) - 1.0));

    // Orthonormal classes plus one more orthogonal direction for the image.
    const auto basis = orthonormal(rng, c + 1, d);
    const auto ortho = testing::make_table(
        1, "o", numbered_names(c, "c"), std::vector<EmbeddingVector>(basis.begin(), basis.end() - 1));
    for (double p : class_probabilities(basis.back(), ortho, tau)) {
      worst_uniform = std::max(worst_uniform, std::abs(p - 1.0 / (c + 1)));
    }
    const int self = rng.uniform_int(0, c - 1);
    worst_self = std::min(worst_self, class_probabilities(basis[self], ortho, kSelfMatchTau)[self]);
  }
  o.require(worst_sum <= kProbSumTol, "sum to one");
  o.require(worst_uniform <= kUniformTol, "orthogonal uniform");
  o.require(worst_self >= kSelfMatchFloor, "self match");
  o.detail << "max |sum-1| " << worst_sum << ", max |p-1/(C+1)| " << worst_uniform
           << ", min self prob " << worst_self;
}

void inference_suite(Outcome& o) {
  const int d = 8, n = 4;
  const std::vector<ClassEmbeddingTable> train = {
      testing::make_table(1, "whole", {"person", "car"}, {axis(d, 0), axis(d, 1)}),
      testing::make_table(2, "parts", {"person", "arm"}, {axis(d, 0), axis(d, 2)}),
      testing::make_table(3, "more", {"person", "leg"}, {axis(d, 0), axis(d, 3)})};
  Rng rng(1002);
  std::vector<EmbeddingVector> oq, lsqe;
  for (int i = 0; i < n; ++i) oq.push_back(testing::random_unit(rng, d));
  for (int k = 0; k < 3; ++k) lsqe.push_back(testing::random_unit(rng, d));
  const QuerySet queries(oq, lsqe);
  const HashStubDecoder decoder(7, d);
  const ImageHandle image{1, {8, 8}};

  const auto check = [&](const std::vector<std::string>& names, const std::vector<int>& want) {
    std::vector<EmbeddingVector> vs;
    for (const std::string& name : names) {
      for (const ClassEmbeddingTable& t : train) {
        if (const auto p = t.labelspace().position_of_name(name)) {
          vs.push_back(t.entry(*p));
          break;
        }
      }
    }
    const auto test = testing::make_table(std::nullopt, "test", names, vs);
    const auto got = select_label_spaces(test, train);
    const auto preds = multi_pass_inference(decoder, queries, image, test, train);
    o.require(got == want, "selected spaces for " + names.front());
    o.require(preds.size() == static_cast<std::size_t>(n) * want.size(), "prediction count");
    return got.size();
  };
  check({"car"}, {1});
  check({"car", "arm"}, {1, 2});
  check({"car", "arm", "leg"}, {1, 2, 3});
  check({"person"}, {1, 2, 3});
  check({"arm"}, {2});
  o.detail << "|D| in {1,2,3} with N=" << n << " queries per pass";
}

Prediction prediction(const BinaryMask& m, std::vector<double> probs) {
  Prediction p;
  p.soft_mask = SoftMask::from_binary(m);
  p.class_probs = std::move(probs);
  return p;
}

void matching_suite(Outcome& o) {
  Rng rng(1003);
  int mismatches = 0;
  for (int trial = 0; trial < kHungarianTrials; ++trial) {
    const int rows = rng.uniform_int(1, 6);
    const int cols = rng.uniform_int(rows, 6);
    std::vector<std::vector<double>> c(rows, std::vector<double>(cols));
    for (auto& row : c) {
      for (double& v : row) v = rng.uniform_int(0, 20);
    }
    if (hungarian_assign(CostMatrix::from_rows(c)).total_cost !=
        testing::brute_force_assignment_cost(c)) {
      ++mismatches;
    }
  }
  o.require(mismatches == 0, "hungarian vs brute force");

  const MaskShape s{6, 6};
  const BinaryMask m1 = BinaryMask::box(s, 0, 0, 3, 3), m2 = BinaryMask::box(s, 3, 3, 6, 6);
  const std::vector<Prediction> perfect = {prediction(m2, {0, 1, 0}),
                                           prediction(BinaryMask::empty(s), {0, 0, 1}),
                                           prediction(m1, {1, 0, 0})};
  const std::vector<GroundTruthSegment> gts = {{0, m1}, {1, m2}};
  const double perfect_loss = set_loss(perfect, gts).total;
  o.require(perfect_loss <= kPerfectLossCeiling, "perfect loss");

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const BinaryMask m = testing::random_mask(rng, s);
    std::vector<Prediction> preds = {prediction(m, {0.9, 0.05, 0.05}),
                                     prediction(testing::random_mask(rng, s), {0.01, 0.01, 0.98})};
    const std::vector<GroundTruthSegment> one = {{0, m}};
    const double before = set_loss(preds, one).total;
    preds[1].soft_mask = SoftMask::from_binary(testing::random_mask(rng, s));
    worst = std::max(worst, std::abs(set_loss(preds, one).total - before));
  }
  o.require(worst <= kIndicatorTol, "indicator");
  o.detail << mismatches << "/" << kHungarianTrials << " cost mismatches, perfect loss "
           << perfect_loss << ", max unmatched-mask delta " << worst;
}

ScoredMask scored(const BinaryMask& mask, int label, double score) {
  return {mask, label, score, false, label, score};
}

bool supported(const PanopticMap& map, std::span<const ScoredMask> masks, const LabelSpace& space,
               bool use_fg_label) {
  for (const PanopticSegment& seg : map.segments()) {
    if (seg.area <= 0) return false;
    BinaryMask support = BinaryMask::empty(map.shape());
    for (const ScoredMask& m : masks) {
      const int label = use_fg_label ? m.fg_label : m.label;
      if (label < space.size() && space[label].id == seg.category_id) {
        support = mask_union(support, m.mask);
      }
    }
    if (intersection_area(map.segment_mask(seg.id), support) != seg.area) return false;
  }
  // Overlap-free: segment areas partition the labelled pixels.
  std::int64_t labelled = 0, total = 0;
  for (std::uint32_t id : map.ids()) labelled += id != kVoidSegment;
  for (const PanopticSegment& seg : map.segments()) total += seg.area;
  return labelled == total && map.has_dense_ids();
}

void fusion_suite(Outcome& o) {
  const LabelSpace space = testing::numbered_space(4, 2);
  const MaskShape s{20, 20};
  const BinaryMask person = BinaryMask::box(s, 0, 0, 20, 20);
  const BinaryMask glasses = BinaryMask::box(s, 5, 5, 7, 12);
  const std::vector<ScoredMask> fixture = {scored(person, 0, 0.95), scored(glasses, 1, 0.9)};
  const auto has_glasses = [&](const PanopticMap& m) {
    return std::any_of(m.segments().begin(), m.segments().end(),
                       [](const PanopticSegment& seg) { return seg.category_id == 2; });
  };
  const bool original_drops = !has_glasses(original_fusion(fixture, space, FusionConfig{}));
  const bool esf_keeps = has_glasses(esf_omi_fusion(fixture, space, FusionConfig{}));
  o.require(original_drops && esf_keeps, "contained small mask fixture");

  Rng rng(1004);
  int invalid = 0, non_monotone = 0;
  for (int trial = 0; trial < kFusionTrials; ++trial) {
    const auto masks = testing::random_scored_set(rng, {12, 12}, 4);
    std::size_t prev_o = SIZE_MAX, prev_e = SIZE_MAX;
    for (int step = 0; step < kThresholdSweep; ++step) {
      FusionConfig cfg;
      cfg.score_threshold = 0.05 + 0.1 * step;
      const PanopticMap a = original_fusion(masks, space, cfg);
      const PanopticMap b = esf_omi_fusion(masks, space, cfg);
      invalid += !supported(a, masks, space, false) + !supported(b, masks, space, true);
      non_monotone += (a.segments().size() > prev_o) + (b.segments().size() > prev_e);
      prev_o = a.segments().size();
      prev_e = b.segments().size();
    }
  }
  o.require(invalid == 0, "overlap-free supported maps");
  o.require(non_monotone == 0, "threshold monotonicity");
  o.detail << "fixture original drops=" << original_drops << " esf keeps=" << esf_keeps
           << ", invalid maps " << invalid << ", monotonicity violations " << non_monotone;
}

void metric_suite(Outcome& o) {
  const LabelSpace space = testing::numbered_space(5, 3);
  Rng rng(1005);
  int pq_mismatch = 0;
  double identity = 0.0;
  for (int trial = 0; trial < kPqTrials; ++trial) {
    const MaskShape s{rng.uniform_int(2, 16), rng.uniform_int(2, 16)};
    const PanopticMap gt = testing::random_panoptic(rng, s, 6, space);
    const PanopticMap pred = rng.coin(0.2) ? testing::random_panoptic(rng, s, 6, space)
                                           : testing::perturb_panoptic(rng, gt, space);
    const testing::ReferencePQ ref = testing::reference_pq(pred, gt);
    PQStats stats;
    stats.add(pred, gt, space);
    bool same = true;
    for (const auto& [c, r] : ref.per_category) {
      const auto it = stats.per_category().find(c);
      const PQCategoryStats got =
          it == stats.per_category().end() ? PQCategoryStats{} : it->second;
      same = same && got.tp == r.tp && got.fp == r.fp && got.fn == r.fn &&
             got.iou_sum == r.iou_sum;
    }
    const PQReport report = summarize(stats, space);
    same = same && report.all.pq == ref.pq && report.all.sq == ref.sq && report.all.rq == ref.rq;
    pq_mismatch += !same;
    for (const auto& [c, v] : report.per_category) {
      identity = std::max(identity, std::abs(v.pq - v.sq * v.rq));
    }
  }
  o.require(pq_mismatch == 0, "PQ vs brute force");
  o.require(identity <= kPqIdentityTol, "PQ = SQ*RQ");

  double ap_err = 0.0;
  const MaskShape s{12, 12};
  for (int trial = 0; trial < kApTrials; ++trial) {
    std::vector<DetectionRecord> dets;
    std::vector<InstanceAnnotation> gts;
    const int images = rng.uniform_int(1, 3);
    for (int im = 1; im <= images; ++im) {
      const int ng = rng.uniform_int(0, 4);
      for (int g = 0; g < ng; ++g) {
        const int cat = rng.uniform_int(1, 2);
        const BinaryMask m = testing::random_mask(rng, s);
        if (m.is_empty()) continue;
        gts.push_back({im, cat, m});
        if (rng.coin(0.8)) {
          BinaryMask d = mask_union(m, testing::random_mask(rng, s));
          dets.push_back({im, rng.coin(0.9) ? cat : 3 - cat, rng.uniform_int(0, 10) / 10.0, d});
        }
      }
      for (int e = rng.uniform_int(0, 2); e > 0; --e) {
        dets.push_back({im, rng.uniform_int(1, 2), rng.uniform_int(0, 10) / 10.0,
                        testing::random_mask(rng, s)});
      }
    }
    InstanceEvaluator evaluator;
    std::map<int, std::vector<DetectionRecord>> d_by;
    std::map<int, std::vector<InstanceAnnotation>> g_by;
    for (const auto& d : dets) d_by[d.image_id].push_back(d);
    for (const auto& g : gts) g_by[g.image_id].push_back(g);
    for (int im = 1; im <= images; ++im) evaluator.add_image(im, d_by[im], g_by[im]);
    for (int cat = 1; cat <= 2; ++cat) {
      for (std::size_t t = 0; t < evaluator.options().iou_thresholds.size(); ++t) {
        const double ref =
            testing::reference_ap(dets, gts, cat, evaluator.options().iou_thresholds[t]);
        const auto got = evaluator.average_precision(cat, t, kAreaAll);
        if (ref < 0) {
          ap_err = std::max(ap_err, got ? 1.0 : 0.0);
        } else {
          ap_err = std::max(ap_err, got ? std::abs(*got - ref) : 1.0);
        }
      }
    }
  }
  o.require(ap_err <= kApTol, "AP vs PR-curve oracle");

  // Perfect predictions.
  std::vector<PanopticPair> pairs;
  std::vector<DetectionRecord> perfect;
  for (int im = 1; im <= 5; ++im) {
    const PanopticMap gt = testing::random_panoptic(rng, {16, 16}, 6, space);
    pairs.push_back({im, gt, gt});
    for (const PanopticSegment& seg : gt.segments()) {
      if (seg.is_thing) perfect.push_back({im, seg.category_id, 1.0, gt.segment_mask(seg.id)});
    }
  }
  std::vector<InstanceAnnotation> perfect_gt;
  for (const DetectionRecord& d : perfect) perfect_gt.push_back({d.image_id, d.category_id, d.mask});
  const double piq_perfect = piq_score({perfect, perfect_gt, pairs}, space).piq;
  o.require(piq_perfect == 100.0, "PIQ perfect");

  // One thing category at AP 0.4 and one stuff category at PQ 0.6.
  const MaskShape f{10, 10};
  const LabelSpace two = testing::numbered_space(2, 1);
  const BinaryMask thing_gt = BinaryMask::box(f, 0, 0, 5, 5);
  const BinaryMask thing_det =
      mask_union(BinaryMask::box(f, 0, 0, 3, 5), BinaryMask::box(f, 3, 0, 4, 2));
  std::vector<std::uint32_t> gt_ids(100, 0), pred_ids(100, 0);
  for (int r = 8; r < 10; ++r) {
    for (int c = 0; c < 5; ++c) gt_ids[r * 10 + c] = 1;
    for (int c = 0; c < 3; ++c) pred_ids[r * 10 + c] = 1;
  }
  const std::vector<DetectionRecord> fd = {{1, 1, 0.9, thing_det}};
  const std::vector<InstanceAnnotation> fg = {{1, 1, thing_gt}};
  const std::vector<PanopticPair> fp = {
      {1, PanopticMap(f, pred_ids, {{1, 2, 6, false}}), PanopticMap(f, gt_ids, {{1, 2, 10, false}})}};
  const PIQReport fixture = piq_score({fd, fg, fp}, two);
  o.require(fixture.per_category.at(1) == 0.4 && fixture.per_category.at(2) == 0.6 &&
                fixture.piq == 50.0,
            "PIQ fixture");
  o.detail << "PQ mismatches " << pq_mismatch << "/" << kPqTrials << ", max |PQ-SQ*RQ| "
           << identity << ", max AP error " << ap_err << ", perfect PIQ " << piq_perfect
           << ", fixture PIQ " << fixture.piq;
}

// Every part of every super-category visible as a one-row band.
std::vector<PartWholeImage> synthetic_part_images(const BenchmarkSources& sources) {
  std::vector<PartWholeImage> images;
  int image_id = 0, instance = 0;
  for (const PartTaxonomy& t : sources.taxonomy) {
    const MaskShape shape{static_cast<int>(t.parts.size()) + 2, 8};
    PartWholeSpec spec;
    spec.super_category = t.super_category;
    spec.parts = t.parts;
    spec.instance_id = ++instance;
    for (std::size_t i = 0; i < t.parts.size(); ++i) {
      spec.part_masks.emplace(normalize_name(t.parts[i].name),
                              BinaryMask::box(shape, static_cast<int>(i), 0,
                                              static_cast<int>(i) + 1, 8));
    }
    images.push_back({++image_id, shape, {spec}});
  }
  return images;
}

void benchmark_suite(Outcome& o) {
  const std::map<std::string, std::size_t> counts = {
      {"cihp_pair", 15}, {"cihp_multi", 3}, {"csp_pair", 7}, {"csp_multi", 1}};
  // Hand-transcribed reference lists, compared name for name.
  const std::map<std::string, std::vector<std::vector<std::string>>> reference = {
      {"cihp_pair",
       {{"arm", "person"}, {"coat", "person"}, {"dress", "person"}, {"face", "person"},
        {"glove", "person"}, {"hair", "person"}, {"hat", "person"}, {"leg", "person"},
        {"pants", "person"}, {"scarf", "person"}, {"shoe", "person"}, {"skirt", "person"},
        {"socks", "person"}, {"sunglasses", "person"}, {"upper clothes", "person"}}},
      {"cihp_multi",
       {{"leg", "shoe", "person"},
        {"hat", "hair", "face", "person"},
        {"hat", "hair", "face", "arm", "leg", "person"}}},
      {"csp_pair",
       {{"window", "car"}, {"wheel", "car"}, {"light", "car"}, {"license plate", "car"},
        {"head", "person"}, {"arm", "person"}, {"leg", "person"}}},
      {"csp_multi",
       {{"license plate", "light", "wheel", "window", "car", "arm", "head", "leg", "person"}}}};
  int datasets = 0, partition_failures = 0;
  for (const BenchmarkFixture& f : builtin_fixtures()) {
    o.require(counts.count(f.name) && counts.at(f.name) == f.label_spaces.size(),
              "fixture count " + f.name);
    const BenchmarkSources sources = builtin_sources(f.sources);
    std::vector<std::vector<std::string>> subsets;
    std::vector<std::vector<std::string>> regenerated;
    for (const auto& labels : f.label_spaces) {
      subsets.push_back(part_subset_of(labels, sources));
      regenerated.push_back(mixed_labelspace(subsets.back(), sources).names());
    }
    o.require(regenerated == reference.at(f.name), "names of " + f.name);
    for (const MixedDataset& d :
         build_mixed_datasets(synthetic_part_images(sources), sources, subsets)) {
      ++datasets;
      partition_failures +=
          !validate_mixed_labelspace(d.label_space, sources.part_space, sources.whole_space);
    }
  }
  o.require(builtin_fixtures().size() == counts.size(), "fixture set");
  o.require(partition_failures == 0, "partition condition");

  int rejected = 0;
  for (const BenchmarkSources& sources : {cihp_sources(), csp_sources()}) {
    for (const PartTaxonomy& t : sources.taxonomy) {
      std::vector<std::string> all;
      for (const SegCategory& p : t.parts) all.push_back(p.name);
      try {
        mixed_labelspace(all, sources);
      } catch (const Error& e) {
        rejected += e.kind() == ErrorKind::kConfig;
      }
    }
  }
  const int supers = static_cast<int>(cihp_sources().taxonomy.size() + csp_sources().taxonomy.size());
  o.require(rejected == supers, "full-part rejection");
  o.detail << datasets << " datasets built, partition failures " << partition_failures
           << ", full-part subsets rejected " << rejected << "/" << supers;
}

void sampler_suite(Outcome& o) {
  std::ostringstream stats;
  for (std::size_t k : {2u, 3u, 5u}) {
    std::vector<std::int64_t> sizes;
    for (std::size_t i = 0; i < k; ++i) sizes.push_back(static_cast<std::int64_t>(7 + 997 * i * i));
    const auto seq = equal_frequency_sampler(sizes, kSamplerDraws, 5000 + k);
    std::vector<double> counts(k, 0.0);
    for (std::size_t v : seq) counts.at(v) += 1.0;
    const double expected = static_cast<double>(kSamplerDraws) / k;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    const double critical = boost::math::quantile(
        boost::math::chi_squared(static_cast<double>(k - 1)), 1.0 - kChiSquaredAlpha);
    o.require(chi2 < critical, "chi-squared K=" + std::to_string(k));
    o.require(seq == equal_frequency_sampler(sizes, kSamplerDraws, 5000 + k), "determinism");
    stats << "K=" << k << " chi2 " << chi2 << " < " << critical << "; ";
  }
  o.detail << stats.str();
}

void format_suite(Outcome& o) {
  const fs::path dir = fs::temp_directory_path() / "mixseg_acceptance_formats";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Rng rng(1008);
  const LabelSpace space = testing::numbered_space(6, 3);
  PanopticDataset ds{space, {}};
  int rle_mismatch = 0;
  for (int i = 1; i <= kRoundTripMaps; ++i) {
    const MaskShape s{rng.uniform_int(2, 24), rng.uniform_int(2, 24)};
    ds.images.push_back({i, {}, testing::random_panoptic(rng, s, 6, space)});
    for (const PanopticSegment& seg : ds.images.back().map.segments()) {
      const BinaryMask m = ds.images.back().map.segment_mask(seg.id);
      rle_mismatch += !(rle_from_json(rle_to_json(m)) == m) + !(rle_from_text(rle_to_text(m)) == m);
    }
  }
  write_panoptic_dataset(ds, dir / "maps.json", dir / "maps");
  const PanopticDataset back = load_panoptic_dataset(dir / "maps.json", dir / "maps");
  int png_mismatch = 0;
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    png_mismatch += !(back.images.at(i).map == ds.images[i].map);
  }
  o.require(png_mismatch == 0, "PNG round trip");
  o.require(rle_mismatch == 0, "RLE round trip");

  // Perfect scene: one prediction per ground-truth segment.
  PanopticDataset scene{space, {}};
  std::vector<PredictionImage> preds;
  for (int i = 1; i <= 3; ++i) {
    const PanopticMap gt = testing::random_panoptic(rng, {16, 16}, 5, space);
    scene.images.push_back({i, {}, gt});
    PredictionImage image{i, gt.shape(), {}};
    for (const PanopticSegment& seg : gt.segments()) {
      std::vector<double> probs(space.size() + 1, 0.01);
      probs[*space.position_of_id(seg.category_id)] = 1.0 - 0.01 * space.size();
      image.predictions.push_back(prediction(gt.segment_mask(seg.id), probs));
    }
    preds.push_back(std::move(image));
  }
  write_panoptic_dataset(scene, dir / "gt.json", dir / "gt");
  write_predictions(dir / "preds.json", preds);

  std::ostringstream out, err;
  const auto run = [&](const std::vector<std::string>& args) {
    out.str("");
    return cli::run_command(args, out, err);
  };
  const auto value = [&](const std::string& key) {
    std::istringstream lines(out.str());
    std::string line;
    while (std::getline(lines, line)) {
      if (line.rfind(key + ": ", 0) == 0) return std::stod(line.substr(key.size() + 2));
    }
    return -1.0;
  };
  int code = run({"fuse", "--algorithm", "esf-omi", "--predictions", (dir / "preds.json").string(),
                  "--categories", (dir / "gt.json").string(), "--out",
                  (dir / "fused.json").string(), "--out-png-dir", (dir / "fused").string(),
                  "--instances-out", (dir / "fused_instances.json").string()});
  o.require(code == 0, "fuse exit code");
  code = run({"evaluate", "--task", "panoptic", "--pred", (dir / "fused.json").string(),
              "--pred-png-dir", (dir / "fused").string(), "--gt", (dir / "gt.json").string(),
              "--gt-png-dir", (dir / "gt").string()});
  const double pq = value("pq");
  o.require(code == 0 && pq == 1.0, "pipeline PQ");
  code = run({"evaluate", "--task", "piq", "--pred", (dir / "fused.json").string(),
              "--pred-png-dir", (dir / "fused").string(), "--gt", (dir / "gt.json").string(),
              "--gt-png-dir", (dir / "gt").string(), "--pred-instances",
              (dir / "fused_instances.json").string()});
  const double piq = value("piq");
  o.require(code == 0 && piq == 100.0, "pipeline PIQ");
  if (!err.str().empty()) o.detail << "cli: " << err.str() << "; ";
  o.detail << "PNG mismatches " << png_mismatch << "/" << kRoundTripMaps << ", RLE mismatches "
           << rle_mismatch << ", pipeline PQ " << pq << ", PIQ " << piq;
  fs::remove_all(dir);
}

}  // namespace
}  // namespace mixseg

int main() {
  using Suite = std::function<void(mixseg::Outcome&)>;
  const std::vector<std::pair<std::string, Suite>> suites = {
      {"class-probabilities", mixseg::softmax_suite},
      {"labelspace-inference", mixseg::inference_suite},
      {"matching-and-loss", mixseg::matching_suite},
      {"fusion", mixseg::fusion_suite},
      {"metric-oracles", mixseg::metric_suite},
      {"benchmark-builder", mixseg::benchmark_suite},
      {"sampler", mixseg::sampler_suite},
      {"formats-and-pipeline", mixseg::format_suite}};
  int failures = 0;
  for (const auto& [name, suite] : suites) {
    mixseg::Outcome o;
    try {
      suite(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str());
  }
  return failures == 0 ? 0 : 1;
}
