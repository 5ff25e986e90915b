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


#include "mixseg_cli/cli.h"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <random>

#include "CLI11.hpp"
#include "json.hpp"
#include "mixseg/benchgen.h"
#include "mixseg/error.h"
#include "mixseg/io.h"
#include "mixseg/matching.h"
#include "mixseg/metrics.h"
#include "mixseg/postproc.h"
#include "mixseg/semantics.h"

namespace mixseg::cli {

namespace {

using nlohmann::ordered_json;

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

// Line-oriented text plus a JSON document with the same values.
class Report {
 public:
  void value(const std::string& key, double v) {
    lines_.push_back(key + ": " + fixed4(v));
    doc_[key] = round4(v);
  }
  void count(const std::string& key, std::int64_t v) {
    lines_.push_back(key + ": " + std::to_string(v));
    doc_[key] = v;
  }
  void text(const std::string& key, const std::string& v) {
    lines_.push_back(key + ": " + v);
    doc_[key] = v;
  }
  // JSON only.
  ordered_json& doc() { return doc_; }

  void emit(std::ostream& out, const std::string& path) const {
    for (const std::string& line : lines_) out << line << '\n';
    if (path.empty()) return;
    std::ofstream file(path);
    if (!file) throw Error(ErrorKind::kIo, "cannot write " + path);
    file << doc_.dump(2) << '\n';
  }

 private:
  std::vector<std::string> lines_;
  ordered_json doc_ = ordered_json::object();
};

// Runs f(i) for i in [0, n) on up to `jobs` threads; results land by index,
// so the output does not depend on scheduling.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, int jobs, F&& f) {
  std::vector<std::optional<T>> slots(n);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, std::max(jobs, 1)));
  std::vector<std::future<void>> futures;
  for (std::size_t w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += workers) slots[i].emplace(f(i));
    }));
  }
  for (auto& fut : futures) fut.get();
  std::vector<T> out;
  out.reserve(n);
  for (std::optional<T>& slot : slots) out.push_back(std::move(*slot));
  return out;
}

struct Pair {
  int image_id;
  PanopticMap pred;
  PanopticMap gt;
};

std::vector<Pair> pair_images(const PanopticDataset& pred,
                              const PanopticDataset& gt) {
  std::map<int, const PanopticMap*> by_id;
  for (const PanopticImage& im : pred.images) {
    if (!by_id.emplace(im.image_id, &im.map).second) {
      throw Error(ErrorKind::kIntegrity,
                  "prediction image " + std::to_string(im.image_id) + " repeated");
    }
  }
  std::vector<Pair> out;
  for (const PanopticImage& im : gt.images) {
    const auto it = by_id.find(im.image_id);
    // A missing prediction is an all-void map: every segment is missed.
    PanopticMap pred_map = it == by_id.end() ? PanopticMap(im.map.shape()) : *it->second;
    if (it != by_id.end()) by_id.erase(it);
    out.push_back({im.image_id, std::move(pred_map), im.map});
  }
  if (!by_id.empty()) {
    throw Error(ErrorKind::kIntegrity,
                "prediction for image " + std::to_string(by_id.begin()->first) +
                    " has no ground truth");
  }
  return out;
}

std::vector<DetectionRecord> things_of(const PanopticDataset& dataset) {
  std::vector<DetectionRecord> out;
  for (const PanopticImage& im : dataset.images) {
    for (const PanopticSegment& s : im.map.segments()) {
      if (!s.is_thing) continue;
      out.push_back({im.image_id, s.category_id, 1.0, im.map.segment_mask(s.id)});
    }
  }
  return out;
}

void add_pq(Report& report, const std::string& prefix, const PQValues& v) {
  report.value(prefix + "pq", v.pq);
  report.value(prefix + "sq", v.sq);
  report.value(prefix + "rq", v.rq);
  report.count(prefix + "categories", v.num_categories);
}

struct EvaluateArgs {
  std::string task;
  std::string pred_json, pred_png, gt_json, gt_png;
  std::string pred_instances, gt_instances;
  double match_iou = 0.5;
};

void evaluate(const EvaluateArgs& a, int jobs, Report& report) {
  const auto need = [](const std::string& v, const char* flag) {
    if (v.empty()) {
      throw Error(ErrorKind::kUsage, std::string("--task needs ") + flag);
    }
  };
  const auto png_dir = [](const std::string& dir, const std::string& json) {
    return dir.empty() ? fs::path(json).parent_path() / "panoptic" : fs::path(dir);
  };
  report.text("task", a.task);

  if (a.task == "instance") {
    need(a.pred_instances, "--pred-instances");
    need(a.gt_instances, "--gt-instances");
    const InstanceFile pred = load_instances(a.pred_instances);
    const InstanceFile gt = load_instances(a.gt_instances);
    const APReport ap = instance_ap(pred.records, as_annotations(gt.records));
    report.value("ap", ap.ap);
    report.value("ap50", ap.ap50);
    report.value("ap75", ap.ap75);
    report.value("ap_s", ap.ap_s);
    report.value("ap_m", ap.ap_m);
    report.value("ap_l", ap.ap_l);
    for (const auto& [id, v] : ap.per_category) {
      report.doc()["per_category"][std::to_string(id)] = round4(v);
    }
    return;
  }

  need(a.pred_json, "--pred");
  need(a.gt_json, "--gt");
  const PanopticDataset gt = load_panoptic_dataset(a.gt_json, png_dir(a.gt_png, a.gt_json));
  const PanopticDataset pred =
      load_panoptic_dataset(a.pred_json, png_dir(a.pred_png, a.pred_json));
  const std::vector<Pair> pairs = pair_images(pred, gt);
  const LabelSpace& space = gt.space;
  report.count("images", static_cast<std::int64_t>(pairs.size()));

  if (a.task == "semantic") {
    const auto parts = parallel_map<SemanticConfusion>(pairs.size(), jobs, [&](std::size_t i) {
      SemanticConfusion c(space.size());
      c.add(class_map_from_panoptic(pairs[i].pred, space),
            class_map_from_panoptic(pairs[i].gt, space));
      return c;
    });
    SemanticConfusion total(space.size());
    for (const SemanticConfusion& c : parts) total.merge(c);
    const SemanticScores s = summarize(total);
    report.value("miou", s.miou);
    report.value("fwiou", s.fwiou);
    report.value("macc", s.macc);
    report.value("pacc", s.pacc);
    return;
  }

  if (a.task == "panoptic") {
    PQOptions options;
    options.match_iou = a.match_iou;
    const auto parts = parallel_map<PQStats>(pairs.size(), jobs, [&](std::size_t i) {
      PQStats s;
      s.add(pairs[i].pred, pairs[i].gt, space, options);
      return s;
    });
    PQStats total;
    for (const PQStats& s : parts) total.merge(s);
    const PQReport pq = summarize(total, space);
    add_pq(report, "", pq.all);
    add_pq(report, "things_", pq.things);
    add_pq(report, "stuff_", pq.stuff);
    for (const auto& [id, v] : pq.per_category) {
      report.doc()["per_category"][std::to_string(id)] = {
          {"pq", round4(v.pq)}, {"sq", round4(v.sq)}, {"rq", round4(v.rq)}};
    }
    return;
  }

  if (a.task == "piq") {
    const std::vector<DetectionRecord> dets =
        a.pred_instances.empty() ? things_of(pred) : load_instances(a.pred_instances).records;
    const std::vector<InstanceAnnotation> gts = as_annotations(
        a.gt_instances.empty() ? things_of(gt) : load_instances(a.gt_instances).records);
    std::vector<PanopticPair> panoptic;
    for (const Pair& p : pairs) panoptic.push_back({p.image_id, p.pred, p.gt});
    const PIQReport piq = piq_score({dets, gts, panoptic}, space);
    report.value("piq", piq.piq);
    report.value("piq50", piq.piq50);
    report.value("piq75", piq.piq75);
    report.value("piq_s", piq.piq_s);
    report.value("piq_m", piq.piq_m);
    report.value("piq_l", piq.piq_l);
    report.value("piq_split", piq.piq_split);
    report.value("piq_instance", piq.piq_instance);
    for (const auto& [id, v] : piq.per_category) {
      report.doc()["per_category"][std::to_string(id)] = round4(v);
    }
    return;
  }
  throw Error(ErrorKind::kUsage, "unknown task '" + a.task + "'");
}

struct FuseArgs {
  std::string algorithm = "esf-omi";
  std::string predictions, categories, test_table;
  std::string out_json, out_png, instances_out;
  std::optional<double> score_threshold, nms_iou, slack, min_visible_ratio,
      binarize_threshold;
  double tau = kDefaultTemperature;
};

void fuse_command(const FuseArgs& a, const std::string& config, int jobs,
                  Report& report) {
  const FusionAlgorithm algorithm =
      a.algorithm == "original" ? FusionAlgorithm::kOriginal : FusionAlgorithm::kEsfOmi;
  // Flags override the config file, which overrides built-in defaults.
  FusionConfig cfg = config.empty()
                         ? (algorithm == FusionAlgorithm::kOriginal
                                ? FusionConfig::original_defaults()
                                : FusionConfig::esf_omi_defaults())
                         : load_fusion_config(config, algorithm);
  if (a.score_threshold) cfg.score_threshold = *a.score_threshold;
  if (a.nms_iou) cfg.nms_iou_threshold = *a.nms_iou;
  if (a.slack) cfg.containment_slack = *a.slack;
  if (a.min_visible_ratio) cfg.min_visible_ratio = *a.min_visible_ratio;
  if (a.binarize_threshold) cfg.binarize_threshold = *a.binarize_threshold;
  cfg.validate();

  std::optional<ClassEmbeddingTable> table;
  LabelSpace space;
  if (!a.test_table.empty()) {
    table = load_embedding_table(a.test_table);
    space = table->labelspace();
  } else if (!a.categories.empty()) {
    space = load_categories(a.categories);
  } else {
    throw Error(ErrorKind::kUsage, "fuse needs --categories or --test-table");
  }

  std::vector<PredictionImage> images = load_predictions(a.predictions);
  const auto fused = parallel_map<std::pair<PanopticMap, std::vector<DetectionRecord>>>(
      images.size(), jobs, [&](std::size_t i) {
        const PredictionImage& image = images[i];
        std::vector<ScoredMask> scored;
        std::vector<DetectionRecord> dets;
        for (const Prediction& p : image.predictions) {
          Prediction pred = p;
          if (!pred.class_probs) {
            if (!table) {
              throw Error(ErrorKind::kFormat,
                          "image " + std::to_string(image.image_id) +
                              ": prediction has no probabilities and no --test-table");
            }
            pred.class_probs = class_probabilities(pred.image_embedding, *table, a.tau);
          }
          if (static_cast<int>(pred.class_probs->size()) != space.size() + 1) {
            throw Error(ErrorKind::kFormat,
                        "image " + std::to_string(image.image_id) + ": " +
                            std::to_string(pred.class_probs->size()) +
                            " probabilities for " + std::to_string(space.size()) +
                            " categories plus background");
          }
          ScoredMask m = score_and_label(pred, cfg.binarize_threshold);
          if (m.mask.area() > 0 && space[m.fg_label].is_thing) {
            dets.push_back({image.image_id, space[m.fg_label].id, m.fg_score, m.mask});
          }
          scored.push_back(std::move(m));
        }
        if (scored.empty()) {
          return std::make_pair(PanopticMap(image.shape), std::move(dets));
        }
        return std::make_pair(fuse(algorithm, scored, space, cfg), std::move(dets));
      });

  PanopticDataset out;
  out.space = space;
  std::vector<DetectionRecord> all_dets;
  std::int64_t segments = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    segments += static_cast<std::int64_t>(fused[i].first.segments().size());
    out.images.push_back({images[i].image_id, std::to_string(images[i].image_id) + ".png",
                          fused[i].first});
    all_dets.insert(all_dets.end(), fused[i].second.begin(), fused[i].second.end());
  }
  const fs::path png = a.out_png.empty() ? fs::path(a.out_json).parent_path() / "panoptic"
                                         : fs::path(a.out_png);
  write_panoptic_dataset(out, a.out_json, png);
  if (!a.instances_out.empty()) write_instances(a.instances_out, &space, all_dets, true);

  report.text("algorithm", a.algorithm);
  report.count("images", static_cast<std::int64_t>(images.size()));
  report.count("segments", segments);
  report.value("score_threshold", cfg.score_threshold);
  report.value("nms_iou_threshold", cfg.nms_iou_threshold);
  report.value("containment_slack", cfg.containment_slack);
  report.value("min_visible_ratio", cfg.min_visible_ratio);
  report.value("binarize_threshold", cfg.binarize_threshold);
}

std::string join_indices(const std::vector<int>& v) {
  std::string s;
  for (int k : v) s += (s.empty() ? "" : " ") + std::to_string(k);
  return s;
}

std::vector<ClassEmbeddingTable> load_tables(const std::vector<std::string>& paths) {
  std::vector<ClassEmbeddingTable> out;
  for (const std::string& p : paths) out.push_back(load_embedding_table(p));
  return out;
}

// Uniform in [-1, 1) from the top 53 bits; identical on every platform.
EmbeddingVector random_vector(std::mt19937_64& engine, int dim) {
  std::vector<double> v(dim);
  for (double& x : v) x = static_cast<double>(engine() >> 11) * 0x1.0p-52 - 1.0;
  return EmbeddingVector(std::move(v));
}

struct InferArgs {
  std::string test_table;
  std::vector<std::string> train_tables;
  int num_queries = 8;
  int images = 1;
  int height = 32;
  int width = 32;
  std::uint64_t seed = 0;
  double tau = kDefaultTemperature;
  std::string predictions_out;
};

void infer_sim(const InferArgs& a, int jobs, Report& report) {
  const ClassEmbeddingTable test = load_embedding_table(a.test_table);
  const std::vector<ClassEmbeddingTable> train = load_tables(a.train_tables);
  const std::vector<int> d = select_label_spaces(test, train);
  int max_k = 0;
  for (const ClassEmbeddingTable& t : train) max_k = std::max(max_k, t.labelspace().index().value_or(0));

  std::mt19937_64 engine(a.seed);
  std::vector<EmbeddingVector> queries, lsqe;
  for (int i = 0; i < a.num_queries; ++i) queries.push_back(random_vector(engine, test.dim()));
  for (int k = 0; k < max_k; ++k) lsqe.push_back(random_vector(engine, test.dim()));
  const QuerySet set(std::move(queries), std::move(lsqe));
  const HashStubDecoder decoder(a.seed, test.dim());

  std::vector<PredictionImage> out;
  std::int64_t total = 0;
  for (int i = 0; i < a.images; ++i) {
    const ImageHandle handle{static_cast<std::uint64_t>(i + 1), {a.height, a.width}};
    std::vector<Prediction> preds =
        run_labelspace_passes(decoder, set, handle, test, d, a.tau, jobs > 1);
    total += static_cast<std::int64_t>(preds.size());
    out.push_back({i + 1, handle.shape, std::move(preds)});
  }
  if (!a.predictions_out.empty()) write_predictions(a.predictions_out, out);

  report.text("labelspaces", join_indices(d));
  report.doc()["labelspaces"] = d;
  report.count("queries", a.num_queries);
  report.count("images", a.images);
  report.count("predictions_per_image",
               static_cast<std::int64_t>(a.num_queries) * static_cast<std::int64_t>(d.size()));
  report.count("predictions", total);
}

void match_loss(const std::string& fixture, Report& report) {
  const MatchFixture f = load_match_fixture(fixture);
  CostMatrix cost(static_cast<int>(f.ground_truth.size()),
                  static_cast<int>(f.predictions.size()));
  for (std::size_t g = 0; g < f.ground_truth.size(); ++g) {
    for (std::size_t p = 0; p < f.predictions.size(); ++p) {
      cost(static_cast<int>(g), static_cast<int>(p)) =
          pair_cost(f.predictions[p], f.ground_truth[g]);
    }
  }
  const Assignment assignment = hungarian_assign(cost);
  const LossBreakdown loss = set_loss(f.predictions, f.ground_truth);
  std::string pairs;
  for (std::size_t g = 0; g < assignment.pairs.size(); ++g) {
    pairs += (pairs.empty() ? "" : " ") + std::to_string(g) + "->" +
             std::to_string(assignment.pairs[g]);
  }
  report.text("assignment", pairs);
  report.doc()["assignment"] = assignment.pairs;
  report.doc()["unmatched"] = assignment.unmatched_predictions;
  report.value("matching_cost", assignment.total_cost);
  report.value("loss", loss.total);
  report.value("classification_loss", loss.classification_part);
  report.value("mask_loss", loss.mask_part);
}

struct BenchArgs {
  std::string sources;
  std::string fixture;
  std::vector<std::string> label_spaces;
  std::string parts;
  std::string super_source = "part-union";
  std::string out;
  std::string prefix;
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = std::min(s.find(',', start), s.size());
    const std::string item = normalize_name(s.substr(start, end - start));
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

void build_bench(const BenchArgs& a, const std::string& config, Report& report) {
  std::vector<std::vector<std::string>> spaces;
  std::string source_name = a.sources;
  if (!a.fixture.empty()) {
    BenchmarkFixture fixture;
    if (config.empty()) {
      fixture = builtin_fixture(a.fixture);
    } else {
      bool found = false;
      for (const BenchmarkFixture& f : load_benchmark_fixtures(config)) {
        if (f.name == a.fixture) fixture = f, found = true;
      }
      if (!found) throw Error(ErrorKind::kNotFound, "no benchmark '" + a.fixture + "' in " + config);
    }
    if (!source_name.empty() && source_name != fixture.sources) {
      throw Error(ErrorKind::kUsage, "--sources conflicts with the fixture's sources");
    }
    source_name = fixture.sources;
    spaces = fixture.label_spaces;
  }
  for (const std::string& s : a.label_spaces) spaces.push_back(split_csv(s));
  if (source_name.empty()) throw Error(ErrorKind::kUsage, "build-bench needs --sources or --fixture");
  if (spaces.empty()) throw Error(ErrorKind::kUsage, "build-bench needs --fixture or --label-space");

  const BenchmarkSources sources = builtin_sources(source_name);
  std::vector<std::vector<std::string>> subsets;
  for (const auto& labels : spaces) subsets.push_back(part_subset_of(labels, sources));

  std::vector<PartWholeImage> images;
  if (!a.parts.empty()) images = load_part_images(a.parts, sources);
  const SuperMaskSource super_source = a.super_source == "whole"
                                           ? SuperMaskSource::kWholeAnnotation
                                           : SuperMaskSource::kPartUnion;
  const std::string prefix = a.prefix.empty() ? (a.fixture.empty() ? source_name : a.fixture)
                                              : a.prefix;
  const std::vector<MixedDataset> datasets =
      build_mixed_datasets(images, sources, subsets, super_source, prefix);

  ordered_json manifest = ordered_json::array();
  int fallbacks = 0;
  for (const MixedDataset& d : datasets) {
    std::vector<std::string> names;
    for (const SegCategory& c : d.label_space.categories()) names.push_back(c.name);
    manifest.push_back({{"name", d.name},
                        {"label_space", names},
                        {"images", d.images.size()},
                        {"whole_mask_fallbacks", d.whole_mask_fallbacks}});
    fallbacks += d.whole_mask_fallbacks;
    if (!a.out.empty() && !images.empty()) write_mixed_dataset(d, a.out);
  }
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    std::ofstream file(fs::path(a.out) / "manifest.json");
    file << manifest.dump(2) << '\n';
  }
  report.text("sources", source_name);
  report.count("datasets", static_cast<std::int64_t>(datasets.size()));
  report.count("images", static_cast<std::int64_t>(images.size()));
  report.count("whole_mask_fallbacks", fallbacks);
  for (const MixedDataset& d : datasets) {
    std::string names;
    for (const SegCategory& c : d.label_space.categories()) {
      names += (names.empty() ? "" : ", ") + c.name;
    }
    report.text(d.name, "[" + names + "]");
  }
  report.doc()["datasets_detail"] = manifest;
}

void sample(const std::vector<std::int64_t>& sizes, std::int64_t draws,
            std::uint64_t seed, Report& report) {
  const std::vector<std::size_t> seq = equal_frequency_sampler(sizes, draws, seed);
  std::vector<std::int64_t> counts(sizes.size(), 0);
  std::string text;
  for (std::size_t k : seq) {
    ++counts[k];
    text += (text.empty() ? "" : " ") + std::to_string(k);
  }
  report.count("draws", draws);
  report.count("seed", static_cast<std::int64_t>(seed));
  for (std::size_t k = 0; k < counts.size(); ++k) {
    report.count("count_" + std::to_string(k), counts[k]);
  }
  report.text("sequence", text);
  report.doc()["sequence"] = seq;
}

int exit_code(ErrorKind kind) {
  return kind == ErrorKind::kUsage ? kExitUsage : kExitData;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  if (const char* v = std::getenv("MIXSEG_VERBOSE"); v && *v && *v != '0') {
    spdlog::set_level(spdlog::level::debug);
  }

  CLI::App app{"Mixed label space segmentation toolkit", "mixseg"};
  app.require_subcommand(1);
  // Global options may follow the subcommand.
  app.fallthrough();
  std::string report_out;
  std::string config;
  int jobs = 1;
  app.add_option("--report-out", report_out, "Write the JSON report here");
  app.add_option("--config", config, "Fusion or benchmark config file");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  EvaluateArgs eval;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions");
  evaluate_cmd->add_option("--task", eval.task)
      ->required()
      ->check(CLI::IsMember({"semantic", "panoptic", "instance", "piq"}));
  evaluate_cmd->add_option("--pred", eval.pred_json, "Predicted panoptic JSON");
  evaluate_cmd->add_option("--pred-png-dir", eval.pred_png);
  evaluate_cmd->add_option("--gt", eval.gt_json, "Ground-truth panoptic JSON");
  evaluate_cmd->add_option("--gt-png-dir", eval.gt_png);
  evaluate_cmd->add_option("--pred-instances", eval.pred_instances);
  evaluate_cmd->add_option("--gt-instances", eval.gt_instances);
  evaluate_cmd->add_option("--match-iou", eval.match_iou)->check(CLI::Range(0.5, 1.0));

  FuseArgs fuse_args;
  CLI::App* fuse_cmd = app.add_subcommand("fuse", "Fuse mask predictions into panoptic maps");
  fuse_cmd->add_option("--algorithm", fuse_args.algorithm)
      ->check(CLI::IsMember({"original", "esf-omi"}));
  fuse_cmd->add_option("--predictions", fuse_args.predictions)->required();
  fuse_cmd->add_option("--categories", fuse_args.categories);
  fuse_cmd->add_option("--test-table", fuse_args.test_table);
  fuse_cmd->add_option("--out", fuse_args.out_json, "Panoptic JSON to write")->required();
  fuse_cmd->add_option("--out-png-dir", fuse_args.out_png);
  fuse_cmd->add_option("--instances-out", fuse_args.instances_out);
  fuse_cmd->add_option("--score-threshold", fuse_args.score_threshold);
  fuse_cmd->add_option("--nms-iou", fuse_args.nms_iou);
  fuse_cmd->add_option("--slack", fuse_args.slack);
  fuse_cmd->add_option("--min-visible-ratio", fuse_args.min_visible_ratio);
  fuse_cmd->add_option("--binarize-threshold", fuse_args.binarize_threshold);
  fuse_cmd->add_option("--tau", fuse_args.tau)->check(CLI::PositiveNumber);

  std::string select_test;
  std::vector<std::string> select_train;
  double select_tol = kLabelSpaceTieTolerance;
  CLI::App* select_cmd =
      app.add_subcommand("select-labelspaces", "Pick training label spaces for a test space");
  select_cmd->add_option("--test-table", select_test)->required();
  select_cmd->add_option("--train-table", select_train)->required();
  select_cmd->add_option("--tie-tolerance", select_tol)->check(CLI::NonNegativeNumber);

  InferArgs infer;
  CLI::App* infer_cmd = app.add_subcommand("infer-sim", "Multi-pass inference with the stub decoder");
  infer_cmd->add_option("--test-table", infer.test_table)->required();
  infer_cmd->add_option("--train-table", infer.train_tables)->required();
  infer_cmd->add_option("--num-queries", infer.num_queries)->check(CLI::PositiveNumber);
  infer_cmd->add_option("--images", infer.images)->check(CLI::PositiveNumber);
  infer_cmd->add_option("--height", infer.height)->check(CLI::PositiveNumber);
  infer_cmd->add_option("--width", infer.width)->check(CLI::PositiveNumber);
  infer_cmd->add_option("--seed", infer.seed);
  infer_cmd->add_option("--tau", infer.tau)->check(CLI::PositiveNumber);
  infer_cmd->add_option("--predictions-out", infer.predictions_out);

  std::string fixture;
  CLI::App* match_cmd = app.add_subcommand("match-loss", "Bipartite matching and set loss");
  match_cmd->add_option("--fixture", fixture)->required();

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("build-bench", "Build mixed label space datasets");
  bench_cmd->add_option("--sources", bench.sources)->check(CLI::IsMember({"cihp", "csp"}));
  bench_cmd->add_option("--fixture", bench.fixture);
  bench_cmd->add_option("--label-space", bench.label_spaces, "Comma-separated labels");
  bench_cmd->add_option("--parts", bench.parts, "Part annotation JSON");
  bench_cmd->add_option("--super-source", bench.super_source)
      ->check(CLI::IsMember({"part-union", "whole"}));
  bench_cmd->add_option("--out", bench.out);
  bench_cmd->add_option("--name-prefix", bench.prefix);

  std::vector<std::int64_t> sizes;
  std::int64_t draws = 0;
  std::uint64_t seed = 0;
  CLI::App* sample_cmd = app.add_subcommand("sample", "Equal-frequency dataset sampling");
  sample_cmd->add_option("--sizes", sizes)->required()->delimiter(',');
  sample_cmd->add_option("--draws", draws)->required();
  sample_cmd->add_option("--seed", seed);

  std::vector<std::string> argv_storage = {"mixseg"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& s : argv_storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    Report report;
    if (evaluate_cmd->parsed()) {
      evaluate(eval, jobs, report);
    } else if (fuse_cmd->parsed()) {
      fuse_command(fuse_args, config, jobs, report);
    } else if (select_cmd->parsed()) {
      const ClassEmbeddingTable test = load_embedding_table(select_test);
      const std::vector<int> d = select_label_spaces(test, load_tables(select_train), select_tol);
      report.text("labelspaces", join_indices(d));
      report.doc()["labelspaces"] = d;
    } else if (infer_cmd->parsed()) {
      infer_sim(infer, jobs, report);
    } else if (match_cmd->parsed()) {
      match_loss(fixture, report);
    } else if (bench_cmd->parsed()) {
      build_bench(bench, config, report);
    } else if (sample_cmd->parsed()) {
      sample(sizes, draws, seed, report);
    }
    report.emit(out, report_out);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "io error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace mixseg::cli
