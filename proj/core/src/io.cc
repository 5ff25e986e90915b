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


#include "mixseg/io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mixseg/error.h"

namespace mixseg {

namespace {

using nlohmann::json;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

// Runs a schema accessor, turning nlohmann type and key errors into kFormat.
template <typename F>
auto schema(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, where + ": " + e.what());
  }
}

json mask_json(const BinaryMask& mask) {
  return {{"size", {mask.shape().height, mask.shape().width}},
          {"counts", mask.runs()}};
}

BinaryMask mask_from(const json& j) {
  const MaskShape shape{j.at("size").at(0).get<int>(),
                        j.at("size").at(1).get<int>()};
  std::vector<BinaryMask::Run> runs =
      j.at("counts").get<std::vector<BinaryMask::Run>>();
  try {
    return BinaryMask::from_runs(shape, std::move(runs));
  } catch (const Error& e) {
    throw Error(ErrorKind::kFormat, e.what());
  }
}

SoftMask soft_from(const json& j) {
  const MaskShape shape{j.at("size").at(0).get<int>(),
                        j.at("size").at(1).get<int>()};
  try {
    return SoftMask(shape, j.at("values").get<std::vector<float>>());
  } catch (const Error& e) {
    throw Error(ErrorKind::kFormat, e.what());
  }
}

json categories_json(const LabelSpace& space) {
  json out = json::array();
  for (const SegCategory& c : space.categories()) {
    out.push_back({{"id", c.id}, {"name", c.name}, {"isthing", c.is_thing ? 1 : 0}});
  }
  return out;
}

LabelSpace categories_from(const json& doc) {
  std::optional<int> index;
  if (doc.contains("labelspace") && !doc["labelspace"].is_null()) {
    index = doc["labelspace"].get<int>();
  }
  std::vector<SegCategory> categories;
  for (const json& c : doc.at("categories")) {
    categories.push_back({c.at("id").get<int>(), c.at("name").get<std::string>(),
                          c.value("isthing", 0) != 0, index});
  }
  try {
    return LabelSpace(index, std::move(categories), doc.value("name", ""));
  } catch (const Error& e) {
    throw Error(ErrorKind::kFormat, e.what());
  }
}

void require_distribution(const std::vector<double>& probs,
                          const std::string& where) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::kFormat, where + ": probability outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-4) {
    throw Error(ErrorKind::kFormat,
                where + ": probabilities sum to " + std::to_string(sum));
  }
}

// Mask of a prediction or fixture entry: "mask" (RLE) or "soft".
SoftMask prediction_mask(const json& p, const MaskShape& shape,
                         const std::string& where) {
  SoftMask soft;
  if (p.contains("soft")) {
    soft = soft_from(p["soft"]);
  } else if (p.contains("mask")) {
    soft = SoftMask::from_binary(mask_from(p["mask"]));
  } else {
    throw Error(ErrorKind::kFormat, where + ": no \"mask\" or \"soft\"");
  }
  if (soft.shape() != shape) {
    throw Error(ErrorKind::kFormat, where + ": mask is " +
                                        to_string(soft.shape()) +
                                        ", image is " + to_string(shape));
  }
  return soft;
}

}  // namespace

// ---------------------------------------------------------------------------
// RLE

std::string rle_to_text(const BinaryMask& mask) {
  std::ostringstream out;
  out << mask.shape().height << ' ' << mask.shape().width;
  for (BinaryMask::Run r : mask.runs()) out << ' ' << r;
  return out.str();
}

BinaryMask rle_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  MaskShape shape;
  if (!(in >> shape.height >> shape.width)) {
    throw Error(ErrorKind::kFormat, "RLE text lacks dimensions");
  }
  std::vector<BinaryMask::Run> runs;
  std::int64_t r = 0;
  while (in >> r) {
    if (r < 0 || r > std::numeric_limits<BinaryMask::Run>::max()) {
      throw Error(ErrorKind::kFormat, "RLE run out of range");
    }
    runs.push_back(static_cast<BinaryMask::Run>(r));
  }
  if (!in.eof()) throw Error(ErrorKind::kFormat, "RLE text has a non-integer token");
  try {
    return BinaryMask::from_runs(shape, std::move(runs));
  } catch (const Error& e) {
    throw Error(ErrorKind::kFormat, e.what());
  }
}

std::string rle_to_json(const BinaryMask& mask) { return mask_json(mask).dump(); }

BinaryMask rle_from_json(std::string_view text) {
  return schema("RLE", [&] { return mask_from(json::parse(text)); });
}

// ---------------------------------------------------------------------------
// Panoptic datasets

LabelSpace load_categories(const fs::path& json_path) {
  const json doc = read_json(json_path);
  return schema(json_path.string(), [&] { return categories_from(doc); });
}

PanopticDataset load_panoptic_dataset(const fs::path& json_path,
                                      const fs::path& png_dir) {
  const json doc = read_json(json_path);
  PanopticDataset out;
  out.space = schema(json_path.string(), [&] { return categories_from(doc); });
  const auto annotations =
      schema(json_path.string(), [&] { return doc.at("annotations"); });
  for (const json& a : annotations) {
    PanopticImage image;
    std::vector<PanopticSegment> segments;
    schema(json_path.string(), [&] {
      image.image_id = a.at("image_id").get<int>();
      image.file_name = a.at("file_name").get<std::string>();
      for (const json& s : a.at("segments_info")) {
        const int category_id = s.at("category_id").get<int>();
        const auto pos = out.space.position_of_id(category_id);
        if (!pos) {
          throw Error(ErrorKind::kFormat,
                      "image " + std::to_string(image.image_id) +
                          ": unknown category " + std::to_string(category_id));
        }
        segments.push_back({s.at("id").get<std::uint32_t>(), category_id,
                            s.at("area").get<std::int64_t>(),
                            out.space[*pos].is_thing});
      }
    });
    MaskShape shape;
    std::vector<std::uint32_t> ids = read_id_png(png_dir / image.file_name, &shape);
    const std::string tag =
        "image " + std::to_string(image.image_id) + " (" + image.file_name + "): ";
    std::set<std::uint32_t> listed;
    for (const PanopticSegment& s : segments) listed.insert(s.id);
    std::set<std::uint32_t> present(ids.begin(), ids.end());
    present.erase(kVoidSegment);
    for (std::uint32_t id : present) {
      if (!listed.count(id)) {
        throw Error(ErrorKind::kIntegrity,
                    tag + "id " + std::to_string(id) +
                        " in PNG missing from JSON");
      }
    }
    for (std::uint32_t id : listed) {
      if (!present.count(id)) {
        throw Error(ErrorKind::kIntegrity,
                    tag + "segment " + std::to_string(id) +
                        " in JSON missing from PNG");
      }
    }
    try {
      image.map = PanopticMap(shape, std::move(ids), std::move(segments));
    } catch (const Error& e) {
      throw Error(e.kind() == ErrorKind::kIntegrity ? ErrorKind::kIntegrity
                                                    : ErrorKind::kFormat,
                  tag + e.what());
    }
    out.images.push_back(std::move(image));
  }
  return out;
}

void write_panoptic_dataset(const PanopticDataset& dataset,
                            const fs::path& json_path, const fs::path& png_dir) {
  fs::create_directories(png_dir);
  json images = json::array();
  json annotations = json::array();
  for (const PanopticImage& image : dataset.images) {
    const std::string file_name =
        image.file_name.empty() ? std::to_string(image.image_id) + ".png"
                                : image.file_name;
    const MaskShape& shape = image.map.shape();
    write_id_png(png_dir / file_name, shape,
                 std::vector<std::uint32_t>(image.map.ids().begin(),
                                            image.map.ids().end()));
    json segments = json::array();
    for (const PanopticSegment& s : image.map.segments()) {
      segments.push_back({{"id", s.id},
                          {"category_id", s.category_id},
                          {"area", s.area},
                          {"iscrowd", 0}});
    }
    images.push_back({{"id", image.image_id},
                      {"file_name", file_name},
                      {"height", shape.height},
                      {"width", shape.width}});
    annotations.push_back({{"image_id", image.image_id},
                           {"file_name", file_name},
                           {"segments_info", segments}});
  }
  json doc = {{"categories", categories_json(dataset.space)},
              {"images", images},
              {"annotations", annotations}};
  if (!dataset.space.name().empty()) doc["name"] = dataset.space.name();
  write_json(json_path, doc);
}

// ---------------------------------------------------------------------------
// Instances

InstanceFile load_instances(const fs::path& path) {
  const json doc = read_json(path);
  InstanceFile out;
  schema(path.string(), [&] {
    if (doc.contains("categories")) out.space = categories_from(doc);
    for (const json& a : doc.at("annotations")) {
      DetectionRecord r;
      r.image_id = a.at("image_id").get<int>();
      r.category_id = a.at("category_id").get<int>();
      r.score = a.value("score", 1.0);
      r.mask = mask_from(a.at("segmentation"));
      if (out.space && !out.space->position_of_id(r.category_id)) {
        throw Error(ErrorKind::kFormat,
                    "unknown category " + std::to_string(r.category_id));
      }
      out.records.push_back(std::move(r));
    }
  });
  return out;
}

void write_instances(const fs::path& path, const LabelSpace* space,
                     const std::vector<DetectionRecord>& records,
                     bool with_scores) {
  json annotations = json::array();
  for (const DetectionRecord& r : records) {
    json a = {{"image_id", r.image_id},
              {"category_id", r.category_id},
              {"area", r.mask.area()},
              {"segmentation", mask_json(r.mask)}};
    if (with_scores) a["score"] = r.score;
    annotations.push_back(std::move(a));
  }
  json doc = {{"annotations", annotations}};
  if (space) doc["categories"] = categories_json(*space);
  write_json(path, doc);
}

std::vector<InstanceAnnotation> as_annotations(
    const std::vector<DetectionRecord>& records) {
  std::vector<InstanceAnnotation> out;
  out.reserve(records.size());
  for (const DetectionRecord& r : records) {
    out.push_back({r.image_id, r.category_id, r.mask});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Predictions

std::vector<PredictionImage> load_predictions(const fs::path& path) {
  const json doc = read_json(path);
  std::vector<PredictionImage> out;
  schema(path.string(), [&] {
    for (const json& im : doc.at("images")) {
      PredictionImage image;
      image.image_id = im.at("image_id").get<int>();
      image.shape = {im.at("height").get<int>(), im.at("width").get<int>()};
      int index = 0;
      for (const json& p : im.at("predictions")) {
        const std::string where = path.string() + ": image " +
                                  std::to_string(image.image_id) +
                                  " prediction " + std::to_string(index++);
        Prediction pred;
        pred.soft_mask = prediction_mask(p, image.shape, where);
        pred.source_labelspace = p.value("labelspace", 0);
        if (p.contains("probs")) {
          std::vector<double> probs = p["probs"].get<std::vector<double>>();
          require_distribution(probs, where);
          pred.class_probs = std::move(probs);
        }
        if (p.contains("embedding")) {
          pred.image_embedding =
              EmbeddingVector(p["embedding"].get<std::vector<double>>());
        }
        if (!pred.class_probs && pred.image_embedding.dim() == 0) {
          throw Error(ErrorKind::kFormat,
                      where + ": needs \"probs\" or \"embedding\"");
        }
        if (p.contains("score")) pred.score = p["score"].get<double>();
        image.predictions.push_back(std::move(pred));
      }
      out.push_back(std::move(image));
    }
  });
  return out;
}

void write_predictions(const fs::path& path,
                       const std::vector<PredictionImage>& images) {
  json out = json::array();
  for (const PredictionImage& image : images) {
    json preds = json::array();
    for (const Prediction& p : image.predictions) {
      const MaskShape& s = p.soft_mask.shape();
      json j = {{"soft",
                 {{"size", {s.height, s.width}},
                  {"values", std::vector<float>(p.soft_mask.values().begin(),
                                                p.soft_mask.values().end())}}},
                {"labelspace", p.source_labelspace}};
      if (p.class_probs) j["probs"] = *p.class_probs;
      if (p.image_embedding.dim() > 0) {
        j["embedding"] = std::vector<double>(p.image_embedding.values().begin(),
                                             p.image_embedding.values().end());
      }
      if (p.score) j["score"] = *p.score;
      preds.push_back(std::move(j));
    }
    out.push_back({{"image_id", image.image_id},
                   {"height", image.shape.height},
                   {"width", image.shape.width},
                   {"predictions", preds}});
  }
  write_json(path, {{"images", out}});
}

// ---------------------------------------------------------------------------
// Embedding tables

ClassEmbeddingTable load_embedding_table(const fs::path& path) {
  const json doc = read_json(path);
  return schema(path.string(), [&] {
    std::optional<int> index;
    if (doc.contains("labelspace") && !doc["labelspace"].is_null()) {
      index = doc["labelspace"].get<int>();
    }
    const int dim = doc.at("dim").get<int>();
    if (dim <= 0) throw Error(ErrorKind::kFormat, "dim must be positive");
    std::vector<SegCategory> categories;
    std::vector<EmbeddingVector> entries;
    std::set<std::string> names;
    int next_id = 1;
    for (const json& e : doc.at("entries")) {
      const std::string name = e.at("name").get<std::string>();
      if (!names.insert(normalize_name(name)).second) {
        throw Error(ErrorKind::kFormat, "duplicate class name '" + name + "'");
      }
      EmbeddingVector v(e.at("embedding").get<std::vector<double>>());
      if (v.dim() != dim) {
        throw Error(ErrorKind::kFormat,
                    "class '" + name + "' has dimension " +
                        std::to_string(v.dim()) + ", table declares " +
                        std::to_string(dim));
      }
      if (!(v.norm() > 0.0) || !std::isfinite(v.norm())) {
        throw Error(ErrorKind::kFormat,
                    "class '" + name + "' has a zero-norm embedding");
      }
      const int id = e.value("id", next_id);
      next_id = id + 1;
      categories.push_back({id, name, e.value("isthing", 1) != 0, index});
      entries.push_back(v.normalized());
    }
    try {
      return ClassEmbeddingTable(
          LabelSpace(index, std::move(categories), doc.value("name", "")),
          std::move(entries));
    } catch (const Error& e) {
      throw Error(ErrorKind::kFormat, e.what());
    }
  });
}

void write_embedding_table(const fs::path& path,
                           const ClassEmbeddingTable& table) {
  json entries = json::array();
  const LabelSpace& space = table.labelspace();
  for (int i = 0; i < table.size(); ++i) {
    const auto v = table.entry(i).values();
    entries.push_back({{"id", space[i].id},
                       {"name", space[i].name},
                       {"isthing", space[i].is_thing ? 1 : 0},
                       {"embedding", std::vector<double>(v.begin(), v.end())}});
  }
  json doc = {{"name", space.name()}, {"dim", table.dim()}, {"entries", entries}};
  doc["labelspace"] = space.index() ? json(*space.index()) : json(nullptr);
  write_json(path, doc);
}

// ---------------------------------------------------------------------------
// Matching fixtures

MatchFixture load_match_fixture(const fs::path& path) {
  const json doc = read_json(path);
  MatchFixture out;
  schema(path.string(), [&] {
    const MaskShape shape{doc.at("height").get<int>(), doc.at("width").get<int>()};
    int index = 0;
    for (const json& p : doc.at("predictions")) {
      const std::string where =
          path.string() + ": prediction " + std::to_string(index++);
      Prediction pred;
      pred.soft_mask = prediction_mask(p, shape, where);
      std::vector<double> probs = p.at("probs").get<std::vector<double>>();
      require_distribution(probs, where);
      pred.class_probs = std::move(probs);
      out.predictions.push_back(std::move(pred));
    }
    for (const json& g : doc.at("ground_truth")) {
      BinaryMask mask = mask_from(g.at("mask"));
      if (mask.shape() != shape) {
        throw Error(ErrorKind::kFormat, path.string() + ": ground truth mask is " +
                                            to_string(mask.shape()));
      }
      out.ground_truth.push_back({g.at("class_index").get<int>(), std::move(mask)});
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Benchmark construction

std::vector<PartWholeImage> load_part_images(const fs::path& path,
                                             const BenchmarkSources& sources) {
  const json doc = read_json(path);
  std::vector<PartWholeImage> out;
  schema(path.string(), [&] {
    for (const json& im : doc.at("images")) {
      PartWholeImage image;
      image.image_id = im.at("image_id").get<int>();
      image.shape = {im.at("height").get<int>(), im.at("width").get<int>()};
      const std::string tag = path.string() + ": image " + std::to_string(image.image_id);
      for (const json& in : im.at("instances")) {
        const std::string super_name = in.at("super").get<std::string>();
        const PartTaxonomy* taxonomy = nullptr;
        for (const PartTaxonomy& t : sources.taxonomy) {
          if (normalize_name(t.super_category.name) == normalize_name(super_name)) {
            taxonomy = &t;
          }
        }
        if (!taxonomy) {
          throw Error(ErrorKind::kFormat, tag + ": unknown super-category '" + super_name + "'");
        }
        PartWholeSpec spec;
        spec.super_category = taxonomy->super_category;
        spec.parts = taxonomy->parts;
        spec.instance_id = in.value("instance_id", 0);
        for (const auto& [name, rle] : in.at("parts").items()) {
          const bool known = std::any_of(
              taxonomy->parts.begin(), taxonomy->parts.end(),
              [&](const SegCategory& p) { return normalize_name(p.name) == normalize_name(name); });
          if (!known) {
            throw Error(ErrorKind::kFormat,
                        tag + ": '" + name + "' is not a part of '" + super_name + "'");
          }
          BinaryMask mask = mask_from(rle);
          if (mask.shape() != image.shape) {
            throw Error(ErrorKind::kFormat, tag + ": part mask is " + to_string(mask.shape()));
          }
          spec.part_masks.emplace(normalize_name(name), std::move(mask));
        }
        if (in.contains("whole")) spec.whole_mask = mask_from(in["whole"]);
        image.instances.push_back(std::move(spec));
      }
      out.push_back(std::move(image));
    }
  });
  return out;
}

void write_mixed_dataset(const MixedDataset& dataset, const fs::path& dir) {
  const fs::path root = dir / dataset.name;
  fs::create_directories(root);
  PanopticDataset panoptic;
  panoptic.space = dataset.label_space;
  std::vector<DetectionRecord> instances;
  for (const MixedImage& image : dataset.images) {
    // Super-categories first, then parts, so parts stay visible.
    std::vector<const MixedAnnotation*> order;
    for (const MixedAnnotation& a : image.annotations) {
      instances.push_back({image.image_id, a.category.id, 1.0, a.mask});
      order.push_back(&a);
    }
    const auto is_super = [](const MixedAnnotation* a) { return a->is_super; };
    std::stable_partition(order.begin(), order.end(), is_super);
    std::vector<std::uint32_t> ids(image.shape.pixels(), kVoidSegment);
    std::vector<PanopticSegment> segments;
    for (const MixedAnnotation* a : order) {
      const auto id = static_cast<std::uint32_t>(segments.size() + 1);
      const DenseMask dense = decode_rle(a->mask);
      for (int r = 0; r < image.shape.height; ++r) {
        for (int c = 0; c < image.shape.width; ++c) {
          if (dense.at(r, c)) ids[static_cast<std::size_t>(r) * image.shape.width + c] = id;
        }
      }
      segments.push_back({id, a->category.id, 0, a->category.is_thing});
    }
    std::map<std::uint32_t, std::int64_t> area;
    for (std::uint32_t id : ids) ++area[id];
    std::vector<PanopticSegment> kept;
    std::map<std::uint32_t, std::uint32_t> renumber;
    for (PanopticSegment s : segments) {
      if (area[s.id] == 0) continue;
      renumber[s.id] = static_cast<std::uint32_t>(kept.size() + 1);
      s.area = area[s.id];
      s.id = renumber[s.id];
      kept.push_back(s);
    }
    for (std::uint32_t& id : ids) {
      if (id != kVoidSegment) id = renumber[id];
    }
    panoptic.images.push_back({image.image_id, std::to_string(image.image_id) + ".png",
                               PanopticMap(image.shape, std::move(ids), std::move(kept))});
  }
  write_panoptic_dataset(panoptic, root / "panoptic.json", root / "panoptic");
  write_instances(root / "instances.json", &dataset.label_space, instances, false);
}

std::vector<BenchmarkFixture> load_benchmark_fixtures(const fs::path& path) {
  const json doc = read_json(path);
  return schema(path.string(), [&] {
    std::vector<BenchmarkFixture> out;
    for (const json& f : doc.at("fixtures")) {
      out.push_back({f.at("name").get<std::string>(),
                     f.at("sources").get<std::string>(),
                     f.at("label_spaces").get<std::vector<std::vector<std::string>>>()});
    }
    return out;
  });
}

FusionConfig load_fusion_config(const fs::path& path, FusionAlgorithm algorithm) {
  const json doc = read_json(path);
  FusionConfig cfg = algorithm == FusionAlgorithm::kOriginal
                         ? FusionConfig::original_defaults()
                         : FusionConfig::esf_omi_defaults();
  const char* key = algorithm == FusionAlgorithm::kOriginal ? "original" : "esf-omi";
  schema(path.string(), [&] {
    if (!doc.contains(key)) return;
    const json& j = doc.at(key);
    cfg.score_threshold = j.value("score_threshold", cfg.score_threshold);
    cfg.nms_iou_threshold = j.value("nms_iou_threshold", cfg.nms_iou_threshold);
    cfg.containment_slack = j.value("containment_slack", cfg.containment_slack);
    cfg.min_visible_ratio = j.value("min_visible_ratio", cfg.min_visible_ratio);
    cfg.binarize_threshold = j.value("binarize_threshold", cfg.binarize_threshold);
  });
  return cfg;
}

}  // namespace mixseg
