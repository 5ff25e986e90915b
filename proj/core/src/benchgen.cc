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

#include "mixseg/benchgen.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <set>

#include "mixseg/error.h"

namespace mixseg {

namespace {

LabelSpace make_space(int index, const std::string& name,
                      const std::vector<std::string>& names,
                      const std::set<std::string>& things) {
  std::vector<SegCategory> categories;
  int id = 1;
  for (const std::string& n : names) {
    categories.push_back({id++, n, things.count(n) > 0, index});
  }
  return LabelSpace(index, std::move(categories), name);
}

PartTaxonomy make_taxonomy(const LabelSpace& part_space,
                           const LabelSpace& whole_space,
                           const std::string& super_name,
                           const std::vector<std::string>& part_names) {
  PartTaxonomy t;
  t.super_category = whole_space[*whole_space.position_of_name(super_name)];
  for (const std::string& p : part_names) {
    t.parts.push_back(part_space[*part_space.position_of_name(p)]);
  }
  return t;
}

// Locates the taxonomy entry owning a part; throws kConfig if the part is
// unknown or listed under several super-categories.
std::pair<std::size_t, const SegCategory*> find_part(
    const BenchmarkSources& sources, const std::string& part) {
  const std::string key = normalize_name(part);
  std::optional<std::pair<std::size_t, const SegCategory*>> found;
  for (std::size_t t = 0; t < sources.taxonomy.size(); ++t) {
    for (const SegCategory& p : sources.taxonomy[t].parts) {
      if (normalize_name(p.name) != key) continue;
      if (found) {
        throw Error(ErrorKind::kConfig,
                    "part '" + part + "' belongs to several super-categories");
      }
      found.emplace(t, &p);
    }
  }
  if (!found) {
    throw Error(ErrorKind::kConfig, "unknown part '" + part + "'");
  }
  return *found;
}

std::string subset_label(std::span<const std::string> subset) {
  std::string out;
  for (const std::string& s : subset) {
    if (!out.empty()) out += '+';
    for (char c : normalize_name(s)) out += c == ' ' ? '_' : c;
  }
  return out;
}

}  // namespace

BinaryMask synthesize_super_mask(const PartWholeSpec& instance) {
  if (instance.part_masks.empty()) {
    throw Error(ErrorKind::kDegenerateInput,
                "instance " + std::to_string(instance.instance_id) +
                    " of '" + instance.super_category.name +
                    "' has no part masks");
  }
  auto it = instance.part_masks.begin();
  BinaryMask out = it->second;
  for (++it; it != instance.part_masks.end(); ++it) {
    require_same_shape(out.shape(), it->second.shape(),
                       "synthesize_super_mask");
    out = mask_union(out, it->second);
  }
  return out;
}

bool validate_mixed_labelspace(const LabelSpace& c, const LabelSpace& a,
                               const LabelSpace& b) {
  bool only_a = false;
  bool only_b = false;
  for (const SegCategory& category : c.categories()) {
    const bool in_a = a.contains_name(category.name);
    const bool in_b = b.contains_name(category.name);
    if (!in_a && !in_b) {
      throw Error(ErrorKind::kProvenance,
                  "category '" + category.name + "' is in neither '" +
                      a.name() + "' nor '" + b.name() + "'");
    }
    only_a = only_a || (in_a && !in_b);
    only_b = only_b || (in_b && !in_a);
  }
  return only_a && only_b;
}

LabelSpace mixed_labelspace(std::span<const std::string> part_subset,
                            const BenchmarkSources& sources) {
  if (part_subset.empty()) {
    throw Error(ErrorKind::kConfig, "empty part subset");
  }
  // Taxonomy entries in order of first appearance, each with its parts.
  std::vector<std::size_t> supers;
  std::map<std::size_t, std::vector<const SegCategory*>> chosen;
  std::set<std::string> seen;
  for (const std::string& part : part_subset) {
    if (!seen.insert(normalize_name(part)).second) {
      throw Error(ErrorKind::kConfig, "part '" + part + "' listed twice");
    }
    const auto [t, category] = find_part(sources, part);
    if (!chosen.count(t)) supers.push_back(t);
    chosen[t].push_back(category);
  }
  std::vector<SegCategory> categories;
  int id = 1;
  for (std::size_t t : supers) {
    const PartTaxonomy& taxonomy = sources.taxonomy[t];
    if (chosen[t].size() >= taxonomy.parts.size()) {
      throw Error(ErrorKind::kConfig,
                  "subset uses every part of '" +
                      taxonomy.super_category.name +
                      "'; the super-category would be fully covered");
    }
    for (const SegCategory* p : chosen[t]) {
      SegCategory c = *p;
      c.id = id++;
      categories.push_back(std::move(c));
    }
    SegCategory s = taxonomy.super_category;
    s.id = id++;
    categories.push_back(std::move(s));
  }
  return LabelSpace(std::nullopt, std::move(categories),
                    subset_label(part_subset));
}

std::vector<MixedDataset> build_mixed_datasets(
    std::span<const PartWholeImage> images, const BenchmarkSources& sources,
    std::span<const std::vector<std::string>> part_subsets,
    SuperMaskSource super_source, const std::string& name_prefix) {
  std::vector<MixedDataset> out;
  int counter = 0;
  for (const std::vector<std::string>& subset : part_subsets) {
    MixedDataset dataset;
    dataset.label_space = mixed_labelspace(subset, sources);
    if (!validate_mixed_labelspace(dataset.label_space, sources.part_space,
                                   sources.whole_space)) {
      throw Error(ErrorKind::kProvenance,
                  "label space '" + dataset.label_space.name() +
                      "' lacks exclusive categories from both sources");
    }
    char index[16];
    std::snprintf(index, sizeof(index), "%02d", counter++);
    dataset.name = name_prefix + "_" + index + "_" + dataset.label_space.name();
    dataset.part_source = sources.part_space.name();
    dataset.whole_source = sources.whole_space.name();
    dataset.super_source = super_source;

    const LabelSpace& space = dataset.label_space;
    for (const PartWholeImage& image : images) {
      MixedImage mixed{image.image_id, image.shape, {}};
      for (const PartWholeSpec& instance : image.instances) {
        const auto super_pos = space.position_of_name(instance.super_category.name);
        if (!super_pos || instance.part_masks.empty()) continue;
        for (const SegCategory& category : space.categories()) {
          const auto it = instance.part_masks.find(normalize_name(category.name));
          if (it == instance.part_masks.end() || it->second.is_empty()) continue;
          mixed.annotations.push_back(
              {category, it->second, instance.instance_id, false});
        }
        BinaryMask super_mask = synthesize_super_mask(instance);
        if (super_source == SuperMaskSource::kWholeAnnotation) {
          if (instance.whole_mask) {
            super_mask = *instance.whole_mask;
          } else {
            ++dataset.whole_mask_fallbacks;
          }
        }
        if (super_mask.is_empty()) continue;
        mixed.annotations.push_back(
            {space[*super_pos], std::move(super_mask), instance.instance_id, true});
      }
      dataset.images.push_back(std::move(mixed));
    }
    out.push_back(std::move(dataset));
  }
  return out;
}

std::vector<std::string> part_subset_of(std::span<const std::string> labels,
                                        const BenchmarkSources& sources) {
  std::vector<std::string> parts;
  for (const std::string& label : labels) {
    const bool is_super = std::any_of(
        sources.taxonomy.begin(), sources.taxonomy.end(),
        [&](const PartTaxonomy& t) {
          return normalize_name(t.super_category.name) == normalize_name(label);
        });
    if (!is_super) parts.push_back(label);
  }
  return parts;
}

std::vector<std::size_t> equal_frequency_sampler(
    std::span<const std::int64_t> dataset_sizes, std::int64_t draws,
    std::uint64_t seed) {
  if (dataset_sizes.empty()) {
    throw Error(ErrorKind::kDegenerateInput, "no datasets to sample from");
  }
  for (std::size_t k = 0; k < dataset_sizes.size(); ++k) {
    if (dataset_sizes[k] <= 0) {
      throw Error(ErrorKind::kConfig,
                  "dataset " + std::to_string(k) + " is empty");
    }
  }
  if (draws <= 0) {
    throw Error(ErrorKind::kConfig, "number of draws must be positive");
  }
  const std::uint64_t k = dataset_sizes.size();
  // Values below `floor` would bias the modulo.
  const std::uint64_t floor = (0 - k) % k;
  std::mt19937_64 engine(seed);
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(draws));
  while (static_cast<std::int64_t>(out.size()) < draws) {
    const std::uint64_t r = engine();
    if (r < floor) continue;
    out.push_back(static_cast<std::size_t>(r % k));
  }
  return out;
}

BenchmarkSources cihp_sources() {
  const std::vector<std::string> parts = {
      "hat",   "hair",  "glove", "sunglasses", "upper clothes", "dress",
      "coat",  "socks", "pants", "torso skin", "scarf",         "skirt",
      "face",  "arm",   "leg",   "shoe"};
  const std::vector<std::string> coco_things = {
      "person",        "bicycle",      "car",           "motorcycle",
      "airplane",      "bus",          "train",         "truck",
      "boat",          "traffic light", "fire hydrant", "stop sign",
      "parking meter", "bench",        "bird",          "cat",
      "dog",           "horse",        "sheep",         "cow",
      "elephant",      "bear",         "zebra",         "giraffe",
      "backpack",      "umbrella",     "handbag",       "tie",
      "suitcase",      "frisbee",      "skis",          "snowboard",
      "sports ball",   "kite",         "baseball bat",  "baseball glove",
      "skateboard",    "surfboard",    "tennis racket", "bottle",
      "wine glass",    "cup",          "fork",          "knife",
      "spoon",         "bowl",         "banana",        "apple",
      "sandwich",      "orange",       "broccoli",      "carrot",
      "hot dog",       "pizza",        "donut",         "cake",
      "chair",         "couch",        "potted plant",  "bed",
      "dining table",  "toilet",       "tv",            "laptop",
      "mouse",         "remote",       "keyboard",      "cell phone",
      "microwave",     "oven",         "toaster",       "sink",
      "refrigerator",  "book",         "clock",         "vase",
      "scissors",      "teddy bear",   "hair drier",    "toothbrush"};
  BenchmarkSources s;
  s.part_space = make_space(2, "cihp", parts,
                            std::set<std::string>(parts.begin(), parts.end()));
  s.whole_space =
      make_space(1, "coco", coco_things,
                 std::set<std::string>(coco_things.begin(), coco_things.end()));
  s.taxonomy.push_back(make_taxonomy(s.part_space, s.whole_space, "person", parts));
  return s;
}

BenchmarkSources csp_sources() {
  const std::vector<std::string> person_parts = {"torso", "head", "arm", "leg"};
  const std::vector<std::string> car_parts = {"window", "wheel", "light",
                                              "license plate", "chassis"};
  std::vector<std::string> parts = person_parts;
  parts.insert(parts.end(), car_parts.begin(), car_parts.end());
  const std::vector<std::string> cityscapes = {
      "road",  "sidewalk",   "building", "wall",   "fence",
      "pole",  "traffic light", "traffic sign", "vegetation", "terrain",
      "sky",   "person",     "rider",    "car",    "truck",
      "bus",   "train",      "motorcycle", "bicycle"};
  const std::set<std::string> cityscapes_things = {
      "person", "rider", "car", "truck", "bus", "train", "motorcycle",
      "bicycle"};
  BenchmarkSources s;
  s.part_space = make_space(2, "csp", parts,
                            std::set<std::string>(parts.begin(), parts.end()));
  s.whole_space = make_space(1, "cityscapes", cityscapes, cityscapes_things);
  s.taxonomy.push_back(
      make_taxonomy(s.part_space, s.whole_space, "person", person_parts));
  s.taxonomy.push_back(make_taxonomy(s.part_space, s.whole_space, "car", car_parts));
  return s;
}

const std::vector<BenchmarkFixture>& builtin_fixtures() {
  static const std::vector<BenchmarkFixture> fixtures = {
      {"cihp_pair",
       "cihp",
       {{"arm", "person"},
        {"coat", "person"},
        {"dress", "person"},
        {"face", "person"},
        {"glove", "person"},
        {"hair", "person"},
        {"hat", "person"},
        {"leg", "person"},
        {"pants", "person"},
        {"scarf", "person"},
        {"shoe", "person"},
        {"skirt", "person"},
        {"socks", "person"},
        {"sunglasses", "person"},
        {"upper clothes", "person"}}},
      {"cihp_multi",
       "cihp",
       {{"leg", "shoe", "person"},
        {"hat", "hair", "face", "person"},
        {"hat", "hair", "face", "arm", "leg", "person"}}},
      {"csp_pair",
       "csp",
       {{"window", "car"},
        {"wheel", "car"},
        {"light", "car"},
        {"license plate", "car"},
        {"head", "person"},
        {"arm", "person"},
        {"leg", "person"}}},
      {"csp_multi",
       "csp",
       {{"license plate", "light", "wheel", "window", "car", "arm", "head",
         "leg", "person"}}},
  };
  return fixtures;
}

const BenchmarkFixture& builtin_fixture(const std::string& name) {
  for (const BenchmarkFixture& f : builtin_fixtures()) {
    if (f.name == name) return f;
  }
  throw Error(ErrorKind::kNotFound, "no built-in benchmark '" + name + "'");
}

BenchmarkSources builtin_sources(const std::string& name) {
  if (name == "cihp") return cihp_sources();
  if (name == "csp") return csp_sources();
  throw Error(ErrorKind::kNotFound, "no built-in sources '" + name + "'");
}

}  // namespace mixseg
