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

// Mixed-label-space benchmark construction.
//
// A part dataset (label space A, e.g. human parsing) and a whole-object
// dataset (label space B, e.g. person/car) are combined into evaluation sets
// whose label space C mixes a strict subset of the parts with their
// super-category. C must draw at least one category exclusively from A and at
// least one exclusively from B. Super-category masks are synthesized as the
// union of all part masks of an instance.

#ifndef MIXSEG_BENCHGEN_H_
#define MIXSEG_BENCHGEN_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixseg/labelspace.h"
#include "mixseg/mask.h"

namespace mixseg {

// One super-category instance with its part masks.
struct PartWholeSpec {
  SegCategory super_category;
  // Full part list of the super-category.
  std::vector<SegCategory> parts;
  // Normalized part name → mask, for the parts visible in this instance.
  std::map<std::string, BinaryMask> part_masks;
  // The whole-object dataset's own mask of this instance, when available.
  std::optional<BinaryMask> whole_mask;
  int instance_id = 0;
};

struct PartWholeImage {
  int image_id = 0;
  MaskShape shape;
  std::vector<PartWholeSpec> instances;
};

struct PartTaxonomy {
  SegCategory super_category;
  std::vector<SegCategory> parts;
};

// Where the two source label spaces come from and how parts group.
struct BenchmarkSources {
  LabelSpace part_space;
  LabelSpace whole_space;
  std::vector<PartTaxonomy> taxonomy;
};

enum class SuperMaskSource { kPartUnion, kWholeAnnotation };

struct MixedAnnotation {
  SegCategory category;
  BinaryMask mask;
  int instance_id = 0;
  bool is_super = false;
};

struct MixedImage {
  int image_id = 0;
  MaskShape shape;
  std::vector<MixedAnnotation> annotations;
};

struct MixedDataset {
  std::string name;
  LabelSpace label_space;
  std::vector<MixedImage> images;
  std::string part_source;
  std::string whole_source;
  SuperMaskSource super_source = SuperMaskSource::kPartUnion;
  // Instances that fell back to the part union because no whole-object mask
  // was available.
  int whole_mask_fallbacks = 0;
};

// A named list of mixed label spaces, each given as its full category list.
struct BenchmarkFixture {
  std::string name;
  std::string sources;  // "cihp" or "csp"
  std::vector<std::vector<std::string>> label_spaces;
};

// Union of all part masks. Throws kDegenerateInput without part masks and
// kDimension if their shapes differ.
BinaryMask synthesize_super_mask(const PartWholeSpec& instance);

// True iff C has a category exclusive to A and one exclusive to B (names
// compared case- and whitespace-insensitively). Throws kProvenance for a
// category of C in neither A nor B.
bool validate_mixed_labelspace(const LabelSpace& c, const LabelSpace& a,
                               const LabelSpace& b);

// Label space for a part subset: for each super-category in order of first
// appearance, its selected parts followed by the super-category. Throws
// kConfig for an empty or duplicated subset, an unknown or ambiguous part, or
// a subset that covers every part of a super-category.
LabelSpace mixed_labelspace(std::span<const std::string> part_subset,
                            const BenchmarkSources& sources);

// One dataset per subset. Every output passes validate_mixed_labelspace.
std::vector<MixedDataset> build_mixed_datasets(
    std::span<const PartWholeImage> images, const BenchmarkSources& sources,
    std::span<const std::vector<std::string>> part_subsets,
    SuperMaskSource super_source = SuperMaskSource::kPartUnion,
    const std::string& name_prefix = "mixed");

// Removes the super-category names from a fixture label list.
std::vector<std::string> part_subset_of(std::span<const std::string> labels,
                                        const BenchmarkSources& sources);

// Seeded sequence of dataset indices in [0, K), each equally likely whatever
// the dataset sizes. Uses mt19937_64 with rejection sampling, so the sequence
// is identical across platforms. Throws kDegenerateInput for K = 0 and
// kConfig for an empty dataset or zero draws.
std::vector<std::size_t> equal_frequency_sampler(
    std::span<const std::int64_t> dataset_sizes, std::int64_t draws,
    std::uint64_t seed);

// Built-in source spaces and benchmark subset lists.
BenchmarkSources cihp_sources();
BenchmarkSources csp_sources();
const std::vector<BenchmarkFixture>& builtin_fixtures();
// Throws kNotFound.
const BenchmarkFixture& builtin_fixture(const std::string& name);
BenchmarkSources builtin_sources(const std::string& name);

}  // namespace mixseg

#endif  // MIXSEG_BENCHGEN_H_
