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


// On-disk formats. All readers throw kFormat for documents that parse but
// violate their schema and kIo for unreadable files.
//
//   RLE text       "H W r0 r1 ...", column-major, r0 counts zeros.
//   RLE JSON       {"size": [H, W], "counts": [r0, r1, ...]}
//   Panoptic       JSON with "categories" and "annotations" (one per image,
//                  each with "segments_info") next to one id PNG per image,
//                  id = R + 256 G + 65536 B, 0 = void.
//   Instances      JSON with "categories" and "annotations" carrying an RLE
//                  "segmentation" and, for detections, a "score".
//   Predictions    JSON "images" → "predictions" with an RLE "mask" or a
//                  "soft" mask, "probs" or "embedding", "score", "labelspace".
//   Embeddings     JSON {"labelspace", "name", "dim", "entries": [{"id",
//                  "name", "isthing", "embedding"}]}.

#ifndef MIXSEG_IO_H_
#define MIXSEG_IO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mixseg/benchgen.h"
#include "mixseg/labelspace.h"
#include "mixseg/mask.h"
#include "mixseg/matching.h"
#include "mixseg/metrics.h"
#include "mixseg/panoptic.h"
#include "mixseg/postproc.h"
#include "mixseg/semantics.h"

namespace mixseg {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// RLE

std::string rle_to_text(const BinaryMask& mask);
BinaryMask rle_from_text(std::string_view text);

std::string rle_to_json(const BinaryMask& mask);
BinaryMask rle_from_json(std::string_view json);

// ---------------------------------------------------------------------------
// Id PNG

std::uint32_t rgb_to_id(std::uint8_t r, std::uint8_t g, std::uint8_t b);
void id_to_rgb(std::uint32_t id, std::uint8_t rgb[3]);

// Row-major ids of an 8-bit RGB or RGBA PNG. Throws kFormat for malformed
// files and kIo for missing ones.
std::vector<std::uint32_t> read_id_png(const fs::path& path, MaskShape* shape);
// Throws kConfig for ids above 2^24 - 1.
void write_id_png(const fs::path& path, const MaskShape& shape,
                  const std::vector<std::uint32_t>& ids);

// ---------------------------------------------------------------------------
// Panoptic datasets

struct PanopticImage {
  int image_id = 0;
  std::string file_name;  // PNG name relative to the PNG directory
  PanopticMap map;
};

struct PanopticDataset {
  LabelSpace space;
  std::vector<PanopticImage> images;
};

// Cross-checks PNG ids against the segment lists: an id on one side only or
// a wrong area throws kIntegrity naming the image.
PanopticDataset load_panoptic_dataset(const fs::path& json_path,
                                      const fs::path& png_dir);
void write_panoptic_dataset(const PanopticDataset& dataset,
                            const fs::path& json_path, const fs::path& png_dir);

// "categories" array of any of the JSON documents above.
LabelSpace load_categories(const fs::path& json_path);

// ---------------------------------------------------------------------------
// Instances

struct InstanceFile {
  std::optional<LabelSpace> space;
  // Records without a "score" get 1.0.
  std::vector<DetectionRecord> records;
};

InstanceFile load_instances(const fs::path& path);
void write_instances(const fs::path& path, const LabelSpace* space,
                     const std::vector<DetectionRecord>& records,
                     bool with_scores);
std::vector<InstanceAnnotation> as_annotations(
    const std::vector<DetectionRecord>& records);

// ---------------------------------------------------------------------------
// Predictions

struct PredictionImage {
  int image_id = 0;
  MaskShape shape;
  std::vector<Prediction> predictions;
};

// Probability vectors must sum to 1 within 1e-4 and masks must match the
// image size (kFormat).
std::vector<PredictionImage> load_predictions(const fs::path& path);
void write_predictions(const fs::path& path,
                       const std::vector<PredictionImage>& images);

// ---------------------------------------------------------------------------
// Embedding tables

// Entries are normalized on load. Throws kFormat for mixed dimensions,
// duplicate names or a zero-norm entry, naming the offending class.
ClassEmbeddingTable load_embedding_table(const fs::path& path);
void write_embedding_table(const fs::path& path,
                           const ClassEmbeddingTable& table);

// ---------------------------------------------------------------------------
// Matching fixtures: {"height", "width", "predictions": [{"mask" | "soft",
// "probs"}], "ground_truth": [{"class_index", "mask"}]}

struct MatchFixture {
  std::vector<Prediction> predictions;
  std::vector<GroundTruthSegment> ground_truth;
};

MatchFixture load_match_fixture(const fs::path& path);

// ---------------------------------------------------------------------------
// Benchmark construction

// {"images": [{"image_id", "height", "width", "instances": [{"super",
// "instance_id", "parts": {name: RLE}, "whole": RLE}]}]}. Super-category and
// part names must exist in `sources` (kFormat).
std::vector<PartWholeImage> load_part_images(const fs::path& path,
                                             const BenchmarkSources& sources);

// Writes <dir>/<name>/panoptic.json, panoptic/*.png (parts painted over
// their super-category) and instances.json (overlapping masks kept).
void write_mixed_dataset(const MixedDataset& dataset, const fs::path& dir);

// {"fixtures": [{"name", "sources", "label_spaces": [[...], ...]}]}
std::vector<BenchmarkFixture> load_benchmark_fixtures(const fs::path& path);

// {"original": {...}, "esf-omi": {...}} with keys score_threshold,
// nms_iou_threshold, containment_slack, min_visible_ratio,
// binarize_threshold. Missing keys keep the built-in defaults.
FusionConfig load_fusion_config(const fs::path& path,
                                FusionAlgorithm algorithm);

}  // namespace mixseg

#endif  // MIXSEG_IO_H_
