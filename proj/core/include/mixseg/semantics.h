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

// Language-embedding classification and label-space-specific query handling.
//
// Class probabilities are a temperature-scaled softmax over dot products
// between an image-side embedding and the text embeddings of the active label
// space, with an extra all-zero "no object" embedding in the last slot.
// Object queries are specialised to a training label space k by adding that
// space's query embedding to each of them; at inference the decoder runs once
// per training label space that best serves the test-time classes.

#ifndef MIXSEG_SEMANTICS_H_
#define MIXSEG_SEMANTICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mixseg/labelspace.h"
#include "mixseg/mask.h"

namespace mixseg {

inline constexpr double kDefaultTemperature = 0.01;
inline constexpr double kNormTolerance = 1e-6;
inline constexpr double kLabelSpaceTieTolerance = 1e-6;

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values)
      : values_(std::move(values)) {}

  static EmbeddingVector zeros(int dim) {
    return EmbeddingVector(std::vector<double>(dim, 0.0));
  }

  int dim() const { return static_cast<int>(values_.size()); }
  std::span<const double> values() const { return values_; }
  double operator[](int i) const { return values_[i]; }

  double norm() const;
  bool is_normalized(double tolerance = kNormTolerance) const;
  // Throws kDegenerateInput for a zero (or non-finite) vector.
  EmbeddingVector normalized() const;

  // Throws kDimension on mismatch.
  double dot(const EmbeddingVector& other) const;

  EmbeddingVector operator+(const EmbeddingVector& other) const;
  EmbeddingVector operator-(const EmbeddingVector& other) const;
  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

// Text embeddings for every category of one label space. Entries are
// ℓ2-normalized on construction; a vector that was not already unit length is
// normalized and a warning is logged. The null entry is implicit and all-zero.
class ClassEmbeddingTable {
 public:
  ClassEmbeddingTable() = default;
  // Throws kDimension for a count or dimension mismatch and kDegenerateInput
  // for a zero-norm entry.
  ClassEmbeddingTable(LabelSpace space, std::vector<EmbeddingVector> entries);

  const LabelSpace& labelspace() const { return space_; }
  int dim() const { return dim_; }
  int size() const { return space_.size(); }
  const EmbeddingVector& entry(int position) const { return entries_[position]; }
  const std::vector<EmbeddingVector>& entries() const { return entries_; }
  EmbeddingVector null_entry() const { return EmbeddingVector::zeros(dim_); }

 private:
  LabelSpace space_;
  std::vector<EmbeddingVector> entries_;
  int dim_ = 0;
};

// N object queries and K label-space query embeddings.
class QuerySet {
 public:
  // Throws kConfig for N = 0 or K = 0 and kDimension for mixed dimensions.
  QuerySet(std::vector<EmbeddingVector> object_queries,
           std::vector<EmbeddingVector> lsqe_table);

  int num_queries() const { return static_cast<int>(object_queries_.size()); }
  int num_labelspaces() const { return static_cast<int>(lsqe_.size()); }
  int dim() const { return object_queries_.front().dim(); }
  const std::vector<EmbeddingVector>& object_queries() const {
    return object_queries_;
  }
  // k is 1-based.
  const EmbeddingVector& lsqe(int k) const { return lsqe_.at(k - 1); }

 private:
  std::vector<EmbeddingVector> object_queries_;
  std::vector<EmbeddingVector> lsqe_;
};

struct Prediction {
  SoftMask soft_mask;
  EmbeddingVector image_embedding;
  int source_labelspace = 0;
  // Length C+1 with the no-object class last, once classified.
  std::optional<std::vector<double>> class_probs;
  std::optional<double> score;
};

// Opaque to this module; decoders interpret it.
struct ImageHandle {
  std::uint64_t id = 0;
  MaskShape shape;
};

// The mask decoder, reduced to its input/output contract: given the N
// composed queries for label space k it returns exactly N predictions
// (masks plus image embeddings). Implementations must be safe to call
// concurrently from several threads.
class Decoder {
 public:
  virtual ~Decoder() = default;
  virtual std::vector<Prediction> decode(
      std::span<const EmbeddingVector> queries, int labelspace,
      const ImageHandle& image) const = 0;
};

// Deterministic decoder stand-in. Masks are rectangles drawn from a seeded
// hash of (k, i); image embeddings are a fixed seeded sign projection of the
// composed query onto `embed_dim` dimensions, normalized.
class HashStubDecoder : public Decoder {
 public:
  HashStubDecoder(std::uint64_t seed, int embed_dim);

  std::vector<Prediction> decode(std::span<const EmbeddingVector> queries,
                                 int labelspace,
                                 const ImageHandle& image) const override;

 private:
  std::uint64_t seed_;
  int embed_dim_;
};

// Softmax over [⟨e,t_1⟩,…,⟨e,t_C⟩,⟨e,0⟩] / tau. Throws kConfig for tau ≤ 0
// and kDimension when the embedding and table dimensions differ.
std::vector<double> class_probabilities(const EmbeddingVector& image_embedding,
                                        const ClassEmbeddingTable& table,
                                        double tau = kDefaultTemperature);

// Object query i plus label-space embedding k, for every i. Throws kNotFound
// for k outside [1, K].
std::vector<EmbeddingVector> compose_queries(const QuerySet& queries, int k);

// For each test class, finds the most similar training class over all tables
// and collects its label-space index; tables whose best similarity is within
// `tie_tolerance` of the overall best are all included. Returns the indices
// sorted ascending. Every training table must carry a distinct label-space index.
std::vector<int> select_label_spaces(
    const ClassEmbeddingTable& test_table,
    std::span<const ClassEmbeddingTable> train_tables,
    double tie_tolerance = kLabelSpaceTieTolerance);

// Runs the decoder once per k in `labelspaces` (ascending), tags predictions
// with k and classifies them against the test table. With `parallel` the
// passes run concurrently; output order is always ascending k, then query
// index. Throws kContractViolation if a pass returns other than N predictions.
std::vector<Prediction> run_labelspace_passes(
    const Decoder& decoder, const QuerySet& queries, const ImageHandle& image,
    const ClassEmbeddingTable& test_table, std::span<const int> labelspaces,
    double tau = kDefaultTemperature, bool parallel = true);

// select_label_spaces followed by run_labelspace_passes: N predictions per
// selected label space.
std::vector<Prediction> multi_pass_inference(
    const Decoder& decoder, const QuerySet& queries, const ImageHandle& image,
    const ClassEmbeddingTable& test_table,
    std::span<const ClassEmbeddingTable> train_tables,
    double tau = kDefaultTemperature, bool parallel = true);

}  // namespace mixseg

#endif  // MIXSEG_SEMANTICS_H_
