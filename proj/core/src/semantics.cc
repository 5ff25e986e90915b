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

#include "mixseg/semantics.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <set>

#include <spdlog/spdlog.h>

#include "mixseg/error.h"

namespace mixseg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash3(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

// Uniform in [0, 1).
double unit(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

void require_same_dim(const EmbeddingVector& a, const EmbeddingVector& b,
                      const char* what) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::kDimension, std::string(what) + ": dimension " +
                                           std::to_string(a.dim()) + " vs " +
                                           std::to_string(b.dim()));
  }
}

}  // namespace

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

bool EmbeddingVector::is_normalized(double tolerance) const {
  return std::abs(norm() - 1.0) <= tolerance;
}

EmbeddingVector EmbeddingVector::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorKind::kDegenerateInput,
                "cannot normalize a zero or non-finite embedding");
  }
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(),
                 [n](double v) { return v / n; });
  return EmbeddingVector(std::move(out));
}

double EmbeddingVector::dot(const EmbeddingVector& other) const {
  require_same_dim(*this, other, "dot");
  double sum = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    sum += values_[i] * other.values_[i];
  }
  return sum;
}

EmbeddingVector EmbeddingVector::operator+(const EmbeddingVector& other) const {
  require_same_dim(*this, other, "add");
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = values_[i] + other.values_[i];
  }
  return EmbeddingVector(std::move(out));
}

EmbeddingVector EmbeddingVector::operator-(const EmbeddingVector& other) const {
  require_same_dim(*this, other, "subtract");
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = values_[i] - other.values_[i];
  }
  return EmbeddingVector(std::move(out));
}

ClassEmbeddingTable::ClassEmbeddingTable(LabelSpace space,
                                         std::vector<EmbeddingVector> entries)
    : space_(std::move(space)) {
  if (static_cast<int>(entries.size()) != space_.size()) {
    throw Error(ErrorKind::kDimension,
                "embedding table has " + std::to_string(entries.size()) +
                    " entries for " + std::to_string(space_.size()) +
                    " categories");
  }
  dim_ = entries.front().dim();
  if (dim_ <= 0) {
    throw Error(ErrorKind::kDimension, "embedding dimension must be positive");
  }
  entries_.reserve(entries.size());
  for (int i = 0; i < space_.size(); ++i) {
    EmbeddingVector& e = entries[i];
    if (e.dim() != dim_) {
      throw Error(ErrorKind::kDimension,
                  "entry '" + space_[i].name + "' has dimension " +
                      std::to_string(e.dim()) + ", expected " +
                      std::to_string(dim_));
    }
    if (e.norm() == 0.0) {
      throw Error(ErrorKind::kDegenerateInput,
                  "entry '" + space_[i].name + "' has zero norm");
    }
    if (!e.is_normalized()) {
      spdlog::warn("embedding for '{}' has norm {:.6f}; normalizing",
                   space_[i].name, e.norm());
    }
    entries_.push_back(e.normalized());
  }
}

QuerySet::QuerySet(std::vector<EmbeddingVector> object_queries,
                   std::vector<EmbeddingVector> lsqe_table)
    : object_queries_(std::move(object_queries)), lsqe_(std::move(lsqe_table)) {
  if (object_queries_.empty() || lsqe_.empty()) {
    throw Error(ErrorKind::kConfig,
                "query set needs at least one object query and one LSQE");
  }
  const int d = object_queries_.front().dim();
  auto check = [d](const EmbeddingVector& e) {
    if (e.dim() != d) {
      throw Error(ErrorKind::kDimension,
                  "query dimension " + std::to_string(e.dim()) +
                      ", expected " + std::to_string(d));
    }
  };
  std::for_each(object_queries_.begin(), object_queries_.end(), check);
  std::for_each(lsqe_.begin(), lsqe_.end(), check);
}

HashStubDecoder::HashStubDecoder(std::uint64_t seed, int embed_dim)
    : seed_(seed), embed_dim_(embed_dim) {
  if (embed_dim_ <= 0) {
    throw Error(ErrorKind::kConfig, "stub decoder embedding dim must be > 0");
  }
}

std::vector<Prediction> HashStubDecoder::decode(
    std::span<const EmbeddingVector> queries, int labelspace,
    const ImageHandle& image) const {
  const MaskShape shape = image.shape;
  if (!shape.valid()) {
    throw Error(ErrorKind::kDimension, "stub decoder: invalid image shape");
  }
  std::vector<Prediction> out;
  out.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const std::uint64_t h =
        hash3(seed_ ^ image.id, static_cast<std::uint64_t>(labelspace), i);
    const int r0 = static_cast<int>(unit(splitmix64(h + 1)) * shape.height);
    const int c0 = static_cast<int>(unit(splitmix64(h + 2)) * shape.width);
    const int r1 = r0 + 1 + static_cast<int>(unit(splitmix64(h + 3)) *
                                             (shape.height - r0));
    const int c1 = c0 + 1 + static_cast<int>(unit(splitmix64(h + 4)) *
                                             (shape.width - c0));
    const float inside = 0.6f + 0.4f * static_cast<float>(unit(splitmix64(h + 5)));
    const float outside = 0.4f * static_cast<float>(unit(splitmix64(h + 6)));
    std::vector<float> values(static_cast<std::size_t>(shape.pixels()), outside);
    for (int r = r0; r < std::min(r1, shape.height); ++r) {
      for (int c = c0; c < std::min(c1, shape.width); ++c) {
        values[static_cast<std::size_t>(r) * shape.width + c] = inside;
      }
    }

    const EmbeddingVector& q = queries[i];
    std::vector<double> e(embed_dim_, 0.0);
    if (q.dim() == embed_dim_) {
      std::copy(q.values().begin(), q.values().end(), e.begin());
    } else {
      for (int j = 0; j < embed_dim_; ++j) {
        for (int t = 0; t < q.dim(); ++t) {
          const bool positive = hash3(seed_, j, t) & 1;
          e[j] += positive ? q[t] : -q[t];
        }
      }
    }
    EmbeddingVector embedding(std::move(e));
    if (!(embedding.norm() > 0.0)) {
      std::vector<double> fallback(embed_dim_);
      for (int j = 0; j < embed_dim_; ++j) {
        fallback[j] = unit(hash3(h, 7, j)) - 0.5;
      }
      embedding = EmbeddingVector(std::move(fallback));
    }

    Prediction p;
    p.soft_mask = SoftMask(shape, std::move(values));
    p.image_embedding = embedding.normalized();
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<double> class_probabilities(const EmbeddingVector& image_embedding,
                                        const ClassEmbeddingTable& table,
                                        double tau) {
  if (!(tau > 0.0)) {
    throw Error(ErrorKind::kConfig,
                "temperature must be positive, got " + std::to_string(tau));
  }
  if (image_embedding.dim() != table.dim()) {
    throw Error(ErrorKind::kDimension,
                "image embedding dimension " +
                    std::to_string(image_embedding.dim()) +
                    " vs table dimension " + std::to_string(table.dim()));
  }
  const int c = table.size();
  std::vector<double> probs(c + 1);
  for (int i = 0; i < c; ++i) {
    probs[i] = image_embedding.dot(table.entry(i)) / tau;
  }
  probs[c] = 0.0;  // null entry logit
  const double max_logit = *std::max_element(probs.begin(), probs.end());
  double sum = 0.0;
  for (double& p : probs) {
    p = std::exp(p - max_logit);
    sum += p;
  }
  for (double& p : probs) p /= sum;
  return probs;
}

std::vector<EmbeddingVector> compose_queries(const QuerySet& queries, int k) {
  if (k < 1 || k > queries.num_labelspaces()) {
    throw Error(ErrorKind::kNotFound,
                "label space index " + std::to_string(k) + " outside [1, " +
                    std::to_string(queries.num_labelspaces()) + "]");
  }
  const EmbeddingVector& residual = queries.lsqe(k);
  std::vector<EmbeddingVector> out;
  out.reserve(queries.num_queries());
  for (const EmbeddingVector& q : queries.object_queries()) {
    out.push_back(q + residual);
  }
  return out;
}

std::vector<int> select_label_spaces(
    const ClassEmbeddingTable& test_table,
    std::span<const ClassEmbeddingTable> train_tables, double tie_tolerance) {
  if (test_table.size() == 0) {
    throw Error(ErrorKind::kDegenerateInput, "test label space is empty");
  }
  if (train_tables.empty()) {
    throw Error(ErrorKind::kDegenerateInput, "no training label spaces");
  }
  std::set<int> seen_indices;
  for (const ClassEmbeddingTable& t : train_tables) {
    const auto& index = t.labelspace().index();
    if (!index || *index < 1) {
      throw Error(ErrorKind::kConfig, "training table '" +
                                          t.labelspace().name() +
                                          "' lacks a label-space index ≥ 1");
    }
    if (!seen_indices.insert(*index).second) {
      throw Error(ErrorKind::kConfig,
                  "duplicate training label-space index " +
                      std::to_string(*index));
    }
    if (t.dim() != test_table.dim()) {
      throw Error(ErrorKind::kDimension,
                  "training table '" + t.labelspace().name() +
                      "' dimension " + std::to_string(t.dim()) + " vs " +
                      std::to_string(test_table.dim()));
    }
  }

  std::set<int> selected;
  std::vector<double> best_per_table(train_tables.size());
  for (const EmbeddingVector& query : test_table.entries()) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < train_tables.size(); ++t) {
      double table_best = -std::numeric_limits<double>::infinity();
      for (const EmbeddingVector& e : train_tables[t].entries()) {
        table_best = std::max(table_best, query.dot(e));
      }
      best_per_table[t] = table_best;
      best = std::max(best, table_best);
    }
    for (std::size_t t = 0; t < train_tables.size(); ++t) {
      if (best_per_table[t] >= best - tie_tolerance) {
        selected.insert(*train_tables[t].labelspace().index());
      }
    }
  }
  return {selected.begin(), selected.end()};
}

std::vector<Prediction> run_labelspace_passes(
    const Decoder& decoder, const QuerySet& queries, const ImageHandle& image,
    const ClassEmbeddingTable& test_table, std::span<const int> labelspaces,
    double tau, bool parallel) {
  if (!(tau > 0.0)) {
    throw Error(ErrorKind::kConfig,
                "temperature must be positive, got " + std::to_string(tau));
  }
  std::vector<int> ks(labelspaces.begin(), labelspaces.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  auto one_pass = [&](int k) {
    const std::vector<EmbeddingVector> composed = compose_queries(queries, k);
    std::vector<Prediction> preds = decoder.decode(composed, k, image);
    if (static_cast<int>(preds.size()) != queries.num_queries()) {
      throw Error(ErrorKind::kContractViolation,
                  "decoder returned " + std::to_string(preds.size()) +
                      " predictions for " +
                      std::to_string(queries.num_queries()) + " queries");
    }
    for (Prediction& p : preds) {
      p.source_labelspace = k;
      p.class_probs = class_probabilities(p.image_embedding, test_table, tau);
    }
    return preds;
  };

  std::vector<std::vector<Prediction>> per_pass(ks.size());
  if (parallel && ks.size() > 1) {
    std::vector<std::future<std::vector<Prediction>>> futures;
    futures.reserve(ks.size());
    for (int k : ks) {
      futures.push_back(std::async(std::launch::async, one_pass, k));
    }
    for (std::size_t i = 0; i < ks.size(); ++i) per_pass[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < ks.size(); ++i) per_pass[i] = one_pass(ks[i]);
  }

  std::vector<Prediction> out;
  out.reserve(ks.size() * queries.num_queries());
  for (auto& pass : per_pass) {
    std::move(pass.begin(), pass.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<Prediction> multi_pass_inference(
    const Decoder& decoder, const QuerySet& queries, const ImageHandle& image,
    const ClassEmbeddingTable& test_table,
    std::span<const ClassEmbeddingTable> train_tables, double tau,
    bool parallel) {
  const std::vector<int> d = select_label_spaces(test_table, train_tables);
  return run_labelspace_passes(decoder, queries, image, test_table, d, tau,
                               parallel);
}

}  // namespace mixseg
