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


#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "mixseg/error.h"
#include "mixseg/labelspace.h"
#include "mixseg/semantics.h"
#include "support/oracles.h"

namespace mixseg {
namespace {

using testing::make_table;
using testing::random_unit;
using testing::Rng;

EmbeddingVector axis(int dim, int i, double scale = 1.0) {
  std::vector<double> v(dim, 0.0);
  v[i] = scale;
  return EmbeddingVector(std::move(v));
}

TEST(LabelSpaceTest, NormalizesNames) {
  EXPECT_EQ(normalize_name("  Upper   Clothes "), "upper clothes");
  const LabelSpace s(1, {{1, "Person", true, 1}, {2, "sky", false, 1}}, "x");
  EXPECT_EQ(s.position_of_name("person"), 0);
  EXPECT_EQ(s.position_of_id(2), 1);
  EXPECT_FALSE(s.position_of_name("car"));
  EXPECT_THROW(s.by_id(9), Error);
}

TEST(LabelSpaceTest, RejectsDuplicates) {
  EXPECT_THROW(LabelSpace(1, {{1, "a", true, 1}, {1, "b", true, 1}}), Error);
  EXPECT_THROW(LabelSpace(1, {{1, "a", true, 1}, {2, " A", true, 1}}), Error);
  EXPECT_THROW(LabelSpace(1, {}), Error);
}

TEST(EmbeddingTableTest, NormalizesOnConstruction) {
  const ClassEmbeddingTable t =
      make_table(1, "t", {"a", "b"}, {axis(3, 0, 5.0), EmbeddingVector({1, 1, 0})});
  for (const EmbeddingVector& e : t.entries()) EXPECT_NEAR(e.norm(), 1.0, 1e-12);
  EXPECT_EQ(t.null_entry(), EmbeddingVector::zeros(3));
  try {
    make_table(1, "t", {"a"}, {EmbeddingVector::zeros(3)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateInput);
  }
  EXPECT_THROW(make_table(1, "t", {"a", "b"}, {axis(3, 0), axis(2, 0)}), Error);
}

TEST(ClassProbabilitiesTest, MatchesSoftmaxReference) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int c = rng.uniform_int(1, 20), d = rng.uniform_int(2, 64);
    std::vector<EmbeddingVector> entries;
    std::vector<std::string> names;
    for (int i = 0; i < c; ++i) {
      entries.push_back(random_unit(rng, d));
      names.push_back("c" + std::to_string(i));
    }
    const ClassEmbeddingTable table = make_table(1, "t", names, entries);
    const EmbeddingVector e = random_unit(rng, d);
    const double tau = rng.uniform(0.005, 1.0);
    std::vector<double> logits;
    for (int i = 0; i < c; ++i) logits.push_back(e.dot(table.entry(i)) / tau);
    logits.push_back(0.0);
    const std::vector<double> expected = testing::softmax_reference(logits);
    const std::vector<double> got = class_probabilities(e, table, tau);
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expected[i], 1e-12);
    EXPECT_NEAR(std::accumulate(got.begin(), got.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(ClassProbabilitiesTest, OrthogonalIsUniformAndSelfMatchDominates) {
  const int d = 8;
  const ClassEmbeddingTable t =
      make_table(1, "t", {"a", "b", "c"}, {axis(d, 0), axis(d, 1), axis(d, 2)});
  for (double p : class_probabilities(axis(d, 5), t)) EXPECT_NEAR(p, 0.25, 1e-12);
  const std::vector<double> self = class_probabilities(axis(d, 1), t, 0.01);
  EXPECT_GE(self[1], 1.0 - 1e-6);
  EXPECT_THROW(class_probabilities(axis(d, 1), t, 0.0), Error);
  EXPECT_THROW(class_probabilities(axis(4, 1), t), Error);
}

TEST(QueryTest, ComposeAddsLabelSpaceResidual) {
  const QuerySet q({axis(2, 0), axis(2, 1)}, {axis(2, 0, 0.5), axis(2, 1, -1.0)});
  const auto composed = compose_queries(q, 2);
  EXPECT_EQ(composed[0], EmbeddingVector({1.0, -1.0}));
  EXPECT_EQ(composed[1], EmbeddingVector({0.0, 0.0}));
  EXPECT_THROW(compose_queries(q, 0), Error);
  EXPECT_THROW(compose_queries(q, 3), Error);
}

TEST(SelectLabelSpacesTest, SharedCategoryTieSelectsBoth) {
  const int d = 6;
  const auto train1 = make_table(1, "coco", {"person", "car"}, {axis(d, 0), axis(d, 1)});
  const auto train2 = make_table(2, "cihp", {"person", "arm"}, {axis(d, 0), axis(d, 2)});
  const auto test = make_table(std::nullopt, "test", {"person"}, {axis(d, 0)});
  const std::vector<ClassEmbeddingTable> tables = {train1, train2};
  EXPECT_EQ(select_label_spaces(test, tables), (std::vector<int>{1, 2}));

  const auto test_arm = make_table(std::nullopt, "test", {"arm"}, {axis(d, 2)});
  EXPECT_EQ(select_label_spaces(test_arm, tables), (std::vector<int>{2}));

  const auto mixed = make_table(std::nullopt, "test", {"arm", "car"}, {axis(d, 2), axis(d, 1)});
  EXPECT_EQ(select_label_spaces(mixed, tables), (std::vector<int>{1, 2}));
}

TEST(SelectLabelSpacesTest, ValidatesTables) {
  const auto a = make_table(1, "a", {"x"}, {axis(3, 0)});
  const auto dup = make_table(1, "b", {"y"}, {axis(3, 1)});
  const auto none = make_table(std::nullopt, "c", {"z"}, {axis(3, 2)});
  const auto test = make_table(std::nullopt, "t", {"x"}, {axis(3, 0)});
  EXPECT_THROW(select_label_spaces(test, std::vector<ClassEmbeddingTable>{a, dup}), Error);
  EXPECT_THROW(select_label_spaces(test, std::vector<ClassEmbeddingTable>{none}), Error);
  EXPECT_THROW(select_label_spaces(test, std::vector<ClassEmbeddingTable>{}), Error);
}

class ShortDecoder : public Decoder {
 public:
  std::vector<Prediction> decode(std::span<const EmbeddingVector> queries, int,
                                 const ImageHandle&) const override {
    return std::vector<Prediction>(queries.size() - 1);
  }
};

TEST(InferenceTest, PassCountTagsAndDeterminism) {
  Rng rng(9);
  const int d = 16, n = 5;
  std::vector<EmbeddingVector> oq, lsqe;
  for (int i = 0; i < n; ++i) oq.push_back(random_unit(rng, d));
  for (int k = 0; k < 3; ++k) lsqe.push_back(random_unit(rng, d));
  const QuerySet queries(oq, lsqe);
  const auto test = make_table(std::nullopt, "t", {"a", "b"},
                               {random_unit(rng, d), random_unit(rng, d)});
  const HashStubDecoder decoder(42, d);
  const ImageHandle image{1, {12, 10}};
  for (const std::vector<int>& ks : {std::vector<int>{2}, {1, 3}, {1, 2, 3}}) {
    const auto serial = run_labelspace_passes(decoder, queries, image, test, ks, 0.01, false);
    const auto parallel = run_labelspace_passes(decoder, queries, image, test, ks, 0.01, true);
    ASSERT_EQ(serial.size(), ks.size() * n);
    for (std::size_t i = 0; i < serial.size(); ++i) {
      EXPECT_EQ(serial[i].source_labelspace, ks[i / n]);
      ASSERT_TRUE(serial[i].class_probs);
      EXPECT_EQ(serial[i].class_probs->size(), 3u);
      EXPECT_EQ(*serial[i].class_probs, *parallel[i].class_probs);
      EXPECT_EQ(serial[i].soft_mask.values().size(), 120u);
    }
  }
  const std::vector<int> ks = {1};
  EXPECT_THROW(run_labelspace_passes(ShortDecoder(), queries, image, test, ks), Error);
}

TEST(InferenceTest, StubDecoderDependsOnLabelSpace) {
  Rng rng(2);
  const int d = 8;
  const QuerySet queries({random_unit(rng, d)}, {random_unit(rng, d), random_unit(rng, d)});
  const HashStubDecoder decoder(1, d);
  const ImageHandle image{3, {16, 16}};
  const auto a = decoder.decode(compose_queries(queries, 1), 1, image);
  const auto b = decoder.decode(compose_queries(queries, 2), 2, image);
  const auto a2 = decoder.decode(compose_queries(queries, 1), 1, image);
  EXPECT_NE(a[0].image_embedding, b[0].image_embedding);
  EXPECT_EQ(a[0].image_embedding, a2[0].image_embedding);
  EXPECT_NEAR(a[0].image_embedding.norm(), 1.0, 1e-12);
}

TEST(InferenceTest, MultiPassUsesSelectedSpaces) {
  const int d = 6;
  const auto train1 = make_table(1, "coco", {"person", "car"}, {axis(d, 0), axis(d, 1)});
  const auto train2 = make_table(2, "cihp", {"person", "arm"}, {axis(d, 0), axis(d, 2)});
  const auto test = make_table(std::nullopt, "test", {"car"}, {axis(d, 1)});
  const QuerySet queries({axis(d, 3), axis(d, 4)}, {axis(d, 5), axis(d, 5, -1.0)});
  const std::vector<ClassEmbeddingTable> tables = {train1, train2};
  const auto preds = multi_pass_inference(HashStubDecoder(0, d), queries, {1, {4, 4}},
                                          test, tables);
  ASSERT_EQ(preds.size(), 2u);
  for (const Prediction& p : preds) EXPECT_EQ(p.source_labelspace, 1);
}

}  // namespace
}  // namespace mixseg
