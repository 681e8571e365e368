/*
 * Copyright 2026 The EWQ Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ewq/entropy.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ewq/error.h"
#include "gtest/gtest.h"
#include "support/fixtures.h"
#include "support/oracles.h"

namespace ewq {
namespace {

std::vector<double> RandomVector(std::mt19937_64& rng, std::size_t n, double scale) {
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

double Sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(SoftmaxTest, ClosedForms) {
  const std::vector<double> zeros = {0.0, 0.0};
  EXPECT_EQ(Softmax(zeros), (std::vector<double>{0.5, 0.5}));
  const std::vector<double> three = {std::log(3.0), 0.0};
  const auto p = Softmax(three);
  EXPECT_NEAR(p[0], 0.75, 1e-15);
  EXPECT_NEAR(p[1], 0.25, 1e-15);
  const std::vector<double> big = {1000.0, 1000.0, 1000.0};
  for (double x : Softmax(big)) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
}

TEST(SoftmaxTest, Errors) {
  EXPECT_THROW(Softmax(std::vector<double>{}), Error);
  EXPECT_THROW(Softmax(std::vector<double>{1.0, INFINITY}), Error);
  EXPECT_THROW(Softmax(std::vector<double>{NAN}), Error);
}

TEST(SoftmaxTest, SumsToOneAndShiftInvariant) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> len(1, 5000);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto v = RandomVector(rng, len(rng), 1.0 + trial % 7);
    const auto p = Softmax(v);
    EXPECT_NEAR(Sum(p), 1.0, 1e-9);
    for (double x : p) {
      EXPECT_GT(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
    auto w = v;
    const double c = shift(rng);
    for (auto& x : w) x += c;
    const auto q = Softmax(w);
    for (std::size_t i = 0; i < p.size(); ++i) ASSERT_NEAR(p[i], q[i], 1e-9);
  }
}

TEST(SoftmaxTest, UnstabilizedAgreesOnModerateInputs) {
  const std::vector<double> v = {0.3, -1.2, 2.5, 0.0};
  const auto a = Softmax(v, true);
  const auto b = Softmax(v, false);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
}

TEST(EntropyTest, ClosedForms) {
  EXPECT_NEAR(WeightEntropy(std::vector<double>{0.0, 0.0}), 0.6733445532637656, 1e-15);
  EXPECT_NEAR(WeightEntropy(std::vector<double>{std::log(3.0), 0.0}), 0.5425960462679725, 1e-15);
  EXPECT_NEAR(WeightEntropy(std::vector<double>{5.0}), -0.009950330853168092, 1e-15);
}

TEST(EntropyTest, MatchesExtendedPrecisionOracle) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> len(1, 20000);
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = RandomVector(rng, len(rng), 0.02 + trial * 0.05);
    EXPECT_NEAR(WeightEntropy(v), static_cast<double>(oracle::Entropy(v)), 1e-10);
  }
}

TEST(EntropyTest, Bounds) {
  const EntropyConfig cfg;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> len(1, 3000);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = len(rng);
    const auto v = RandomVector(rng, n, 0.1 * (1 + trial % 50));
    const double h = WeightEntropy(v, cfg);
    EXPECT_GE(h, -std::log1p(cfg.epsilon) - 1e-12);
    EXPECT_LE(h, std::log(static_cast<double>(n)) + 1e-12);
  }
}

TEST(EntropyTest, UniformInputIsExact) {
  for (std::size_t n : {1u, 2u, 3u, 7u, 100u, 4096u, 100000u}) {
    const std::vector<double> v(n, 0.37);
    const double expected = -std::log(1.0 / static_cast<double>(n) + 0.01);
    EXPECT_NEAR(WeightEntropy(v), expected, 1e-12) << n;
  }
}

TEST(EntropyTest, PermutationInvariant) {
  std::mt19937_64 rng(4);
  auto v = RandomVector(rng, 5000, 2.0);
  const double h = WeightEntropy(v);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(v.begin(), v.end(), rng);
    EXPECT_NEAR(WeightEntropy(v), h, 1e-12);
  }
}

TEST(EntropyTest, EpsilonMustBePositive) {
  EntropyConfig cfg;
  cfg.epsilon = 0.0;
  EXPECT_THROW(WeightEntropy(std::vector<double>{1.0}, cfg), Error);
}

TEST(EntropyTest, StreamingMatchesWholeVector) {
  std::mt19937_64 rng(5);
  const auto v = RandomVector(rng, 10007, 3.0);
  for (std::size_t chunk : {1u, 13u, 1000u, 20000u}) {
    const double h = StreamingWeightEntropy([&](const ChunkVisitor& visit) {
      for (std::size_t i = 0; i < v.size(); i += chunk) {
        visit(std::span<const double>(v).subspan(i, std::min(chunk, v.size() - i)));
      }
    });
    EXPECT_NEAR(h, WeightEntropy(v), 1e-12) << chunk;
  }
}

TEST(EntropyTest, StreamingHandlesRisingMaximum) {
  // Each chunk raises the running maximum, forcing repeated rescaling.
  std::vector<double> v;
  for (int i = 0; i < 200; ++i) v.push_back(i * 0.5);
  const double h = StreamingWeightEntropy([&](const ChunkVisitor& visit) {
    for (std::size_t i = 0; i < v.size(); i += 3) {
      visit(std::span<const double>(v).subspan(i, std::min<std::size_t>(3, v.size() - i)));
    }
  });
  EXPECT_NEAR(h, static_cast<double>(oracle::Entropy(v)), 1e-12);
}

TEST(BlockEntropyTest, WeightedMean) {
  EXPECT_EQ(BlockEntropy(std::vector<TensorEntropy>{{"a", 1.7, 100}, {"b", 1.7, 300}}), 1.7);
  EXPECT_EQ(BlockEntropy(std::vector<TensorEntropy>{{"a", 1.0, 100}, {"b", 2.0, 300}}), 1.75);
  EXPECT_EQ(BlockEntropy(std::vector<TensorEntropy>{{"a", 0.5, 1}}), 0.5);
}

TEST(BlockEntropyTest, Errors) {
  EXPECT_THROW(BlockEntropy(std::vector<TensorEntropy>{}), Error);
  EXPECT_THROW(BlockEntropy(std::vector<TensorEntropy>{{"a", 1.0, 0}}), Error);
}

TEST(BlockEntropyTest, WithinHullAndMatchesOracle) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> count(1, 12);
  std::uniform_real_distribution<double> h(-0.01, 12.0);
  std::uniform_int_distribution<std::uint64_t> size(1, 50'000'000);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<TensorEntropy> parts;
    std::vector<double> hs, ws;
    for (int i = count(rng); i > 0; --i) {
      parts.push_back({"t", h(rng), size(rng)});
      hs.push_back(parts.back().entropy);
      ws.push_back(static_cast<double>(parts.back().size));
    }
    const double got = BlockEntropy(parts);
    EXPECT_NEAR(got, static_cast<double>(oracle::WeightedMean(hs, ws)), 1e-12);
    EXPECT_GE(got, *std::min_element(hs.begin(), hs.end()));
    EXPECT_LE(got, *std::max_element(hs.begin(), hs.end()));
  }
}

TEST(AnalyzeTest, FlatWeightsBeatPeakedWeights) {
  fixtures::TempDir dir;
  std::vector<double> flat(64, 0.25);
  std::vector<double> peaked(64, 0.0);
  peaked[0] = 40.0;
  const std::vector<TensorPayload> payloads = {
      {"layers.0.w.weight", DType::kF32, {64}, EncodeFromF64(DType::kF32, flat)},
      {"layers.1.w.weight", DType::kF32, {64}, EncodeFromF64(DType::kF32, peaked)}};
  WriteContainer(dir / "m.safetensors", payloads);
  const Container c = Container::Open(dir / "m.safetensors");
  const auto reports = AnalyzeModel(GroupBlocks(c.tensors()), c, EntropyConfig{});
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].exec_index, 2u);
  EXPECT_NEAR(reports[0].block_entropy, static_cast<double>(oracle::Entropy(flat)), 1e-12);
  EXPECT_NEAR(reports[1].block_entropy, static_cast<double>(oracle::Entropy(peaked)), 1e-12);
  EXPECT_GT(reports[0].block_entropy, reports[1].block_entropy);
}

TEST(AnalyzeTest, BlockIsCompositionOfTensors) {
  fixtures::TempDir dir;
  fixtures::WriteToyModel(dir / "toy.safetensors", 4, 9);
  const Container c = Container::Open(dir / "toy.safetensors");
  const ModelSchema schema = GroupBlocks(c.tensors());
  const auto reports = AnalyzeModel(schema, c, EntropyConfig{});
  ASSERT_EQ(reports.size(), 4u);
  for (const auto& r : reports) {
    ASSERT_EQ(r.per_tensor.size(), 2u);
    EXPECT_TRUE(std::is_sorted(r.per_tensor.begin(), r.per_tensor.end(),
                               [](const auto& a, const auto& b) { return a.name < b.name; }));
    std::uint64_t total = 0;
    for (const auto& t : r.per_tensor) {
      total += t.size;
      const auto meta = std::find_if(c.tensors().begin(), c.tensors().end(),
                                     [&](const TensorMeta& m) { return m.name == t.name; });
      ASSERT_NE(meta, c.tensors().end());
      EXPECT_NEAR(t.entropy, static_cast<double>(oracle::Entropy(c.LoadF64(*meta))), 1e-12);
    }
    EXPECT_EQ(total, r.num_parameters);
    EXPECT_EQ(r.block_entropy, BlockEntropy(r.per_tensor));
  }
}

TEST(AnalyzeTest, ThreadCountDoesNotChangeResults) {
  fixtures::TempDir dir;
  fixtures::WriteToyModel(dir / "toy.safetensors", 6, 10, DType::kBF16);
  const Container c = Container::Open(dir / "toy.safetensors");
  const ModelSchema schema = GroupBlocks(c.tensors());
  AnalyzeOptions one;
  one.threads = 1;
  one.chunk_elements = 7;
  AnalyzeOptions many;
  many.threads = 4;
  const auto a = AnalyzeModel(schema, c, EntropyConfig{}, one);
  const auto b = AnalyzeModel(schema, c, EntropyConfig{}, many);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].block_entropy, b[i].block_entropy, 1e-12);
  }
  const auto again = AnalyzeModel(schema, c, EntropyConfig{}, many);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(b[i].block_entropy, again[i].block_entropy);
}

TEST(AnalyzeTest, EmptySchemaGivesEmptyReport) {
  const ModelSchema schema;
  const TensorReader reader = [](const TensorMeta&, const ChunkVisitor&) {};
  EXPECT_TRUE(AnalyzeModel(schema, reader, EntropyConfig{}).empty());
}

TEST(AnalyzeTest, FailingTensorIsNamed) {
  ModelSchema schema;
  BlockGroup block;
  block.exec_index = 2;
  TensorMeta meta;
  meta.name = "layers.0.bad.weight";
  meta.shape = {1};
  block.tensors.push_back(meta);
  block.num_parameters = 1;
  schema.blocks.push_back(block);
  schema.num_blocks = 1;
  const TensorReader reader = [](const TensorMeta&, const ChunkVisitor&) {
    throw Error(ErrorCode::kTruncated, "boom");
  };
  try {
    AnalyzeModel(schema, reader, EntropyConfig{});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTruncated);
    EXPECT_NE(std::string(e.what()).find("layers.0.bad.weight"), std::string::npos);
  }
}

}  // namespace
}  // namespace ewq
