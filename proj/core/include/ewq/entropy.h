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

#ifndef EWQ_ENTROPY_H_
#define EWQ_ENTROPY_H_

// Shannon entropy of softmax-normalized weights, in nats.
//
//   p_i = exp(w_i) / sum_j exp(w_j)
//   H   = -sum_i p_i * ln(p_i + epsilon)
//
// Epsilon sits inside the logarithm only and p is not renormalized, so a
// single-element tensor (p = 1) yields H = -ln(1 + epsilon) < 0. For any
// input of length n, -ln(1 + epsilon) <= H <= ln(n).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ewq/tensor_io.h"

namespace ewq {

struct EntropyConfig {
  double epsilon = 0.01;
  bool stabilize = true;  // subtract the running max before exponentiating

  void Validate() const;
};

// Throws kEmptyInput / kNonFinite.
std::vector<double> Softmax(std::span<const double> values, bool stabilize = true);

double WeightEntropy(std::span<const double> values, const EntropyConfig& cfg = {});

using ChunkVisitor = std::function<void(std::span<const double>)>;
// Feeds every value of one tensor, in order, to the visitor. Must produce the
// same sequence each time it is invoked.
using ChunkSource = std::function<void(const ChunkVisitor&)>;

// Two passes over `source`: the first accumulates the max and the normalizer
// (rescaled online), the second accumulates -p ln(p + eps). Probabilities are
// never materialized, so arbitrarily large tensors stream in bounded memory.
double StreamingWeightEntropy(const ChunkSource& source, const EntropyConfig& cfg = {});

struct TensorEntropy {
  std::string name;
  double entropy = 0.0;
  std::uint64_t size = 0;
};

// Size-weighted mean of per-tensor entropies. The result is clamped into
// [min, max] of the inputs so rounding never escapes the weighted-mean hull.
double BlockEntropy(std::span<const TensorEntropy> per_tensor);

struct BlockEntropyReport {
  std::uint32_t exec_index = 0;
  double block_entropy = 0.0;
  std::uint64_t num_parameters = 0;
  std::vector<TensorEntropy> per_tensor;  // sorted by name
};

struct AnalyzeOptions {
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::size_t chunk_elements = std::size_t{1} << 20;
};

// Streams one tensor's values into the visitor.
using TensorReader =
    std::function<void(const TensorMeta&, const ChunkVisitor&)>;

// One report per transformer block, in exec_index order. Tensors are
// processed in parallel; results do not depend on the thread count.
std::vector<BlockEntropyReport> AnalyzeModel(const ModelSchema& schema,
                                             const TensorReader& reader,
                                             const EntropyConfig& cfg,
                                             const AnalyzeOptions& options = {});

std::vector<BlockEntropyReport> AnalyzeModel(const ModelSchema& schema,
                                             const Container& container,
                                             const EntropyConfig& cfg,
                                             const AnalyzeOptions& options = {});

}  // namespace ewq

#endif  // EWQ_ENTROPY_H_
