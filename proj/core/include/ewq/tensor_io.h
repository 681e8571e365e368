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

#ifndef EWQ_TENSOR_IO_H_
#define EWQ_TENSOR_IO_H_

// Reading weight checkpoints stored in the safetensors layout:
//
//   [u64 little-endian N][N bytes of UTF-8 JSON header][raw data region]
//
// The header maps tensor names to {dtype, shape, data_offsets}, where
// data_offsets are [begin, end) byte positions relative to the start of the
// data region. An optional "__metadata__" entry holds string key/values.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ewq {

enum class DType { kF64, kF32, kF16, kBF16 };

// Header tag as written in the container ("F64", "F32", "F16", "BF16").
std::string_view DTypeTag(DType dtype);
// Accepts the container tags and the lowercase spellings (f32, bf16, ...).
DType ParseDType(std::string_view tag);
std::size_t DTypeSize(DType dtype);

struct TensorMeta {
  std::string name;
  DType dtype = DType::kF32;
  std::vector<std::uint64_t> shape;
  std::uint64_t byte_offset = 0;  // relative to the data region
  std::uint64_t byte_length = 0;

  std::uint64_t NumElements() const;
  bool operator==(const TensorMeta&) const = default;
};

using Metadata = std::map<std::string, std::string>;

struct ContainerHeader {
  std::vector<TensorMeta> tensors;  // header order
  Metadata metadata;
};

// Parses and validates a header document against the size of the data
// region: dtype tags, byte_length = elements * dtype size, bounds, overlap.
ContainerHeader ParseContainerHeader(std::string_view header_json,
                                     std::uint64_t data_length);

// Converts raw little-endian elements to f64. `out.size()` elements are
// decoded; `bytes` must hold exactly that many.
void DecodeToF64(DType dtype, std::span<const std::byte> bytes,
                 std::span<double> out);
std::vector<std::byte> EncodeFromF64(DType dtype, std::span<const double> values);

// Reads a tensor's elements (row-major) from a stream positioned anywhere;
// `data_start` is the absolute offset of the data region in the stream.
// Throws kTruncated on short reads and kNanValue if any element is NaN.
std::vector<double> LoadTensorAsF64(const TensorMeta& meta, std::istream& source,
                                    std::uint64_t data_start);

class Container {
 public:
  static Container Open(const std::filesystem::path& path);

  const std::filesystem::path& path() const { return path_; }
  const std::vector<TensorMeta>& tensors() const { return header_.tensors; }
  const Metadata& metadata() const { return header_.metadata; }
  std::uint64_t data_start() const { return data_start_; }

  // Each call opens its own stream, so concurrent loads are safe.
  std::vector<double> LoadF64(const TensorMeta& meta) const;

  // Streams a tensor in chunks of at most `chunk_elements` values.
  void ForEachChunk(const TensorMeta& meta, std::size_t chunk_elements,
                    const std::function<void(std::span<const double>)>& fn) const;

 private:
  Container(std::filesystem::path path, ContainerHeader header,
            std::uint64_t data_start)
      : path_(std::move(path)), header_(std::move(header)),
        data_start_(data_start) {}

  std::filesystem::path path_;
  ContainerHeader header_;
  std::uint64_t data_start_ = 0;
};

inline std::vector<TensorMeta> OpenContainer(const std::filesystem::path& path) {
  return Container::Open(path).tensors();
}

struct TensorPayload {
  std::string name;
  DType dtype = DType::kF32;
  std::vector<std::uint64_t> shape;
  std::vector<std::byte> bytes;
};

// Writes tensors contiguously in the given order. The header is padded with
// spaces to an 8-byte boundary.
void WriteContainer(const std::filesystem::path& path,
                    std::span<const TensorPayload> tensors,
                    const Metadata& metadata = {});

// ---------------------------------------------------------------------------
// Block grouping

enum class BlockKind { kEmbedding, kTransformer, kOther };

std::string_view BlockKindName(BlockKind kind);
BlockKind ParseBlockKind(std::string_view name);

struct BlockGroup {
  std::uint32_t exec_index = 0;  // 1-based; embedding = 1
  BlockKind kind = BlockKind::kTransformer;
  std::vector<TensorMeta> tensors;
  std::uint64_t num_parameters = 0;
};

struct ModelSchema {
  std::string model_name;
  std::vector<BlockGroup> blocks;  // ascending exec_index
  std::uint32_t num_blocks = 0;    // transformer blocks only

  std::vector<const BlockGroup*> TransformerBlocks() const;
};

// Regular expressions deciding which tensors belong to which block. Only
// names ending in ".weight" are considered at all.
struct GroupingRule {
  // First capture group is the zero-based transformer layer id.
  std::string layer_pattern = R"((?:^|\.)layers\.(\d+)\.)";
  std::string embedding_pattern = R"(embed|(^|\.)wte\.)";
  // Normalization weights are dropped from entropy analysis.
  std::string exclude_pattern = R"(norm|(^|\.)ln_[^.]*\.)";
};

// Transformer layer k becomes exec_index k + 2; embedding tensors form the
// block at exec_index 1; remaining weights (e.g. an output head) form one
// kOther block after the last transformer block.
ModelSchema GroupBlocks(std::span<const TensorMeta> tensors,
                        const GroupingRule& rule = {},
                        std::string model_name = {});

}  // namespace ewq

#endif  // EWQ_TENSOR_IO_H_
