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

#include "ewq/tensor_io.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <regex>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "ewq/error.h"
#include "ewq/half.h"

static_assert(std::endian::native == std::endian::little,
              "container decoding assumes a little-endian host");

namespace ewq {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kMaxHeaderBytes = 100ull << 20;

std::uint64_t CheckedProduct(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (std::uint64_t d : shape) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d) {
      throw Error(ErrorCode::kMalformedHeader, "shape element count overflows");
    }
    n *= d;
  }
  return n;
}

template <typename T>
T ReadScalar(const std::byte* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

void ReadExactly(std::istream& in, char* dst, std::uint64_t n,
                 const std::string& what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::uint64_t>(in.gcount()) != n) {
    throw Error(ErrorCode::kTruncated, "short read of " + what);
  }
}

void CheckNoNan(std::span<const double> values, const TensorMeta& meta,
                std::uint64_t first_index) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) {
      throw Error(ErrorCode::kNanValue,
                  "tensor '" + meta.name + "' has NaN at element " +
                      std::to_string(first_index + i));
    }
  }
}

}  // namespace

std::string_view DTypeTag(DType dtype) {
  switch (dtype) {
    case DType::kF64: return "F64";
    case DType::kF32: return "F32";
    case DType::kF16: return "F16";
    case DType::kBF16: return "BF16";
  }
  return "?";
}

DType ParseDType(std::string_view tag) {
  std::string upper(tag);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "F64") return DType::kF64;
  if (upper == "F32") return DType::kF32;
  if (upper == "F16") return DType::kF16;
  if (upper == "BF16") return DType::kBF16;
  throw Error(ErrorCode::kUnsupportedDtype, "dtype '" + std::string(tag) + "'");
}

std::size_t DTypeSize(DType dtype) {
  switch (dtype) {
    case DType::kF64: return 8;
    case DType::kF32: return 4;
    case DType::kF16:
    case DType::kBF16: return 2;
  }
  return 0;
}

std::uint64_t TensorMeta::NumElements() const { return CheckedProduct(shape); }

ContainerHeader ParseContainerHeader(std::string_view header_json,
                                     std::uint64_t data_length) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(header_json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedHeader, e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kMalformedHeader, "header is not an object");
  }

  ContainerHeader header;
  for (const auto& [name, entry] : doc.items()) {
    if (name == "__metadata__") {
      if (!entry.is_object()) {
        throw Error(ErrorCode::kMalformedHeader, "__metadata__ is not an object");
      }
      for (const auto& [k, v] : entry.items()) {
        if (!v.is_string()) {
          throw Error(ErrorCode::kMalformedHeader,
                      "__metadata__ value for '" + k + "' is not a string");
        }
        header.metadata[k] = v.get<std::string>();
      }
      continue;
    }
    if (!entry.is_object() || !entry.contains("dtype") ||
        !entry.contains("shape") || !entry.contains("data_offsets")) {
      throw Error(ErrorCode::kMalformedHeader,
                  "entry '" + name + "' needs dtype, shape and data_offsets");
    }
    TensorMeta meta;
    meta.name = name;
    try {
      meta.dtype = ParseDType(entry.at("dtype").get<std::string>());
      meta.shape = entry.at("shape").get<std::vector<std::uint64_t>>();
      const auto offsets = entry.at("data_offsets").get<std::vector<std::uint64_t>>();
      if (offsets.size() != 2 || offsets[1] < offsets[0]) {
        throw Error(ErrorCode::kMalformedHeader,
                    "bad data_offsets for '" + name + "'");
      }
      meta.byte_offset = offsets[0];
      meta.byte_length = offsets[1] - offsets[0];
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedHeader,
                  "entry '" + name + "': " + e.what());
    }
    const std::uint64_t elements = meta.NumElements();
    if (elements > std::numeric_limits<std::uint64_t>::max() / DTypeSize(meta.dtype) ||
        elements * DTypeSize(meta.dtype) != meta.byte_length) {
      throw Error(ErrorCode::kMalformedHeader,
                  "byte length of '" + name + "' does not match shape and dtype");
    }
    if (meta.byte_offset + meta.byte_length > data_length) {
      throw Error(ErrorCode::kOutOfBounds,
                  "tensor '" + name + "' ends at byte " +
                      std::to_string(meta.byte_offset + meta.byte_length) +
                      " but the data region has " + std::to_string(data_length));
    }
    header.tensors.push_back(std::move(meta));
  }

  std::vector<const TensorMeta*> by_offset;
  by_offset.reserve(header.tensors.size());
  for (const auto& t : header.tensors) {
    if (t.byte_length > 0) by_offset.push_back(&t);
  }
  std::sort(by_offset.begin(), by_offset.end(),
            [](const TensorMeta* a, const TensorMeta* b) {
              return a->byte_offset < b->byte_offset;
            });
  for (std::size_t i = 1; i < by_offset.size(); ++i) {
    const TensorMeta& prev = *by_offset[i - 1];
    if (by_offset[i]->byte_offset < prev.byte_offset + prev.byte_length) {
      throw Error(ErrorCode::kOverlap, "tensors '" + prev.name + "' and '" +
                                           by_offset[i]->name + "' overlap");
    }
  }
  return header;
}

void DecodeToF64(DType dtype, std::span<const std::byte> bytes,
                 std::span<double> out) {
  const std::size_t width = DTypeSize(dtype);
  if (bytes.size() != out.size() * width) {
    throw Error(ErrorCode::kInvalidArgument, "byte count does not match output");
  }
  const std::byte* p = bytes.data();
  switch (dtype) {
    case DType::kF64:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = ReadScalar<double>(p + 8 * i);
      break;
    case DType::kF32:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = ReadScalar<float>(p + 4 * i);
      break;
    case DType::kF16:
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = HalfBitsToDouble(ReadScalar<std::uint16_t>(p + 2 * i));
      break;
    case DType::kBF16:
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = BFloat16BitsToDouble(ReadScalar<std::uint16_t>(p + 2 * i));
      break;
  }
}

std::vector<std::byte> EncodeFromF64(DType dtype, std::span<const double> values) {
  std::vector<std::byte> bytes(values.size() * DTypeSize(dtype));
  std::byte* p = bytes.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    switch (dtype) {
      case DType::kF64:
        std::memcpy(p + 8 * i, &values[i], 8);
        break;
      case DType::kF32: {
        const float f = static_cast<float>(values[i]);
        std::memcpy(p + 4 * i, &f, 4);
        break;
      }
      case DType::kF16: {
        const std::uint16_t h = DoubleToHalfBits(values[i]);
        std::memcpy(p + 2 * i, &h, 2);
        break;
      }
      case DType::kBF16: {
        const std::uint16_t h = DoubleToBFloat16Bits(values[i]);
        std::memcpy(p + 2 * i, &h, 2);
        break;
      }
    }
  }
  return bytes;
}

std::vector<double> LoadTensorAsF64(const TensorMeta& meta, std::istream& source,
                                    std::uint64_t data_start) {
  source.clear();
  source.seekg(static_cast<std::streamoff>(data_start + meta.byte_offset));
  if (!source) {
    throw Error(ErrorCode::kTruncated, "cannot seek to tensor '" + meta.name + "'");
  }
  std::vector<std::byte> raw(meta.byte_length);
  ReadExactly(source, reinterpret_cast<char*>(raw.data()), raw.size(),
              "tensor '" + meta.name + "'");
  std::vector<double> values(meta.NumElements());
  DecodeToF64(meta.dtype, raw, values);
  CheckNoNan(values, meta, 0);
  return values;
}

Container Container::Open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  }
  std::error_code ec;
  const std::uint64_t file_size = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot stat '" + path.string() + "'");
  if (file_size < 8) {
    throw Error(ErrorCode::kMalformedHeader,
                "'" + path.string() + "' is shorter than the length prefix");
  }
  std::array<unsigned char, 8> prefix{};
  ReadExactly(in, reinterpret_cast<char*>(prefix.data()), 8, "header length");
  std::uint64_t header_len = 0;
  for (int i = 7; i >= 0; --i) header_len = (header_len << 8) | prefix[i];
  if (header_len > kMaxHeaderBytes || header_len > file_size - 8) {
    throw Error(ErrorCode::kMalformedHeader,
                "header length " + std::to_string(header_len) +
                    " exceeds file size of '" + path.string() + "'");
  }
  std::string header_json(header_len, '\0');
  ReadExactly(in, header_json.data(), header_len, "header");
  const std::uint64_t data_start = 8 + header_len;
  ContainerHeader header = ParseContainerHeader(header_json, file_size - data_start);
  return Container(path, std::move(header), data_start);
}

std::vector<double> Container::LoadF64(const TensorMeta& meta) const {
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path_.string() + "'");
  return LoadTensorAsF64(meta, in, data_start_);
}

void Container::ForEachChunk(
    const TensorMeta& meta, std::size_t chunk_elements,
    const std::function<void(std::span<const double>)>& fn) const {
  if (chunk_elements == 0) chunk_elements = 1;
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path_.string() + "'");
  in.seekg(static_cast<std::streamoff>(data_start_ + meta.byte_offset));
  const std::size_t width = DTypeSize(meta.dtype);
  const std::uint64_t total = meta.NumElements();
  std::vector<std::byte> raw;
  std::vector<double> values;
  for (std::uint64_t done = 0; done < total;) {
    const std::size_t n =
        static_cast<std::size_t>(std::min<std::uint64_t>(chunk_elements, total - done));
    raw.resize(n * width);
    values.resize(n);
    ReadExactly(in, reinterpret_cast<char*>(raw.data()), raw.size(),
                "tensor '" + meta.name + "'");
    DecodeToF64(meta.dtype, raw, values);
    CheckNoNan(values, meta, done);
    fn(values);
    done += n;
  }
}

void WriteContainer(const std::filesystem::path& path,
                    std::span<const TensorPayload> tensors,
                    const Metadata& metadata) {
  ordered_json header = ordered_json::object();
  if (!metadata.empty()) {
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : metadata) meta[k] = v;
    header["__metadata__"] = std::move(meta);
  }
  std::uint64_t offset = 0;
  for (const auto& t : tensors) {
    const std::uint64_t expected = CheckedProduct(t.shape) * DTypeSize(t.dtype);
    if (expected != t.bytes.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "payload size of '" + t.name + "' does not match its shape");
    }
    header[t.name] = {{"dtype", DTypeTag(t.dtype)},
                      {"shape", t.shape},
                      {"data_offsets", {offset, offset + t.bytes.size()}}};
    offset += t.bytes.size();
  }
  std::string text = header.dump();
  while (text.size() % 8 != 0) text.push_back(' ');

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create '" + path.string() + "'");
  std::uint64_t len = text.size();
  std::array<char, 8> prefix{};
  for (int i = 0; i < 8; ++i) prefix[i] = static_cast<char>((len >> (8 * i)) & 0xff);
  out.write(prefix.data(), 8);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : tensors) {
    out.write(reinterpret_cast<const char*>(t.bytes.data()),
              static_cast<std::streamsize>(t.bytes.size()));
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------

std::string_view BlockKindName(BlockKind kind) {
  switch (kind) {
    case BlockKind::kEmbedding: return "embedding";
    case BlockKind::kTransformer: return "transformer";
    case BlockKind::kOther: return "other";
  }
  return "?";
}

BlockKind ParseBlockKind(std::string_view name) {
  if (name == "embedding") return BlockKind::kEmbedding;
  if (name == "transformer") return BlockKind::kTransformer;
  if (name == "other") return BlockKind::kOther;
  throw Error(ErrorCode::kParse, "unknown block kind '" + std::string(name) + "'");
}

std::vector<const BlockGroup*> ModelSchema::TransformerBlocks() const {
  std::vector<const BlockGroup*> out;
  for (const auto& b : blocks) {
    if (b.kind == BlockKind::kTransformer) out.push_back(&b);
  }
  return out;
}

ModelSchema GroupBlocks(std::span<const TensorMeta> tensors,
                        const GroupingRule& rule, std::string model_name) {
  std::regex layer_re;
  std::regex embed_re;
  std::regex exclude_re;
  try {
    layer_re = std::regex(rule.layer_pattern);
    embed_re = std::regex(rule.embedding_pattern);
    exclude_re = std::regex(rule.exclude_pattern);
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("bad grouping pattern: ") + e.what());
  }

  std::map<std::uint64_t, BlockGroup> layers;
  BlockGroup embedding{1, BlockKind::kEmbedding, {}, 0};
  BlockGroup other{0, BlockKind::kOther, {}, 0};

  for (const auto& t : tensors) {
    const bool is_weight =
        t.name.size() > 7 && t.name.ends_with(".weight");
    if (!is_weight || std::regex_search(t.name, exclude_re)) {
      spdlog::info("excluding tensor '{}' from block analysis", t.name);
      continue;
    }
    std::smatch m;
    const bool in_layer = std::regex_search(t.name, m, layer_re) && m.size() > 1;
    const bool in_embedding = std::regex_search(t.name, embed_re);
    if (in_layer && in_embedding) {
      throw Error(ErrorCode::kConflict,
                  "tensor '" + t.name + "' matches both a layer and the embedding");
    }
    if (in_layer) {
      const std::uint64_t layer = std::stoull(m[1].str());
      auto& block = layers[layer];
      block.kind = BlockKind::kTransformer;
      block.tensors.push_back(t);
    } else if (in_embedding) {
      embedding.tensors.push_back(t);
    } else {
      other.tensors.push_back(t);
    }
  }
  if (layers.empty()) {
    throw Error(ErrorCode::kNoMatch,
                "no tensor matches layer pattern '" + rule.layer_pattern + "'");
  }
  std::uint64_t expected = 0;
  for (const auto& [layer, _] : layers) {
    if (layer != expected) {
      throw Error(ErrorCode::kConflict,
                  "transformer layer ids are not contiguous from 0 (missing " +
                      std::to_string(expected) + ")");
    }
    ++expected;
  }

  auto finish = [](BlockGroup& b) {
    std::sort(b.tensors.begin(), b.tensors.end(),
              [](const TensorMeta& x, const TensorMeta& y) { return x.name < y.name; });
    b.num_parameters = 0;
    for (const auto& t : b.tensors) b.num_parameters += t.NumElements();
  };

  ModelSchema schema;
  schema.model_name = std::move(model_name);
  if (!embedding.tensors.empty()) {
    finish(embedding);
    schema.blocks.push_back(std::move(embedding));
  }
  for (auto& [layer, block] : layers) {
    block.exec_index = static_cast<std::uint32_t>(layer + 2);
    finish(block);
    schema.blocks.push_back(std::move(block));
  }
  schema.num_blocks = static_cast<std::uint32_t>(layers.size());
  if (!other.tensors.empty()) {
    other.exec_index = schema.num_blocks + 2;
    finish(other);
    schema.blocks.push_back(std::move(other));
  }
  return schema;
}

}  // namespace ewq
