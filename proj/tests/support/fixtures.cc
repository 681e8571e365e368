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

#include "support/fixtures.h"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>

namespace ewq::fixtures {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("ewq_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fastewq::BlockRecord> SeparableDataset() {
  struct Arch {
    const char* name;
    std::uint64_t blocks;
    std::uint64_t params;
  };
  // 24 + 26 + 28 + 32 + 40 + 50 = 200 rows.
  const Arch archs[] = {{"toy/a-24", 24, 77865984},   {"toy/b-26", 26, 110100480},
                        {"toy/c-28", 28, 233057792},  {"toy/d-32", 32, 218103808},
                        {"toy/e-40", 40, 314572800},  {"toy/f-50", 50, 150994944}};
  std::vector<fastewq::BlockRecord> rows;
  for (const auto& a : archs) {
    for (std::uint64_t e = 2; e < a.blocks + 2; ++e) {
      fastewq::BlockRecord r;
      r.model_name = a.name;
      r.num_blocks = a.blocks;
      r.exec_index = e;
      r.num_parameters = a.params;
      r.quantized = 2 * e > a.blocks ? 1 : 0;
      r.quantization_type = r.quantized ? fastewq::QuantType::k8Bit : fastewq::QuantType::kRaw;
      rows.push_back(r);
    }
  }
  return rows;
}

std::vector<fastewq::BlockRecord> ExecOnlyDataset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> params(50'000'000, 400'000'000);
  std::vector<fastewq::BlockRecord> rows;
  for (std::uint64_t blocks : {30u, 32u, 34u}) {
    for (std::uint64_t e = 2; e < blocks + 2; ++e) {
      fastewq::BlockRecord r;
      r.model_name = "toy/exec-" + std::to_string(blocks);
      r.num_blocks = blocks;
      r.exec_index = e;
      r.num_parameters = params(rng);
      r.quantized = e > 16 ? 1 : 0;
      r.quantization_type = r.quantized ? fastewq::QuantType::k4Bit : fastewq::QuantType::kRaw;
      rows.push_back(r);
    }
  }
  return rows;
}

void WriteToyModel(const std::filesystem::path& path, int layers, std::uint64_t seed,
                   DType dtype, double spread) {
  std::mt19937_64 rng(seed);
  std::vector<TensorPayload> payloads;
  auto add = [&](const std::string& name, std::vector<std::uint64_t> shape, double sd) {
    std::uint64_t n = 1;
    for (auto d : shape) n *= d;
    std::normal_distribution<double> dist(0.0, sd);
    std::vector<double> values(n);
    for (auto& v : values) v = sd > 0.0 ? dist(rng) : 1.0;
    payloads.push_back({name, dtype, std::move(shape), EncodeFromF64(dtype, values)});
  };
  add("model.embed_tokens.weight", {32, 16}, 1.0);
  for (int k = 0; k < layers; ++k) {
    const std::string prefix = "model.layers." + std::to_string(k) + ".";
    const double sd = (k + 1) * spread;
    add(prefix + "self_attn.q_proj.weight", {16, 16}, sd);
    add(prefix + "mlp.up_proj.weight", {32, 16}, sd);
    add(prefix + "input_layernorm.weight", {16}, 0.0);
  }
  add("model.norm.weight", {16}, 0.0);
  add("lm_head.weight", {32, 16}, 1.0);
  WriteContainer(path, payloads, {{"model_name", "toy/model"}});
}

BlockEntropyReport Report(std::uint32_t exec_index, double entropy,
                          std::uint64_t num_parameters) {
  BlockEntropyReport r;
  r.exec_index = exec_index;
  r.block_entropy = entropy;
  r.num_parameters = num_parameters;
  r.per_tensor.push_back({"block." + std::to_string(exec_index) + ".weight", entropy,
                          num_parameters});
  return r;
}

std::vector<MachineSpec> Cluster(std::uint64_t bytes) { return {{"m0", bytes, bytes}}; }

}  // namespace ewq::fixtures
