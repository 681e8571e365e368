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
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <thread>

#include "ewq/error.h"

namespace ewq {
namespace {

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void Scale(double f) {
    sum_ *= f;
    comp_ *= f;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Running max and normalizer sum_i exp(w_i - max).
struct Normalizer {
  double max = -std::numeric_limits<double>::infinity();
  CompensatedSum sum;
  std::uint64_t count = 0;
  bool stabilize = true;

  void Add(std::span<const double> chunk) {
    if (chunk.empty()) return;
    double chunk_max = -std::numeric_limits<double>::infinity();
    bool finite = true;
    for (double w : chunk) {
      finite &= std::isfinite(w);
      chunk_max = std::max(chunk_max, w);
    }
    if (!finite) throw Error(ErrorCode::kNonFinite, "softmax input is not finite");
    if (!stabilize) {
      for (double w : chunk) sum.Add(std::exp(w));
      count += chunk.size();
      return;
    }
    // Rescale once per chunk when the running max moves.
    if (chunk_max > max) {
      if (count > 0) sum.Scale(std::exp(max - chunk_max));
      max = chunk_max;
    }
    for (double w : chunk) sum.Add(std::exp(w - max));
    count += chunk.size();
  }

  double shift() const { return stabilize ? max : 0.0; }

  double Finish() const {
    if (count == 0) throw Error(ErrorCode::kEmptyInput, "softmax of empty input");
    const double z = sum.value();
    if (!std::isfinite(z) || z <= 0.0) {
      throw Error(ErrorCode::kNonFinite,
                  "softmax normalizer overflowed; enable stabilization");
    }
    return z;
  }
};

ChunkSource SpanSource(std::span<const double> values) {
  return [values](const ChunkVisitor& visit) { visit(values); };
}

}  // namespace

void EntropyConfig::Validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive and finite");
  }
}

std::vector<double> Softmax(std::span<const double> values, bool stabilize) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "softmax of empty input");
  double shift = 0.0;
  if (stabilize) {
    shift = -std::numeric_limits<double>::infinity();
    for (double w : values) shift = std::max(shift, w);
  }
  std::vector<double> p(values.size());
  CompensatedSum sum;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kNonFinite, "softmax input is not finite");
    }
    p[i] = std::exp(values[i] - shift);
    sum.Add(p[i]);
  }
  const double z = sum.value();
  if (!std::isfinite(z) || z <= 0.0) {
    throw Error(ErrorCode::kNonFinite, "softmax normalizer overflowed; enable stabilization");
  }
  for (double& v : p) v /= z;
  return p;
}

double WeightEntropy(std::span<const double> values, const EntropyConfig& cfg) {
  return StreamingWeightEntropy(SpanSource(values), cfg);
}

double StreamingWeightEntropy(const ChunkSource& source, const EntropyConfig& cfg) {
  cfg.Validate();
  Normalizer norm;
  norm.stabilize = cfg.stabilize;
  source([&norm](std::span<const double> chunk) { norm.Add(chunk); });
  const double z = norm.Finish();
  const double shift = norm.shift();

  CompensatedSum h;
  std::uint64_t seen = 0;
  source([&](std::span<const double> chunk) {
    for (double w : chunk) {
      const double p = std::exp(w - shift) / z;
      h.Add(-p * std::log(p + cfg.epsilon));
    }
    seen += chunk.size();
  });
  if (seen != norm.count) {
    throw Error(ErrorCode::kInvalidArgument,
                "chunk source yielded a different sequence on the second pass");
  }
  return h.value();
}

double BlockEntropy(std::span<const TensorEntropy> per_tensor) {
  if (per_tensor.empty()) {
    throw Error(ErrorCode::kEmptyInput, "block has no tensors");
  }
  CompensatedSum weighted;
  std::uint64_t total = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& t : per_tensor) {
    if (t.size == 0) continue;
    weighted.Add(static_cast<double>(t.size) * t.entropy);
    total += t.size;
    lo = std::min(lo, t.entropy);
    hi = std::max(hi, t.entropy);
  }
  if (total == 0) throw Error(ErrorCode::kZeroSize, "block has zero total size");
  return std::clamp(weighted.value() / static_cast<double>(total), lo, hi);
}

std::vector<BlockEntropyReport> AnalyzeModel(const ModelSchema& schema,
                                             const TensorReader& reader,
                                             const EntropyConfig& cfg,
                                             const AnalyzeOptions& options) {
  cfg.Validate();
  const auto blocks = schema.TransformerBlocks();

  struct Job {
    const TensorMeta* meta;
    double entropy = 0.0;
    std::exception_ptr error;
  };
  std::vector<Job> jobs;
  for (const BlockGroup* b : blocks) {
    for (const auto& t : b->tensors) jobs.push_back({&t, 0.0, nullptr});
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& job = jobs[i];
      try {
        job.entropy = StreamingWeightEntropy(
            [&](const ChunkVisitor& visit) { reader(*job.meta, visit); }, cfg);
      } catch (...) {
        job.error = std::current_exception();
      }
    }
  };
  std::size_t threads = options.threads != 0
                            ? options.threads
                            : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(jobs.size(), 1));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(work);
  }

  for (const Job& job : jobs) {
    if (!job.error) continue;
    try {
      std::rethrow_exception(job.error);
    } catch (const Error& e) {
      throw Error(e.code(), "tensor '" + job.meta->name + "': " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kIo, "tensor '" + job.meta->name + "': " + e.what());
    }
  }

  std::vector<BlockEntropyReport> reports;
  reports.reserve(blocks.size());
  std::size_t j = 0;
  for (const BlockGroup* b : blocks) {
    BlockEntropyReport r;
    r.exec_index = b->exec_index;
    for (const auto& t : b->tensors) {
      r.per_tensor.push_back({t.name, jobs[j++].entropy, t.NumElements()});
      r.num_parameters += t.NumElements();
    }
    std::sort(r.per_tensor.begin(), r.per_tensor.end(),
              [](const TensorEntropy& a, const TensorEntropy& b) { return a.name < b.name; });
    r.block_entropy = BlockEntropy(r.per_tensor);
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<BlockEntropyReport> AnalyzeModel(const ModelSchema& schema,
                                             const Container& container,
                                             const EntropyConfig& cfg,
                                             const AnalyzeOptions& options) {
  const std::size_t chunk = options.chunk_elements;
  return AnalyzeModel(
      schema,
      [&container, chunk](const TensorMeta& meta, const ChunkVisitor& visit) {
        container.ForEachChunk(meta, chunk, visit);
      },
      cfg, options);
}

}  // namespace ewq
