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

#include "ewq/cli/config.h"

#include <cmath>
#include <cstdlib>
#include <initializer_list>
#include <string>

#include "ewq/error.h"

namespace ewq::cli {
namespace {

void RejectUnknown(const Json& obj, const std::string& where,
                   std::initializer_list<const char*> known) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "config '" + where + "' must be an object");
  }
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown config key '" + where + item.key() + "'");
    }
  }
}

template <typename T>
void Read(const Json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

}  // namespace

Config ApplyConfig(const Json& doc, Config base) {
  RejectUnknown(doc, "",
                {"epsilon", "stabilize", "x", "bits", "grouping", "forest", "weights",
                 "perplexity", "threads", "chunk_elements"});
  Config c = std::move(base);
  try {
    Read(doc, "epsilon", c.entropy.epsilon);
    Read(doc, "stabilize", c.entropy.stabilize);
    Read(doc, "x", c.x);
    if (doc.contains("bits")) {
      const Json& bits = doc.at("bits");
      if (bits.is_string()) {
        c.bits = PrecisionTable::Parse(bits.get<std::string>(), c.bits);
      } else {
        RejectUnknown(bits, "bits.", {"raw", "q8", "q4", "q1_58"});
        for (const auto& item : bits.items()) {
          c.bits.bits[static_cast<std::size_t>(ParsePrecision(item.key()))] =
              item.value().get<double>();
        }
      }
    }
    if (doc.contains("grouping")) {
      const Json& g = doc.at("grouping");
      RejectUnknown(g, "grouping.", {"layer_pattern", "embedding_pattern", "exclude_pattern"});
      Read(g, "layer_pattern", c.grouping.layer_pattern);
      Read(g, "embedding_pattern", c.grouping.embedding_pattern);
      Read(g, "exclude_pattern", c.grouping.exclude_pattern);
    }
    if (doc.contains("forest")) {
      const Json& f = doc.at("forest");
      RejectUnknown(f, "forest.",
                    {"n_trees", "max_depth", "min_samples_split", "bootstrap", "seed", "split",
                     "std_convention"});
      Read(f, "n_trees", c.forest.n_trees);
      if (f.contains("max_depth")) {
        if (f.at("max_depth").is_null()) {
          c.forest.max_depth.reset();
        } else {
          c.forest.max_depth = f.at("max_depth").get<std::uint32_t>();
        }
      }
      Read(f, "min_samples_split", c.forest.min_samples_split);
      Read(f, "bootstrap", c.forest.bootstrap);
      if (f.contains("seed")) c.seed = f.at("seed").get<std::uint64_t>();
      Read(f, "split", c.split);
      if (f.contains("std_convention")) {
        const auto conv = f.at("std_convention").get<std::string>();
        if (conv == "sample") {
          c.forest.std_convention = fastewq::StdConvention::kSample;
        } else if (conv == "population") {
          c.forest.std_convention = fastewq::StdConvention::kPopulation;
        } else {
          throw Error(ErrorCode::kInvalidArgument, "unknown std_convention '" + conv + "'");
        }
      }
    }
    if (doc.contains("weights")) {
      const Json& w = doc.at("weights");
      RejectUnknown(w, "weights.", {"w1", "w2"});
      Read(w, "w1", c.w1);
      Read(w, "w2", c.w2);
    }
    if (doc.contains("perplexity")) {
      const Json& p = doc.at("perplexity");
      RejectUnknown(p, "perplexity.",
                    {"missing_logprob", "all_missing_probability", "fallback_bypasses_softmax"});
      Read(p, "missing_logprob", c.perplexity.missing_logprob);
      Read(p, "all_missing_probability", c.perplexity.all_missing_probability);
      Read(p, "fallback_bypasses_softmax", c.perplexity.fallback_bypasses_softmax);
    }
    Read(doc, "threads", c.threads);
    Read(doc, "chunk_elements", c.chunk_elements);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  ValidateConfig(c);
  return c;
}

void ValidateConfig(const Config& c) {
  c.entropy.Validate();
  c.bits.Validate();
  if (!std::isfinite(c.x) || c.x < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "x must be finite and non-negative");
  }
  if (!(c.split > 0.0 && c.split <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "split must lie in (0, 1]");
  }
  if (c.forest.n_trees == 0) throw Error(ErrorCode::kInvalidArgument, "n_trees must be positive");
  if (c.forest.min_samples_split < 2) {
    throw Error(ErrorCode::kInvalidArgument, "min_samples_split must be at least 2");
  }
  if (!std::isfinite(c.w1) || !std::isfinite(c.w2)) {
    throw Error(ErrorCode::kInvalidArgument, "weights must be finite");
  }
  if (!(c.perplexity.all_missing_probability > 0.0 &&
        c.perplexity.all_missing_probability <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "all_missing_probability must lie in (0, 1]");
  }
  if (c.chunk_elements == 0) {
    throw Error(ErrorCode::kInvalidArgument, "chunk_elements must be positive");
  }
}

Config LoadConfigFromEnvironment() {
  const char* path = std::getenv(kConfigEnv);
  if (path == nullptr || *path == '\0') return Config();
  return ApplyConfig(ReadJsonFile(path));
}

}  // namespace ewq::cli
