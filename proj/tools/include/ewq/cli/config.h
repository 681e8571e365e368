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

#ifndef EWQ_CLI_CONFIG_H_
#define EWQ_CLI_CONFIG_H_

#include <cstdint>
#include <optional>

#include "ewq/entropy.h"
#include "ewq/evalstats.h"
#include "ewq/fastewq/forest.h"
#include "ewq/json_io.h"
#include "ewq/planner.h"
#include "ewq/tensor_io.h"

namespace ewq::cli {

// Name of the environment variable holding a JSON config path.
inline constexpr char kConfigEnv[] = "EWQ_CONFIG";

struct Config {
  EntropyConfig entropy;
  double x = 1.0;
  PrecisionTable bits;
  GroupingRule grouping;
  fastewq::ForestParams forest;
  std::optional<std::uint64_t> seed;  // training refuses to run without one
  double split = 0.7;
  double w1 = 1.0;
  double w2 = 1.0;
  PerplexityOptions perplexity;
  std::size_t threads = 0;
  std::uint64_t chunk_elements = 1 << 20;
};

// Overlays the keys of `doc` onto `base`. Unknown keys are rejected so that a
// typo cannot silently fall back to a default.
//
//   {"epsilon": 0.01, "stabilize": true, "x": 1.0,
//    "bits": "raw=16,q8=8,q4=4.25,q1_58=2",
//    "grouping": {"layer_pattern": ..., "embedding_pattern": ...,
//                 "exclude_pattern": ...},
//    "forest": {"n_trees": 100, "max_depth": null, "min_samples_split": 2,
//               "bootstrap": true, "seed": 7, "split": 0.7,
//               "std_convention": "sample"},
//    "weights": {"w1": 1.0, "w2": 1.0},
//    "perplexity": {"missing_logprob": -100, "all_missing_probability": 1e-6,
//                   "fallback_bypasses_softmax": true},
//    "threads": 0, "chunk_elements": 1048576}
Config ApplyConfig(const Json& doc, Config base = Config());

// Defaults, overlaid with the file named by EWQ_CONFIG when it is set.
Config LoadConfigFromEnvironment();

// Range checks shared by the file loader and the flag parser.
void ValidateConfig(const Config& config);

}  // namespace ewq::cli

#endif  // EWQ_CLI_CONFIG_H_
