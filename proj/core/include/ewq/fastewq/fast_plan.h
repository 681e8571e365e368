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

#ifndef EWQ_FASTEWQ_FAST_PLAN_H_
#define EWQ_FASTEWQ_FAST_PLAN_H_

// Metadata-only planning: the classifier marks blocks as quantization
// candidates and precision is then adjusted to the cluster budget by
// execution position instead of by entropy.

#include <cstdint>
#include <span>
#include <vector>

#include "ewq/fastewq/forest.h"
#include "ewq/planner.h"
#include "ewq/tensor_io.h"

namespace ewq::fastewq {

struct CandidateBlock {
  std::uint32_t exec_index = 0;
  std::uint64_t num_parameters = 0;
  bool selected = false;  // classifier voted to quantize
};

// Candidates start at q8, everything else stays raw. With spare budget
// (S < R) candidates are promoted to raw by ascending exec_index until the
// next one does not fit. Otherwise candidates are swept by descending
// exec_index, each taken q8 -> q4 -> q1_58 until S <= R.
QuantPlan PlanFromSelection(std::span<const CandidateBlock> blocks,
                            std::span<const MachineSpec> machines,
                            const PrecisionTable& table = {},
                            const DistributionOptions& options = {});

struct BlockPrediction {
  std::uint32_t exec_index = 0;
  Prediction prediction;
};

// Classifies each transformer block of `schema` from
// (num_parameters, exec_index, num_blocks). Needs no weights.
std::vector<BlockPrediction> ClassifyBlocks(const ModelSchema& schema, const ForestModel& model);

struct FastPlanResult {
  std::vector<BlockPrediction> predictions;
  QuantPlan plan;
};

FastPlanResult FastPlan(const ModelSchema& schema, const ForestModel& model,
                        std::span<const MachineSpec> machines,
                        const PrecisionTable& table = {},
                        const DistributionOptions& options = {});

}  // namespace ewq::fastewq

#endif  // EWQ_FASTEWQ_FAST_PLAN_H_
