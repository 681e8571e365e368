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

#include "ewq/fastewq/fast_plan.h"

#include <algorithm>
#include <set>
#include <string>

#include "ewq/error.h"

namespace ewq::fastewq {

QuantPlan PlanFromSelection(std::span<const CandidateBlock> blocks,
                            std::span<const MachineSpec> machines,
                            const PrecisionTable& table, const DistributionOptions& options) {
  table.Validate();
  if (machines.empty()) throw Error(ErrorCode::kNoMachines, "cluster has no machines");
  const std::uint64_t capacity = TotalCapacity(machines);
  if (capacity == 0) throw Error(ErrorCode::kZeroCapacity, "cluster capacity is zero");

  struct Item {
    CandidateBlock block;
    Precision current;
  };
  std::vector<Item> items;
  std::set<std::uint32_t> seen;
  for (const auto& b : blocks) {
    if (!seen.insert(b.exec_index).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate exec_index " + std::to_string(b.exec_index));
    }
    items.push_back({b, b.selected ? Precision::kQ8 : Precision::kRaw});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return a.block.exec_index < b.block.exec_index;
  });
  auto size = [&table](const Item& item, Precision p) {
    return BlockSizeBytes(item.block.num_parameters, p, table);
  };

  QuantPlan plan;
  plan.capacity_bytes = capacity;
  std::uint64_t s = 0;
  for (const auto& item : items) {
    plan.unquantized_bytes += size(item, Precision::kRaw);
    s += size(item, item.current);
  }

  if (s < capacity) {
    for (auto& item : items) {
      if (!item.block.selected) continue;
      const std::uint64_t extra = size(item, Precision::kRaw) - size(item, Precision::kQ8);
      if (capacity - s < extra) break;
      item.current = Precision::kRaw;
      s += extra;
    }
  } else {
    while (s > capacity) {
      bool progressed = false;
      for (auto it = items.rbegin(); it != items.rend() && s > capacity; ++it) {
        if (!it->block.selected) continue;
        if (it->current == Precision::kQ8) {
          s = s - size(*it, Precision::kQ8) + size(*it, Precision::kQ4);
          it->current = Precision::kQ4;
          progressed = true;
        }
        if (s > capacity && it->current == Precision::kQ4) {
          s = s - size(*it, Precision::kQ4) + size(*it, Precision::kQ1_58);
          it->current = Precision::kQ1_58;
          progressed = true;
        }
      }
      if (!progressed) break;
    }
  }

  for (const auto& item : items) {
    const std::uint64_t bytes = size(item, item.current);
    plan.assignments.push_back({item.block.exec_index, item.current, bytes});
    plan.total_bytes += bytes;
  }
  plan.fits = plan.total_bytes <= capacity;
  if (options.place && plan.fits) {
    std::vector<SizedBlock> sized;
    for (const auto& a : plan.assignments) sized.push_back({a.exec_index, a.size_bytes});
    if (auto placements = PlaceFirstFitDecreasing(sized, machines)) {
      plan.placements = std::move(*placements);
    } else {
      plan.fits = false;
    }
  }
  return plan;
}

std::vector<BlockPrediction> ClassifyBlocks(const ModelSchema& schema, const ForestModel& model) {
  if (!model.fitted()) throw Error(ErrorCode::kUnfitted, "forest has no trees");
  const auto blocks = schema.TransformerBlocks();
  if (blocks.empty()) throw Error(ErrorCode::kEmptyInput, "schema has no transformer blocks");
  std::vector<BlockPrediction> out;
  out.reserve(blocks.size());
  for (const BlockGroup* b : blocks) {
    out.push_back({b->exec_index,
                   Predict(model, MakeFeatures(b->num_parameters, b->exec_index,
                                               schema.num_blocks))});
  }
  return out;
}

FastPlanResult FastPlan(const ModelSchema& schema, const ForestModel& model,
                        std::span<const MachineSpec> machines, const PrecisionTable& table,
                        const DistributionOptions& options) {
  FastPlanResult result;
  result.predictions = ClassifyBlocks(schema, model);
  std::vector<CandidateBlock> candidates;
  const auto blocks = schema.TransformerBlocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    candidates.push_back({blocks[i]->exec_index, blocks[i]->num_parameters,
                          result.predictions[i].prediction.label == 1});
  }
  result.plan = PlanFromSelection(candidates, machines, table, options);
  return result;
}

}  // namespace ewq::fastewq
