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

#ifndef EWQ_JSON_IO_H_
#define EWQ_JSON_IO_H_

// Document formats shared by the command-line tool and other
// implementations. Output uses insertion-ordered objects so that writing the
// same value twice produces byte-identical text.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ewq/entropy.h"
#include "ewq/evalstats.h"
#include "ewq/fastewq/dataset.h"
#include "ewq/fastewq/fast_plan.h"
#include "ewq/fastewq/forest.h"
#include "ewq/fastewq/metrics.h"
#include "ewq/planner.h"
#include "ewq/tensor_io.h"

namespace ewq {

using Json = nlohmann::ordered_json;

// Parse errors are reported as kParse; missing files as kIo.
Json ParseJson(std::string_view text);
Json ReadJsonFile(const std::filesystem::path& path);
std::string DumpJson(const Json& doc);  // 2-space indent, trailing newline
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

// {model_name, num_blocks, blocks[{exec_index, kind, num_parameters, tensors[...]}]}
Json SchemaToJson(const ModelSchema& schema);
ModelSchema SchemaFromJson(const Json& doc);

// {unit, config{epsilon, stabilize}, model_name, blocks[{exec_index,
//  block_entropy, num_parameters, per_tensor[{name, entropy, size}]}]}
Json EntropyReportToJson(std::span<const BlockEntropyReport> reports, const EntropyConfig& cfg,
                         const std::string& model_name);
std::vector<BlockEntropyReport> EntropyReportFromJson(const Json& doc);

// {machines[{id, memory_bytes, disk_bytes}]}
std::vector<MachineSpec> ClusterFromJson(const Json& doc);
Json ClusterToJson(std::span<const MachineSpec> machines);

// {assignments[{exec_index, precision, size_bytes}], total_bytes, fits,
//  placements[{exec_index, machine}], unquantized_bytes, capacity_bytes,
//  bits{...}, stats{mean, std, threshold, x}}
Json PlanToJson(const QuantPlan& plan, const PrecisionTable& table,
                const std::optional<EntropyStats>& stats = std::nullopt);
QuantPlan PlanFromJson(const Json& doc);

// {format, seed, n_trees, max_depth, min_samples_split, bootstrap,
//  std_convention, feature_names, scaler{means, stds}, trees[{nodes[...]}]}
Json ForestToJson(const fastewq::ForestModel& model);
fastewq::ForestModel ForestFromJson(const Json& doc);

Json ClassificationReportToJson(const fastewq::ClassificationReport& report);
Json PredictionsToJson(const std::string& model_name,
                       std::span<const fastewq::BlockPrediction> predictions);

// One record per line: {id, subject, correct, logprobs[4, nullable], predicted}
EvalRecord EvalRecordFromJson(const Json& doc);
Json EvalRecordToJson(const EvalRecord& record);
std::vector<EvalRecord> ReadEvalRecords(const std::filesystem::path& path);
Json EvalSummaryToJson(const EvalSummary& summary);

// {name, results[{accuracy, perplexity}]}
struct VariantResults {
  std::string name;
  std::vector<VariantResult> results;
};
VariantResults VariantResultsFromJson(const Json& doc);
Json ComparisonToJson(const ComparisonReport& report, double w1, double w2);

}  // namespace ewq

#endif  // EWQ_JSON_IO_H_
