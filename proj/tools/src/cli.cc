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

#include "ewq/cli/cli.h"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ewq/cli/config.h"
#include "ewq/entropy.h"
#include "ewq/error.h"
#include "ewq/evalstats.h"
#include "ewq/fastewq/dataset.h"
#include "ewq/fastewq/fast_plan.h"
#include "ewq/fastewq/forest.h"
#include "ewq/fastewq/metrics.h"
#include "ewq/json_io.h"
#include "ewq/planner.h"
#include "ewq/tensor_io.h"
#include "spdlog/sinks/stdout_sinks.h"
#include "spdlog/spdlog.h"

namespace ewq::cli {
namespace {

namespace fs = std::filesystem;

// Raised for invocation problems that CLI11 cannot see on its own.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void InstallLogger() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = std::make_shared<spdlog::logger>(
        "ewq", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(std::move(logger));
  });
}

// Every registration of one flag; subcommands register their own copies.
using Opts = std::vector<CLI::Option*>;

// Flag values as parsed; each is applied only if the flag was present.
struct Flags {
  double epsilon = 0.0;
  double x = 0.0;
  std::string bits;
  std::uint64_t seed = 0;
  double split = 0.0;
  std::uint32_t trees = 0;
  std::uint32_t max_depth = 0;
  double w1 = 0.0;
  double w2 = 0.0;
  std::size_t threads = 0;
  std::string out;

  Opts epsilon_opt;
  Opts x_opt;
  Opts bits_opt;
  Opts seed_opt;
  Opts split_opt;
  Opts trees_opt;
  Opts max_depth_opt;
  Opts w1_opt;
  Opts w2_opt;
  Opts threads_opt;
};

bool Given(const Opts& opts) {
  return std::any_of(opts.begin(), opts.end(), [](const CLI::Option* o) { return o->count() > 0; });
}

// Each subcommand gets its own copy of the shared flags so that they may be
// written after the subcommand name.
void AddOut(CLI::App* app, Flags& f) {
  app->add_option("--out,-o", f.out, "Output file (default: stdout)");
}
void AddEntropyFlags(CLI::App* app, Flags& f) {
  f.epsilon_opt.push_back(app->add_option("--epsilon", f.epsilon, "Entropy log offset"));
  f.threads_opt.push_back(app->add_option("--threads", f.threads, "Worker threads (0 = auto)"));
}
void AddPlanFlags(CLI::App* app, Flags& f) {
  f.x_opt.push_back(app->add_option("--x", f.x, "Threshold aggressiveness X"));
  f.bits_opt.push_back(
      app->add_option("--bits", f.bits, "Bit table, e.g. raw=16,q8=8,q4=4.25,q1_58=2"));
}
void AddForestFlags(CLI::App* app, Flags& f) {
  f.seed_opt.push_back(app->add_option("--seed", f.seed, "Random seed"));
  f.split_opt.push_back(app->add_option("--split", f.split, "Training fraction in (0, 1]"));
  f.trees_opt.push_back(app->add_option("--trees", f.trees, "Number of trees"));
  f.max_depth_opt.push_back(app->add_option("--max-depth", f.max_depth, "Maximum tree depth"));
  f.threads_opt.push_back(app->add_option("--threads", f.threads, "Worker threads (0 = auto)"));
}
void AddWeightFlags(CLI::App* app, Flags& f) {
  f.w1_opt.push_back(app->add_option("--w1", f.w1, "Weight of ln(perplexity)"));
  f.w2_opt.push_back(app->add_option("--w2", f.w2, "Weight of accuracy"));
}

Config Resolve(const Flags& f) {
  Config c;
  try {
    c = LoadConfigFromEnvironment();
  } catch (const Error& e) {
    throw UsageError(std::string(kConfigEnv) + ": " + e.what());
  }
  if (Given(f.epsilon_opt)) c.entropy.epsilon = f.epsilon;
  if (Given(f.x_opt)) c.x = f.x;
  if (Given(f.seed_opt)) c.seed = f.seed;
  if (Given(f.split_opt)) c.split = f.split;
  if (Given(f.trees_opt)) c.forest.n_trees = f.trees;
  if (Given(f.max_depth_opt)) c.forest.max_depth = f.max_depth;
  if (Given(f.w1_opt)) c.w1 = f.w1;
  if (Given(f.w2_opt)) c.w2 = f.w2;
  if (Given(f.threads_opt)) c.threads = f.threads;
  try {
    if (Given(f.bits_opt)) c.bits = PrecisionTable::Parse(f.bits, c.bits);
    ValidateConfig(c);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return c;
}

void Emit(const Json& doc, const Flags& f, std::ostream& out) {
  const std::string text = DumpJson(doc);
  if (f.out.empty()) {
    out << text;
  } else {
    WriteTextFile(f.out, text);
  }
}

std::string ModelName(const Container& container, const fs::path& path) {
  const auto& meta = container.metadata();
  if (auto it = meta.find("model_name"); it != meta.end()) return it->second;
  return path.stem().string();
}

int ExitForPlan(const QuantPlan& plan, std::ostream& err) {
  if (plan.fits) return kExitOk;
  err << "plan does not fit: " << plan.total_bytes << " bytes needed, "
      << plan.capacity_bytes << " available\n";
  return kExitInfeasible;
}

int CmdSchema(const std::string& model, const Flags& f, std::ostream& out) {
  const Config c = Resolve(f);
  const Container container = Container::Open(model);
  Emit(SchemaToJson(GroupBlocks(container.tensors(), c.grouping, ModelName(container, model))),
       f, out);
  return kExitOk;
}

int CmdAnalyze(const std::string& model, const Flags& f, std::ostream& out) {
  const Config c = Resolve(f);
  const Container container = Container::Open(model);
  const std::string name = ModelName(container, model);
  const ModelSchema schema = GroupBlocks(container.tensors(), c.grouping, name);
  AnalyzeOptions options;
  options.threads = c.threads;
  options.chunk_elements = c.chunk_elements;
  const auto reports = AnalyzeModel(schema, container, c.entropy, options);
  Emit(EntropyReportToJson(reports, c.entropy, name), f, out);
  return kExitOk;
}

int CmdPlan(const std::string& report, const std::string& cluster, bool place, const Flags& f,
            std::ostream& out, std::ostream& err) {
  const Config c = Resolve(f);
  const auto reports = EntropyReportFromJson(ReadJsonFile(report));
  const auto machines = ClusterFromJson(ReadJsonFile(cluster));
  const EntropyStats stats = ComputeStats(reports, c.x);
  const auto decisions = Decide(reports, stats);
  DistributionOptions options;
  options.place = place;
  const QuantPlan plan = OptimizeDistribution(reports, decisions, machines, c.bits, options);
  Emit(PlanToJson(plan, c.bits, stats), f, out);
  return ExitForPlan(plan, err);
}

int CmdTrain(const std::string& dataset, const std::string& heldout, const Flags& f,
             std::ostream& out) {
  const Config c = Resolve(f);
  if (!c.seed) {
    throw UsageError("fastewq train needs a seed (--seed or forest.seed in " +
                     std::string(kConfigEnv) + ")");
  }
  fastewq::ForestParams params = c.forest;
  params.seed = *c.seed;
  const auto records = fastewq::LoadDataset(dataset);
  const auto result = fastewq::TrainForest(records, c.split, params, c.threads);
  spdlog::info("trained {} trees on {} rows ({} held out)", params.n_trees, result.train.size(),
               result.held_out.size());
  if (!heldout.empty()) fastewq::SaveDataset(heldout, result.held_out);
  Emit(ForestToJson(result.model), f, out);
  return kExitOk;
}

fastewq::ForestModel LoadModel(const std::string& path) {
  return ForestFromJson(ReadJsonFile(path));
}

int CmdEval(const std::string& dataset, const std::string& model_path, const Flags& f,
            std::ostream& out) {
  Resolve(f);
  const auto model = LoadModel(model_path);
  const auto rows = fastewq::LoadDataset(dataset);
  Json doc = ClassificationReportToJson(fastewq::Evaluate(model, rows));
  const auto importance = fastewq::FeatureImportance(model);
  Json imp = Json::object();
  for (std::size_t i = 0; i < importance.size(); ++i) {
    imp[std::string(fastewq::kFeatureNames[i])] = importance[i];
  }
  doc["feature_importance"] = std::move(imp);
  Emit(doc, f, out);
  return kExitOk;
}

int CmdPredict(const std::string& schema_path, const std::string& model_path, const Flags& f,
               std::ostream& out) {
  Resolve(f);
  const ModelSchema schema = SchemaFromJson(ReadJsonFile(schema_path));
  const auto predictions = fastewq::ClassifyBlocks(schema, LoadModel(model_path));
  Emit(PredictionsToJson(schema.model_name, predictions), f, out);
  return kExitOk;
}

int CmdFastPlan(const std::string& schema_path, const std::string& model_path,
                const std::string& cluster, const Flags& f, std::ostream& out,
                std::ostream& err) {
  const Config c = Resolve(f);
  const ModelSchema schema = SchemaFromJson(ReadJsonFile(schema_path));
  const auto machines = ClusterFromJson(ReadJsonFile(cluster));
  const auto result = fastewq::FastPlan(schema, LoadModel(model_path), machines, c.bits);
  Json doc = PlanToJson(result.plan, c.bits, std::nullopt);
  doc["predictions"] = PredictionsToJson(schema.model_name, result.predictions)["blocks"];
  Emit(doc, f, out);
  return ExitForPlan(result.plan, err);
}

int CmdMmluStats(const std::string& records_path, const Flags& f, std::ostream& out) {
  const Config c = Resolve(f);
  const auto records = ReadEvalRecords(records_path);
  const EvalSummary summary = Summarize(records, c.perplexity);
  Json doc = EvalSummaryToJson(summary);
  doc["composite_score"] = CompositeScore(summary.accuracy, summary.perplexity, c.w1, c.w2);
  doc["weights"] = Json{{"w1", c.w1}, {"w2", c.w2}};
  Emit(doc, f, out);
  return kExitOk;
}

int CmdCompare(const std::string& path_a, const std::string& path_b, const Flags& f,
               std::ostream& out) {
  const Config c = Resolve(f);
  VariantResults a = VariantResultsFromJson(ReadJsonFile(path_a));
  VariantResults b = VariantResultsFromJson(ReadJsonFile(path_b));
  CompareInput input;
  input.name_a = a.name.empty() ? fs::path(path_a).stem().string() : a.name;
  input.name_b = b.name.empty() ? fs::path(path_b).stem().string() : b.name;
  input.a = std::move(a.results);
  input.b = std::move(b.results);
  input.w1 = c.w1;
  input.w2 = c.w2;
  Emit(ComparisonToJson(Compare(input), c.w1, c.w2), f, out);
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  InstallLogger();
  CLI::App app{"Entropy-weighted quantization planner", "ewq"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("--verbose,-v", verbose, "Log progress to stderr");

  Flags f;
  std::string model, report, cluster, dataset, model_path, schema_path, heldout, records;
  std::string path_a, path_b;

  auto* schema = app.add_subcommand("schema", "Group container tensors into blocks");
  schema->add_option("model", model, "Weight container")->required();
  AddOut(schema, f);

  auto* analyze = app.add_subcommand("analyze", "Per-block weight entropy report");
  analyze->add_option("model", model, "Weight container")->required();
  AddEntropyFlags(analyze, f);
  AddOut(analyze, f);

  auto* plan = app.add_subcommand("plan", "Entropy-driven precision plan");
  auto* distribute = app.add_subcommand("distribute", "Precision plan plus machine placement");
  for (auto* sub : {plan, distribute}) {
    sub->add_option("report", report, "Entropy report from 'analyze'")->required();
    sub->add_option("--cluster", cluster, "Cluster descriptor")->required();
    AddPlanFlags(sub, f);
    AddOut(sub, f);
  }

  auto* fast = app.add_subcommand("fastewq", "Metadata-only classifier workflow");
  fast->require_subcommand(1);
  auto* train = fast->add_subcommand("train", "Fit a random forest on a block dataset");
  train->add_option("dataset", dataset, "Block dataset (CSV)")->required();
  train->add_option("--heldout", heldout, "Write held-out rows here (CSV)");
  AddForestFlags(train, f);
  AddOut(train, f);
  auto* predict = fast->add_subcommand("predict", "Classify the blocks of a schema");
  predict->add_option("schema", schema_path, "Model schema from 'schema'")->required();
  predict->add_option("--model", model_path, "Forest model")->required();
  AddOut(predict, f);
  auto* eval = fast->add_subcommand("eval", "Classification report on a labelled dataset");
  eval->add_option("dataset", dataset, "Block dataset (CSV)")->required();
  eval->add_option("--model", model_path, "Forest model")->required();
  AddOut(eval, f);
  auto* fplan = fast->add_subcommand("plan", "Classifier-driven precision plan");
  fplan->add_option("schema", schema_path, "Model schema from 'schema'")->required();
  fplan->add_option("--model", model_path, "Forest model")->required();
  fplan->add_option("--cluster", cluster, "Cluster descriptor")->required();
  f.bits_opt.push_back(
      fplan->add_option("--bits", f.bits, "Bit table, e.g. raw=16,q8=8,q4=4.25,q1_58=2"));
  AddOut(fplan, f);

  auto* mmlu = app.add_subcommand("mmlu-stats", "Accuracy and perplexity from recorded log-probs");
  mmlu->add_option("records", records, "Evaluation records, one object per line")->required();
  AddWeightFlags(mmlu, f);
  AddOut(mmlu, f);

  auto* compare = app.add_subcommand("compare", "Paired comparison of two variants");
  compare->add_option("a", path_a, "Results of variant A")->required();
  compare->add_option("b", path_b, "Results of variant B")->required();
  AddWeightFlags(compare, f);
  AddOut(compare, f);

  std::vector<const char*> argv{"ewq"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    if (schema->parsed()) return CmdSchema(model, f, out);
    if (analyze->parsed()) return CmdAnalyze(model, f, out);
    if (plan->parsed()) return CmdPlan(report, cluster, false, f, out, err);
    if (distribute->parsed()) return CmdPlan(report, cluster, true, f, out, err);
    if (train->parsed()) return CmdTrain(dataset, heldout, f, out);
    if (predict->parsed()) return CmdPredict(schema_path, model_path, f, out);
    if (eval->parsed()) return CmdEval(dataset, model_path, f, out);
    if (fplan->parsed()) return CmdFastPlan(schema_path, model_path, cluster, f, out, err);
    if (mmlu->parsed()) return CmdMmluStats(records, f, out);
    if (compare->parsed()) return CmdCompare(path_a, path_b, f, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

int Run(const std::vector<std::string>& args) { return Run(args, std::cout, std::cerr); }

}  // namespace ewq::cli
