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

#include "ewq/json_io.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ewq/error.h"

namespace ewq {
namespace {

template <typename F>
auto Guard(const std::string& what, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, what + ": " + e.what());
  }
}

Json Number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

Json TensorToJson(const TensorMeta& t) {
  return Json{{"name", t.name},
              {"dtype", DTypeTag(t.dtype)},
              {"shape", t.shape},
              {"byte_offset", t.byte_offset},
              {"byte_length", t.byte_length}};
}

TensorMeta TensorFromJson(const Json& j) {
  TensorMeta t;
  if (j.is_string()) {
    t.name = j.get<std::string>();
    return t;
  }
  t.name = j.at("name").get<std::string>();
  t.dtype = ParseDType(j.value("dtype", std::string("F32")));
  t.shape = j.value("shape", std::vector<std::uint64_t>{});
  t.byte_offset = j.value("byte_offset", std::uint64_t{0});
  t.byte_length = j.value("byte_length", std::uint64_t{0});
  return t;
}

Json MetricsToJson(const fastewq::ClassMetrics& m) {
  return Json{{"precision", Number(m.precision)},
              {"recall", Number(m.recall)},
              {"f1", Number(m.f1)},
              {"support", m.support}};
}

}  // namespace

Json ParseJson(std::string_view text) {
  return Guard("invalid JSON", [&] { return Json::parse(text); });
}

Json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return Guard("'" + path.string() + "'", [&] { return Json::parse(ss.str()); });
}

std::string DumpJson(const Json& doc) { return doc.dump(2) + "\n"; }

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

Json SchemaToJson(const ModelSchema& schema) {
  Json blocks = Json::array();
  for (const auto& b : schema.blocks) {
    Json tensors = Json::array();
    for (const auto& t : b.tensors) tensors.push_back(TensorToJson(t));
    blocks.push_back(Json{{"exec_index", b.exec_index},
                          {"kind", BlockKindName(b.kind)},
                          {"num_parameters", b.num_parameters},
                          {"tensors", std::move(tensors)}});
  }
  return Json{{"model_name", schema.model_name},
              {"num_blocks", schema.num_blocks},
              {"blocks", std::move(blocks)}};
}

ModelSchema SchemaFromJson(const Json& doc) {
  return Guard("model schema", [&] {
    ModelSchema schema;
    schema.model_name = doc.value("model_name", std::string());
    for (const auto& jb : doc.at("blocks")) {
      BlockGroup b;
      b.exec_index = jb.at("exec_index").get<std::uint32_t>();
      b.kind = ParseBlockKind(jb.value("kind", std::string("transformer")));
      b.num_parameters = jb.at("num_parameters").get<std::uint64_t>();
      if (jb.contains("tensors")) {
        for (const auto& jt : jb.at("tensors")) b.tensors.push_back(TensorFromJson(jt));
      }
      schema.blocks.push_back(std::move(b));
    }
    std::sort(schema.blocks.begin(), schema.blocks.end(),
              [](const BlockGroup& a, const BlockGroup& b) { return a.exec_index < b.exec_index; });
    const auto transformers = static_cast<std::uint32_t>(schema.TransformerBlocks().size());
    schema.num_blocks = doc.value("num_blocks", transformers);
    if (schema.num_blocks != transformers) {
      throw Error(ErrorCode::kParse, "num_blocks " + std::to_string(schema.num_blocks) +
                                         " disagrees with " + std::to_string(transformers) +
                                         " transformer blocks");
    }
    return schema;
  });
}

Json EntropyReportToJson(std::span<const BlockEntropyReport> reports, const EntropyConfig& cfg,
                         const std::string& model_name) {
  Json blocks = Json::array();
  for (const auto& r : reports) {
    Json per_tensor = Json::array();
    for (const auto& t : r.per_tensor) {
      per_tensor.push_back(Json{{"name", t.name}, {"entropy", t.entropy}, {"size", t.size}});
    }
    blocks.push_back(Json{{"exec_index", r.exec_index},
                          {"block_entropy", r.block_entropy},
                          {"num_parameters", r.num_parameters},
                          {"per_tensor", std::move(per_tensor)}});
  }
  return Json{{"unit", "nats"},
              {"config", {{"epsilon", cfg.epsilon}, {"stabilize", cfg.stabilize}}},
              {"model_name", model_name},
              {"blocks", std::move(blocks)}};
}

std::vector<BlockEntropyReport> EntropyReportFromJson(const Json& doc) {
  return Guard("entropy report", [&] {
    const Json& blocks = doc.is_array() ? doc : doc.at("blocks");
    std::vector<BlockEntropyReport> out;
    for (const auto& jb : blocks) {
      BlockEntropyReport r;
      r.exec_index = jb.at("exec_index").get<std::uint32_t>();
      r.block_entropy = jb.at("block_entropy").get<double>();
      r.num_parameters = jb.at("num_parameters").get<std::uint64_t>();
      if (jb.contains("per_tensor")) {
        for (const auto& jt : jb.at("per_tensor")) {
          r.per_tensor.push_back({jt.at("name").get<std::string>(),
                                  jt.at("entropy").get<double>(),
                                  jt.at("size").get<std::uint64_t>()});
        }
      }
      out.push_back(std::move(r));
    }
    return out;
  });
}

std::vector<MachineSpec> ClusterFromJson(const Json& doc) {
  return Guard("cluster descriptor", [&] {
    std::vector<MachineSpec> machines;
    for (const auto& jm : doc.at("machines")) {
      machines.push_back({jm.at("id").get<std::string>(),
                          jm.at("memory_bytes").get<std::uint64_t>(),
                          jm.at("disk_bytes").get<std::uint64_t>()});
    }
    return machines;
  });
}

Json ClusterToJson(std::span<const MachineSpec> machines) {
  Json arr = Json::array();
  for (const auto& m : machines) {
    arr.push_back(Json{{"id", m.id},
                       {"memory_bytes", m.memory_bytes},
                       {"disk_bytes", m.disk_bytes},
                       {"capacity", m.Capacity()}});
  }
  return Json{{"machines", std::move(arr)}};
}

Json PlanToJson(const QuantPlan& plan, const PrecisionTable& table,
                const std::optional<EntropyStats>& stats) {
  Json assignments = Json::array();
  for (const auto& a : plan.assignments) {
    assignments.push_back(Json{{"exec_index", a.exec_index},
                               {"precision", PrecisionName(a.precision)},
                               {"size_bytes", a.size_bytes}});
  }
  Json placements = Json::array();
  for (const auto& p : plan.placements) {
    placements.push_back(Json{{"exec_index", p.exec_index}, {"machine", p.machine_id}});
  }
  Json bits = Json::object();
  for (Precision p : kAllPrecisions) bits[std::string(PrecisionName(p))] = table.Bits(p);
  Json doc{{"assignments", std::move(assignments)},
           {"total_bytes", plan.total_bytes},
           {"fits", plan.fits},
           {"placements", std::move(placements)},
           {"unquantized_bytes", plan.unquantized_bytes},
           {"capacity_bytes", plan.capacity_bytes},
           {"bits", std::move(bits)}};
  if (stats) {
    doc["stats"] = Json{{"mean", stats->mean},
                        {"std", stats->std},
                        {"threshold", stats->threshold},
                        {"x", stats->aggressiveness}};
  }
  return doc;
}

QuantPlan PlanFromJson(const Json& doc) {
  return Guard("plan", [&] {
    QuantPlan plan;
    for (const auto& ja : doc.at("assignments")) {
      plan.assignments.push_back({ja.at("exec_index").get<std::uint32_t>(),
                                  ParsePrecision(ja.at("precision").get<std::string>()),
                                  ja.value("size_bytes", std::uint64_t{0})});
    }
    plan.total_bytes = doc.at("total_bytes").get<std::uint64_t>();
    plan.fits = doc.at("fits").get<bool>();
    for (const auto& jp : doc.value("placements", Json::array())) {
      plan.placements.push_back(
          {jp.at("exec_index").get<std::uint32_t>(), jp.at("machine").get<std::string>()});
    }
    plan.unquantized_bytes = doc.value("unquantized_bytes", std::uint64_t{0});
    plan.capacity_bytes = doc.value("capacity_bytes", std::uint64_t{0});
    return plan;
  });
}

Json ForestToJson(const fastewq::ForestModel& model) {
  using fastewq::StdConvention;
  Json trees = Json::array();
  for (const auto& tree : model.trees) {
    Json nodes = Json::array();
    for (const auto& n : tree.nodes()) {
      Json jn = Json::object();
      if (!n.IsLeaf()) {
        jn["feature"] = n.feature;
        jn["threshold"] = n.threshold;
        jn["left"] = n.left;
        jn["right"] = n.right;
      }
      jn["counts"] = n.counts;
      nodes.push_back(std::move(jn));
    }
    trees.push_back(Json{{"nodes", std::move(nodes)}});
  }
  Json names = Json::array();
  for (auto name : fastewq::kFeatureNames) names.push_back(name);
  const auto& p = model.params;
  return Json{{"format", "ewq-forest-v1"},
              {"seed", p.seed},
              {"n_trees", p.n_trees},
              {"max_depth", p.max_depth ? Json(*p.max_depth) : Json(nullptr)},
              {"min_samples_split", p.min_samples_split},
              {"bootstrap", p.bootstrap},
              {"std_convention",
               p.std_convention == StdConvention::kSample ? "sample" : "population"},
              {"feature_names", std::move(names)},
              {"scaler", {{"means", model.scaler.means}, {"stds", model.scaler.stds}}},
              {"trees", std::move(trees)}};
}

fastewq::ForestModel ForestFromJson(const Json& doc) {
  using fastewq::StdConvention;
  return Guard("forest model", [&] {
    fastewq::ForestModel model;
    auto& p = model.params;
    p.seed = doc.at("seed").get<std::uint64_t>();
    p.n_trees = doc.at("n_trees").get<std::uint32_t>();
    if (doc.contains("max_depth") && !doc.at("max_depth").is_null()) {
      p.max_depth = doc.at("max_depth").get<std::uint32_t>();
    }
    p.min_samples_split = doc.value("min_samples_split", 2u);
    p.bootstrap = doc.value("bootstrap", true);
    const std::string conv = doc.value("std_convention", std::string("sample"));
    if (conv != "sample" && conv != "population") {
      throw Error(ErrorCode::kParse, "unknown std_convention '" + conv + "'");
    }
    p.std_convention = conv == "sample" ? StdConvention::kSample : StdConvention::kPopulation;
    if (doc.contains("feature_names")) {
      const auto names = doc.at("feature_names").get<std::vector<std::string>>();
      if (names.size() != 3 || names[0] != fastewq::kFeatureNames[0] ||
          names[1] != fastewq::kFeatureNames[1] || names[2] != fastewq::kFeatureNames[2]) {
        throw Error(ErrorCode::kParse, "unexpected feature_names");
      }
    }
    model.scaler.means = doc.at("scaler").at("means").get<fastewq::Features>();
    model.scaler.stds = doc.at("scaler").at("stds").get<fastewq::Features>();
    model.scaler.convention = p.std_convention;
    for (const auto& jt : doc.at("trees")) {
      std::vector<fastewq::TreeNode> nodes;
      for (const auto& jn : jt.at("nodes")) {
        fastewq::TreeNode n;
        n.counts = jn.at("counts").get<std::array<std::uint32_t, 2>>();
        if (jn.contains("feature")) {
          n.feature = jn.at("feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<std::int32_t>();
          n.right = jn.at("right").get<std::int32_t>();
          if (n.feature < 0) throw Error(ErrorCode::kParse, "negative feature index");
        }
        nodes.push_back(n);
      }
      model.trees.push_back(fastewq::DecisionTree::FromNodes(std::move(nodes)));
    }
    if (model.trees.size() != p.n_trees) {
      throw Error(ErrorCode::kParse, "n_trees does not match the stored trees");
    }
    return model;
  });
}

Json ClassificationReportToJson(const fastewq::ClassificationReport& r) {
  Json roc = Json::array();
  for (const auto& pt : r.roc) {
    roc.push_back(Json{{"fpr", pt.fpr}, {"tpr", pt.tpr}, {"threshold", Number(pt.threshold)}});
  }
  return Json{{"confusion",
               {{"tp", r.confusion.tp},
                {"tn", r.confusion.tn},
                {"fp", r.confusion.fp},
                {"fn", r.confusion.fn}}},
              {"classes",
               {{"0", MetricsToJson(r.per_class[0])}, {"1", MetricsToJson(r.per_class[1])}}},
              {"accuracy", Number(r.accuracy)},
              {"macro_avg", MetricsToJson(r.macro)},
              {"weighted_avg", MetricsToJson(r.weighted)},
              {"roc_auc", Number(r.roc_auc)},
              {"roc", std::move(roc)}};
}

Json PredictionsToJson(const std::string& model_name,
                       std::span<const fastewq::BlockPrediction> predictions) {
  Json blocks = Json::array();
  for (const auto& p : predictions) {
    blocks.push_back(Json{{"exec_index", p.exec_index},
                          {"quantize", p.prediction.label},
                          {"score", p.prediction.score}});
  }
  return Json{{"model_name", model_name}, {"blocks", std::move(blocks)}};
}

EvalRecord EvalRecordFromJson(const Json& doc) {
  return Guard("evaluation record", [&] {
    EvalRecord r;
    r.id = doc.at("id").is_string() ? doc.at("id").get<std::string>() : doc.at("id").dump();
    r.subject = doc.at("subject").get<std::string>();
    r.correct = doc.at("correct").get<int>();
    r.predicted = doc.at("predicted").get<int>();
    const Json& lps = doc.at("logprobs");
    if (!lps.is_array() || lps.size() != 4) {
      throw Error(ErrorCode::kParse, "record '" + r.id + "' needs exactly 4 logprobs");
    }
    for (std::size_t i = 0; i < 4; ++i) {
      if (!lps[i].is_null()) r.logprobs[i] = lps[i].get<double>();
    }
    return r;
  });
}

Json EvalRecordToJson(const EvalRecord& r) {
  Json lps = Json::array();
  for (const auto& lp : r.logprobs) lps.push_back(lp ? Json(*lp) : Json(nullptr));
  return Json{{"id", r.id},
              {"subject", r.subject},
              {"correct", r.correct},
              {"logprobs", std::move(lps)},
              {"predicted", r.predicted}};
}

std::vector<EvalRecord> ReadEvalRecords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::vector<EvalRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(EvalRecordFromJson(ParseJson(line)));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

Json EvalSummaryToJson(const EvalSummary& s) {
  Json subjects = Json::object();
  for (const auto& [name, sub] : s.subjects) {
    subjects[name] = Json{{"questions", sub.questions},
                          {"accuracy", sub.accuracy},
                          {"perplexity", sub.perplexity}};
  }
  return Json{{"questions", s.questions},
              {"accuracy", s.accuracy},
              {"perplexity", s.perplexity},
              {"subjects", std::move(subjects)},
              {"question_perplexities", s.question_perplexities}};
}

VariantResults VariantResultsFromJson(const Json& doc) {
  return Guard("variant results", [&] {
    VariantResults v;
    v.name = doc.value("name", std::string());
    for (const auto& jr : doc.at("results")) {
      v.results.push_back({jr.at("accuracy").get<double>(), jr.at("perplexity").get<double>()});
    }
    return v;
  });
}

Json ComparisonToJson(const ComparisonReport& r, double w1, double w2) {
  Json doc{{"a", {{"name", r.name_a}, {"composite", r.composite_a}, {"mean", r.mean_a}}},
           {"b", {{"name", r.name_b}, {"composite", r.composite_b}, {"mean", r.mean_b}}},
           {"weights", {{"w1", w1}, {"w2", w2}}},
           {"abs_diff", r.abs_diff}};
  if (r.t_test) {
    doc["t"] = Number(r.t_test->t);
    doc["df"] = r.t_test->df;
    doc["p"] = Number(r.t_test->p);
    doc["verdict"] = SignificanceName(r.t_test->verdict);
  } else {
    doc["t"] = nullptr;
    doc["df"] = nullptr;
    doc["p"] = nullptr;
    doc["verdict"] = "identical samples";
  }
  doc["cohens_d"] = r.cohens_d.d;
  doc["effect"] = EffectSizeName(r.cohens_d.effect);
  return doc;
}

}  // namespace ewq
