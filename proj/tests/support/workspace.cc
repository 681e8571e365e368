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

#include "support/workspace.h"

#include <sstream>

#include "ewq/cli/cli.h"
#include "ewq/fastewq/dataset.h"
#include "ewq/json_io.h"

namespace ewq::fixtures {

CliResult RunCli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::Run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

namespace {

Json ClusterDoc(std::uint64_t bytes) {
  return Json{{"machines",
               Json::array({Json{{"id", "m0"}, {"memory_bytes", bytes}, {"disk_bytes", bytes}}})}};
}

Json VariantDoc(const std::string& name, const std::vector<std::pair<double, double>>& rows) {
  Json results = Json::array();
  for (const auto& [acc, ppl] : rows) {
    results.push_back(Json{{"accuracy", acc}, {"perplexity", ppl}});
  }
  return Json{{"name", name}, {"results", results}};
}

}  // namespace

Workspace::Workspace() {
  WriteToyModel(dir_ / "toy.safetensors", 2, 11);

  const std::vector<BlockEntropyReport> reports = {
      Report(2, 1.0, 2 * kGiB), Report(3, 2.0, 2 * kGiB), Report(4, 3.0, 2 * kGiB)};
  WriteTextFile(dir_ / "report.json",
                DumpJson(EntropyReportToJson(reports, EntropyConfig{}, "three")));
  WriteTextFile(dir_ / "cluster9.json", DumpJson(ClusterDoc(9 * kGiB)));
  WriteTextFile(dir_ / "cluster_huge.json", DumpJson(ClusterDoc(1000 * kGiB)));
  WriteTextFile(dir_ / "cluster_tiny.json", DumpJson(ClusterDoc(1024)));
  WriteTextFile(dir_ / "cluster_empty.json", DumpJson(Json{{"machines", Json::array()}}));

  fastewq::SaveDataset(dir_ / "blocks.csv", SeparableDataset());

  WriteTextFile(dir_ / "records.jsonl",
                R"({"id":"1","subject":"law","correct":0,"predicted":0,"logprobs":[-0.1,-3,-4,-5]})"
                "\n"
                R"({"id":"2","subject":"law","correct":2,"predicted":0,"logprobs":[-0.5,-2,-1.5,null]})"
                "\n"
                R"({"id":"3","subject":"math","correct":1,"predicted":1,"logprobs":[-2,-0.2,-3,-3]})"
                "\n"
                R"({"id":"4","subject":"math","correct":3,"predicted":3,"logprobs":[null,null,null,null]})"
                "\n");

  WriteTextFile(dir_ / "a.json", DumpJson(VariantDoc("full", {{0.6826, 2.2379},
                                                             {0.6894, 3.1906},
                                                             {0.6461, 4.3702},
                                                             {0.6238, 4.104}})));
  WriteTextFile(dir_ / "b.json", DumpJson(VariantDoc("fast", {{0.6822, 2.2379},
                                                             {0.6876, 3.1827},
                                                             {0.647, 4.3397},
                                                             {0.6238, 4.0879}})));
  WriteTextFile(dir_ / "one.json", DumpJson(VariantDoc("one", {{0.5, 2.0}})));
}

}  // namespace ewq::fixtures
