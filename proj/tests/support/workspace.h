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

#ifndef EWQ_TESTS_SUPPORT_WORKSPACE_H_
#define EWQ_TESTS_SUPPORT_WORKSPACE_H_

#include <filesystem>
#include <string>
#include <vector>

#include "support/fixtures.h"

namespace ewq::fixtures {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult RunCli(const std::vector<std::string>& args);

// A directory holding one input file for every CLI command.
class Workspace {
 public:
  Workspace();

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  // toy.safetensors: 2 transformer layers.
  // report.json: blocks of entropy 1, 2, 3 and 2 GiB parameters each.
  // cluster9.json, cluster_huge.json, cluster_tiny.json, cluster_empty.json.
  // blocks.csv: the separable dataset.
  // records.jsonl: four questions over two subjects.
  // a.json, b.json: two variants with four paired results.
  // one.json: a single result.

 private:
  TempDir dir_;
};

}  // namespace ewq::fixtures

#endif  // EWQ_TESTS_SUPPORT_WORKSPACE_H_
