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

#ifndef EWQ_FASTEWQ_METRICS_H_
#define EWQ_FASTEWQ_METRICS_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ewq/fastewq/dataset.h"
#include "ewq/fastewq/forest.h"

namespace ewq::fastewq {

// Class 1 (quantized) is the positive class.
struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  bool operator==(const Confusion&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct ClassificationReport {
  Confusion confusion;
  std::array<ClassMetrics, 2> per_class;  // index = class label
  double accuracy = 0.0;
  ClassMetrics macro;
  ClassMetrics weighted;
  double roc_auc = 0.0;  // NaN when only one class is present
  std::vector<RocPoint> roc;
};

// Precision/recall/F1 with 0 in place of 0/0.
ClassificationReport ReportFromConfusion(const Confusion& c);

// ROC by sweeping every distinct score as a threshold (score >= t predicts 1),
// area by the trapezoidal rule.
double RocAuc(std::span<const double> scores, std::span<const int> labels,
              std::vector<RocPoint>* curve = nullptr);

ClassificationReport EvaluatePredictions(std::span<const int> labels,
                                         std::span<const int> predicted,
                                         std::span<const double> scores);

ClassificationReport Evaluate(const ForestModel& model, std::span<const BlockRecord> rows);

}  // namespace ewq::fastewq

#endif  // EWQ_FASTEWQ_METRICS_H_
