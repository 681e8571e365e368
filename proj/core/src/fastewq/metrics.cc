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

#include "ewq/fastewq/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ewq/error.h"

namespace ewq::fastewq {
namespace {

double Ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

ClassMetrics Metrics(double tp, double fp, double fn, std::uint64_t support) {
  ClassMetrics m;
  m.precision = Ratio(tp, tp + fp);
  m.recall = Ratio(tp, tp + fn);
  m.f1 = Ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  m.support = support;
  return m;
}

}  // namespace

ClassificationReport ReportFromConfusion(const Confusion& c) {
  ClassificationReport r;
  r.confusion = c;
  const auto tp = static_cast<double>(c.tp);
  const auto tn = static_cast<double>(c.tn);
  const auto fp = static_cast<double>(c.fp);
  const auto fn = static_cast<double>(c.fn);
  // Class 0 treats "negative" as its positive.
  r.per_class[0] = Metrics(tn, fn, fp, c.tn + c.fp);
  r.per_class[1] = Metrics(tp, fp, fn, c.tp + c.fn);
  r.accuracy = Ratio(tp + tn, static_cast<double>(c.total()));

  const double total_support = static_cast<double>(r.per_class[0].support + r.per_class[1].support);
  for (const auto& m : r.per_class) {
    r.macro.precision += m.precision / 2.0;
    r.macro.recall += m.recall / 2.0;
    r.macro.f1 += m.f1 / 2.0;
    const double w = Ratio(static_cast<double>(m.support), total_support);
    r.weighted.precision += w * m.precision;
    r.weighted.recall += w * m.recall;
    r.weighted.f1 += w * m.f1;
  }
  r.macro.support = r.weighted.support = c.total();
  r.roc_auc = std::numeric_limits<double>::quiet_NaN();
  return r;
}

double RocAuc(std::span<const double> scores, std::span<const int> labels,
              std::vector<RocPoint>* curve) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "scores and labels differ in length");
  }
  const auto positives = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double negatives = static_cast<double>(labels.size()) - positives;
  if (curve) curve->clear();
  if (positives == 0.0 || negatives == 0.0) return std::numeric_limits<double>::quiet_NaN();

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> points = {{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp) += 1.0;
      ++i;
    }
    points.push_back({fp / negatives, tp / positives, s});
  }
  double auc = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    auc += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  if (curve) *curve = std::move(points);
  return auc;
}

ClassificationReport EvaluatePredictions(std::span<const int> labels,
                                         std::span<const int> predicted,
                                         std::span<const double> scores) {
  if (labels.size() != predicted.size() || labels.size() != scores.size()) {
    throw Error(ErrorCode::kLengthMismatch, "labels, predictions and scores differ in length");
  }
  if (labels.empty()) throw Error(ErrorCode::kEmptyInput, "no rows to evaluate");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      (predicted[i] == 1 ? c.tp : c.fn) += 1;
    } else {
      (predicted[i] == 1 ? c.fp : c.tn) += 1;
    }
  }
  ClassificationReport r = ReportFromConfusion(c);
  r.roc_auc = RocAuc(scores, labels, &r.roc);
  return r;
}

ClassificationReport Evaluate(const ForestModel& model, std::span<const BlockRecord> rows) {
  std::vector<int> labels;
  std::vector<int> predicted;
  std::vector<double> scores;
  for (const auto& row : rows) {
    const Prediction p = Predict(model, row.features());
    labels.push_back(row.quantized);
    predicted.push_back(p.label);
    scores.push_back(p.score);
  }
  return EvaluatePredictions(labels, predicted, scores);
}

}  // namespace ewq::fastewq
