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

#include "ewq/evalstats.h"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "ewq/error.h"

namespace ewq {
namespace {

double Mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample variance (n - 1 denominator).
double SampleVariance(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

void CheckRecord(const EvalRecord& r) {
  if (r.correct < 0 || r.correct > 3 || r.predicted < 0 || r.predicted > 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "record '" + r.id + "': choice indices must be in 0..3");
  }
}

}  // namespace

double QuestionPerplexity(const EvalRecord& record, const PerplexityOptions& options) {
  CheckRecord(record);
  const bool all_missing =
      std::none_of(record.logprobs.begin(), record.logprobs.end(),
                   [](const std::optional<double>& lp) { return lp.has_value(); });
  std::array<double, 4> lp{};
  if (all_missing) {
    if (options.fallback_bypasses_softmax) {
      return -std::log(options.all_missing_probability);
    }
    lp.fill(std::log(options.all_missing_probability));
  } else {
    for (std::size_t i = 0; i < 4; ++i) {
      lp[i] = record.logprobs[i].value_or(options.missing_logprob);
      if (!std::isfinite(lp[i])) {
        throw Error(ErrorCode::kNonFinite,
                    "record '" + record.id + "': log-probability is not finite");
      }
    }
  }
  // -ln softmax(lp)[c] = ln(sum_j exp(lp_j - m)) - (lp_c - m)
  const double m = *std::max_element(lp.begin(), lp.end());
  double z = 0.0;
  for (double v : lp) z += std::exp(v - m);
  return std::log(z) - (lp[static_cast<std::size_t>(record.correct)] - m);
}

EvalSummary Summarize(std::span<const EvalRecord> records, const PerplexityOptions& options) {
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, "no evaluation records");
  struct Acc {
    std::size_t n = 0;
    std::size_t correct = 0;
    double ppl = 0.0;
  };
  std::map<std::string, Acc> by_subject;
  Acc total;
  EvalSummary summary;
  summary.question_perplexities.reserve(records.size());
  for (const auto& r : records) {
    const double q = QuestionPerplexity(r, options);
    summary.question_perplexities.push_back(q);
    const bool hit = r.predicted == r.correct;
    for (Acc* acc : {&by_subject[r.subject], &total}) {
      ++acc->n;
      acc->correct += hit ? 1 : 0;
      acc->ppl += q;
    }
  }
  for (const auto& [subject, acc] : by_subject) {
    const double n = static_cast<double>(acc.n);
    summary.subjects[subject] = {acc.n, static_cast<double>(acc.correct) / n, acc.ppl / n};
  }
  const double n = static_cast<double>(total.n);
  summary.questions = total.n;
  summary.accuracy = static_cast<double>(total.correct) / n;
  summary.perplexity = std::exp(total.ppl / n);
  return summary;
}

double CompositeScore(double accuracy, double perplexity, double w1, double w2) {
  if (!(perplexity > 0.0)) {
    throw Error(ErrorCode::kNonPositive, "perplexity must be positive");
  }
  return w1 * std::log(perplexity) - w2 * accuracy;
}

std::string_view SignificanceName(Significance s) {
  switch (s) {
    case Significance::kSignificant: return "significant";
    case Significance::kMarginal: return "marginally significant";
    case Significance::kNotSignificant: return "not significant";
  }
  return "?";
}

Significance ClassifyPValue(double p) {
  if (p < 0.05) return Significance::kSignificant;
  if (p < 0.10) return Significance::kMarginal;
  return Significance::kNotSignificant;
}

double StudentTTwoSidedP(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::kInvalidArgument, "df must be positive");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return boost::math::ibeta(df / 2.0, 0.5, x);
}

TTestResult PairedTTest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "paired samples differ in length");
  }
  if (a.size() < 2) {
    throw Error(ErrorCode::kTooFewRecords, "paired t-test needs at least 2 pairs");
  }
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double mean = Mean(d);
  const double sd = std::sqrt(SampleVariance(d, mean));
  if (!(sd > 0.0)) {
    throw Error(ErrorCode::kZeroVariance, "paired differences have zero variance");
  }
  TTestResult r;
  const double n = static_cast<double>(d.size());
  r.mean_diff = mean;
  r.df = n - 1.0;
  r.t = mean / (sd / std::sqrt(n));
  r.p = StudentTTwoSidedP(r.t, r.df);
  r.verdict = ClassifyPValue(r.p);
  return r;
}

std::string_view EffectSizeName(EffectSize e) {
  switch (e) {
    case EffectSize::kNegligible: return "negligible";
    case EffectSize::kSmall: return "small";
    case EffectSize::kMedium: return "medium";
    case EffectSize::kLarge: return "large";
  }
  return "?";
}

EffectSize ClassifyEffect(double d) {
  const double m = std::fabs(d);
  if (m < 0.2) return EffectSize::kNegligible;
  if (m < 0.5) return EffectSize::kSmall;
  if (m <= 0.8) return EffectSize::kMedium;
  return EffectSize::kLarge;
}

CohensDResult CohensD(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::kTooFewRecords, "Cohen's d needs at least 2 values per group");
  }
  if (std::equal(a.begin(), a.end(), b.begin(), b.end())) return {};
  const double ma = Mean(a);
  const double mb = Mean(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double pooled =
      ((na - 1.0) * SampleVariance(a, ma) + (nb - 1.0) * SampleVariance(b, mb)) /
      (na + nb - 2.0);
  if (!(pooled > 0.0)) {
    throw Error(ErrorCode::kZeroVariance, "pooled variance is zero");
  }
  CohensDResult r;
  r.d = (ma - mb) / std::sqrt(pooled);
  r.effect = ClassifyEffect(r.d);
  return r;
}

ComparisonReport Compare(const CompareInput& input) {
  if (input.a.size() != input.b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "variants have different result counts");
  }
  if (input.a.size() < 2) {
    throw Error(ErrorCode::kTooFewRecords, "comparison needs at least 2 paired results");
  }
  ComparisonReport report;
  report.name_a = input.name_a;
  report.name_b = input.name_b;
  for (std::size_t i = 0; i < input.a.size(); ++i) {
    report.composite_a.push_back(
        CompositeScore(input.a[i].accuracy, input.a[i].perplexity, input.w1, input.w2));
    report.composite_b.push_back(
        CompositeScore(input.b[i].accuracy, input.b[i].perplexity, input.w1, input.w2));
  }
  report.mean_a = Mean(report.composite_a);
  report.mean_b = Mean(report.composite_b);
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < report.composite_a.size(); ++i) {
    abs_sum += std::fabs(report.composite_a[i] - report.composite_b[i]);
  }
  report.abs_diff = abs_sum / static_cast<double>(report.composite_a.size());
  report.identical = report.composite_a == report.composite_b;
  if (!report.identical) report.t_test = PairedTTest(report.composite_a, report.composite_b);
  report.cohens_d = CohensD(report.composite_a, report.composite_b);
  return report;
}

}  // namespace ewq
