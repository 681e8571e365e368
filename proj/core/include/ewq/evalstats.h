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

#ifndef EWQ_EVALSTATS_H_
#define EWQ_EVALSTATS_H_

// Multiple-choice benchmark statistics computed from recorded answer
// log-probabilities, plus the composite-score comparison between variants.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ewq {

struct EvalRecord {
  std::string id;
  std::string subject;
  int correct = 0;    // 0..3
  int predicted = 0;  // 0..3
  // Absent when the choice was not among the top candidate tokens.
  std::array<std::optional<double>, 4> logprobs;
};

struct PerplexityOptions {
  double missing_logprob = -100.0;
  // Probability assigned to the correct answer when no choice was recorded.
  double all_missing_probability = 1e-6;
  // When false, the fallback probability is fed through the softmax like any
  // other log-probability (which renormalizes it to 1/4).
  bool fallback_bypasses_softmax = true;
};

// -ln(p_correct), p = softmax over the four choice log-probabilities.
double QuestionPerplexity(const EvalRecord& record, const PerplexityOptions& options = {});

struct SubjectSummary {
  std::size_t questions = 0;
  double accuracy = 0.0;
  double perplexity = 0.0;  // mean question perplexity
};

struct EvalSummary {
  std::map<std::string, SubjectSummary> subjects;
  std::size_t questions = 0;
  double accuracy = 0.0;
  double perplexity = 0.0;  // exp(mean question perplexity)
  std::vector<double> question_perplexities;  // input order
};

EvalSummary Summarize(std::span<const EvalRecord> records,
                      const PerplexityOptions& options = {});

// w1 * ln(perplexity) - w2 * accuracy; lower is better.
double CompositeScore(double accuracy, double perplexity, double w1 = 1.0, double w2 = 1.0);

enum class Significance { kSignificant, kMarginal, kNotSignificant };
std::string_view SignificanceName(Significance s);
Significance ClassifyPValue(double p);

// Two-sided tail probability P(|T| >= |t|) for Student's t with `df` degrees
// of freedom.
double StudentTTwoSidedP(double t, double df);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
  double mean_diff = 0.0;
  Significance verdict = Significance::kNotSignificant;
};

// Paired test on d = a - b with the sample standard deviation of d.
// Throws kLengthMismatch, kTooFewRecords (n < 2) and kZeroVariance.
TTestResult PairedTTest(std::span<const double> a, std::span<const double> b);

enum class EffectSize { kNegligible, kSmall, kMedium, kLarge };
std::string_view EffectSizeName(EffectSize e);
// Bands on |d|: < 0.2, < 0.5, <= 0.8, > 0.8.
EffectSize ClassifyEffect(double d);

struct CohensDResult {
  double d = 0.0;
  EffectSize effect = EffectSize::kNegligible;
};

// (mean(a) - mean(b)) / pooled sample standard deviation. Identical samples
// give d = 0; any other zero-variance input throws kZeroVariance.
CohensDResult CohensD(std::span<const double> a, std::span<const double> b);

struct VariantResult {
  double accuracy = 0.0;
  double perplexity = 0.0;
};

struct CompareInput {
  std::string name_a = "a";
  std::string name_b = "b";
  std::vector<VariantResult> a;
  std::vector<VariantResult> b;
  double w1 = 1.0;
  double w2 = 1.0;
};

struct ComparisonReport {
  std::string name_a;
  std::string name_b;
  std::vector<double> composite_a;
  std::vector<double> composite_b;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double abs_diff = 0.0;  // mean |composite_a - composite_b|
  bool identical = false;
  std::optional<TTestResult> t_test;  // absent when identical
  CohensDResult cohens_d;
};

ComparisonReport Compare(const CompareInput& input);

}  // namespace ewq

#endif  // EWQ_EVALSTATS_H_
