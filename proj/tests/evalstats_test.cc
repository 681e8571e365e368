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

#include <cmath>
#include <functional>
#include <random>

#include "ewq/error.h"
#include "gtest/gtest.h"
#include "support/oracles.h"

namespace ewq {
namespace {

EvalRecord Record(std::string subject, int correct, int predicted,
                  std::array<std::optional<double>, 4> logprobs) {
  EvalRecord r;
  r.id = subject + "-" + std::to_string(correct);
  r.subject = std::move(subject);
  r.correct = correct;
  r.predicted = predicted;
  r.logprobs = logprobs;
  return r;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kInvalidArgument;
}

TEST(PerplexityTest, EqualLogProbs) {
  EXPECT_NEAR(QuestionPerplexity(Record("s", 2, 2, {-1.3, -1.3, -1.3, -1.3})), std::log(4.0),
              1e-15);
}

TEST(PerplexityTest, DescendingLogProbsMatchOracle) {
  const std::array<std::optional<double>, 4> lp = {-1.0, -2.0, -3.0, -4.0};
  const double got = QuestionPerplexity(Record("s", 0, 0, lp));
  EXPECT_NEAR(got, oracle::QuestionPerplexity(lp, 0), 1e-14);
  EXPECT_NEAR(got, 0.44018969856119544, 1e-14);
  EXPECT_NEAR(std::exp(-got), 0.6439142598879722, 1e-14);
}

TEST(PerplexityTest, MissingChoicesAndFallback) {
  const std::array<std::optional<double>, 4> partial = {-0.5, std::nullopt, -2.0, std::nullopt};
  EXPECT_NEAR(QuestionPerplexity(Record("s", 2, 0, partial)),
              oracle::QuestionPerplexity(partial, 2), 1e-12);
  const std::array<std::optional<double>, 4> none = {};
  EXPECT_NEAR(QuestionPerplexity(Record("s", 1, 0, none)), -std::log(1e-6), 1e-12);
  PerplexityOptions through_softmax;
  through_softmax.fallback_bypasses_softmax = false;
  EXPECT_NEAR(QuestionPerplexity(Record("s", 1, 0, none), through_softmax), std::log(4.0),
              1e-12);
}

TEST(PerplexityTest, ShiftInvariant) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> lp(-30.0, 0.0), shift(-20.0, 20.0);
  for (int i = 0; i < 200; ++i) {
    std::array<std::optional<double>, 4> a, b;
    const double c = shift(rng);
    for (int k = 0; k < 4; ++k) {
      a[k] = lp(rng);
      b[k] = *a[k] + c;
    }
    EXPECT_NEAR(QuestionPerplexity(Record("s", i % 4, 0, a)),
                QuestionPerplexity(Record("s", i % 4, 0, b)), 1e-9);
  }
}

TEST(SummaryTest, ExpOfMeanAndSubjects) {
  // Per-question perplexities ln 2 and ln 8 via two-way splits.
  const double ln2 = std::log(2.0);
  const std::vector<EvalRecord> records = {
      Record("a", 0, 0, {0.0, 0.0, std::nullopt, std::nullopt}),
      Record("b", 0, 1, {0.0, std::log(7.0), std::nullopt, std::nullopt})};
  PerplexityOptions opts;
  opts.missing_logprob = -1e9;
  const EvalSummary s = Summarize(records, opts);
  EXPECT_EQ(s.questions, 2u);
  EXPECT_EQ(s.accuracy, 0.5);
  EXPECT_NEAR(s.question_perplexities[0], ln2, 1e-12);
  EXPECT_NEAR(s.question_perplexities[1], 3 * ln2, 1e-12);
  EXPECT_NEAR(s.perplexity, 4.0, 1e-12);
  EXPECT_NEAR(s.subjects.at("a").perplexity, ln2, 1e-12);
  EXPECT_EQ(s.subjects.at("b").accuracy, 0.0);
  double mean = 0.0;
  for (double q : s.question_perplexities) mean += q;
  EXPECT_EQ(s.perplexity, std::exp(mean / 2));
}

TEST(SummaryTest, SingleUniformQuestionAndAllCorrect) {
  const std::vector<EvalRecord> one = {Record("x", 3, 3, {-2.0, -2.0, -2.0, -2.0})};
  const EvalSummary s = Summarize(one);
  EXPECT_NEAR(s.perplexity, 4.0, 1e-12);
  EXPECT_EQ(s.accuracy, 1.0);
  EXPECT_THROW(Summarize(std::vector<EvalRecord>{}), Error);
}

TEST(CompositeTest, Values) {
  EXPECT_NEAR(CompositeScore(0.6826, 2.2379), std::log(2.2379) - 0.6826, 1e-15);
  EXPECT_NEAR(CompositeScore(0.6826, 2.2379), 0.12293792613897192, 1e-12);
  EXPECT_EQ(CompositeScore(0.0, 1.0), 0.0);
  EXPECT_EQ(CompositeScore(0.7, 3.0, 0.0, 1.0), -0.7);
  EXPECT_EQ(CodeOf([] { CompositeScore(0.5, 0.0); }), ErrorCode::kNonPositive);
  EXPECT_LT(CompositeScore(0.5, 2.0), CompositeScore(0.5, 2.1));
  EXPECT_GT(CompositeScore(0.5, 2.0), CompositeScore(0.6, 2.0));
}

TEST(TTestTest, DifferencesOneTwoThree) {
  const std::vector<double> a = {1.0, 2.0, 3.0}, b = {0.0, 0.0, 0.0};
  const TTestResult r = PairedTTest(a, b);
  EXPECT_NEAR(r.t, 2.0 * std::sqrt(3.0), 1e-12);
  EXPECT_EQ(r.df, 2.0);
  EXPECT_NEAR(r.p, oracle::StudentTwoSidedP(r.t, 2.0), 1e-8);
  // df = 2 has a closed form: p = 1 - |t| / sqrt(t^2 + 2).
  EXPECT_NEAR(r.p, 1.0 - r.t / std::sqrt(r.t * r.t + 2.0), 1e-12);
  EXPECT_EQ(r.verdict, Significance::kMarginal);
  EXPECT_EQ(SignificanceName(r.verdict), "marginally significant");
}

TEST(TTestTest, TwoPairs) {
  const std::vector<double> a = {1.0, 3.0}, b = {0.0, 0.0};
  const TTestResult r = PairedTTest(a, b);
  EXPECT_NEAR(r.t, 2.0, 1e-12);
  EXPECT_EQ(r.df, 1.0);
  // df = 1 is Cauchy: p = 1 - 2 atan(|t|) / pi.
  EXPECT_NEAR(r.p, 1.0 - 2.0 * std::atan(2.0) / M_PI, 1e-12);
}

TEST(TTestTest, MatchesQuadratureOracle) {
  for (double df : {1.0, 2.0, 3.0, 5.0, 10.0, 30.0}) {
    for (double t : {0.0, 0.2551, 0.8, 1.6215, 2.5, 4.0, 9.0}) {
      EXPECT_NEAR(StudentTTwoSidedP(t, df), oracle::StudentTwoSidedP(t, df), 1e-8)
          << t << " " << df;
      EXPECT_EQ(StudentTTwoSidedP(-t, df), StudentTTwoSidedP(t, df));
    }
  }
}

TEST(TTestTest, AntisymmetricAndErrors) {
  const std::vector<double> a = {0.3, 0.9, 0.4, 1.2}, b = {0.1, 0.5, 0.6, 0.2};
  const auto ab = PairedTTest(a, b), ba = PairedTTest(b, a);
  EXPECT_EQ(ab.t, -ba.t);
  EXPECT_EQ(ab.p, ba.p);
  EXPECT_EQ(CodeOf([&] { PairedTTest(a, a); }), ErrorCode::kZeroVariance);
  EXPECT_EQ(CodeOf([&] { PairedTTest(a, std::vector<double>{1.0}); }),
            ErrorCode::kLengthMismatch);
  EXPECT_EQ(CodeOf([] { PairedTTest(std::vector<double>{1.0}, std::vector<double>{2.0}); }),
            ErrorCode::kTooFewRecords);
}

TEST(TTestTest, SignificanceBands) {
  EXPECT_EQ(ClassifyPValue(0.049), Significance::kSignificant);
  EXPECT_EQ(ClassifyPValue(0.05), Significance::kMarginal);
  EXPECT_EQ(ClassifyPValue(0.0999), Significance::kMarginal);
  EXPECT_EQ(ClassifyPValue(0.10), Significance::kNotSignificant);
}

TEST(CohensDTest, Examples) {
  const auto medium = CohensD(std::vector<double>{2.0, 4.0}, std::vector<double>{1.0, 3.0});
  EXPECT_NEAR(medium.d, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(medium.effect, EffectSize::kMedium);
  const std::vector<double> same = {1.0, 2.0, 5.0};
  const auto none = CohensD(same, same);
  EXPECT_EQ(none.d, 0.0);
  EXPECT_EQ(none.effect, EffectSize::kNegligible);
  const auto large = CohensD(std::vector<double>{10.0, 10.1}, std::vector<double>{0.0, 0.1});
  EXPECT_NEAR(large.d, 10.0 / std::sqrt(0.005), 1e-9);
  EXPECT_EQ(large.effect, EffectSize::kLarge);
  const auto flipped = CohensD(std::vector<double>{1.0, 3.0}, std::vector<double>{2.0, 4.0});
  EXPECT_EQ(flipped.d, -medium.d);
  EXPECT_EQ(CodeOf([] { CohensD(std::vector<double>{1.0, 1.0}, std::vector<double>{2.0, 2.0}); }),
            ErrorCode::kZeroVariance);
}

TEST(CohensDTest, Bands) {
  EXPECT_EQ(ClassifyEffect(0.19), EffectSize::kNegligible);
  EXPECT_EQ(ClassifyEffect(0.2), EffectSize::kSmall);
  EXPECT_EQ(ClassifyEffect(-0.49), EffectSize::kSmall);
  EXPECT_EQ(ClassifyEffect(0.5), EffectSize::kMedium);
  EXPECT_EQ(ClassifyEffect(0.8), EffectSize::kMedium);
  EXPECT_EQ(ClassifyEffect(0.81), EffectSize::kLarge);
}

TEST(CompareTest, EightBitVariantRows) {
  // Accuracy and perplexity of the metadata-only 8-bit variant (a) and its
  // full-data counterpart (b) across four models.
  CompareInput in;
  in.a = {{0.6826, 2.2379}, {0.6894, 3.1906}, {0.6461, 4.3702}, {0.6238, 4.104}};
  in.b = {{0.6822, 2.2379}, {0.6876, 3.1827}, {0.647, 4.3397}, {0.6238, 4.0879}};
  const auto r = Compare(in);
  ASSERT_EQ(r.composite_a.size(), 4u);
  double diff = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(r.composite_a[i], std::log(in.a[i].perplexity) - in.a[i].accuracy, 1e-15);
    diff += std::fabs(r.composite_a[i] - r.composite_b[i]);
  }
  EXPECT_NEAR(r.abs_diff, diff / 4, 1e-15);
  EXPECT_NEAR(r.abs_diff, 0.0032, 5e-5);
  ASSERT_TRUE(r.t_test.has_value());
  EXPECT_NEAR(r.t_test->t, 1.6215, 5e-5);
  EXPECT_NEAR(r.t_test->p, 0.2034, 5e-5);
  EXPECT_EQ(r.t_test->verdict, Significance::kNotSignificant);
  EXPECT_EQ(r.cohens_d.effect, EffectSize::kNegligible);
  EXPECT_FALSE(r.identical);
}

TEST(CompareTest, IdenticalAndTooShort) {
  CompareInput in;
  in.a = {{0.5, 2.0}, {0.6, 3.0}};
  in.b = in.a;
  const auto r = Compare(in);
  EXPECT_TRUE(r.identical);
  EXPECT_FALSE(r.t_test.has_value());
  EXPECT_EQ(r.abs_diff, 0.0);
  EXPECT_EQ(r.cohens_d.d, 0.0);
  in.a.resize(1);
  in.b.resize(1);
  EXPECT_EQ(CodeOf([&] { Compare(in); }), ErrorCode::kTooFewRecords);
}

}  // namespace
}  // namespace ewq
