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

#ifndef EWQ_TESTS_SUPPORT_ORACLES_H_
#define EWQ_TESTS_SUPPORT_ORACLES_H_

// Reference implementations used only to check the library. They favour
// brute force and extended precision over speed, and share no code with the
// routines under test.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ewq/entropy.h"
#include "ewq/fastewq/metrics.h"
#include "ewq/planner.h"

namespace ewq::oracle {

// Direct softmax entropy evaluated in long double.
long double Entropy(std::span<const double> values, long double epsilon = 0.01L);

// Plain weighted average in long double.
long double WeightedMean(std::span<const double> values, std::span<const double> weights);

// Per-block precisions (index-aligned with `reports`) chosen by exhaustive
// search:
//  - if the entropy decisions fit, every block may only move up from its
//    decision and the plan is the lexicographic best by descending entropy;
//  - otherwise each block is either its decision or q1_58, again picking the
//    lexicographic best feasible plan;
//  - nullopt when nothing fits.
std::optional<std::vector<Precision>> LexicographicPlan(
    std::span<const BlockEntropyReport> reports, std::span<const BlockDecision> decisions,
    std::uint64_t capacity, const PrecisionTable& table);

// Two-sided Student-t tail probability from Simpson quadrature of the density.
double StudentTwoSidedP(double t, double df);

// -ln(p_correct) with missing choices at `missing` and no fallback.
double QuestionPerplexity(const std::array<std::optional<double>, 4>& logprobs, int correct,
                          double missing = -100.0);

// Confusion counts tallied one row at a time.
fastewq::Confusion Tally(std::span<const int> labels, std::span<const int> predicted);

// AUC as the Mann-Whitney statistic: P(score_pos > score_neg) + P(tie) / 2.
double MannWhitneyAuc(std::span<const double> scores, std::span<const int> labels);

}  // namespace ewq::oracle

#endif  // EWQ_TESTS_SUPPORT_ORACLES_H_
