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

#include "support/oracles.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <map>

namespace ewq::oracle {

long double Entropy(std::span<const double> values, long double epsilon) {
  long double max = values[0];
  for (double v : values) max = std::max<long double>(max, v);
  std::vector<long double> e(values.size());
  long double z = 0.0L;
  for (std::size_t i = 0; i < values.size(); ++i) {
    e[i] = std::exp(static_cast<long double>(values[i]) - max);
    z += e[i];
  }
  long double h = 0.0L;
  for (long double x : e) {
    const long double p = x / z;
    h -= p * std::log(p + epsilon);
  }
  return h;
}

long double WeightedMean(std::span<const double> values, std::span<const double> weights) {
  long double num = 0.0L, den = 0.0L;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += static_cast<long double>(values[i]) * weights[i];
    den += weights[i];
  }
  return num / den;
}

std::optional<std::vector<Precision>> LexicographicPlan(
    std::span<const BlockEntropyReport> reports, std::span<const BlockDecision> decisions,
    std::uint64_t capacity, const PrecisionTable& table) {
  const std::size_t n = reports.size();
  std::map<std::uint32_t, Precision> decided;
  for (const auto& d : decisions) decided[d.exec_index] = d.precision;

  // Priority: highest entropy first, ties by higher exec_index first.
  std::vector<std::size_t> priority(n);
  for (std::size_t i = 0; i < n; ++i) priority[i] = i;
  std::sort(priority.begin(), priority.end(), [&](std::size_t a, std::size_t b) {
    if (reports[a].block_entropy != reports[b].block_entropy) {
      return reports[a].block_entropy > reports[b].block_entropy;
    }
    return reports[a].exec_index > reports[b].exec_index;
  });

  auto bytes = [&](std::size_t i, Precision p) {
    const long double bits = static_cast<long double>(reports[i].num_parameters) * table.Bits(p);
    return static_cast<std::uint64_t>(std::ceil(bits / 8.0L));
  };

  std::uint64_t decided_total = 0;
  for (std::size_t i = 0; i < n; ++i) decided_total += bytes(i, decided[reports[i].exec_index]);
  const bool relax = decided_total <= capacity;

  std::vector<std::vector<Precision>> domain(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Precision d = decided[reports[i].exec_index];
    if (relax) {
      for (Precision p : kAllPrecisions) {
        if (static_cast<int>(p) <= static_cast<int>(d)) domain[i].push_back(p);
      }
    } else {
      domain[i] = {d, Precision::kQ1_58};
    }
  }

  std::optional<std::vector<Precision>> best;
  std::vector<std::size_t> pick(n, 0);
  while (true) {
    std::vector<Precision> cand(n);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      cand[i] = domain[i][pick[i]];
      total += bytes(i, cand[i]);
    }
    if (total <= capacity) {
      bool better = !best.has_value();
      if (!better) {
        for (std::size_t i : priority) {
          if (cand[i] != (*best)[i]) {
            better = static_cast<int>(cand[i]) < static_cast<int>((*best)[i]);
            break;
          }
        }
      }
      if (better) best = cand;
    }
    std::size_t k = 0;
    while (k < n && ++pick[k] == domain[k].size()) pick[k++] = 0;
    if (k == n) break;
  }
  return best;
}

namespace {

double TDensity(double x, double df) {
  const double log_c = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                       0.5 * std::log(df * M_PI);
  return std::exp(log_c - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

}  // namespace

double StudentTwoSidedP(double t, double df) {
  // Tail integral over [|t|, inf) mapped onto [0, 1) with x = |t| + u / (1 - u).
  const double a = std::fabs(t);
  const int n = 200000;
  const double h = 1.0 / n;
  auto g = [&](double u) {
    // The transformed integrand tends to 1/pi for df = 1 and to 0 beyond.
    if (u >= 1.0) return df == 1.0 ? 1.0 / std::numbers::pi : 0.0;
    const double one_minus = 1.0 - u;
    return TDensity(a + u / one_minus, df) / (one_minus * one_minus);
  };
  double sum = g(0.0) + g(1.0);
  for (int i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * g(i * h);
  return 2.0 * sum * h / 3.0;
}

double QuestionPerplexity(const std::array<std::optional<double>, 4>& logprobs, int correct,
                          double missing) {
  long double z = 0.0L;
  for (const auto& lp : logprobs) z += std::exp(static_cast<long double>(lp.value_or(missing)));
  const long double p = std::exp(static_cast<long double>(logprobs[correct].value_or(missing))) / z;
  return static_cast<double>(-std::log(p));
}

fastewq::Confusion Tally(std::span<const int> labels, std::span<const int> predicted) {
  fastewq::Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1 && predicted[i] == 1) ++c.tp;
    if (labels[i] == 0 && predicted[i] == 0) ++c.tn;
    if (labels[i] == 0 && predicted[i] == 1) ++c.fp;
    if (labels[i] == 1 && predicted[i] == 0) ++c.fn;
  }
  return c;
}

double MannWhitneyAuc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

}  // namespace ewq::oracle
