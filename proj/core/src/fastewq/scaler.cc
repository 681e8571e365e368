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

#include "ewq/fastewq/scaler.h"

#include <cmath>
#include <string>
#include <vector>

#include "ewq/error.h"

namespace ewq::fastewq {

Features ScalerParams::Transform(const Features& x) const {
  Features z{};
  for (std::size_t f = 0; f < z.size(); ++f) z[f] = (x[f] - means[f]) / stds[f];
  return z;
}

ScalerParams FitScaler(std::span<const Features> rows, StdConvention convention) {
  if (rows.size() < 2) {
    throw Error(ErrorCode::kTooFewRecords, "scaler needs at least 2 rows");
  }
  ScalerParams params;
  params.convention = convention;
  const double n = static_cast<double>(rows.size());
  const double denom = convention == StdConvention::kSample ? n - 1.0 : n;
  for (std::size_t f = 0; f < params.means.size(); ++f) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r[f];
    mean /= n;
    double ss = 0.0;
    for (const auto& r : rows) ss += (r[f] - mean) * (r[f] - mean);
    const double sd = std::sqrt(ss / denom);
    if (!(sd > 0.0)) {
      throw Error(ErrorCode::kConstantFeature,
                  "feature '" + std::string(kFeatureNames[f]) + "' is constant");
    }
    params.means[f] = mean;
    params.stds[f] = sd;
  }
  return params;
}

ScalerParams FitScaler(std::span<const BlockRecord> records, StdConvention convention) {
  std::vector<Features> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(r.features());
  return FitScaler(rows, convention);
}

}  // namespace ewq::fastewq
