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

#ifndef EWQ_FASTEWQ_SCALER_H_
#define EWQ_FASTEWQ_SCALER_H_

#include <span>

#include "ewq/fastewq/dataset.h"

namespace ewq::fastewq {

enum class StdConvention { kSample, kPopulation };

// Per-feature standard score z = (x - mean) / std, fitted on training rows.
struct ScalerParams {
  Features means{};
  Features stds{1.0, 1.0, 1.0};
  StdConvention convention = StdConvention::kSample;

  Features Transform(const Features& x) const;
  bool operator==(const ScalerParams&) const = default;
};

// Needs at least two rows; a constant feature throws kConstantFeature.
ScalerParams FitScaler(std::span<const Features> rows,
                       StdConvention convention = StdConvention::kSample);
ScalerParams FitScaler(std::span<const BlockRecord> records,
                       StdConvention convention = StdConvention::kSample);

}  // namespace ewq::fastewq

#endif  // EWQ_FASTEWQ_SCALER_H_
