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

#ifndef EWQ_HALF_H_
#define EWQ_HALF_H_

#include <cstdint>

namespace ewq {

// IEEE-754 binary16 and bfloat16 conversions. Encoding rounds to nearest,
// ties to even, directly from double (no intermediate float rounding).
std::uint16_t DoubleToHalfBits(double value);
double HalfBitsToDouble(std::uint16_t bits);

std::uint16_t DoubleToBFloat16Bits(double value);
double BFloat16BitsToDouble(std::uint16_t bits);

}  // namespace ewq

#endif  // EWQ_HALF_H_
