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

#include "ewq/half.h"

#include <cmath>
#include <limits>

namespace ewq {
namespace {

// Small IEEE-like format with an implicit leading bit.
struct MiniFormat {
  int exponent_bits;
  int mantissa_bits;

  int bias() const { return (1 << (exponent_bits - 1)) - 1; }
  int max_biased() const { return (1 << exponent_bits) - 1; }
};

constexpr MiniFormat kHalf{5, 10};
constexpr MiniFormat kBFloat16{8, 7};

std::uint16_t Encode(double value, MiniFormat fmt) {
  const std::uint16_t sign =
      std::signbit(value) ? static_cast<std::uint16_t>(1u << 15) : 0;
  const std::uint16_t exp_all_ones =
      static_cast<std::uint16_t>(fmt.max_biased() << fmt.mantissa_bits);
  if (std::isnan(value)) {
    return static_cast<std::uint16_t>(sign | exp_all_ones |
                                      (1u << (fmt.mantissa_bits - 1)));
  }
  const double a = std::fabs(value);
  if (std::isinf(a)) return sign | exp_all_ones;
  if (a == 0.0) return sign;

  const int min_normal_exp = 1 - fmt.bias();
  int frexp_exp = 0;
  std::frexp(a, &frexp_exp);
  const int unbiased = frexp_exp - 1;

  if (unbiased < min_normal_exp) {
    // Subnormal: count units of the smallest subnormal. A result equal to
    // 2^mantissa_bits lands exactly on the smallest normal encoding.
    const double units =
        std::nearbyint(std::ldexp(a, fmt.mantissa_bits - min_normal_exp));
    return static_cast<std::uint16_t>(sign | static_cast<unsigned>(units));
  }

  double scaled = std::nearbyint(std::ldexp(a, fmt.mantissa_bits - unbiased));
  int exp = unbiased;
  const double implicit = std::ldexp(1.0, fmt.mantissa_bits);
  if (scaled >= 2.0 * implicit) {
    scaled = implicit;
    ++exp;
  }
  const int biased = exp + fmt.bias();
  if (biased >= fmt.max_biased()) return sign | exp_all_ones;
  const auto mantissa = static_cast<unsigned>(scaled - implicit);
  return static_cast<std::uint16_t>(
      sign | (static_cast<unsigned>(biased) << fmt.mantissa_bits) | mantissa);
}

double Decode(std::uint16_t bits, MiniFormat fmt) {
  const bool negative = (bits >> 15) & 1u;
  const unsigned biased = (bits >> fmt.mantissa_bits) &
                          static_cast<unsigned>(fmt.max_biased());
  const unsigned mantissa = bits & ((1u << fmt.mantissa_bits) - 1u);
  double magnitude;
  if (biased == 0) {
    magnitude = std::ldexp(static_cast<double>(mantissa),
                           1 - fmt.bias() - fmt.mantissa_bits);
  } else if (biased == static_cast<unsigned>(fmt.max_biased())) {
    magnitude = mantissa == 0 ? std::numeric_limits<double>::infinity()
                              : std::numeric_limits<double>::quiet_NaN();
  } else {
    magnitude = std::ldexp(
        static_cast<double>(mantissa | (1u << fmt.mantissa_bits)),
        static_cast<int>(biased) - fmt.bias() - fmt.mantissa_bits);
  }
  return negative ? -magnitude : magnitude;
}

}  // namespace

std::uint16_t DoubleToHalfBits(double value) { return Encode(value, kHalf); }
double HalfBitsToDouble(std::uint16_t bits) { return Decode(bits, kHalf); }

std::uint16_t DoubleToBFloat16Bits(double value) {
  return Encode(value, kBFloat16);
}
double BFloat16BitsToDouble(std::uint16_t bits) {
  return Decode(bits, kBFloat16);
}

}  // namespace ewq
