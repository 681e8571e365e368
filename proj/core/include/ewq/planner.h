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

#ifndef EWQ_PLANNER_H_
#define EWQ_PLANNER_H_

// Entropy-driven precision decisions and resource-constrained distribution
// of transformer blocks across a cluster.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ewq/entropy.h"

namespace ewq {

// Ordered from highest to lowest precision.
enum class Precision { kRaw = 0, kQ8 = 1, kQ4 = 2, kQ1_58 = 3 };

inline constexpr std::array<Precision, 4> kAllPrecisions = {
    Precision::kRaw, Precision::kQ8, Precision::kQ4, Precision::kQ1_58};

std::string_view PrecisionName(Precision p);  // "raw", "q8", "q4", "q1_58"
Precision ParsePrecision(std::string_view name);

// True if `a` keeps more bits than `b`.
constexpr bool HigherThan(Precision a, Precision b) {
  return static_cast<int>(a) < static_cast<int>(b);
}

// Storage cost per parameter. The q4 default of 4.25 bits accounts for the
// per-group scale overhead of real 4-bit formats.
struct PrecisionTable {
  std::array<double, 4> bits = {16.0, 8.0, 4.25, 2.0};

  double Bits(Precision p) const { return bits[static_cast<std::size_t>(p)]; }
  // Requires strictly decreasing positive values.
  void Validate() const;
  // "raw=16,q8=8,q4=4.25,q1_58=2"; keys may be given in any subset.
  static PrecisionTable Parse(std::string_view text);
  static PrecisionTable Parse(std::string_view text, PrecisionTable base);
  std::string ToString() const;
};

// ceil(num_parameters * bits / 8)
std::uint64_t BlockSizeBytes(std::uint64_t num_parameters, Precision precision,
                             const PrecisionTable& table = {});

struct EntropyStats {
  double mean = 0.0;
  double std = 0.0;  // population (divide by N)
  double threshold = 0.0;
  double aggressiveness = 1.0;
};

// threshold = mean - aggressiveness * std. Throws kEmptyInput and
// kInvalidArgument (negative aggressiveness).
EntropyStats ComputeStats(std::span<const double> entropies, double aggressiveness = 1.0);
EntropyStats ComputeStats(std::span<const BlockEntropyReport> reports,
                          double aggressiveness = 1.0);

struct BlockDecision {
  std::uint32_t exec_index = 0;
  double entropy = 0.0;
  Precision precision = Precision::kRaw;
};

// H <= T -> q4; T < H <= mean -> q8; H > mean -> raw. Returned in ascending
// entropy order, ties by ascending exec_index.
std::vector<BlockDecision> Decide(std::span<const BlockEntropyReport> reports,
                                  const EntropyStats& stats);

struct MachineSpec {
  std::string id;
  std::uint64_t memory_bytes = 0;
  std::uint64_t disk_bytes = 0;

  std::uint64_t Capacity() const { return memory_bytes < disk_bytes ? memory_bytes : disk_bytes; }
};

std::uint64_t TotalCapacity(std::span<const MachineSpec> machines);

struct Assignment {
  std::uint32_t exec_index = 0;
  Precision precision = Precision::kRaw;
  std::uint64_t size_bytes = 0;
  bool operator==(const Assignment&) const = default;
};

struct Placement {
  std::uint32_t exec_index = 0;
  std::string machine_id;
  bool operator==(const Placement&) const = default;
};

struct QuantPlan {
  std::vector<Assignment> assignments;  // ascending exec_index
  std::uint64_t total_bytes = 0;        // S
  std::uint64_t unquantized_bytes = 0;  // W
  std::uint64_t capacity_bytes = 0;     // R
  std::vector<Placement> placements;    // empty unless placement ran
  bool fits = false;

  std::optional<Precision> PrecisionOf(std::uint32_t exec_index) const;
};

// Block sizes only; used by both planners.
struct SizedBlock {
  std::uint32_t exec_index = 0;
  std::uint64_t size_bytes = 0;
};

// First-fit-decreasing: blocks by descending size (ties: ascending
// exec_index) onto machines by descending capacity (ties: input order).
// Returns nullopt if some block does not fit anywhere.
std::optional<std::vector<Placement>> PlaceFirstFitDecreasing(
    std::span<const SizedBlock> blocks, std::span<const MachineSpec> machines);

struct DistributionOptions {
  bool place = true;
};

// Resource-constrained planning:
//  1. If the unquantized model fits (W <= R), every block stays raw.
//  2. Otherwise apply the entropy decisions and compute S.
//  3. If S <= R, walk blocks by descending entropy promoting each to the
//     highest precision the remaining budget allows (q8 -> raw before
//     q4 -> q8).
//  4. If S > R, drop blocks to q1_58 in ascending entropy order until S <= R,
//     then walk the dropped blocks by descending entropy restoring any whose
//     decided precision still fits. Only the lowest-entropy blocks that are
//     strictly needed end up at 1.58 bits.
//  5. Place blocks first-fit-decreasing over machine capacities.
// fits = false if even all-q1_58 exceeds R or placement fails.
QuantPlan OptimizeDistribution(std::span<const BlockEntropyReport> reports,
                               std::span<const BlockDecision> decisions,
                               std::span<const MachineSpec> machines,
                               const PrecisionTable& table = {},
                               const DistributionOptions& options = {});

}  // namespace ewq

#endif  // EWQ_PLANNER_H_
