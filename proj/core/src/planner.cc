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

#include "ewq/planner.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "ewq/error.h"

namespace ewq {

std::string_view PrecisionName(Precision p) {
  switch (p) {
    case Precision::kRaw: return "raw";
    case Precision::kQ8: return "q8";
    case Precision::kQ4: return "q4";
    case Precision::kQ1_58: return "q1_58";
  }
  return "?";
}

Precision ParsePrecision(std::string_view name) {
  for (Precision p : kAllPrecisions) {
    if (PrecisionName(p) == name) return p;
  }
  throw Error(ErrorCode::kParse, "unknown precision '" + std::string(name) + "'");
}

void PrecisionTable::Validate() const {
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (!(bits[i] > 0.0) || !std::isfinite(bits[i])) {
      throw Error(ErrorCode::kInvalidArgument, "bits per parameter must be positive");
    }
    if (i > 0 && !(bits[i] < bits[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bits per parameter must strictly decrease raw > q8 > q4 > q1_58");
    }
  }
}

PrecisionTable PrecisionTable::Parse(std::string_view text) {
  return Parse(text, PrecisionTable{});
}

PrecisionTable PrecisionTable::Parse(std::string_view text, PrecisionTable base) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view item = text.substr(pos, end - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kParse, "expected key=value in '" + std::string(item) + "'");
    }
    const Precision p = ParsePrecision(item.substr(0, eq));
    const std::string value(item.substr(eq + 1));
    std::size_t used = 0;
    double bits = 0.0;
    try {
      bits = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw Error(ErrorCode::kParse, "bad bit width '" + value + "'");
    }
    base.bits[static_cast<std::size_t>(p)] = bits;
    pos = end + 1;
  }
  base.Validate();
  return base;
}

std::string PrecisionTable::ToString() const {
  std::ostringstream os;
  for (Precision p : kAllPrecisions) {
    if (p != Precision::kRaw) os << ',';
    os << PrecisionName(p) << '=' << Bits(p);
  }
  return os.str();
}

std::uint64_t BlockSizeBytes(std::uint64_t num_parameters, Precision precision,
                             const PrecisionTable& table) {
  const long double bits =
      static_cast<long double>(num_parameters) * table.Bits(precision);
  return static_cast<std::uint64_t>(std::ceil(bits / 8.0L));
}

EntropyStats ComputeStats(std::span<const double> entropies, double aggressiveness) {
  if (entropies.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no block entropies");
  }
  if (!(aggressiveness >= 0.0) || !std::isfinite(aggressiveness)) {
    throw Error(ErrorCode::kInvalidArgument, "aggressiveness must be >= 0");
  }
  const double n = static_cast<double>(entropies.size());
  double mean = 0.0;
  for (double h : entropies) mean += h;
  mean /= n;
  // One correction step makes the mean exact for constant inputs.
  double correction = 0.0;
  for (double h : entropies) correction += h - mean;
  mean += correction / n;
  double ss = 0.0;
  for (double h : entropies) ss += (h - mean) * (h - mean);

  EntropyStats stats;
  stats.mean = mean;
  stats.std = std::sqrt(ss / n);
  stats.aggressiveness = aggressiveness;
  stats.threshold = mean - aggressiveness * stats.std;
  return stats;
}

EntropyStats ComputeStats(std::span<const BlockEntropyReport> reports,
                          double aggressiveness) {
  std::vector<double> h;
  h.reserve(reports.size());
  for (const auto& r : reports) h.push_back(r.block_entropy);
  return ComputeStats(h, aggressiveness);
}

std::vector<BlockDecision> Decide(std::span<const BlockEntropyReport> reports,
                                  const EntropyStats& stats) {
  std::vector<BlockDecision> out;
  out.reserve(reports.size());
  for (const auto& r : reports) {
    Precision p = Precision::kRaw;
    if (r.block_entropy <= stats.threshold) {
      p = Precision::kQ4;
    } else if (r.block_entropy <= stats.mean) {
      p = Precision::kQ8;
    }
    out.push_back({r.exec_index, r.block_entropy, p});
  }
  std::sort(out.begin(), out.end(), [](const BlockDecision& a, const BlockDecision& b) {
    if (a.entropy != b.entropy) return a.entropy < b.entropy;
    return a.exec_index < b.exec_index;
  });
  return out;
}

std::uint64_t TotalCapacity(std::span<const MachineSpec> machines) {
  std::uint64_t total = 0;
  for (const auto& m : machines) total += m.Capacity();
  return total;
}

std::optional<Precision> QuantPlan::PrecisionOf(std::uint32_t exec_index) const {
  for (const auto& a : assignments) {
    if (a.exec_index == exec_index) return a.precision;
  }
  return std::nullopt;
}

std::optional<std::vector<Placement>> PlaceFirstFitDecreasing(
    std::span<const SizedBlock> blocks, std::span<const MachineSpec> machines) {
  std::vector<std::size_t> machine_order(machines.size());
  for (std::size_t i = 0; i < machines.size(); ++i) machine_order[i] = i;
  std::stable_sort(machine_order.begin(), machine_order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return machines[a].Capacity() > machines[b].Capacity();
                   });
  std::vector<std::uint64_t> remaining(machines.size());
  for (std::size_t i = 0; i < machines.size(); ++i) remaining[i] = machines[i].Capacity();

  std::vector<SizedBlock> order(blocks.begin(), blocks.end());
  std::sort(order.begin(), order.end(), [](const SizedBlock& a, const SizedBlock& b) {
    if (a.size_bytes != b.size_bytes) return a.size_bytes > b.size_bytes;
    return a.exec_index < b.exec_index;
  });

  std::vector<Placement> placements;
  placements.reserve(order.size());
  for (const auto& block : order) {
    bool placed = false;
    for (std::size_t m : machine_order) {
      if (remaining[m] >= block.size_bytes) {
        remaining[m] -= block.size_bytes;
        placements.push_back({block.exec_index, machines[m].id});
        placed = true;
        break;
      }
    }
    if (!placed) return std::nullopt;
  }
  std::sort(placements.begin(), placements.end(),
            [](const Placement& a, const Placement& b) { return a.exec_index < b.exec_index; });
  return placements;
}

QuantPlan OptimizeDistribution(std::span<const BlockEntropyReport> reports,
                               std::span<const BlockDecision> decisions,
                               std::span<const MachineSpec> machines,
                               const PrecisionTable& table,
                               const DistributionOptions& options) {
  table.Validate();
  if (machines.empty()) throw Error(ErrorCode::kNoMachines, "cluster has no machines");
  const std::uint64_t capacity = TotalCapacity(machines);
  if (capacity == 0) throw Error(ErrorCode::kZeroCapacity, "cluster capacity is zero");

  std::map<std::uint32_t, std::uint64_t> params;
  for (const auto& r : reports) {
    if (!params.emplace(r.exec_index, r.num_parameters).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate exec_index " + std::to_string(r.exec_index));
    }
  }
  if (decisions.size() != params.size()) {
    throw Error(ErrorCode::kInvalidArgument, "decisions do not cover every block");
  }

  struct Item {
    std::uint32_t exec_index;
    double entropy;
    std::uint64_t params;
    Precision decided;
    Precision current;
  };
  // Ascending priority: lowest entropy first, ties by exec_index.
  std::vector<Item> items;
  items.reserve(decisions.size());
  for (const auto& d : decisions) {
    auto it = params.find(d.exec_index);
    if (it == params.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "decision for unknown block " + std::to_string(d.exec_index));
    }
    items.push_back({d.exec_index, d.entropy, it->second, d.precision, d.precision});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.entropy != b.entropy) return a.entropy < b.entropy;
    return a.exec_index < b.exec_index;
  });

  auto size = [&table](const Item& item, Precision p) {
    return BlockSizeBytes(item.params, p, table);
  };

  QuantPlan plan;
  plan.capacity_bytes = capacity;
  for (const auto& item : items) plan.unquantized_bytes += size(item, Precision::kRaw);

  bool budget_ok = true;
  if (plan.unquantized_bytes <= capacity) {
    for (auto& item : items) item.current = Precision::kRaw;
  } else {
    std::uint64_t s = 0;
    for (const auto& item : items) s += size(item, item.current);

    if (s <= capacity) {
      bool changed = true;
      while (changed) {
        changed = false;
        for (auto it = items.rbegin(); it != items.rend(); ++it) {
          for (Precision target : {Precision::kRaw, Precision::kQ8}) {
            if (!HigherThan(target, it->current)) continue;
            const std::uint64_t grown = s - size(*it, it->current) + size(*it, target);
            if (grown <= capacity) {
              s = grown;
              it->current = target;
              changed = true;
              break;
            }
          }
        }
      }
    } else {
      std::vector<Item*> dropped;
      for (auto& item : items) {
        if (s <= capacity) break;
        s = s - size(item, item.current) + size(item, Precision::kQ1_58);
        item.current = Precision::kQ1_58;
        dropped.push_back(&item);
      }
      if (s > capacity) {
        budget_ok = false;
      } else {
        for (auto it = dropped.rbegin(); it != dropped.rend(); ++it) {
          Item& item = **it;
          const std::uint64_t restored =
              s - size(item, Precision::kQ1_58) + size(item, item.decided);
          if (restored <= capacity) {
            s = restored;
            item.current = item.decided;
          }
        }
      }
    }
  }

  for (const auto& item : items) {
    const std::uint64_t bytes = size(item, item.current);
    plan.assignments.push_back({item.exec_index, item.current, bytes});
    plan.total_bytes += bytes;
  }
  std::sort(plan.assignments.begin(), plan.assignments.end(),
            [](const Assignment& a, const Assignment& b) { return a.exec_index < b.exec_index; });
  plan.fits = budget_ok && plan.total_bytes <= capacity;

  if (options.place && plan.fits) {
    std::vector<SizedBlock> sized;
    for (const auto& a : plan.assignments) sized.push_back({a.exec_index, a.size_bytes});
    auto placements = PlaceFirstFitDecreasing(sized, machines);
    if (placements) {
      plan.placements = std::move(*placements);
    } else {
      plan.fits = false;
    }
  }
  return plan;
}

}  // namespace ewq
