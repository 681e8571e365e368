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

#include "ewq/fastewq/forest.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <string>
#include <thread>

#include "ewq/error.h"

namespace ewq::fastewq {
namespace {

double Gini(std::uint64_t n0, std::uint64_t n1) {
  const double n = static_cast<double>(n0 + n1);
  if (n == 0.0) return 0.0;
  const double p0 = static_cast<double>(n0) / n;
  const double p1 = static_cast<double>(n1) / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

double WeightedGini(const std::array<std::uint32_t, 2>& c) {
  return static_cast<double>(c[0] + c[1]) * Gini(c[0], c[1]);
}

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Portable bounded draw; std::uniform_int_distribution differs across
// standard libraries.
std::size_t Draw(std::mt19937_64& rng, std::size_t bound) {
  return static_cast<std::size_t>(rng() % bound);
}

void Shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[Draw(rng, i)]);
  }
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double decrease = -1.0;
};

SplitChoice BestSplit(std::span<const Features> x, std::span<const int> y,
                      std::span<const std::size_t> rows,
                      const std::array<std::uint32_t, 2>& counts) {
  SplitChoice best;
  const double parent = WeightedGini(counts);
  std::vector<std::pair<double, int>> column(rows.size());
  for (int f = 0; f < static_cast<int>(std::tuple_size_v<Features>); ++f) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      column[i] = {x[rows[i]][static_cast<std::size_t>(f)], y[rows[i]]};
    }
    std::sort(column.begin(), column.end());
    std::array<std::uint32_t, 2> left{};
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      ++left[static_cast<std::size_t>(column[i].second)];
      const double lo = column[i].first;
      const double hi = column[i + 1].first;
      if (!(lo < hi)) continue;
      const std::array<std::uint32_t, 2> right = {counts[0] - left[0], counts[1] - left[1]};
      const double decrease = parent - WeightedGini(left) - WeightedGini(right);
      if (decrease > best.decrease) {
        double t = lo + (hi - lo) / 2.0;
        if (!(t < hi)) t = lo;
        best = {f, t, decrease};
      }
    }
  }
  return best;
}

}  // namespace

DecisionTree DecisionTree::Fit(std::span<const Features> x, std::span<const int> y,
                               std::span<const std::size_t> sample,
                               const TreeParams& params) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch, "features and labels differ in length");
  }
  if (sample.empty()) throw Error(ErrorCode::kEmptyInput, "tree needs at least one sample");
  for (std::size_t i : sample) {
    if (i >= x.size()) throw Error(ErrorCode::kInvalidArgument, "sample index out of range");
    if (y[i] != 0 && y[i] != 1) throw Error(ErrorCode::kInvalidArgument, "labels must be 0 or 1");
  }

  std::vector<std::size_t> rows(sample.begin(), sample.end());
  std::vector<TreeNode> nodes(1);
  struct Pending {
    std::int32_t node;
    std::size_t begin;
    std::size_t end;
    std::uint32_t depth;
  };
  std::vector<Pending> stack = {{0, 0, rows.size(), 0}};
  while (!stack.empty()) {
    const Pending cur = stack.back();
    stack.pop_back();
    std::array<std::uint32_t, 2> counts{};
    for (std::size_t i = cur.begin; i < cur.end; ++i) {
      ++counts[static_cast<std::size_t>(y[rows[i]])];
    }
    nodes[static_cast<std::size_t>(cur.node)].counts = counts;

    const std::size_t n = cur.end - cur.begin;
    const bool pure = counts[0] == 0 || counts[1] == 0;
    const bool depth_capped = params.max_depth && cur.depth >= *params.max_depth;
    if (pure || depth_capped || n < params.min_samples_split) continue;

    const std::span<const std::size_t> node_rows(rows.data() + cur.begin, n);
    const SplitChoice split = BestSplit(x, y, node_rows, counts);
    if (split.feature < 0) continue;

    auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(cur.begin),
                              rows.begin() + static_cast<std::ptrdiff_t>(cur.end),
                              [&](std::size_t r) {
                                return x[r][static_cast<std::size_t>(split.feature)] <=
                                       split.threshold;
                              });
    const auto mid_index = static_cast<std::size_t>(mid - rows.begin());
    const auto left = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    nodes.emplace_back();
    TreeNode& node = nodes[static_cast<std::size_t>(cur.node)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = left + 1;
    stack.push_back({left + 1, mid_index, cur.end, cur.depth + 1});
    stack.push_back({left, cur.begin, mid_index, cur.depth + 1});
  }
  return DecisionTree(std::move(nodes));
}

DecisionTree DecisionTree::FromNodes(std::vector<TreeNode> nodes) {
  if (nodes.empty()) throw Error(ErrorCode::kParse, "tree has no nodes");
  const auto count = static_cast<std::int32_t>(nodes.size());
  for (std::int32_t i = 0; i < count; ++i) {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    if (n.IsLeaf()) {
      if (n.feature != -1 || n.counts[0] + n.counts[1] == 0) {
        throw Error(ErrorCode::kParse, "leaf " + std::to_string(i) + " is malformed");
      }
      continue;
    }
    if (n.feature > 2 || n.left <= i || n.right <= i || n.left >= count || n.right >= count) {
      throw Error(ErrorCode::kParse, "split node " + std::to_string(i) + " is malformed");
    }
  }
  return DecisionTree(std::move(nodes));
}

int DecisionTree::Predict(const Features& x) const {
  if (nodes_.empty()) throw Error(ErrorCode::kUnfitted, "tree is empty");
  std::size_t i = 0;
  while (!nodes_[i].IsLeaf()) {
    const TreeNode& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                       : n.right);
  }
  return nodes_[i].counts[1] > nodes_[i].counts[0] ? 1 : 0;
}

Features DecisionTree::ImpurityDecrease() const {
  Features out{};
  for (const auto& n : nodes_) {
    if (n.IsLeaf()) continue;
    out[static_cast<std::size_t>(n.feature)] +=
        WeightedGini(n.counts) - WeightedGini(nodes_[static_cast<std::size_t>(n.left)].counts) -
        WeightedGini(nodes_[static_cast<std::size_t>(n.right)].counts);
  }
  return out;
}

std::size_t DecisionTree::Depth() const {
  if (nodes_.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes_[i].IsLeaf()) {
      stack.push_back({static_cast<std::size_t>(nodes_[i].left), d + 1});
      stack.push_back({static_cast<std::size_t>(nodes_[i].right), d + 1});
    }
  }
  return deepest;
}

ForestModel FitForest(std::span<const BlockRecord> train, const ForestParams& params,
                      std::size_t threads) {
  if (params.n_trees == 0) throw Error(ErrorCode::kInvalidArgument, "n_trees must be positive");
  if (params.min_samples_split < 2) {
    throw Error(ErrorCode::kInvalidArgument, "min_samples_split must be at least 2");
  }
  bool has0 = false;
  bool has1 = false;
  for (const auto& r : train) (r.quantized ? has1 : has0) = true;
  if (!(has0 && has1)) {
    throw Error(ErrorCode::kSingleClass, "training set contains a single class");
  }

  ForestModel model;
  model.params = params;
  model.scaler = FitScaler(train, params.std_convention);
  std::vector<Features> x;
  std::vector<int> y;
  x.reserve(train.size());
  for (const auto& r : train) {
    x.push_back(model.scaler.Transform(r.features()));
    y.push_back(r.quantized);
  }

  const TreeParams tree_params{params.max_depth, params.min_samples_split};
  model.trees.resize(params.n_trees);
  std::vector<std::exception_ptr> errors(params.n_trees);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    std::vector<std::size_t> sample(train.size());
    for (std::size_t t = next++; t < params.n_trees; t = next++) {
      try {
        std::mt19937_64 rng(SplitMix64(params.seed ^ SplitMix64(t + 1)));
        for (std::size_t i = 0; i < sample.size(); ++i) {
          sample[i] = params.bootstrap ? Draw(rng, train.size()) : i;
        }
        model.trees[t] = DecisionTree::Fit(x, y, sample, tree_params);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<std::size_t>(threads, params.n_trees);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return model;
}

SplitResult StratifiedSplit(std::span<const BlockRecord> records, double fraction,
                            std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "split fraction must be in (0, 1]");
  }
  std::vector<bool> to_train(records.size(), false);
  std::mt19937_64 rng(SplitMix64(seed));
  for (int label : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].quantized == label) idx.push_back(i);
    }
    Shuffle(idx, rng);
    const auto take = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < std::min(take, idx.size()); ++k) to_train[idx[k]] = true;
  }
  SplitResult out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (to_train[i] ? out.train : out.held_out).push_back(records[i]);
  }
  return out;
}

TrainResult TrainForest(std::span<const BlockRecord> records, double split_fraction,
                        const ForestParams& params, std::size_t threads) {
  if (!(split_fraction > 0.0 && split_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "split fraction must be in (0, 1]");
  }
  if (split_fraction < 1.0 && records.size() < 10) {
    throw Error(ErrorCode::kTooFewRecords, "a held-out split needs at least 10 records");
  }
  TrainResult result;
  if (split_fraction >= 1.0) {
    result.train.assign(records.begin(), records.end());
  } else {
    SplitResult split = StratifiedSplit(records, split_fraction, params.seed);
    result.train = std::move(split.train);
    result.held_out = std::move(split.held_out);
  }
  result.model = FitForest(result.train, params, threads);
  return result;
}

Prediction Predict(const ForestModel& model, const Features& raw_features) {
  if (!model.fitted()) throw Error(ErrorCode::kUnfitted, "forest has no trees");
  const Features z = model.scaler.Transform(raw_features);
  std::size_t votes = 0;
  for (const auto& tree : model.trees) votes += static_cast<std::size_t>(tree.Predict(z));
  Prediction p;
  p.score = static_cast<double>(votes) / static_cast<double>(model.trees.size());
  p.label = 2 * votes > model.trees.size() ? 1 : 0;
  return p;
}

Features FeatureImportance(const ForestModel& model) {
  if (!model.fitted()) throw Error(ErrorCode::kUnfitted, "forest has no trees");
  Features total{};
  for (const auto& tree : model.trees) {
    Features d = tree.ImpurityDecrease();
    const double s = d[0] + d[1] + d[2];
    if (!(s > 0.0)) continue;
    for (std::size_t f = 0; f < d.size(); ++f) total[f] += d[f] / s;
  }
  const double s = total[0] + total[1] + total[2];
  if (s > 0.0) {
    for (double& v : total) v /= s;
  }
  return total;
}

}  // namespace ewq::fastewq
