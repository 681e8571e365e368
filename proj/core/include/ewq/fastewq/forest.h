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

#ifndef EWQ_FASTEWQ_FOREST_H_
#define EWQ_FASTEWQ_FOREST_H_

// Random-forest classifier over block metadata (num_parameters, exec_index,
// num_blocks) predicting whether a block should be quantized.
//
// Trees are CART with Gini impurity, grown on bootstrap samples over all
// three features. Training is deterministic for a fixed seed regardless of
// the number of worker threads.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ewq/fastewq/dataset.h"
#include "ewq/fastewq/scaler.h"

namespace ewq::fastewq {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // samples with x[feature] <= threshold go left
  std::int32_t left = -1;
  std::int32_t right = -1;
  // Class counts of the (bootstrap) samples reaching this node.
  std::array<std::uint32_t, 2> counts{};

  bool IsLeaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct TreeParams {
  std::optional<std::uint32_t> max_depth;  // nullopt = unlimited
  std::uint32_t min_samples_split = 2;
};

class DecisionTree {
 public:
  DecisionTree() = default;

  // Grows a tree on the rows selected by `sample` (indices may repeat).
  static DecisionTree Fit(std::span<const Features> x, std::span<const int> y,
                          std::span<const std::size_t> sample, const TreeParams& params);

  // Validates structure: feature indices, child links, non-empty leaves.
  static DecisionTree FromNodes(std::vector<TreeNode> nodes);

  // Leaf majority; ties go to class 0.
  int Predict(const Features& x) const;

  // Sum over split nodes of n*gini(node) - n_l*gini(left) - n_r*gini(right),
  // per feature.
  Features ImpurityDecrease() const;

  std::size_t Depth() const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  bool operator==(const DecisionTree&) const = default;

 private:
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  std::vector<TreeNode> nodes_;
};

struct ForestParams {
  std::uint32_t n_trees = 100;
  std::optional<std::uint32_t> max_depth;
  std::uint32_t min_samples_split = 2;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  StdConvention std_convention = StdConvention::kSample;

  bool operator==(const ForestParams&) const = default;
};

struct ForestModel {
  ForestParams params;
  ScalerParams scaler;
  std::vector<DecisionTree> trees;

  bool fitted() const { return !trees.empty(); }
  bool operator==(const ForestModel&) const = default;
};

struct Prediction {
  int label = 0;
  double score = 0.0;  // fraction of trees voting 1
};

// Fits the scaler and the trees on `train`. `threads` = 0 uses hardware
// concurrency.
ForestModel FitForest(std::span<const BlockRecord> train, const ForestParams& params,
                      std::size_t threads = 0);

struct SplitResult {
  std::vector<BlockRecord> train;
  std::vector<BlockRecord> held_out;
};

// Per-class seeded shuffle; round(fraction * class size) rows of each class
// go to training. Both outputs keep the input order.
SplitResult StratifiedSplit(std::span<const BlockRecord> records, double fraction,
                            std::uint64_t seed);

struct TrainResult {
  ForestModel model;
  std::vector<BlockRecord> train;
  std::vector<BlockRecord> held_out;
};

// split_fraction in (0, 1]; 1 trains on everything (memorizing variant).
TrainResult TrainForest(std::span<const BlockRecord> records, double split_fraction,
                        const ForestParams& params, std::size_t threads = 0);

// Takes raw (unscaled) features. class = 1 iff score > 0.5.
Prediction Predict(const ForestModel& model, const Features& raw_features);

// Mean of per-tree normalized impurity decreases, normalized to sum 1.
// All zeros when no tree has a split.
Features FeatureImportance(const ForestModel& model);

}  // namespace ewq::fastewq

#endif  // EWQ_FASTEWQ_FOREST_H_
