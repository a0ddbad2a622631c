#pragma once

#include "emoeeg/dataio.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace emoeeg {

struct ForestParams {
  int n_trees = 100;
  int mtry = 0;       // 0 selects floor(sqrt(n_features))
  int max_depth = 0;  // 0 means unlimited
  int min_leaf = 1;
  bool bootstrap = true;  // false grows every tree on all rows (diagnostic)
  std::uint64_t seed = 0;
  int threads = 0;  // 0 uses the hardware concurrency

  bool operator==(const ForestParams&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  int label = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::uint64_t seed = 0;

  int predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  int depth() const;
};

struct RandomForestModel {
  std::vector<DecisionTree> trees;
  int mtry = 1;
  Eigen::Index n_features = 0;
};

// CART tree with Gini impurity over the given training rows (repeats allowed).
// Each split inspects mtry features drawn without replacement; if none of them
// admits a valid split the remaining features are tried in draw order. The
// best split maximizes the impurity decrease, ties going to the lowest feature
// index and then the lowest threshold.
DecisionTree grow_tree(const Eigen::Ref<const Eigen::MatrixXd>& features,
                       const std::vector<int>& labels, const std::vector<Eigen::Index>& rows,
                       const ForestParams& params, int mtry, std::uint64_t seed);

// Tree t is grown from derive_seed(params.seed, t), so the forest does not
// depend on how trees are scheduled across threads.
RandomForestModel train_rf(const Eigen::Ref<const Eigen::MatrixXd>& features,
                           const std::vector<int>& labels, const ForestParams& params = {});

// Most frequent class, lowest index on ties.
int majority_vote(std::span<const int> votes);

std::vector<int> predict_rf(const RandomForestModel& model,
                            const Eigen::Ref<const Eigen::MatrixXd>& features);

}  // namespace emoeeg
