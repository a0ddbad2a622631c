#include "emoeeg/forest.hpp"

#include "emoeeg/errors.hpp"
#include "emoeeg/random.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace emoeeg {

namespace {

using Counts = std::array<long, kNumClasses>;

int majority(const Counts& counts) {
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

// Sum over classes of n_c^2 / n; larger means purer children.
double purity(const Counts& counts, long n) {
  double s = 0.0;
  for (long c : counts) s += static_cast<double>(c) * static_cast<double>(c);
  return s / static_cast<double>(n);
}

struct Split {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
};

struct Pending {
  int node;
  std::vector<Eigen::Index> rows;
  int depth;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::Ref<const Eigen::MatrixXd>& x, const std::vector<int>& y,
              const ForestParams& params, int mtry, std::uint64_t seed)
      : x_(x), y_(y), params_(params), mtry_(mtry), rng_(seed) {
    order_.resize(static_cast<std::size_t>(x.cols()));
    std::iota(order_.begin(), order_.end(), 0);
  }

  DecisionTree build(std::vector<Eigen::Index> rows) {
    DecisionTree tree;
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, std::move(rows), 0});
    while (!stack.empty()) {
      Pending job = std::move(stack.back());
      stack.pop_back();
      Counts counts{};
      for (auto r : job.rows) ++counts[static_cast<std::size_t>(y_[static_cast<std::size_t>(r)])];
      tree.nodes[static_cast<std::size_t>(job.node)].label = majority(counts);

      const long n = static_cast<long>(job.rows.size());
      const bool pure = std::count_if(counts.begin(), counts.end(), [](long c) { return c > 0; }) <= 1;
      const bool depth_capped = params_.max_depth > 0 && job.depth >= params_.max_depth;
      if (pure || depth_capped || n < 2L * params_.min_leaf) continue;

      const Split split = find_split(job.rows, counts);
      if (!split.valid) continue;

      std::vector<Eigen::Index> left;
      std::vector<Eigen::Index> right;
      for (auto r : job.rows) {
        (x_(r, split.feature) <= split.threshold ? left : right).push_back(r);
      }
      const int left_id = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[static_cast<std::size_t>(job.node)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left_id;
      node.right = left_id + 1;
      stack.push_back({left_id + 1, std::move(right), job.depth + 1});
      stack.push_back({left_id, std::move(left), job.depth + 1});
    }
    return tree;
  }

 private:
  Split find_split(const std::vector<Eigen::Index>& rows, const Counts& parent) {
    // Fresh permutation per node: the first mtry entries are this node's
    // sample, the rest the fallback order.
    const std::size_t d = order_.size();
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.below(d - i));
      std::swap(order_[i], order_[j]);
    }
    std::vector<int> primary(order_.begin(), order_.begin() + mtry_);
    std::sort(primary.begin(), primary.end());

    Split best;
    for (int f : primary) evaluate(f, rows, parent, best);
    for (std::size_t k = static_cast<std::size_t>(mtry_); !best.valid && k < d; ++k) {
      evaluate(order_[k], rows, parent, best);
    }
    return best;
  }

  void evaluate(int feature, const std::vector<Eigen::Index>& rows, const Counts& parent,
                Split& best) {
    const long n = static_cast<long>(rows.size());
    values_.clear();
    for (auto r : rows) values_.emplace_back(x_(r, feature), y_[static_cast<std::size_t>(r)]);
    std::sort(values_.begin(), values_.end());

    Counts left{};
    Counts right = parent;
    const long min_leaf = params_.min_leaf;
    for (long i = 0; i + 1 < n; ++i) {
      const auto cls = static_cast<std::size_t>(values_[static_cast<std::size_t>(i)].second);
      ++left[cls];
      --right[cls];
      const double v = values_[static_cast<std::size_t>(i)].first;
      const double next = values_[static_cast<std::size_t>(i) + 1].first;
      if (!(v < next)) continue;
      const long nl = i + 1;
      const long nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double score = purity(left, nl) + purity(right, nr);
      // Candidates arrive by ascending feature, then threshold: strict > keeps the first.
      if (!best.valid || score > best.score) {
        double threshold = 0.5 * (v + next);
        if (!(threshold < next)) threshold = v;
        best = {true, feature, threshold, score};
      }
    }
  }

  const Eigen::Ref<const Eigen::MatrixXd>& x_;
  const std::vector<int>& y_;
  const ForestParams& params_;
  int mtry_;
  Rng rng_;
  std::vector<int> order_;
  std::vector<std::pair<double, int>> values_;
};

}  // namespace

int DecisionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    i = static_cast<std::size_t>(x(nodes[i].feature) <= nodes[i].threshold ? nodes[i].left
                                                                             : nodes[i].right);
  }
  return nodes[i].label;
}

int DecisionTree::depth() const {
  std::vector<std::pair<int, int>> stack = {{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const auto& node = nodes[static_cast<std::size_t>(id)];
    if (node.feature >= 0) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return deepest;
}

DecisionTree grow_tree(const Eigen::Ref<const Eigen::MatrixXd>& features,
                       const std::vector<int>& labels, const std::vector<Eigen::Index>& rows,
                       const ForestParams& params, int mtry, std::uint64_t seed) {
  require(!rows.empty(), ErrorCode::InvalidArgument, "cannot grow a tree on zero rows");
  require(mtry >= 1 && mtry <= features.cols(), ErrorCode::InvalidArgument,
          "mtry must lie in [1, n_features]");
  TreeBuilder builder(features, labels, params, mtry, seed);
  DecisionTree tree = builder.build(rows);
  tree.seed = seed;
  return tree;
}

RandomForestModel train_rf(const Eigen::Ref<const Eigen::MatrixXd>& features,
                           const std::vector<int>& labels, const ForestParams& params) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  require(n >= 1 && d >= 1, ErrorCode::InvalidArgument, "empty training set");
  require(static_cast<Eigen::Index>(labels.size()) == n, ErrorCode::DimensionMismatch,
          "features and labels disagree in length");
  for (int y : labels) label_name(y);
  require(params.n_trees >= 1, ErrorCode::InvalidArgument, "n_trees must be >= 1");
  require(params.min_leaf >= 1, ErrorCode::InvalidArgument, "min_leaf must be >= 1");
  require(params.max_depth >= 0, ErrorCode::InvalidArgument, "max_depth must be >= 0");
  const int mtry = params.mtry > 0
                       ? params.mtry
                       : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  require(mtry >= 1 && mtry <= d, ErrorCode::InvalidArgument,
          "mtry " + std::to_string(mtry) + " outside [1, " + std::to_string(d) + "]");

  RandomForestModel model;
  model.mtry = mtry;
  model.n_features = d;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));

  auto grow = [&](std::size_t t) {
    const std::uint64_t seed = derive_seed(params.seed, t);
    Rng rng(seed);
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    } else {
      std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    }
    model.trees[t] = grow_tree(features, labels, rows, params, mtry, rng.next_u64());
    model.trees[t].seed = seed;
  };

  unsigned threads = params.threads > 0 ? static_cast<unsigned>(params.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(params.n_trees));
  if (threads <= 1) {
    for (std::size_t t = 0; t < model.trees.size(); ++t) grow(t);
    return model;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < model.trees.size(); t = next++) grow(t);
    });
  }
  pool.clear();
  return model;
}

int majority_vote(std::span<const int> votes) {
  Counts counts{};
  for (int v : votes) {
    require(v >= 0 && v < kNumClasses, ErrorCode::UnknownLabel, "vote out of range");
    ++counts[static_cast<std::size_t>(v)];
  }
  return majority(counts);
}

std::vector<int> predict_rf(const RandomForestModel& model,
                            const Eigen::Ref<const Eigen::MatrixXd>& features) {
  require(features.cols() == model.n_features, ErrorCode::DimensionMismatch,
          "model expects " + std::to_string(model.n_features) + " features, got " +
              std::to_string(features.cols()));
  std::vector<int> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    Counts counts{};
    for (const auto& tree : model.trees) ++counts[static_cast<std::size_t>(tree.predict(features.row(i)))];
    out[static_cast<std::size_t>(i)] = majority(counts);
  }
  return out;
}

}  // namespace emoeeg
