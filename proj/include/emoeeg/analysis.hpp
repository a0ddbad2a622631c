#pragma once

#include "emoeeg/dataio.hpp"
#include "emoeeg/stats.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace emoeeg {

struct CorrelationMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> feature_names;
  std::vector<bool> constant_columns;  // rows/cols of these are recorded as 0
};

CorrelationMatrix correlation_matrix(const Eigen::Ref<const Eigen::MatrixXd>& features,
                                     std::vector<std::string> feature_names = {});

struct ClassSignificance {
  std::size_t significant = 0;
  std::size_t non_significant = 0;
  std::vector<TTestResult> tests;  // one per feature, class rows vs the rest
};

struct SignificanceSummary {
  double alpha = 0.05;
  std::array<ClassSignificance, kNumClasses> per_class;
};

// One-vs-rest Welch tests per class and feature, no multiplicity correction.
// Features whose test is degenerate count as non-significant (p = 1).
SignificanceSummary significance_summary(const LabeledDataset& dataset, double alpha = 0.05);

// Columns significant for at least one class.
std::vector<Eigen::Index> significant_columns(const SignificanceSummary& summary);

struct TsneParams {
  double perplexity = 30.0;
  int iterations = 1000;
  std::uint64_t seed = 0;
  double early_exaggeration = 4.0;
  int exaggeration_iterations = 100;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iteration = 250;
  double init_stddev = 1e-4;
};

struct Embedding2D {
  Eigen::MatrixX2d coordinates;
  std::vector<int> labels;
  double perplexity = 0.0;
  double initial_kl = 0.0;  // measured right after early exaggeration ends
  double final_kl = 0.0;
};

struct Affinities {
  Eigen::MatrixXd joint;            // symmetrized P, sums to 1
  Eigen::VectorXd row_entropy_bits; // entropy of each conditional row
  Eigen::VectorXd row_beta;         // precision 1 / (2 sigma^2) per row
};

// Per-row Gaussian bandwidths by bisection on the conditional entropy
// (target log2(perplexity), tolerance 1e-5 bits), then P = (P_cond + P_cond^T) / 2n.
Affinities tsne_affinities(const Eigen::Ref<const Eigen::MatrixXd>& features, double perplexity);

// Exact O(n^2) t-SNE. Requires n >= 4 and perplexity < (n - 1) / 3.
Embedding2D tsne_embed(const Eigen::Ref<const Eigen::MatrixXd>& features, const TsneParams& params,
                       std::vector<int> labels = {});

// Seeded class-stratified subset of at most `max_rows` row indices, ascending.
std::vector<Eigen::Index> stratified_subsample(const std::vector<int>& labels,
                                               std::size_t max_rows, std::uint64_t seed);

}  // namespace emoeeg
