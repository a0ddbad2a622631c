#pragma once

#include "emoeeg/dataio.hpp"
#include "emoeeg/featext.hpp"
#include "emoeeg/models.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace emoeeg {

struct SplitIndices {
  std::vector<Eigen::Index> train_rows;  // ascending
  std::vector<Eigen::Index> test_rows;   // ascending
  std::uint64_t seed = 0;
  double test_fraction = 0.3;
};

// Per-class seeded shuffle, then round(test_fraction * n_c) rows of each class
// go to test (at least 1, at most n_c - 1).
SplitIndices stratified_split(const std::vector<int>& labels, double test_fraction,
                              std::uint64_t seed);

using ConfusionMatrix = Eigen::Matrix<long, kNumClasses, kNumClasses>;  // rows true, cols predicted

ConfusionMatrix confusion_matrix(const std::vector<int>& y_true, const std::vector<int>& y_pred);

struct ClassificationMetrics {
  double accuracy = 0.0;
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  std::array<double, kNumClasses> f1{};
  std::array<long, kNumClasses> support{};
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  int undefined_ratios = 0;  // 0/0 precision or recall values defined as 0
};

ClassificationMetrics classification_metrics(const ConfusionMatrix& cm);

struct ModelResult {
  ModelKind kind = ModelKind::LogisticRegression;
  ClassificationMetrics metrics;
  ConfusionMatrix confusion = ConfusionMatrix::Zero();
  double train_seconds = 0.0;  // wall clock, not serialized into artifacts
};

struct EvaluationReport {
  std::vector<ModelResult> rows;  // in Table order: LR, SVM, RF
  SplitIndices split;
  std::vector<std::string> feature_names;
  bool significant_only = false;

  // Index into rows of the highest accuracy (weighted F1 breaks ties, then
  // the earlier row); -1 when empty.
  int best_index() const;
  // Row indices by descending accuracy.
  std::vector<int> ranking() const;
};

struct CompareOptions {
  bool significant_only = false;  // keep features significant on the training rows
  double alpha = 0.05;
};

// Trains every configured model on split.train_rows and evaluates on
// split.test_rows. The standardizer is fitted on the training rows only and
// applied to LR/SVM inputs; RF sees raw features.
// Train/test partitions after the optional significance filter, with the
// standardizer fitted on the training partition only.
struct PreparedSplit {
  LabeledDataset train;
  LabeledDataset test;
  std::vector<Eigen::Index> kept_columns;  // into the original feature columns
  Standardizer standardizer;
  Eigen::MatrixXd train_standardized;
  Eigen::MatrixXd test_standardized;
};

PreparedSplit prepare_split(const LabeledDataset& dataset, const SplitIndices& split,
                            const CompareOptions& options);

EvaluationReport compare_models(const LabeledDataset& dataset, const SplitIndices& split,
                                const std::vector<ModelConfig>& configs,
                                const CompareOptions& options = {},
                                std::vector<TrainedModel>* trained = nullptr);

struct SvmGridPoint {
  double C = 0.0;
  double gamma = 0.0;
  double cv_accuracy = 0.0;
};

struct SvmGridResult {
  SvmParams best;
  std::vector<SvmGridPoint> points;  // C-major, in grid order
  int folds = 0;
};

// Stratified k-fold cross-validation on training rows over
// C in {0.1, 1, 10, 100} and gamma in {0.1, 1, 10} x the base gamma (the
// default gamma when base.gamma <= 0). The highest mean fold accuracy wins,
// ties going to the earlier grid point. Expects standardized features.
SvmGridResult grid_search_svm(const Eigen::Ref<const Eigen::MatrixXd>& features,
                              const std::vector<int>& labels, const SvmParams& base,
                              int folds = 3, std::uint64_t seed = 0);

// Model, Accuracy %, F1-score (weighted), followed by the ranking line.
std::string render_table(const EvaluationReport& report);

}  // namespace emoeeg
