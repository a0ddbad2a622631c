#include "emoeeg/eval.hpp"

#include "emoeeg/analysis.hpp"
#include "emoeeg/errors.hpp"
#include "emoeeg/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace emoeeg {

SplitIndices stratified_split(const std::vector<int>& labels, double test_fraction,
                              std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0, ErrorCode::InvalidArgument,
          "test fraction must lie in (0, 1)");
  std::array<std::vector<Eigen::Index>, kNumClasses> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    label_name(labels[i]);
    by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<Eigen::Index>(i));
  }

  SplitIndices split;
  split.seed = seed;
  split.test_fraction = test_fraction;
  Rng rng(seed);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) continue;
    require(rows.size() >= 2, ErrorCode::InvalidArgument,
            "class " + std::string(kLabelNames[c]) + " has fewer than 2 samples");
    rng.shuffle(std::span(rows));
    const auto n_test = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size()))), 1,
        rows.size() - 1);
    split.test_rows.insert(split.test_rows.end(), rows.begin(),
                           rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train_rows.insert(split.train_rows.end(),
                            rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());
  return split;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  require(y_true.size() == y_pred.size(), ErrorCode::DimensionMismatch,
          "y_true and y_pred differ in length");
  ConfusionMatrix cm = ConfusionMatrix::Zero();
  for (std::size_t k = 0; k < y_true.size(); ++k) {
    require(y_true[k] >= 0 && y_true[k] < kNumClasses && y_pred[k] >= 0 && y_pred[k] < kNumClasses,
            ErrorCode::UnknownLabel, "label out of range at position " + std::to_string(k));
    ++cm(y_true[k], y_pred[k]);
  }
  return cm;
}

ClassificationMetrics classification_metrics(const ConfusionMatrix& cm) {
  const long total = cm.sum();
  if (total <= 0) throw Error(ErrorCode::EmptyEvaluation, "no samples were evaluated");
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  for (int c = 0; c < kNumClasses; ++c) {
    const auto k = static_cast<std::size_t>(c);
    const long tp = cm(c, c);
    const long predicted = cm.col(c).sum();
    const long actual = cm.row(c).sum();
    m.support[k] = actual;
    if (predicted > 0) {
      m.precision[k] = static_cast<double>(tp) / static_cast<double>(predicted);
    } else {
      ++m.undefined_ratios;
    }
    if (actual > 0) {
      m.recall[k] = static_cast<double>(tp) / static_cast<double>(actual);
    } else {
      ++m.undefined_ratios;
    }
    const double pr = m.precision[k] + m.recall[k];
    m.f1[k] = pr > 0.0 ? 2.0 * m.precision[k] * m.recall[k] / pr : 0.0;
  }
  double weighted = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    m.macro_f1 += m.f1[k];
    weighted += m.f1[k] * static_cast<double>(m.support[k]);
  }
  m.macro_f1 /= kNumClasses;
  // With equal supports this reduces to the macro mean term for term.
  const bool balanced = m.support[0] == m.support[1] && m.support[1] == m.support[2];
  m.weighted_f1 = balanced ? m.macro_f1 : weighted / static_cast<double>(total);
  return m;
}

int EvaluationReport::best_index() const {
  int best = -1;
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    if (best < 0) {
      best = i;
      continue;
    }
    const auto& a = rows[static_cast<std::size_t>(i)].metrics;
    const auto& b = rows[static_cast<std::size_t>(best)].metrics;
    if (a.accuracy > b.accuracy || (a.accuracy == b.accuracy && a.weighted_f1 > b.weighted_f1)) {
      best = i;
    }
  }
  return best;
}

std::vector<int> EvaluationReport::ranking() const {
  std::vector<int> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [this](int a, int b) {
    const auto& ma = rows[static_cast<std::size_t>(a)].metrics;
    const auto& mb = rows[static_cast<std::size_t>(b)].metrics;
    if (ma.accuracy != mb.accuracy) return ma.accuracy > mb.accuracy;
    return ma.weighted_f1 > mb.weighted_f1;
  });
  return order;
}

PreparedSplit prepare_split(const LabeledDataset& dataset, const SplitIndices& split,
                            const CompareOptions& options) {
  PreparedSplit p;
  p.train = dataset.select_rows(split.train_rows);
  p.test = dataset.select_rows(split.test_rows);
  p.kept_columns.resize(static_cast<std::size_t>(dataset.n_features()));
  std::iota(p.kept_columns.begin(), p.kept_columns.end(), Eigen::Index{0});
  if (options.significant_only) {
    p.kept_columns = significant_columns(significance_summary(p.train, options.alpha));
    require(!p.kept_columns.empty(), ErrorCode::InvalidArgument,
            "no feature is significant on the training rows");
    p.train = p.train.select_columns(p.kept_columns);
    p.test = p.test.select_columns(p.kept_columns);
  }
  p.standardizer = fit_standardizer(p.train.features);
  p.train_standardized = apply_standardizer(p.standardizer, p.train.features);
  p.test_standardized = apply_standardizer(p.standardizer, p.test.features);
  return p;
}

EvaluationReport compare_models(const LabeledDataset& dataset, const SplitIndices& split,
                                const std::vector<ModelConfig>& configs,
                                const CompareOptions& options,
                                std::vector<TrainedModel>* trained) {
  dataset.validate();
  require(!configs.empty(), ErrorCode::InvalidArgument, "no models configured");
  require(!split.train_rows.empty() && !split.test_rows.empty(), ErrorCode::InvalidArgument,
          "split has an empty partition");
  for (auto r : split.train_rows) {
    require(r >= 0 && r < dataset.n_samples(), ErrorCode::InvalidArgument, "split row out of range");
  }
  for (auto r : split.test_rows) {
    require(r >= 0 && r < dataset.n_samples(), ErrorCode::InvalidArgument, "split row out of range");
  }

  const PreparedSplit prepared = prepare_split(dataset, split, options);
  const LabeledDataset& train = prepared.train;
  const LabeledDataset& test = prepared.test;
  const Eigen::MatrixXd& train_std = prepared.train_standardized;
  const Eigen::MatrixXd& test_std = prepared.test_standardized;

  std::vector<ModelConfig> ordered = configs;
  std::stable_sort(ordered.begin(), ordered.end(), [](const ModelConfig& a, const ModelConfig& b) {
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });

  EvaluationReport report;
  report.split = split;
  report.feature_names = train.feature_names;
  report.significant_only = options.significant_only;
  for (const auto& config : ordered) {
    const bool standardized = uses_standardized_features(config.kind);
    const auto start = std::chrono::steady_clock::now();
    TrainedModel model =
        train_model(config, standardized ? train_std : train.features, train.labels);
    const auto stop = std::chrono::steady_clock::now();
    const auto y_pred = predict(model, standardized ? test_std : test.features);

    ModelResult row;
    row.kind = config.kind;
    row.confusion = confusion_matrix(test.labels, y_pred);
    row.metrics = classification_metrics(row.confusion);
    row.train_seconds = std::chrono::duration<double>(stop - start).count();
    report.rows.push_back(row);
    if (trained) trained->push_back(std::move(model));
  }
  return report;
}

SvmGridResult grid_search_svm(const Eigen::Ref<const Eigen::MatrixXd>& features,
                              const std::vector<int>& labels, const SvmParams& base, int folds,
                              std::uint64_t seed) {
  require(folds >= 2, ErrorCode::InvalidArgument, "grid search needs at least 2 folds");
  require(static_cast<Eigen::Index>(labels.size()) == features.rows(), ErrorCode::DimensionMismatch,
          "features and labels disagree in length");

  // Fold of each row: per-class shuffle, then round-robin.
  std::vector<int> fold(labels.size(), 0);
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    label_name(labels[i]);
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  Rng rng(seed);
  for (auto& rows : by_class) {
    require(rows.size() >= static_cast<std::size_t>(folds), ErrorCode::InvalidArgument,
            "every class needs at least one row per fold");
    rng.shuffle(std::span(rows));
    for (std::size_t k = 0; k < rows.size(); ++k) fold[rows[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }

  const double g0 = base.gamma > 0.0 ? base.gamma : default_gamma(features);
  SvmGridResult result;
  result.folds = folds;
  result.best = base;
  double best_acc = -1.0;
  for (double c : {0.1, 1.0, 10.0, 100.0}) {
    for (double scale : {0.1, 1.0, 10.0}) {
      SvmParams p = base;
      p.C = c;
      p.gamma = g0 * scale;
      long hits = 0, total = 0;
      for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> tr, te;
        for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
        Eigen::MatrixXd xtr(static_cast<Eigen::Index>(tr.size()), features.cols());
        Eigen::MatrixXd xte(static_cast<Eigen::Index>(te.size()), features.cols());
        std::vector<int> ytr, yte;
        for (std::size_t k = 0; k < tr.size(); ++k) {
          xtr.row(static_cast<Eigen::Index>(k)) = features.row(tr[k]);
          ytr.push_back(labels[static_cast<std::size_t>(tr[k])]);
        }
        for (std::size_t k = 0; k < te.size(); ++k) {
          xte.row(static_cast<Eigen::Index>(k)) = features.row(te[k]);
          yte.push_back(labels[static_cast<std::size_t>(te[k])]);
        }
        const auto pred = predict_svm(train_svm(xtr, ytr, p), xte);
        for (std::size_t k = 0; k < pred.size(); ++k) hits += pred[k] == yte[k];
        total += static_cast<long>(pred.size());
      }
      const double acc = static_cast<double>(hits) / static_cast<double>(total);
      result.points.push_back({p.C, p.gamma, acc});
      if (acc > best_acc) {
        best_acc = acc;
        result.best = p;
      }
    }
  }
  return result;
}

std::string render_table(const EvaluationReport& report) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-22s %12s %10s\n", "Model", "Accuracy %", "F1-score");
  out << line;
  for (const auto& row : report.rows) {
    std::snprintf(line, sizeof line, "%-22s %12.1f %10.3f\n",
                  std::string(model_display_name(row.kind)).c_str(), 100.0 * row.metrics.accuracy,
                  row.metrics.weighted_f1);
    out << line;
  }
  if (report.rows.size() > 1) {
    out << "Ranking:";
    const auto order = report.ranking();
    for (std::size_t k = 0; k < order.size(); ++k) {
      out << (k ? " > " : " ")
          << model_display_name(report.rows[static_cast<std::size_t>(order[k])].kind);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace emoeeg
