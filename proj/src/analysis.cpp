#include "emoeeg/analysis.hpp"

#include "emoeeg/errors.hpp"
#include "emoeeg/random.hpp"

#include <algorithm>
#include <cmath>

namespace emoeeg {

CorrelationMatrix correlation_matrix(const Eigen::Ref<const Eigen::MatrixXd>& features,
                                     std::vector<std::string> feature_names) {
  require(features.rows() >= 2, ErrorCode::InvalidArgument,
          "correlation needs at least 2 rows, got " + std::to_string(features.rows()));
  const Eigen::Index d = features.cols();
  if (feature_names.empty()) {
    for (Eigen::Index j = 0; j < d; ++j) feature_names.push_back("f" + std::to_string(j));
  }
  require(static_cast<Eigen::Index>(feature_names.size()) == d, ErrorCode::DimensionMismatch,
          "feature name count does not match columns");

  CorrelationMatrix out;
  out.feature_names = std::move(feature_names);
  out.constant_columns.assign(static_cast<std::size_t>(d), false);

  // Unit-norm centred columns; their Gram matrix is the Pearson matrix.
  Eigen::MatrixXd z = features.rowwise() - features.colwise().mean();
  for (Eigen::Index j = 0; j < d; ++j) {
    const double norm = z.col(j).norm();
    const double scale = features.col(j).cwiseAbs().maxCoeff();
    if (norm <= 1e-14 * std::max(1.0, scale) * std::sqrt(static_cast<double>(features.rows()))) {
      z.col(j).setZero();
      out.constant_columns[static_cast<std::size_t>(j)] = true;
    } else {
      z.col(j) /= norm;
    }
  }
  out.values = Eigen::MatrixXd::Zero(d, d);
  out.values.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  out.values = out.values.selfadjointView<Eigen::Lower>();
  out.values = out.values.cwiseMax(-1.0).cwiseMin(1.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    out.values(j, j) = out.constant_columns[static_cast<std::size_t>(j)] ? 0.0 : 1.0;
  }
  return out;
}

SignificanceSummary significance_summary(const LabeledDataset& dataset, double alpha) {
  dataset.validate();
  require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  const auto counts = dataset.class_counts();
  for (int c = 0; c < kNumClasses; ++c) {
    require(counts[static_cast<std::size_t>(c)] >= 2, ErrorCode::InvalidArgument,
            "class " + std::string(label_name(c)) + " has fewer than 2 samples");
  }

  SignificanceSummary summary;
  summary.alpha = alpha;
  std::vector<double> in_class;
  std::vector<double> rest;
  for (int c = 0; c < kNumClasses; ++c) {
    auto& cls = summary.per_class[static_cast<std::size_t>(c)];
    for (Eigen::Index j = 0; j < dataset.n_features(); ++j) {
      in_class.clear();
      rest.clear();
      for (Eigen::Index i = 0; i < dataset.n_samples(); ++i) {
        (dataset.labels[static_cast<std::size_t>(i)] == c ? in_class : rest)
            .push_back(dataset.features(i, j));
      }
      TTestResult r;
      try {
        r = welch_t_test(in_class, rest, alpha);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateVariance) throw;
        r = TTestResult{};
      }
      r.feature_name = dataset.feature_names[static_cast<std::size_t>(j)];
      (r.significant ? cls.significant : cls.non_significant) += 1;
      cls.tests.push_back(std::move(r));
    }
  }
  return summary;
}

std::vector<Eigen::Index> significant_columns(const SignificanceSummary& summary) {
  std::vector<Eigen::Index> cols;
  const std::size_t d = summary.per_class[0].tests.size();
  for (std::size_t j = 0; j < d; ++j) {
    const bool any = std::any_of(summary.per_class.begin(), summary.per_class.end(),
                                 [j](const ClassSignificance& c) { return c.tests[j].significant; });
    if (any) cols.push_back(static_cast<Eigen::Index>(j));
  }
  return cols;
}

std::vector<Eigen::Index> stratified_subsample(const std::vector<int>& labels,
                                               std::size_t max_rows, std::uint64_t seed) {
  std::vector<Eigen::Index> all(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) all[i] = static_cast<Eigen::Index>(i);
  if (labels.size() <= max_rows) return all;

  std::array<std::vector<Eigen::Index>, kNumClasses> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<Eigen::Index>(i));
  }
  // Largest-remainder allocation of max_rows across classes.
  const double total = static_cast<double>(labels.size());
  std::array<std::size_t, kNumClasses> take{};
  std::array<double, kNumClasses> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double exact = static_cast<double>(max_rows) * static_cast<double>(by_class[c].size()) / total;
    take[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(take[c]);
    assigned += take[c];
  }
  while (assigned < max_rows) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c) {
      if (remainder[c] > remainder[best]) best = c;
    }
    ++take[best];
    remainder[best] = -1.0;
    ++assigned;
  }

  Rng rng(seed);
  std::vector<Eigen::Index> out;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& rows = by_class[c];
    rng.shuffle(std::span(rows));
    out.insert(out.end(), rows.begin(),
               rows.begin() + static_cast<std::ptrdiff_t>(std::min(take[c], rows.size())));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace emoeeg
