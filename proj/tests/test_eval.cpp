#include "doctest.h"

#include "emoeeg/dataio.hpp"
#include "emoeeg/errors.hpp"
#include "emoeeg/eval.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace emoeeg;

namespace {

std::vector<int> balanced_labels(int per_class) {
  std::vector<int> y;
  for (int c = 0; c < 3; ++c) y.insert(y.end(), static_cast<std::size_t>(per_class), c);
  return y;
}

}  // namespace

TEST_CASE("stratified split counts, disjointness and determinism") {
  const auto y = balanced_labels(30);
  const auto s = stratified_split(y, 0.3, 42);
  CHECK(s.test_rows.size() == 27);
  CHECK(s.train_rows.size() == 63);
  std::array<int, 3> per_class{};
  for (auto r : s.test_rows) ++per_class[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
  CHECK(per_class == std::array<int, 3>{9, 9, 9});

  std::set<Eigen::Index> all(s.train_rows.begin(), s.train_rows.end());
  all.insert(s.test_rows.begin(), s.test_rows.end());
  CHECK(all.size() == 90);
  CHECK(std::is_sorted(s.test_rows.begin(), s.test_rows.end()));

  const auto again = stratified_split(y, 0.3, 42);
  CHECK(again.test_rows == s.test_rows);
  CHECK(again.train_rows == s.train_rows);
  CHECK(stratified_split(y, 0.3, 43).test_rows != s.test_rows);

  // Interleaved labels give the same per-class counts.
  std::vector<int> mixed;
  for (int i = 0; i < 90; ++i) mixed.push_back(i % 3);
  const auto m = stratified_split(mixed, 0.3, 1);
  per_class = {};
  for (auto r : m.test_rows) ++per_class[static_cast<std::size_t>(mixed[static_cast<std::size_t>(r)])];
  CHECK(per_class == std::array<int, 3>{9, 9, 9});
}

TEST_CASE("stratified split errors") {
  const auto y = balanced_labels(5);
  CHECK_THROWS_AS(stratified_split(y, 0.0, 1), Error);
  CHECK_THROWS_AS(stratified_split(y, 1.0, 1), Error);
  CHECK_THROWS_AS(stratified_split({0, 1, 1, 2, 2}, 0.3, 1), Error);
  CHECK_THROWS_AS(stratified_split({0, 4}, 0.3, 1), Error);
  // Tiny classes keep at least one row on each side.
  const auto s = stratified_split(balanced_labels(2), 0.01, 1);
  CHECK(s.test_rows.size() == 3);
}

TEST_CASE("confusion matrix hand examples") {
  ConfusionMatrix id = ConfusionMatrix::Identity();
  CHECK(confusion_matrix({0, 1, 2}, {0, 1, 2}) == id);
  CHECK(classification_metrics(id).accuracy == 1.0);

  const auto cm = confusion_matrix({0, 0, 1}, {1, 1, 1});
  CHECK(cm(0, 0) == 0);
  CHECK(cm(0, 1) == 2);
  CHECK(cm(0, 2) == 0);
  CHECK(cm(1, 0) == 0);
  CHECK(cm(1, 1) == 1);
  CHECK(cm(1, 2) == 0);
  CHECK(classification_metrics(cm).accuracy == doctest::Approx(1.0 / 3.0));

  const auto empty = confusion_matrix({}, {});
  CHECK(empty.sum() == 0);
  try {
    classification_metrics(empty);
    FAIL("expected EmptyEvaluation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyEvaluation);
  }
  CHECK_THROWS_AS(confusion_matrix({0, 1}, {0}), Error);
  CHECK_THROWS_AS(confusion_matrix({0, 3}, {0, 1}), Error);
}

TEST_CASE("metrics hand computation") {
  ConfusionMatrix cm;
  cm << 5, 0, 0, 0, 0, 5, 0, 0, 5;
  const auto m = classification_metrics(cm);
  CHECK(m.accuracy == doctest::Approx(10.0 / 15.0));
  CHECK(m.recall[1] == 0.0);
  CHECK(m.f1[1] == 0.0);
  CHECK(m.precision[1] == 0.0);
  CHECK(m.undefined_ratios == 1);  // class 1 was never predicted
  CHECK(m.f1[0] == 1.0);
  // Class 2: P = 5/10, R = 1, F1 = 2/3.
  CHECK(m.precision[2] == doctest::Approx(0.5));
  CHECK(m.f1[2] == doctest::Approx(2.0 / 3.0));
  CHECK(m.macro_f1 == doctest::Approx((1.0 + 0.0 + 2.0 / 3.0) / 3.0));
  CHECK(m.weighted_f1 == m.macro_f1);

  ConfusionMatrix skew;
  skew << 8, 2, 0, 1, 3, 0, 0, 0, 2;
  const auto s = classification_metrics(skew);
  double w = 0.0;
  for (std::size_t k = 0; k < 3; ++k) w += s.f1[k] * static_cast<double>(s.support[k]);
  CHECK(s.weighted_f1 == doctest::Approx(w / 16.0).epsilon(1e-14));
  CHECK(s.weighted_f1 != s.macro_f1);

  const auto perfect = classification_metrics(ConfusionMatrix::Identity() * 4);
  CHECK(perfect.macro_f1 == 1.0);
  CHECK(perfect.weighted_f1 == 1.0);
}

TEST_CASE("confusion accuracy equals direct accuracy on random vectors") {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> label(0, 2), len(1, 60);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = len(gen);
    std::vector<int> t(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      t[static_cast<std::size_t>(i)] = label(gen);
      p[static_cast<std::size_t>(i)] = label(gen);
    }
    long hits = 0;
    for (int i = 0; i < n; ++i) hits += t[static_cast<std::size_t>(i)] == p[static_cast<std::size_t>(i)];
    const auto m = classification_metrics(confusion_matrix(t, p));
    CHECK(m.accuracy == static_cast<double>(hits) / n);
    for (double f : m.f1) CHECK((f >= 0.0 && f <= 1.0));

    // Sample order does not matter.
    std::vector<std::size_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<int> t2, p2;
    for (auto k : perm) {
      t2.push_back(t[k]);
      p2.push_back(p[k]);
    }
    const auto m2 = classification_metrics(confusion_matrix(t2, p2));
    CHECK(m2.weighted_f1 == m.weighted_f1);
    CHECK(m2.macro_f1 == m.macro_f1);
  }
}

TEST_CASE("compare on separable synthetic data") {
  const auto ds = generate_synthetic({60, 6, 10.0, 7});
  const auto split = stratified_split(ds.labels, 0.3, 42);
  ModelConfig lr, svm, rf;
  svm.kind = ModelKind::Svm;
  rf.kind = ModelKind::RandomForest;
  rf.forest.n_trees = 40;
  std::vector<TrainedModel> trained;
  // Given out of order; the report follows LR, SVM, RF.
  const auto report = compare_models(ds, split, {rf, lr, svm}, {}, &trained);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].kind == ModelKind::LogisticRegression);
  CHECK(report.rows[1].kind == ModelKind::Svm);
  CHECK(report.rows[2].kind == ModelKind::RandomForest);
  CHECK(trained.size() == 3);
  for (const auto& row : report.rows) {
    CHECK(row.metrics.accuracy >= 0.99);
    CHECK(row.confusion.sum() == static_cast<long>(split.test_rows.size()));
    CHECK(row.metrics.accuracy ==
          static_cast<double>(row.confusion.trace()) / static_cast<double>(row.confusion.sum()));
  }
  CHECK(report.split.test_rows == split.test_rows);
  CHECK(report.split.train_rows == split.train_rows);
  const auto table = render_table(report);
  CHECK(table.find("Random Forest") != std::string::npos);
  CHECK(table.find("Ranking:") != std::string::npos);
}

TEST_CASE("single-model compare has one row and no ranking") {
  const auto ds = generate_synthetic({20, 3, 4.0, 3});
  const auto split = stratified_split(ds.labels, 0.3, 1);
  ModelConfig rf;
  rf.kind = ModelKind::RandomForest;
  rf.forest.n_trees = 10;
  const auto report = compare_models(ds, split, {rf});
  CHECK(report.rows.size() == 1);
  CHECK(report.best_index() == 0);
  CHECK(render_table(report).find("Ranking") == std::string::npos);
  CHECK_THROWS_AS(compare_models(ds, split, {}), Error);
}

TEST_CASE("ranking orders by accuracy then weighted F1") {
  EvaluationReport r;
  for (double acc : {0.90, 0.95, 0.95}) {
    ModelResult m;
    m.metrics.accuracy = acc;
    r.rows.push_back(m);
  }
  r.rows[2].metrics.weighted_f1 = 0.5;
  CHECK(r.best_index() == 2);
  CHECK(r.ranking() == std::vector<int>{2, 1, 0});
  CHECK(EvaluationReport{}.best_index() == -1);
}

TEST_CASE("significance filter and train-only standardization") {
  auto ds = generate_synthetic({30, 4, 3.0, 9});
  // Two pure-noise columns that carry no class information.
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd wide(ds.n_samples(), 6);
  wide.leftCols(4) = ds.features;
  for (Eigen::Index i = 0; i < wide.rows(); ++i) {
    wide(i, 4) = nd(gen);
    wide(i, 5) = 100.0 + nd(gen);
  }
  ds.features = wide;
  ds.feature_names.push_back("noise_a");
  ds.feature_names.push_back("noise_b");
  const auto split = stratified_split(ds.labels, 0.3, 2);

  const auto plain = prepare_split(ds, split, {});
  CHECK(plain.kept_columns.size() == 6);
  const Eigen::RowVectorXd mean = plain.train_standardized.colwise().mean();
  CHECK(mean.cwiseAbs().maxCoeff() < 1e-12);
  // The test partition reuses the training statistics.
  const Eigen::MatrixXd expect =
      (plain.test.features.rowwise() - plain.standardizer.means.transpose()).array().rowwise() /
      plain.standardizer.scales.transpose().array();
  CHECK((plain.test_standardized - expect).cwiseAbs().maxCoeff() < 1e-12);

  const auto filtered = prepare_split(ds, split, {true, 0.05});
  CHECK(filtered.kept_columns.size() >= 4);
  for (Eigen::Index c = 0; c < 4; ++c)
    CHECK(std::find(filtered.kept_columns.begin(), filtered.kept_columns.end(), c) !=
          filtered.kept_columns.end());
  CHECK(filtered.train.n_features() == static_cast<Eigen::Index>(filtered.kept_columns.size()));
}

TEST_CASE("SVM grid search covers the grid and keeps the best point") {
  const auto ds = generate_synthetic({20, 4, 2.0, 6});
  const auto st = fit_standardizer(ds.features);
  const Eigen::MatrixXd x = apply_standardizer(st, ds.features);
  const auto g = grid_search_svm(x, ds.labels, {}, 3, 11);
  REQUIRE(g.points.size() == 12);
  CHECK(g.folds == 3);
  const double g0 = default_gamma(x);
  CHECK(g.points[0].C == 0.1);
  CHECK(g.points[0].gamma == doctest::Approx(0.1 * g0));
  CHECK(g.points[11].C == 100.0);
  CHECK(g.points[11].gamma == doctest::Approx(10.0 * g0));
  double best = -1.0;
  std::size_t at = 0;
  for (std::size_t k = 0; k < g.points.size(); ++k) {
    CHECK((g.points[k].cv_accuracy >= 0.0 && g.points[k].cv_accuracy <= 1.0));
    if (g.points[k].cv_accuracy > best) {
      best = g.points[k].cv_accuracy;
      at = k;
    }
  }
  CHECK(g.best.C == g.points[at].C);
  CHECK(g.best.gamma == g.points[at].gamma);

  const auto again = grid_search_svm(x, ds.labels, {}, 3, 11);
  for (std::size_t k = 0; k < g.points.size(); ++k) CHECK(again.points[k].cv_accuracy == g.points[k].cv_accuracy);

  SvmParams base;
  base.gamma = 2.0;
  CHECK(grid_search_svm(x, ds.labels, base, 3, 11).points[1].gamma == 2.0);
  CHECK_THROWS_AS(grid_search_svm(x, ds.labels, {}, 1, 0), Error);
  CHECK_THROWS_AS(grid_search_svm(x, ds.labels, {}, 25, 0), Error);
}
