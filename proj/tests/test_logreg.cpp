#include "doctest.h"

#include "oracles.hpp"

#include "emoeeg/dataio.hpp"
#include "emoeeg/errors.hpp"
#include "emoeeg/featext.hpp"
#include "emoeeg/logreg.hpp"
#include "emoeeg/random.hpp"

#include <cmath>

using namespace emoeeg;

namespace {

struct Problem {
  Eigen::MatrixXd x;
  std::vector<int> y;
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
};

Problem random_problem(Rng& rng, int n, int d) {
  Problem p;
  p.x.resize(n, d);
  for (Eigen::Index i = 0; i < p.x.size(); ++i) p.x.data()[i] = rng.normal();
  for (int i = 0; i < n; ++i) p.y.push_back(static_cast<int>(rng.below(3)));
  p.w.resize(3, d);
  for (Eigen::Index i = 0; i < p.w.size(); ++i) p.w.data()[i] = rng.normal();
  p.b = Eigen::VectorXd(3);
  for (int k = 0; k < 3; ++k) p.b(k) = rng.normal();
  return p;
}

double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("sigmoid values and stability") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(2.0) == doctest::Approx(0.880797).epsilon(1e-6));
  for (double x = -30.0; x <= 30.0; x += 0.25) {
    CHECK(std::abs(sigmoid(x) + sigmoid(-x) - 1.0) <= 1e-12);
  }
  CHECK(sigmoid(700.0) == 1.0);
  CHECK(sigmoid(-700.0) >= 0.0);
  CHECK(std::isfinite(sigmoid(-700.0)));
  CHECK(std::isfinite(sigmoid(-1e6)));
  const Eigen::ArrayXd xs = Eigen::ArrayXd::LinSpaced(5, -2.0, 2.0);
  const Eigen::ArrayXd s = sigmoid(xs);
  CHECK(s(2) == 0.5);
  CHECK(s(4) == doctest::Approx(0.880797).epsilon(1e-6));
  CHECK(sigmoid(0.0f) == 0.5f);
}

TEST_CASE("softmax rows are normalized") {
  Rng rng(1);
  Eigen::MatrixXd s(50, 3);
  for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = 200.0 * rng.normal();
  const Eigen::MatrixXd p = softmax_rows(s);
  CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9);
  CHECK(p.minCoeff() >= 0.0);
}

TEST_CASE("objective equals the reference cross-entropy") {
  Rng rng(2);
  const auto p = random_problem(rng, 7, 4);
  const auto lg = logreg_objective(p.w, p.b, p.x, p.y, 0.3);
  CHECK(lg.loss == doctest::Approx(oracles::reference_loss(p.x, p.y, p.w, p.b, 0.3)).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central differences on 20 problems") {
  Rng rng(20);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(6));
    const int d = 2 + static_cast<int>(rng.below(4));
    const double lambda = trial % 2 ? 0.0 : 0.1 * (1 + trial);
    const auto p = random_problem(rng, n, d);
    const auto lg = logreg_objective(p.w, p.b, p.x, p.y, lambda);
    for (Eigen::Index k = 0; k < 3; ++k) {
      for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::MatrixXd wp = p.w, wm = p.w;
        wp(k, j) += eps;
        wm(k, j) -= eps;
        const double num = (oracles::reference_loss(p.x, p.y, wp, p.b, lambda) - oracles::reference_loss(p.x, p.y, wm, p.b, lambda)) / (2 * eps);
        worst = std::max(worst, rel_err(lg.grad_weights(k, j), num));
      }
      Eigen::VectorXd bp = p.b, bm = p.b;
      bp(k) += eps;
      bm(k) -= eps;
      const double num = (oracles::reference_loss(p.x, p.y, p.w, bp, lambda) - oracles::reference_loss(p.x, p.y, p.w, bm, lambda)) / (2 * eps);
      worst = std::max(worst, rel_err(lg.grad_biases(k), num));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("separable synthetic data: train and fresh-draw accuracy") {
  const auto train = generate_synthetic({100, 2, 10.0, 7});
  const auto fresh = generate_synthetic({100, 2, 10.0, 8});
  const auto s = fit_standardizer(train.features);
  const auto model = train_logreg(apply_standardizer(s, train.features), train.labels);
  auto accuracy = [](const std::vector<int>& a, const std::vector<int>& b) {
    int hit = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
    return static_cast<double>(hit) / static_cast<double>(a.size());
  };
  CHECK(accuracy(predict_logreg(model, apply_standardizer(s, train.features)), train.labels) >= 0.99);
  CHECK(accuracy(predict_logreg(model, apply_standardizer(s, fresh.features)), fresh.labels) >= 0.98);
  CHECK(model.epochs > 0);
  CHECK(model.weights.allFinite());
}

TEST_CASE("loss history is non-increasing") {
  const auto ds = generate_synthetic({40, 5, 2.0, 3});
  const auto model = train_logreg(ds.features, ds.labels, {1e-3, 5.0, 300, 1e-9});
  REQUIRE(model.training_history.size() > 10);
  for (std::size_t i = 1; i < model.training_history.size(); ++i) {
    CHECK(model.training_history[i] <= model.training_history[i - 1]);
  }
}

TEST_CASE("convergence flag follows the gradient tolerance") {
  const auto ds = generate_synthetic({30, 3, 1.0, 4});
  const auto model = train_logreg(ds.features, ds.labels, {1e-2, 0.5, 5000, 1e-6});
  CHECK(model.converged);
  const auto lg = logreg_objective(model.weights, model.biases, ds.features, ds.labels, 1e-2);
  CHECK(lg.grad_weights.cwiseAbs().maxCoeff() < 1e-6);
  CHECK(lg.grad_biases.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("strong L2 shrinks weights to zero") {
  const auto ds = generate_synthetic({30, 4, 10.0, 5});
  const auto model = train_logreg(ds.features, ds.labels, {1e6, 0.1, 500, 1e-5});
  CHECK(model.weights.norm() < 1e-3);
  const Eigen::MatrixXd p = predict_proba_logreg(model, ds.features);
  // Balanced classes: the prior is uniform.
  CHECK((p.array() - 1.0 / 3.0).abs().maxCoeff() < 0.05);
}

TEST_CASE("zero model predicts uniform probabilities and label 0") {
  LogRegModel m;
  m.weights = Eigen::MatrixXd::Zero(3, 2);
  m.biases = Eigen::VectorXd::Zero(3);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 2);
  const Eigen::MatrixXd p = predict_proba_logreg(m, x);
  CHECK((p.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
  CHECK(predict_logreg(m, x) == std::vector<int>(4, 0));
  CHECK_THROWS_AS(predict_logreg(m, Eigen::MatrixXd::Ones(2, 3)), Error);
}

TEST_CASE("row permutation permutes predictions") {
  const auto ds = generate_synthetic({20, 3, 3.0, 6});
  const auto model = train_logreg(ds.features, ds.labels);
  const auto base = predict_logreg(model, ds.features);
  Eigen::MatrixXd rev = ds.features.colwise().reverse();
  const auto flipped = predict_logreg(model, rev);
  for (std::size_t i = 0; i < base.size(); ++i) CHECK(flipped[base.size() - 1 - i] == base[i]);
}

TEST_CASE("non-finite loss is reported") {
  const auto ds = generate_synthetic({10, 2, 1.0, 1});
  const Eigen::MatrixXd huge = ds.features * 1e308;
  try {
    train_logreg(huge, ds.labels, {0.0, 1.0, 10, 1e-12});
    FAIL("expected NonFiniteLoss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteLoss);
  }
  CHECK_THROWS_AS(train_logreg(ds.features, ds.labels, {-1.0, 0.1, 10, 1e-5}), Error);
}
