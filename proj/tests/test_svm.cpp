#include "doctest.h"

#include "oracles.hpp"

#include "emoeeg/dataio.hpp"
#include "emoeeg/errors.hpp"
#include "emoeeg/featext.hpp"
#include "emoeeg/random.hpp"
#include "emoeeg/svm.hpp"

#include <cmath>

using namespace emoeeg;

namespace {

struct Binary {
  Eigen::MatrixXd x;
  std::vector<int> y;
  Eigen::VectorXd yv;
};

Binary noisy_binary(int n, int d, double shift, std::uint64_t seed) {
  Rng rng(seed);
  Binary p;
  p.x.resize(n, d);
  p.yv.resize(n);
  for (int i = 0; i < n; ++i) {
    const int label = i % 2 ? 1 : -1;
    for (int j = 0; j < d; ++j) p.x(i, j) = rng.normal() + (j == 0 ? shift * label : 0.0);
    p.y.push_back(label);
    p.yv(i) = label;
  }
  return p;
}

}  // namespace

TEST_CASE("2-point problem: symmetric multipliers and midway boundary") {
  Eigen::MatrixXd x(2, 2);
  x << 0, 0, 1, 0;
  const std::vector<int> y = {1, -1};
  SvmParams p;
  p.C = 1e3;
  p.gamma = 1.0;
  p.tol = 1e-9;
  const auto r = train_svm_binary(x, y, p);
  const Eigen::VectorXd& a = r.diagnostics.alphas;

  // Brute force over the feasible line a1 = a2 = t (sum a y = 0): golden section.
  const Eigen::Vector2d yv(1, -1);
  auto dual = [&](double t) { return oracles::svm_dual(x, yv, Eigen::Vector2d(t, t), 1.0); };
  double lo = 0.0, hi = p.C;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    (dual(m1) < dual(m2) ? lo : hi) = dual(m1) < dual(m2) ? m1 : m2;
  }
  const double t_star = 0.5 * (lo + hi);
  CHECK(t_star == doctest::Approx(1.0 / (1.0 - std::exp(-1.0))).epsilon(1e-8));
  CHECK(a(0) == doctest::Approx(t_star).epsilon(1e-6));
  CHECK(a(1) == doctest::Approx(t_star).epsilon(1e-6));
  CHECK(std::abs(r.model.decision_row(Eigen::RowVector2d(0.5, 0.0))) < 1e-6);
  CHECK(r.model.decision_row(Eigen::RowVector2d(0.0, 0.0)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.model.decision_row(Eigen::RowVector2d(1.0, 0.0)) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("XOR is separated and the dual beats a brute-force grid") {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 1, 0, 1, 1, 0;
  const std::vector<int> y = {1, 1, -1, -1};
  const Eigen::Vector4d yv(1, 1, -1, -1);
  SvmParams p;
  p.C = 2.0;
  p.gamma = 1.0;
  p.tol = 1e-8;
  const auto r = train_svm_binary(x, y, p);
  const auto f = r.model.decision(x);
  for (int i = 0; i < 4; ++i) CHECK(sgn(f(i)) == y[static_cast<std::size_t>(i)]);

  // Grid over (a1, a2, a3) with a4 = a1 + a2 - a3 from the equality constraint.
  double best = -1e300;
  const int steps = 40;
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j <= steps; ++j)
      for (int k = 0; k <= steps; ++k) {
        const Eigen::Vector4d a(p.C * i / steps, p.C * j / steps, p.C * k / steps,
                                p.C * (i + j - k) / steps);
        if (a(3) < 0.0 || a(3) > p.C) continue;
        best = std::max(best, oracles::svm_dual(x, yv, a, 1.0));
      }
  const double solver = oracles::svm_dual(x, yv, r.diagnostics.alphas, 1.0);
  CHECK(solver >= best - 1e-9);
  CHECK(r.diagnostics.final_dual == doctest::Approx(solver).epsilon(1e-10));
}

TEST_CASE("single support vector decision equals the kernel at itself") {
  SvmBinaryModel m;
  m.support_vectors = Eigen::MatrixXd(1, 3);
  m.support_vectors << 0.3, -1.0, 2.0;
  m.labels = Eigen::VectorXd::Ones(1);
  m.alphas = Eigen::VectorXd::Ones(1);
  m.bias = 0.0;
  m.gamma = 0.7;
  CHECK(m.decision_row(m.support_vectors.row(0)) == 1.0);
  CHECK(sgn(m.decision_row(m.support_vectors.row(0))) == 1);
  CHECK_THROWS_AS(m.decision_row(Eigen::RowVector2d(1, 2)), Error);
}

TEST_CASE("SMO invariants on noisy data") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const auto prob = noisy_binary(120, 4, 0.8, seed);
    SvmParams p;
    p.record_dual = true;
    p.seed = seed;
    const auto r = train_svm_binary(prob.x, prob.y, p);
    const auto& d = r.diagnostics;
    CHECK(d.converged);
    REQUIRE(!d.dual_objective.empty());
    for (std::size_t i = 1; i < d.dual_objective.size(); ++i) {
      CHECK(d.dual_objective[i] >= d.dual_objective[i - 1]);
    }
    CHECK(std::abs(d.alphas.dot(prob.yv)) <= 1e-8);
    CHECK(d.alphas.minCoeff() >= 0.0);
    CHECK(d.alphas.maxCoeff() <= p.C);
    const double gamma = r.model.gamma;
    CHECK(gamma == doctest::Approx(default_gamma(prob.x)));
    CHECK(oracles::svm_kkt_violations(prob.x, prob.yv, d.alphas, r.model.bias, p.C, gamma).maxCoeff() <= p.tol + 1e-9);
    CHECK(d.max_kkt_violation <= p.tol);
    // The incremental dual agrees with a from-scratch evaluation.
    CHECK(d.final_dual == doctest::Approx(oracles::svm_dual(prob.x, prob.yv, d.alphas, gamma)).epsilon(1e-9));
    // Only positive multipliers are kept.
    CHECK(r.model.alphas.minCoeff() > 0.0);
    CHECK(r.model.support_vectors.rows() == (d.alphas.array() > 0.0).count());
  }
}

TEST_CASE("default gamma uses the mean feature variance") {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 2, 0, 0, 4, 2, 4;
  // Population variances 1 and 4: gamma = 1 / (2 * 2.5).
  CHECK(default_gamma(x) == doctest::Approx(0.2));
}

TEST_CASE("feature rescaling with compensated gamma keeps predictions") {
  const auto ds = generate_synthetic({30, 3, 3.0, 9});
  const double s = 7.5;
  SvmParams p;
  p.gamma = 0.4;
  const auto a = train_svm(ds.features, ds.labels, p);
  SvmParams q = p;
  q.gamma = p.gamma / (s * s);
  const Eigen::MatrixXd scaled = s * ds.features;
  const auto b = train_svm(scaled, ds.labels, q);
  const auto probe = generate_synthetic({20, 3, 3.0, 10});
  CHECK(predict_svm(a, probe.features) == predict_svm(b, s * probe.features));
}

TEST_CASE("one-vs-one voting rules") {
  CHECK(sgn(0.0) == 1);
  CHECK(sgn(-0.3) == -1);
  // Pair order (0,1), (0,2), (1,2); positive decision means the first class.
  CHECK(vote_one_vs_one({0.5, 0.4, 0.7}) == 0);
  CHECK(vote_one_vs_one({-0.3, -0.2, 0.1}) == 1);
  CHECK(vote_one_vs_one({-0.3, -0.2, -0.1}) == 2);
  // Circular tie: 0 beats 1, 2 beats 0, 1 beats 2.
  CHECK(vote_one_vs_one({0.9, -0.2, 0.2}) == 0);
  CHECK(vote_one_vs_one({0.2, -0.9, 0.2}) == 2);
  CHECK(vote_one_vs_one({0.2, -0.2, 0.9}) == 1);
  // Equal margins fall back to the lowest class index.
  CHECK(vote_one_vs_one({0.5, -0.5, 0.5}) == 0);
  CHECK(vote_one_vs_one({-0.5, 0.5, -0.5}) == 0);
}

TEST_CASE("ensemble predictions equal brute-force vote counting") {
  const auto ds = generate_synthetic({40, 4, 2.5, 12});
  const auto s = fit_standardizer(ds.features);
  const Eigen::MatrixXd x = apply_standardizer(s, ds.features);
  const auto e = train_svm(x, ds.labels);
  const auto pred = predict_svm(e, x);
  const Eigen::MatrixXd dec = svm_decisions(e, x);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::array<int, 3> votes{};
    for (std::size_t k = 0; k < 3; ++k) {
      const double f = e.models[k].decision_row(x.row(r));
      CHECK(f == doctest::Approx(dec(r, static_cast<Eigen::Index>(k))).epsilon(1e-12));
      ++votes[static_cast<std::size_t>(f >= 0.0 ? kClassPairs[k].first : kClassPairs[k].second)];
    }
    const int top = *std::max_element(votes.begin(), votes.end());
    if (top >= 2) {
      CHECK(pred[static_cast<std::size_t>(r)] ==
            static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin()));
    }
  }
}

TEST_CASE("separable synthetic data and row permutation") {
  const auto train = generate_synthetic({50, 3, 10.0, 7});
  const auto fresh = generate_synthetic({50, 3, 10.0, 8});
  const auto st = fit_standardizer(train.features);
  const auto e = train_svm(apply_standardizer(st, train.features), train.labels);
  const auto pred = predict_svm(e, apply_standardizer(st, fresh.features));
  int hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == fresh.labels[i];
  CHECK(hit >= 149);

  const Eigen::MatrixXd rev = apply_standardizer(st, fresh.features).colwise().reverse();
  const auto flipped = predict_svm(e, rev);
  for (std::size_t i = 0; i < pred.size(); ++i) CHECK(flipped[pred.size() - 1 - i] == pred[i]);
}

TEST_CASE("SVM error paths") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 2);
  try {
    train_svm_binary(x, {1, 1, 1, 1}, {});
    FAIL("expected SingleClass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingleClass);
  }
  CHECK_THROWS_AS(train_svm_binary(x, {1, -1, 1}, {}), Error);
  CHECK_THROWS_AS(train_svm(x, {0, 0, 1, 1}), Error);  // class 2 missing
  const auto ds = generate_synthetic({10, 2, 3.0, 1});
  const auto e = train_svm(ds.features, ds.labels);
  CHECK_THROWS_AS(predict_svm(e, Eigen::MatrixXd::Ones(2, 3)), Error);
}
