#include "emoeeg/analysis.hpp"

#include "emoeeg/errors.hpp"
#include "emoeeg/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace emoeeg {

namespace {

constexpr double kProbFloor = 1e-12;

Eigen::MatrixXd squared_distances(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  const Eigen::VectorXd norms = x.rowwise().squaredNorm();
  Eigen::MatrixXd d = (-2.0 * x * x.transpose()).colwise() + norms;
  d.rowwise() += norms.transpose();
  d = d.cwiseMax(0.0);
  d.diagonal().setZero();
  return d;
}

// Conditional row for precision beta, shifted by the smallest off-diagonal
// distance so exp() never underflows to an all-zero row.
double conditional_row(const Eigen::Ref<const Eigen::RowVectorXd>& dist, Eigen::Index self,
                       double beta, double min_dist, Eigen::RowVectorXd& row) {
  double sum = 0.0;
  double weighted = 0.0;
  for (Eigen::Index j = 0; j < dist.size(); ++j) {
    if (j == self) {
      row(j) = 0.0;
      continue;
    }
    const double shifted = dist(j) - min_dist;
    const double v = std::exp(-beta * shifted);
    row(j) = v;
    sum += v;
    weighted += shifted * v;
  }
  row /= sum;
  // Shannon entropy in nats: log(sum) + beta * E[shifted distance].
  return (std::log(sum) + beta * weighted / sum) / std::numbers::ln2;
}

double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  double kl = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      if (i == j || p(i, j) <= 0.0) continue;
      kl += p(i, j) * std::log(p(i, j) / std::max(q(i, j), kProbFloor));
    }
  }
  return kl;
}

}  // namespace

Affinities tsne_affinities(const Eigen::Ref<const Eigen::MatrixXd>& features, double perplexity) {
  const Eigen::Index n = features.rows();
  require(n >= 4, ErrorCode::InvalidArgument, "t-SNE needs at least 4 samples");
  require(perplexity > 0.0 && perplexity < static_cast<double>(n - 1) / 3.0,
          ErrorCode::InfeasiblePerplexity,
          "perplexity " + std::to_string(perplexity) + " infeasible for n = " + std::to_string(n) +
              " (must be < " + std::to_string(static_cast<double>(n - 1) / 3.0) + ")");

  const Eigen::MatrixXd dist = squared_distances(features);
  const double target = std::log2(perplexity);
  constexpr double kTol = 1e-5;
  constexpr int kMaxSteps = 200;

  Affinities out;
  Eigen::MatrixXd cond(n, n);
  Eigen::RowVectorXd row(n);
  out.row_entropy_bits.resize(n);
  out.row_beta.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double min_dist = std::numeric_limits<double>::infinity();
    double max_dist = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      min_dist = std::min(min_dist, dist(i, j));
      max_dist = std::max(max_dist, dist(i, j));
    }
    // Bracket on beta scaled to the distance spread so the search starts sane.
    const double spread = std::max(max_dist - min_dist, 1e-12);
    double beta = 1.0 / spread;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double h = conditional_row(dist.row(i), i, beta, min_dist, row);
    for (int step = 0; step < kMaxSteps && std::abs(h - target) > kTol; ++step) {
      if (h > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
      h = conditional_row(dist.row(i), i, beta, min_dist, row);
    }
    cond.row(i) = row;
    out.row_entropy_bits(i) = h;
    out.row_beta(i) = beta;
  }
  out.joint = (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
  return out;
}

Embedding2D tsne_embed(const Eigen::Ref<const Eigen::MatrixXd>& features, const TsneParams& params,
                       std::vector<int> labels) {
  require(params.iterations >= 1, ErrorCode::InvalidArgument, "t-SNE needs >= 1 iteration");
  const Eigen::Index n = features.rows();
  require(labels.empty() || static_cast<Eigen::Index>(labels.size()) == n,
          ErrorCode::DimensionMismatch, "label count does not match rows");
  const Affinities aff = tsne_affinities(features, params.perplexity);
  const Eigen::MatrixXd& p = aff.joint;

  Rng rng(params.seed);
  Eigen::MatrixX2d y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i, 0) = params.init_stddev * rng.normal();
    y(i, 1) = params.init_stddev * rng.normal();
  }
  Eigen::MatrixX2d update = Eigen::MatrixX2d::Zero(n, 2);
  Eigen::MatrixX2d gains = Eigen::MatrixX2d::Ones(n, 2);
  Eigen::MatrixXd num(n, n);
  Eigen::MatrixXd q(n, n);

  auto compute_q = [&]() {
    const Eigen::VectorXd norms = y.rowwise().squaredNorm();
    num = (-2.0 * y * y.transpose()).colwise() + norms;
    num.rowwise() += norms.transpose();
    num = (1.0 + num.array().max(0.0)).inverse().matrix();
    num.diagonal().setZero();
    q = num / num.sum();
  };

  Embedding2D out;
  out.perplexity = params.perplexity;
  bool initial_recorded = false;
  for (int it = 0; it < params.iterations; ++it) {
    const bool exaggerating = it < params.exaggeration_iterations;
    if (!exaggerating && !initial_recorded) {
      compute_q();
      out.initial_kl = kl_divergence(p, q);
      initial_recorded = true;
    }
    compute_q();
    const double exaggeration = exaggerating ? params.early_exaggeration : 1.0;
    const Eigen::MatrixXd pq = ((exaggeration * p - q).array() * num.array()).matrix();
    const Eigen::MatrixX2d grad =
        4.0 * (pq.rowwise().sum().asDiagonal() * y - pq * y);

    const double momentum =
        it < params.momentum_switch_iteration ? params.initial_momentum : params.final_momentum;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = 0; k < 2; ++k) {
        const bool same_sign = (grad(i, k) > 0.0) == (update(i, k) > 0.0);
        gains(i, k) = same_sign ? std::max(gains(i, k) * 0.8, 0.01) : gains(i, k) + 0.2;
      }
    }
    update = momentum * update - params.learning_rate * gains.cwiseProduct(grad);
    y += update;
    y.rowwise() -= y.colwise().mean();
  }
  compute_q();
  out.final_kl = kl_divergence(p, q);
  if (!initial_recorded) out.initial_kl = out.final_kl;
  out.coordinates = y;
  out.labels = std::move(labels);
  return out;
}

}  // namespace emoeeg
