#pragma once

#include "emoeeg/dataio.hpp"

#include <Eigen/Core>

#include <cmath>
#include <concepts>
#include <vector>

namespace emoeeg {

// Logistic function 1 / (1 + e^-x), evaluated without overflow for any finite x.
template <std::floating_point Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <class Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return sigmoid(v); });
}

// Row-wise softmax of class scores (n x k), shifted by the row max.
Eigen::MatrixXd softmax_rows(const Eigen::Ref<const Eigen::MatrixXd>& scores);

struct LogRegParams {
  double l2_lambda = 1e-3;
  double learning_rate = 0.1;
  int max_epochs = 500;
  double tolerance = 1e-5;

  bool operator==(const LogRegParams&) const = default;
};

struct LogRegModel {
  Eigen::MatrixXd weights;  // n_classes x n_features
  Eigen::VectorXd biases;   // n_classes
  double l2_lambda = 0.0;
  std::vector<double> training_history;  // loss after each accepted epoch
  int epochs = 0;
  bool converged = false;

  Eigen::Index n_features() const { return weights.cols(); }
};

struct LossAndGradient {
  double loss = 0.0;
  Eigen::MatrixXd grad_weights;
  Eigen::VectorXd grad_biases;
};

// Mean cross-entropy over rows plus (lambda / 2) * ||W||_F^2 (biases are not
// penalized), with its exact gradient.
LossAndGradient logreg_objective(const Eigen::Ref<const Eigen::MatrixXd>& weights,
                                 const Eigen::Ref<const Eigen::VectorXd>& biases,
                                 const Eigen::Ref<const Eigen::MatrixXd>& features,
                                 const std::vector<int>& labels, double l2_lambda);

// Full-batch gradient descent from zero weights. A step that raises the loss
// is retried at half the learning rate, so the history is non-increasing.
// Stops once the gradient max-norm drops below tolerance.
LogRegModel train_logreg(const Eigen::Ref<const Eigen::MatrixXd>& features,
                         const std::vector<int>& labels, const LogRegParams& params = {});

Eigen::MatrixXd predict_proba_logreg(const LogRegModel& model,
                                     const Eigen::Ref<const Eigen::MatrixXd>& features);

// argmax of the class probabilities, lowest index on exact ties.
std::vector<int> predict_logreg(const LogRegModel& model,
                                const Eigen::Ref<const Eigen::MatrixXd>& features);

}  // namespace emoeeg
