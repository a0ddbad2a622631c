#include "emoeeg/logreg.hpp"

#include "emoeeg/errors.hpp"

#include <cmath>

namespace emoeeg {

Eigen::MatrixXd softmax_rows(const Eigen::Ref<const Eigen::MatrixXd>& scores) {
  Eigen::MatrixXd e = (scores.colwise() - scores.rowwise().maxCoeff()).array().exp().matrix();
  return e.array().colwise() / e.rowwise().sum().array();
}

LossAndGradient logreg_objective(const Eigen::Ref<const Eigen::MatrixXd>& weights,
                                 const Eigen::Ref<const Eigen::VectorXd>& biases,
                                 const Eigen::Ref<const Eigen::MatrixXd>& features,
                                 const std::vector<int>& labels, double l2_lambda) {
  const Eigen::Index n = features.rows();
  require(n > 0 && static_cast<Eigen::Index>(labels.size()) == n, ErrorCode::DimensionMismatch,
          "features and labels disagree in length");
  require(features.cols() == weights.cols(), ErrorCode::DimensionMismatch,
          "feature count does not match weights");

  const Eigen::MatrixXd scores = (features * weights.transpose()).rowwise() + biases.transpose();
  const Eigen::VectorXd row_max = scores.rowwise().maxCoeff();
  const Eigen::MatrixXd shifted = scores.colwise() - row_max;
  const Eigen::VectorXd log_norm = shifted.array().exp().rowwise().sum().log().matrix();

  LossAndGradient out;
  Eigen::MatrixXd residual = (shifted.colwise() - log_norm).array().exp().matrix();  // probabilities
  double nll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
    nll -= shifted(i, y) - log_norm(i);
    residual(i, y) -= 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss = nll * inv_n + 0.5 * l2_lambda * weights.squaredNorm();
  out.grad_weights = inv_n * residual.transpose() * features + l2_lambda * weights;
  out.grad_biases = inv_n * residual.colwise().sum().transpose();
  return out;
}

LogRegModel train_logreg(const Eigen::Ref<const Eigen::MatrixXd>& features,
                         const std::vector<int>& labels, const LogRegParams& params) {
  require(params.l2_lambda >= 0.0, ErrorCode::InvalidArgument, "l2_lambda must be >= 0");
  require(params.learning_rate > 0.0, ErrorCode::InvalidArgument, "learning rate must be > 0");
  require(params.max_epochs >= 0, ErrorCode::InvalidArgument, "max_epochs must be >= 0");
  require(features.rows() > 0, ErrorCode::InvalidArgument, "empty training set");
  for (int y : labels) label_name(y);

  LogRegModel model;
  model.l2_lambda = params.l2_lambda;
  model.weights = Eigen::MatrixXd::Zero(kNumClasses, features.cols());
  model.biases = Eigen::VectorXd::Zero(kNumClasses);

  auto current = logreg_objective(model.weights, model.biases, features, labels, params.l2_lambda);
  double rate = params.learning_rate;
  for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
    const double grad_max = std::max(current.grad_weights.cwiseAbs().maxCoeff(),
                                     current.grad_biases.cwiseAbs().maxCoeff());
    if (grad_max < params.tolerance) {
      model.converged = true;
      break;
    }
    bool accepted = false;
    for (int halvings = 0; halvings <= 50 && !accepted; ++halvings) {
      const Eigen::MatrixXd w = model.weights - rate * current.grad_weights;
      const Eigen::VectorXd b = model.biases - rate * current.grad_biases;
      auto trial = logreg_objective(w, b, features, labels, params.l2_lambda);
      if (!std::isfinite(trial.loss)) {
        throw Error(ErrorCode::NonFiniteLoss,
                    "loss became non-finite at epoch " + std::to_string(epoch) +
                        "; reduce the learning rate");
      }
      if (trial.loss <= current.loss) {
        model.weights = w;
        model.biases = b;
        current = std::move(trial);
        accepted = true;
      } else {
        rate *= 0.5;
      }
    }
    if (!accepted) break;  // no descent left at machine precision
    model.training_history.push_back(current.loss);
    model.epochs = epoch + 1;
  }
  if (!model.converged) {
    const double grad_max = std::max(current.grad_weights.cwiseAbs().maxCoeff(),
                                     current.grad_biases.cwiseAbs().maxCoeff());
    model.converged = grad_max < params.tolerance;
  }
  return model;
}

Eigen::MatrixXd predict_proba_logreg(const LogRegModel& model,
                                     const Eigen::Ref<const Eigen::MatrixXd>& features) {
  require(features.cols() == model.n_features(), ErrorCode::DimensionMismatch,
          "model expects " + std::to_string(model.n_features()) + " features, got " +
              std::to_string(features.cols()));
  const Eigen::MatrixXd scores =
      (features * model.weights.transpose()).rowwise() + model.biases.transpose();
  return softmax_rows(scores);
}

std::vector<int> predict_logreg(const LogRegModel& model,
                                const Eigen::Ref<const Eigen::MatrixXd>& features) {
  const Eigen::MatrixXd proba = predict_proba_logreg(model, features);
  std::vector<int> out(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < proba.cols(); ++k) {
      if (proba(i, k) > proba(i, best)) best = k;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace emoeeg
