#pragma once

#include "emoeeg/dataio.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace emoeeg {

// K(u, v) = exp(-gamma * ||u - v||^2)
template <class DerivedU, class DerivedV>
typename DerivedU::Scalar rbf_kernel(const Eigen::MatrixBase<DerivedU>& u,
                                     const Eigen::MatrixBase<DerivedV>& v,
                                     typename DerivedU::Scalar gamma) {
  return std::exp(-gamma * (u - v).squaredNorm());
}

// Full RBF Gram matrix between the rows of a and the rows of b.
Eigen::MatrixXd rbf_gram(const Eigen::Ref<const Eigen::MatrixXd>& a,
                         const Eigen::Ref<const Eigen::MatrixXd>& b, double gamma);

// 1 / (n_features * mean per-feature population variance); 1 if that is zero.
double default_gamma(const Eigen::Ref<const Eigen::MatrixXd>& features);

struct SvmParams {
  double C = 1.0;
  double gamma = 0.0;  // <= 0 selects default_gamma of the training split
  double tol = 1e-3;
  int max_passes = 10;  // cap on full sweeps over the training set
  std::uint64_t seed = 0;  // start offsets of the SMO fallback scans
  bool record_dual = false;

  bool operator==(const SvmParams&) const = default;
};

struct SvmBinaryModel {
  Eigen::MatrixXd support_vectors;  // rows with alpha > 0
  Eigen::VectorXd labels;           // +1 / -1
  Eigen::VectorXd alphas;           // in (0, C]
  double bias = 0.0;
  double gamma = 1.0;
  double C = 1.0;

  Eigen::Index n_features() const { return support_vectors.cols(); }

  // f(x) = sum_i alpha_i y_i K(x_i, x) + b
  double decision_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Eigen::VectorXd decision(const Eigen::Ref<const Eigen::MatrixXd>& features) const;
};

struct SmoDiagnostics {
  Eigen::VectorXd alphas;  // all training multipliers, in input order
  std::vector<double> dual_objective;  // after each accepted pair update (if recorded)
  double final_dual = 0.0;
  long updates = 0;
  int full_passes = 0;
  bool converged = false;
  double max_kkt_violation = 0.0;
};

struct SvmTrainResult {
  SvmBinaryModel model;
  SmoDiagnostics diagnostics;
};

// Platt SMO on the dual
//   max sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij,  0 <= a_i <= C,  sum a_i y_i = 0.
// The second multiplier is the non-bound sample maximizing |E1 - E2|, with
// seeded fallback scans over non-bound then all samples. Training ends when a
// full sweep changes nothing.
SvmTrainResult train_svm_binary(const Eigen::Ref<const Eigen::MatrixXd>& features,
                                const std::vector<int>& signed_labels, const SvmParams& params);

// sgn with sgn(0) = +1.
inline int sgn(double x) { return x < 0.0 ? -1 : 1; }

inline constexpr std::array<std::pair<int, int>, 3> kClassPairs = {{{0, 1}, {0, 2}, {1, 2}}};

struct SvmEnsemble {
  std::array<SvmBinaryModel, 3> models;  // one per kClassPairs entry; first class is +1

  Eigen::Index n_features() const { return models[0].n_features(); }
};

SvmEnsemble train_svm(const Eigen::Ref<const Eigen::MatrixXd>& features,
                      const std::vector<int>& labels, const SvmParams& params = {});

// Majority of the three pairwise votes; a 1-1-1 cycle goes to the vote with
// the largest |f|, then to the lowest class index.
int vote_one_vs_one(const std::array<double, 3>& decisions);

Eigen::MatrixXd svm_decisions(const SvmEnsemble& ensemble,
                              const Eigen::Ref<const Eigen::MatrixXd>& features);

std::vector<int> predict_svm(const SvmEnsemble& ensemble,
                             const Eigen::Ref<const Eigen::MatrixXd>& features);

}  // namespace emoeeg
