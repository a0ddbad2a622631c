#include "emoeeg/svm.hpp"

#include "emoeeg/errors.hpp"
#include "emoeeg/random.hpp"

#include <algorithm>
#include <cmath>

namespace emoeeg {

Eigen::MatrixXd rbf_gram(const Eigen::Ref<const Eigen::MatrixXd>& a,
                         const Eigen::Ref<const Eigen::MatrixXd>& b, double gamma) {
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd d = (-2.0 * a * b.transpose()).colwise() + na;
  d.rowwise() += nb.transpose();
  return (-gamma * d.array().max(0.0)).exp().matrix();
}

double default_gamma(const Eigen::Ref<const Eigen::MatrixXd>& features) {
  if (features.rows() == 0 || features.cols() == 0) return 1.0;
  const Eigen::RowVectorXd mean = features.colwise().mean();
  const double mean_var =
      (features.rowwise() - mean).array().square().colwise().mean().mean();
  if (!(mean_var > 0.0)) return 1.0;
  return 1.0 / (static_cast<double>(features.cols()) * mean_var);
}

double SvmBinaryModel::decision_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  require(x.size() == n_features(), ErrorCode::DimensionMismatch,
          "model expects " + std::to_string(n_features()) + " features, got " +
              std::to_string(x.size()));
  double f = bias;
  for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
    f += alphas(i) * labels(i) * rbf_kernel(support_vectors.row(i), x, gamma);
  }
  return f;
}

Eigen::VectorXd SvmBinaryModel::decision(const Eigen::Ref<const Eigen::MatrixXd>& features) const {
  require(features.cols() == n_features(), ErrorCode::DimensionMismatch,
          "model expects " + std::to_string(n_features()) + " features, got " +
              std::to_string(features.cols()));
  Eigen::VectorXd out(features.rows());
  for (Eigen::Index r = 0; r < features.rows(); ++r) out(r) = decision_row(features.row(r));
  return out;
}

namespace {

class SmoSolver {
 public:
  SmoSolver(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::VectorXd y, const SvmParams& p,
            double gamma)
      : y_(std::move(y)),
        k_(rbf_gram(x, x, gamma)),
        alpha_(Eigen::VectorXd::Zero(y_.size())),
        f_(Eigen::VectorXd::Zero(y_.size())),
        c_(p.C),
        tol_(p.tol),
        record_(p.record_dual),
        rng_(p.seed) {}

  void run(int max_passes) {
    const Eigen::Index n = y_.size();
    bool examine_all = true;
    long changed = 0;
    // Hard stop against pathological cycling: Platt's loop needs far fewer.
    const long update_cap = 1000 * n + 100000;
    while ((changed > 0 || examine_all) && updates_ < update_cap) {
      changed = 0;
      if (examine_all) {
        if (full_passes_ >= max_passes) break;
        ++full_passes_;
        for (Eigen::Index i = 0; i < n; ++i) changed += examine(i);
      } else {
        for (Eigen::Index i = 0; i < n; ++i) {
          if (non_bound(i)) changed += examine(i);
        }
      }
      if (examine_all) {
        if (changed == 0) {
          converged_ = true;
          break;
        }
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
  }

  SvmTrainResult finish(const Eigen::Ref<const Eigen::MatrixXd>& x, double gamma) const {
    SvmTrainResult out;
    auto& d = out.diagnostics;
    d.alphas = alpha_;
    d.dual_objective = dual_history_;
    d.final_dual = dual_;
    d.updates = updates_;
    d.full_passes = full_passes_;
    d.converged = converged_;
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
      d.max_kkt_violation = std::max(d.max_kkt_violation, kkt_violation(i));
    }

    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < alpha_.size(); ++i) {
      if (alpha_(i) > 0.0) sv.push_back(i);
    }
    auto& m = out.model;
    m.gamma = gamma;
    m.C = c_;
    m.bias = b_;
    m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
    m.labels.resize(static_cast<Eigen::Index>(sv.size()));
    m.alphas.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(k);
      m.support_vectors.row(r) = x.row(sv[k]);
      m.labels(r) = y_(sv[k]);
      m.alphas(r) = alpha_(sv[k]);
    }
    return out;
  }

 private:
  bool non_bound(Eigen::Index i) const { return alpha_(i) > 0.0 && alpha_(i) < c_; }
  double error(Eigen::Index i) const { return f_(i) + b_ - y_(i); }

  double kkt_violation(Eigen::Index i) const {
    const double r = y_(i) * error(i);  // y f(x) - 1
    double v = 0.0;
    if (alpha_(i) < c_) v = std::max(v, -r);
    if (alpha_(i) > 0.0) v = std::max(v, r);
    return v;
  }

  int examine(Eigen::Index i2) {
    if (kkt_violation(i2) <= tol_) return 0;
    const Eigen::Index n = y_.size();
    const double e2 = error(i2);

    Eigen::Index best = -1;
    double best_gap = -1.0;
    long n_non_bound = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!non_bound(i)) continue;
      ++n_non_bound;
      const double gap = std::abs(error(i) - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (n_non_bound > 1 && best >= 0 && take_step(best, i2)) return 1;

    const auto start_nb = static_cast<Eigen::Index>(rng_.below(static_cast<std::uint64_t>(n)));
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index i1 = (start_nb + k) % n;
      if (non_bound(i1) && take_step(i1, i2)) return 1;
    }
    const auto start_all = static_cast<Eigen::Index>(rng_.below(static_cast<std::uint64_t>(n)));
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index i1 = (start_all + k) % n;
      if (take_step(i1, i2)) return 1;
    }
    return 0;
  }

  bool take_step(Eigen::Index i1, Eigen::Index i2) {
    if (i1 == i2) return false;
    constexpr double kEps = 1e-12;
    const double a1_old = alpha_(i1);
    const double a2_old = alpha_(i2);
    const double y1 = y_(i1);
    const double y2 = y_(i2);
    const double e1 = error(i1);
    const double e2 = error(i2);
    const double s = y1 * y2;

    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2_old - a1_old);
      hi = std::min(c_, c_ + a2_old - a1_old);
    } else {
      lo = std::max(0.0, a1_old + a2_old - c_);
      hi = std::min(c_, a1_old + a2_old);
    }
    if (hi - lo < kEps) return false;

    const double k11 = k_(i1, i1);
    const double k12 = k_(i1, i2);
    const double k22 = k_(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;

    double a2;
    if (eta > kEps) {
      a2 = std::clamp(a2_old + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Objective is linear (or degenerate) along the line: pick the better end.
      const double lo_gain = pair_gain(i1, i2, lo);
      const double hi_gain = pair_gain(i1, i2, hi);
      if (lo_gain > hi_gain + kEps) {
        a2 = lo;
      } else if (hi_gain > lo_gain + kEps) {
        a2 = hi;
      } else {
        return false;
      }
    }
    // Multipliers within kEps*C of a bound sit exactly on it.
    const double snap = kEps * c_;
    if (a2 < snap) {
      a2 = 0.0;
    } else if (a2 > c_ - snap) {
      a2 = c_;
    }
    if (std::abs(a2 - a2_old) < kEps * (a2 + a2_old + kEps)) return false;

    double a1 = a1_old + s * (a2_old - a2);
    if (a1 < snap) {
      a2 += s * a1;
      a1 = 0.0;
    } else if (a1 > c_ - snap) {
      a2 += s * (a1 - c_);
      a1 = c_;
    }
    a2 = std::clamp(a2, 0.0, c_);

    const double d1 = a1 - a1_old;
    const double d2 = a2 - a2_old;

    // Dual change: d1 + d2 - (v1 d1 + v2 d2) - 1/2 (Q11 d1^2 + 2 Q12 d1 d2 + Q22 d2^2), v = Q a.
    const double v1 = y1 * f_(i1);
    const double v2 = y2 * f_(i2);
    const double q12 = s * k12;
    dual_ += d1 + d2 - (v1 * d1 + v2 * d2) -
             0.5 * (k11 * d1 * d1 + 2.0 * q12 * d1 * d2 + k22 * d2 * d2);

    const double b1 = b_ - e1 - y1 * d1 * k11 - y2 * d2 * k12;
    const double b2 = b_ - e2 - y1 * d1 * k12 - y2 * d2 * k22;
    if (a1 > 0.0 && a1 < c_) {
      b_ = b1;
    } else if (a2 > 0.0 && a2 < c_) {
      b_ = b2;
    } else {
      b_ = 0.5 * (b1 + b2);
    }

    f_ += (y1 * d1) * k_.col(i1) + (y2 * d2) * k_.col(i2);
    alpha_(i1) = a1;
    alpha_(i2) = a2;
    ++updates_;
    if (record_) dual_history_.push_back(dual_);
    return true;
  }

  // Dual change if alpha_i2 moved to a2 (alpha_i1 following the constraint).
  double pair_gain(Eigen::Index i1, Eigen::Index i2, double a2) const {
    const double s = y_(i1) * y_(i2);
    const double d2 = a2 - alpha_(i2);
    const double d1 = -s * d2;
    const double v1 = y_(i1) * f_(i1);
    const double v2 = y_(i2) * f_(i2);
    return d1 + d2 - (v1 * d1 + v2 * d2) -
           0.5 * (k_(i1, i1) * d1 * d1 + 2.0 * s * k_(i1, i2) * d1 * d2 + k_(i2, i2) * d2 * d2);
  }

  Eigen::VectorXd y_;
  Eigen::MatrixXd k_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd f_;  // sum_j alpha_j y_j K_ij, without the bias
  double b_ = 0.0;
  double c_;
  double tol_;
  bool record_;
  Rng rng_;
  double dual_ = 0.0;
  std::vector<double> dual_history_;
  long updates_ = 0;
  int full_passes_ = 0;
  bool converged_ = false;
};

}  // namespace

SvmTrainResult train_svm_binary(const Eigen::Ref<const Eigen::MatrixXd>& features,
                                const std::vector<int>& signed_labels, const SvmParams& params) {
  const Eigen::Index n = features.rows();
  require(static_cast<Eigen::Index>(signed_labels.size()) == n, ErrorCode::DimensionMismatch,
          "features and labels disagree in length");
  require(params.C > 0.0, ErrorCode::InvalidArgument, "C must be > 0");
  require(params.tol > 0.0, ErrorCode::InvalidArgument, "tol must be > 0");
  require(params.max_passes >= 1, ErrorCode::InvalidArgument, "max_passes must be >= 1");
  Eigen::VectorXd y(n);
  bool has_pos = false;
  bool has_neg = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int v = signed_labels[static_cast<std::size_t>(i)];
    require(v == 1 || v == -1, ErrorCode::InvalidArgument, "binary labels must be +1 or -1");
    y(i) = v;
    (v > 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::SingleClass, "SVM training needs both classes present");
  }
  const double gamma = params.gamma > 0.0 ? params.gamma : default_gamma(features);

  SmoSolver solver(features, std::move(y), params, gamma);
  solver.run(params.max_passes);
  return solver.finish(features, gamma);
}

SvmEnsemble train_svm(const Eigen::Ref<const Eigen::MatrixXd>& features,
                      const std::vector<int>& labels, const SvmParams& params) {
  require(static_cast<Eigen::Index>(labels.size()) == features.rows(),
          ErrorCode::DimensionMismatch, "features and labels disagree in length");
  SvmParams p = params;
  if (p.gamma <= 0.0) p.gamma = default_gamma(features);

  SvmEnsemble ensemble;
  for (std::size_t m = 0; m < kClassPairs.size(); ++m) {
    const auto [pos, neg] = kClassPairs[m];
    std::vector<Eigen::Index> rows;
    std::vector<int> y;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == pos || labels[i] == neg) {
        rows.push_back(static_cast<Eigen::Index>(i));
        y.push_back(labels[i] == pos ? 1 : -1);
      }
    }
    Eigen::MatrixXd subset(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      subset.row(static_cast<Eigen::Index>(k)) = features.row(rows[k]);
    }
    p.seed = derive_seed(params.seed, m);
    ensemble.models[m] = train_svm_binary(subset, y, p).model;
  }
  return ensemble;
}

int vote_one_vs_one(const std::array<double, 3>& decisions) {
  std::array<int, kNumClasses> votes{};
  std::array<int, 3> winner{};
  for (std::size_t m = 0; m < 3; ++m) {
    const auto [pos, neg] = kClassPairs[m];
    winner[m] = sgn(decisions[m]) > 0 ? pos : neg;
    ++votes[static_cast<std::size_t>(winner[m])];
  }
  for (int c = 0; c < kNumClasses; ++c) {
    if (votes[static_cast<std::size_t>(c)] >= 2) return c;
  }
  // 1-1-1 cycle.
  int best = -1;
  double best_margin = -1.0;
  for (std::size_t m = 0; m < 3; ++m) {
    const double margin = std::abs(decisions[m]);
    if (margin > best_margin || (margin == best_margin && winner[m] < best)) {
      best_margin = margin;
      best = winner[m];
    }
  }
  return best;
}

Eigen::MatrixXd svm_decisions(const SvmEnsemble& ensemble,
                              const Eigen::Ref<const Eigen::MatrixXd>& features) {
  Eigen::MatrixXd out(features.rows(), 3);
  for (std::size_t m = 0; m < 3; ++m) {
    const auto& model = ensemble.models[m];
    require(features.cols() == model.n_features(), ErrorCode::DimensionMismatch,
            "model expects " + std::to_string(model.n_features()) + " features, got " +
                std::to_string(features.cols()));
    const Eigen::MatrixXd k = rbf_gram(features, model.support_vectors, model.gamma);
    out.col(static_cast<Eigen::Index>(m)) =
        (k * model.alphas.cwiseProduct(model.labels)).array() + model.bias;
  }
  return out;
}

std::vector<int> predict_svm(const SvmEnsemble& ensemble,
                             const Eigen::Ref<const Eigen::MatrixXd>& features) {
  const Eigen::MatrixXd d = svm_decisions(ensemble, features);
  std::vector<int> out(static_cast<std::size_t>(d.rows()));
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = vote_one_vs_one({d(i, 0), d(i, 1), d(i, 2)});
  }
  return out;
}

}  // namespace emoeeg
