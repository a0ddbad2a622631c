#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

namespace emoeeg {

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation
// (modified Lentz) with the symmetry swap for x > (a + 1) / (a + b + 2).
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided tail probability P(|T| >= |t|) of Student's t with `df` degrees
// of freedom (df may be fractional): I_{df / (df + t^2)}(df / 2, 1 / 2).
double student_t_two_sided_p(double t, double df);

struct TTestResult {
  std::string feature_name;
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

// Welch's unequal-variance test with Welch-Satterthwaite degrees of freedom.
// Throws DegenerateVariance when both samples are constant.
TTestResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b,
                         double alpha = 0.05);

// Pearson correlation of two equal-length columns; 0 if either is constant.
template <class DerivedX, class DerivedY>
typename DerivedX::Scalar pearson(const Eigen::MatrixBase<DerivedX>& x,
                                  const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const auto dx = (x.array() - x.mean()).matrix().eval();
  const auto dy = (y.array() - y.mean()).matrix().eval();
  const Scalar sxx = dx.squaredNorm();
  const Scalar syy = dy.squaredNorm();
  if (sxx <= Scalar(0) || syy <= Scalar(0)) return Scalar(0);
  const Scalar r = dx.dot(dy) / std::sqrt(sxx * syy);
  return std::clamp(r, Scalar(-1), Scalar(1));
}

}  // namespace emoeeg
