#include "emoeeg/stats.hpp"

#include "emoeeg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace emoeeg {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, ErrorCode::InvalidArgument, "beta parameters must be positive");
  require(x >= 0.0 && x <= 1.0, ErrorCode::InvalidArgument, "x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  require(df > 0.0, ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  // x = df / (df + t^2) loses precision for small t; use 1 - x = t^2 / (df + t^2) there.
  const double x = df / (df + t2);
  double p;
  if (x > 0.5) {
    p = 1.0 - regularized_incomplete_beta(0.5, df / 2.0, t2 / (df + t2));
  } else {
    p = regularized_incomplete_beta(df / 2.0, 0.5, x);
  }
  return std::clamp(p, 0.0, 1.0);
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b, double alpha) {
  require(a.size() >= 2 && b.size() >= 2, ErrorCode::InvalidArgument,
          "each sample needs at least two values");
  auto moments = [](std::span<const double> s) {
    const Eigen::Map<const Eigen::VectorXd> v(s.data(), static_cast<Eigen::Index>(s.size()));
    const double mean = v.mean();
    const double var = (v.array() - mean).square().sum() / static_cast<double>(s.size() - 1);
    return std::pair{mean, var};
  };
  const auto [mean_a, var_a] = moments(a);
  const auto [mean_b, var_b] = moments(b);
  if (var_a <= 0.0 && var_b <= 0.0) {
    throw Error(ErrorCode::DegenerateVariance, "both samples have zero variance");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sa = var_a / na;
  const double sb = var_b / nb;
  const double se2 = sa + sb;

  TTestResult r;
  r.t_statistic = (mean_a - mean_b) / std::sqrt(se2);
  r.degrees_of_freedom = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p_value = student_t_two_sided_p(r.t_statistic, r.degrees_of_freedom);
  r.significant = r.p_value < alpha;
  return r;
}

}  // namespace emoeeg
