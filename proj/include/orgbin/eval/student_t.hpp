#pragma once

// Student-t tail probabilities via the regularized incomplete beta function,
// and the paired one-tailed t-test used for significance stars.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "orgbin/common.hpp"

namespace orgbin::eval {

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz. Converges quickly for
// x < (a + 1) / (a + b + 2).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw RuntimeFailure("incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b) for a, b > 0 and 0 <= x <= 1.
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DataError("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw DataError("incomplete_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// P(T > t) for Student's t with `df` degrees of freedom.
inline double student_t_upper_tail(double t, double df) {
  if (!(df > 0.0)) throw DataError("student_t: degrees of freedom must be positive");
  if (std::isnan(t)) throw DataError("student_t: t is NaN");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double x = df / (df + t * t);
  const double half = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t >= 0.0 ? half : 1.0 - half;
}

struct TTestResult {
  double t = 0.0;
  double p = 0.5;  // one-tailed, alternative mean(a - b) > 0
};

// Paired one-tailed test on matched fold scores. Zero-variance differences:
// all zero gives (0, 0.5); a nonzero constant gives (+-inf, 0 or 1).
inline TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("paired_ttest: score lists differ in length");
  if (a.size() < 2) throw DataError("paired_ttest: need at least two pairs");
  const std::size_t k = a.size();
  std::vector<double> d(k);
  for (std::size_t i = 0; i < k; ++i) d[i] = a[i] - b[i];
  if (std::all_of(d.begin(), d.end(), [&](double v) { return v == d[0]; })) {
    if (d[0] == 0.0) return {0.0, 0.5};
    const double inf = std::numeric_limits<double>::infinity();
    return d[0] > 0.0 ? TTestResult{inf, 0.0} : TTestResult{-inf, 1.0};
  }
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(k);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(k - 1));
  TTestResult r;
  r.t = mean * std::sqrt(static_cast<double>(k)) / sd;
  r.p = student_t_upper_tail(r.t, static_cast<double>(k - 1));
  return r;
}

// "***" for p < 0.001, "**" for p < 0.01, "*" for p < 0.05, otherwise "".
inline std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

}  // namespace orgbin::eval
