#pragma once
// Descriptive statistics and two-sample Student t-tests, with the t
// distribution evaluated through the regularized incomplete beta function.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>

#include "errors.hpp"

namespace qontext {

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // n-1 denominator
};

inline double sample_mean(std::span<const double> values) {
  if (values.empty()) throw InsufficientData("mean of an empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

inline std::pair<double, double> sample_mean_std(std::span<const double> values) {
  if (values.size() < 2) throw InsufficientData("standard deviation needs at least two values");
  const double mean = sample_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

inline SampleSummary summarize(std::span<const double> values) {
  auto [mean, sd] = sample_mean_std(values);
  return {values.size(), mean, sd};
}

namespace detail {

inline constexpr int kBetaMaxTerms = 300;
inline constexpr double kBetaRelTolerance = 1e-12;

// Continued fraction for I_x(a, b), modified Lentz. Converges fast for x < (a+1)/(a+b+2).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaMaxTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kBetaRelTolerance) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Two-tailed tail mass P(|T| >= |t|) for T ~ t(df).
inline double student_t_two_tailed(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

inline double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("degrees of freedom must be positive");
  const double tail = 0.5 * student_t_two_tailed(t, df);
  return t >= 0.0 ? 1.0 - tail : tail;
}

struct TTestResult {
  double t = 0.0;
  double df = 0.0;  // integral for the pooled test; fractional for Welch
  double pooled_sd = 0.0;
  double p_two_tailed = 1.0;
  std::pair<double, double> group_means{};
  std::pair<double, double> group_sds{};
};

namespace detail {

inline double t_from(double diff, double se) {
  if (se == 0.0) return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  return diff / se;
}

}  // namespace detail

// Pooled-variance test from group summaries. With equal group sizes the pooled SD is
// sqrt((s1^2 + s2^2) / 2).
inline TTestResult pooled_t_test(const SampleSummary& g1, const SampleSummary& g2) {
  if (g1.n < 2 || g2.n < 2) throw InsufficientData("t-test needs at least two values per group");
  const double n1 = static_cast<double>(g1.n), n2 = static_cast<double>(g2.n);
  TTestResult r;
  r.df = n1 + n2 - 2.0;
  r.pooled_sd = std::sqrt(((n1 - 1.0) * g1.sd * g1.sd + (n2 - 1.0) * g2.sd * g2.sd) / r.df);
  r.t = detail::t_from(g1.mean - g2.mean, r.pooled_sd * std::sqrt(1.0 / n1 + 1.0 / n2));
  r.p_two_tailed = student_t_two_tailed(r.t, r.df);
  r.group_means = {g1.mean, g2.mean};
  r.group_sds = {g1.sd, g2.sd};
  return r;
}

inline TTestResult pooled_t_test(std::span<const double> group1, std::span<const double> group2) {
  if (group1.size() < 2 || group2.size() < 2) throw InsufficientData("t-test needs at least two values per group");
  return pooled_t_test(summarize(group1), summarize(group2));
}

// Welch's unequal-variance test with Welch-Satterthwaite degrees of freedom.
inline TTestResult welch_t_test(std::span<const double> group1, std::span<const double> group2) {
  if (group1.size() < 2 || group2.size() < 2) throw InsufficientData("t-test needs at least two values per group");
  const auto g1 = summarize(group1), g2 = summarize(group2);
  const double v1 = g1.sd * g1.sd / static_cast<double>(g1.n);
  const double v2 = g2.sd * g2.sd / static_cast<double>(g2.n);
  TTestResult r;
  r.t = detail::t_from(g1.mean - g2.mean, std::sqrt(v1 + v2));
  const double denom = v1 * v1 / static_cast<double>(g1.n - 1) + v2 * v2 / static_cast<double>(g2.n - 1);
  r.df = denom > 0.0 ? (v1 + v2) * (v1 + v2) / denom : static_cast<double>(g1.n + g2.n - 2);
  r.pooled_sd = std::sqrt((g1.sd * g1.sd + g2.sd * g2.sd) / 2.0);
  r.p_two_tailed = student_t_two_tailed(r.t, r.df);
  r.group_means = {g1.mean, g2.mean};
  r.group_sds = {g1.sd, g2.sd};
  return r;
}

}  // namespace qontext
