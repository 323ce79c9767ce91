#pragma once
// Classical total-probability prediction, the interference coefficient that
// solves the quantum-like total-probability formula
//
//   p(A=x) = sum_y p(B=y) p(A=x|B=y) + 2 sqrt(prod_y p(B=y) p(A=x|B=y)) cos(theta(x)),
//
// and classification of the resulting context effect.

#include <cmath>
#include <optional>
#include <string_view>

#include "errors.hpp"
#include "estimator.hpp"

namespace qontext {

enum class ContextEffect { Trigonometric, Hyperbolic, SingularConsistent, SingularInconsistent };

inline constexpr std::string_view to_string(ContextEffect c) {
  switch (c) {
    case ContextEffect::Trigonometric: return "trigonometric";
    case ContextEffect::Hyperbolic: return "hyperbolic";
    case ContextEffect::SingularConsistent: return "singular_consistent";
    case ContextEffect::SingularInconsistent: return "singular_inconsistent";
  }
  return "trigonometric";
}

// |residual| below this counts as a zero residual when the denominator vanishes.
inline constexpr double kSingularResidualTolerance = 1e-9;

struct InterferenceResult {
  Outcome outcome = Outcome::Plus;
  double classical_prediction = 0.0;
  double residual = 0.0;     // p(A=x) - classical_prediction
  double denominator = 0.0;  // 2 sqrt(p(B=+)p(A=x|B=+)p(B=-)p(A=x|B=-))
  std::optional<double> lambda;
  std::optional<double> phase_rad;
  ContextEffect classification = ContextEffect::Trigonometric;
};

namespace detail {

// p(B=y) p(A=x|B=y); an undefined conditional is allowed only with zero weight.
inline double weighted_term(const ContextualStatistics& s, Outcome x, Outcome y) {
  const double weight = s.p_b(y);
  const auto cond = s.conditional(x, y);
  if (!cond) {
    if (weight == 0.0) return 0.0;
    throw UndefinedTerm(std::string("p(A=") + (x == Outcome::Plus ? "+" : "-") + "|B=" +
                        (y == Outcome::Plus ? "+" : "-") + ") is undefined but p(B=" +
                        (y == Outcome::Plus ? "+" : "-") + ") > 0");
  }
  return weight * *cond;
}

}  // namespace detail

inline double classical_prediction(const ContextualStatistics& s, Outcome x) {
  return detail::weighted_term(s, x, Outcome::Plus) + detail::weighted_term(s, x, Outcome::Minus);
}

inline double phase_from_coefficient(double lambda) {
  if (!(std::fabs(lambda) <= 1.0))
    throw HyperbolicRegime("|cos theta| = " + std::to_string(std::fabs(lambda)) + " > 1: no trigonometric phase");
  return std::acos(lambda);
}

// Forward evaluation: the A=x probability implied by the conditioning statistics and a phase.
inline double interfering_probability(double p_b_plus, double p_a_given_b_plus, double p_a_given_b_minus, double theta) {
  const double first = p_b_plus * p_a_given_b_plus;
  const double second = (1.0 - p_b_plus) * p_a_given_b_minus;
  return first + second + 2.0 * std::sqrt(first * second) * std::cos(theta);
}

inline InterferenceResult interference_coefficient(const ContextualStatistics& s, Outcome x) {
  InterferenceResult r;
  r.outcome = x;
  const double plus_term = detail::weighted_term(s, x, Outcome::Plus);
  const double minus_term = detail::weighted_term(s, x, Outcome::Minus);
  r.classical_prediction = plus_term + minus_term;
  r.residual = s.p_a(x) - r.classical_prediction;
  r.denominator = 2.0 * std::sqrt(plus_term * minus_term);

  if (r.denominator > 0.0) {
    r.lambda = r.residual / r.denominator;
    if (std::fabs(*r.lambda) <= 1.0) {
      r.phase_rad = std::acos(*r.lambda);
      r.classification = ContextEffect::Trigonometric;
    } else {
      r.classification = ContextEffect::Hyperbolic;
    }
  } else {
    r.classification = std::fabs(r.residual) < kSingularResidualTolerance ? ContextEffect::SingularConsistent
                                                                          : ContextEffect::SingularInconsistent;
  }
  return r;
}

struct ContextEffectSummary {
  ContextEffect classification = ContextEffect::Trigonometric;
  InterferenceResult plus;
  InterferenceResult minus;
  // residual(+) + residual(-), i.e. lambda(+)D(+) + lambda(-)D(-) where defined. Zero for normalized input.
  double zero_sum_check = 0.0;
};

// Hyperbolic dominates, then inconsistent singular, then consistent singular.
inline ContextEffectSummary classify_context_effect(const InterferenceResult& plus, const InterferenceResult& minus) {
  ContextEffectSummary out{ContextEffect::Trigonometric, plus, minus, plus.residual + minus.residual};
  auto any = [&](ContextEffect c) { return plus.classification == c || minus.classification == c; };
  if (any(ContextEffect::Hyperbolic))
    out.classification = ContextEffect::Hyperbolic;
  else if (any(ContextEffect::SingularInconsistent))
    out.classification = ContextEffect::SingularInconsistent;
  else if (any(ContextEffect::SingularConsistent))
    out.classification = ContextEffect::SingularConsistent;
  return out;
}

inline ContextEffectSummary analyze_interference(const ContextualStatistics& s) {
  return classify_context_effect(interference_coefficient(s, Outcome::Plus), interference_coefficient(s, Outcome::Minus));
}

}  // namespace qontext
