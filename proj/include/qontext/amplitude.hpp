#pragma once
// Quantum-like wave function over the two outcomes of the target observable:
//
//   phi(x) = sqrt(p(B=+) p(A=x|B=+)) + e^{i theta(x)} sqrt(p(B=-) p(A=x|B=-))
//
// with the scalar product and the multiplication operator A phi(x) = x phi(x)
// on the resulting two-dimensional Hilbert space.

#include <cmath>
#include <algorithm>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

#include "errors.hpp"
#include "estimator.hpp"
#include "interference.hpp"

namespace qontext {

struct ComplexAmplitude {
  double re = 0.0;
  double im = 0.0;

  constexpr ComplexAmplitude() = default;
  constexpr ComplexAmplitude(double r, double i) : re(r), im(i) {}
  explicit ComplexAmplitude(std::complex<double> z) : re(z.real()), im(z.imag()) {}

  std::complex<double> value() const noexcept { return {re, im}; }
  double norm_squared() const noexcept { return re * re + im * im; }
  bool finite() const noexcept { return std::isfinite(re) && std::isfinite(im); }

  bool operator==(const ComplexAmplitude&) const = default;
};

struct PhasePair {
  double plus = 0.0;
  double minus = 0.0;

  double operator[](Outcome x) const noexcept { return x == Outcome::Plus ? plus : minus; }
};

struct WaveFunction {
  ComplexAmplitude phi_plus;
  ComplexAmplitude phi_minus;
  ObservablePair reference_observables;
  PhasePair phases;

  const ComplexAmplitude& operator[](Outcome x) const noexcept { return x == Outcome::Plus ? phi_plus : phi_minus; }
};

inline WaveFunction basis_state(Outcome x) {
  WaveFunction w;
  (x == Outcome::Plus ? w.phi_plus : w.phi_minus) = {1.0, 0.0};
  return w;
}

inline WaveFunction build_wave_function(const ContextualStatistics& s, PhasePair phases,
                                        const ObservablePair& reference = {}) {
  WaveFunction w;
  w.reference_observables = reference;
  w.phases = phases;
  for (Outcome x : kOutcomes) {
    const double theta = phases[x];
    if (!(theta >= 0.0 && theta <= std::numbers::pi))
      throw std::invalid_argument("phase must lie in [0, pi], got " + std::to_string(theta));
    const double direct = std::sqrt(detail::weighted_term(s, x, Outcome::Plus));
    const double shifted = std::sqrt(detail::weighted_term(s, x, Outcome::Minus));
    const ComplexAmplitude phi(direct + std::polar(shifted, theta));
    (x == Outcome::Plus ? w.phi_plus : w.phi_minus) = phi;
  }
  return w;
}

// Phases obtained by solving the interference formula; requires a trigonometric effect.
inline PhasePair solved_phases(const ContextualStatistics& s) {
  PhasePair p;
  for (Outcome x : kOutcomes) {
    const auto r = interference_coefficient(s, x);
    if (!r.lambda)
      throw UndefinedTerm(std::string("interference coefficient undefined for A=") +
                          (x == Outcome::Plus ? "+" : "-") + " (zero denominator)");
    (x == Outcome::Plus ? p.plus : p.minus) = phase_from_coefficient(*r.lambda);
  }
  return p;
}

inline std::pair<double, double> born_probabilities(const WaveFunction& w) {
  return {w.phi_plus.norm_squared(), w.phi_minus.norm_squared()};
}

// (phi, psi) = phi(+) conj(psi(+)) + phi(-) conj(psi(-))
inline std::complex<double> scalar_product(const WaveFunction& phi, const WaveFunction& psi) {
  return phi.phi_plus.value() * std::conj(psi.phi_plus.value()) +
         phi.phi_minus.value() * std::conj(psi.phi_minus.value());
}

inline WaveFunction apply_observable(const WaveFunction& w) {
  WaveFunction out = w;
  out.phi_minus = {-w.phi_minus.re, -w.phi_minus.im};
  return out;
}

// E A = (A phi, phi); real for any phi since A is self-adjoint.
inline double mean_value(const WaveFunction& w) { return scalar_product(apply_observable(w), w).real(); }

inline constexpr double kBornTolerance = 1e-10;

struct BornCheck {
  double born_plus = 0.0;
  double born_minus = 0.0;
  double expected_plus = 0.0;
  double expected_minus = 0.0;
  double max_deviation = 0.0;
  bool pass = false;
};

inline BornCheck check_born(const WaveFunction& w, const ContextualStatistics& s, double tolerance = kBornTolerance) {
  BornCheck c;
  std::tie(c.born_plus, c.born_minus) = born_probabilities(w);
  c.expected_plus = s.p_a_plus;
  c.expected_minus = s.p_a_minus;
  c.max_deviation = std::max(std::fabs(c.born_plus - c.expected_plus), std::fabs(c.born_minus - c.expected_minus));
  c.pass = c.max_deviation <= tolerance;
  return c;
}

}  // namespace qontext
