#pragma once
// Frequency estimates of the marginal and conditional probabilities behind
// the total-probability comparison, plus averaging across experiments.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rounding.hpp"
#include "trial_model.hpp"

namespace qontext {

struct OutcomeCounts {
  std::uint64_t n_a_only = 0;
  std::uint64_t n_a_only_plus = 0;
  std::uint64_t n_b_then_a = 0;
  std::uint64_t n_b_plus = 0;
  std::uint64_t n_b_minus = 0;
  std::uint64_t n_a_plus_given_b_plus = 0;
  std::uint64_t n_a_plus_given_b_minus = 0;

  bool operator==(const OutcomeCounts&) const = default;

  bool consistent() const noexcept {
    return n_a_only_plus <= n_a_only && n_b_plus + n_b_minus == n_b_then_a && n_a_plus_given_b_plus <= n_b_plus &&
           n_a_plus_given_b_minus <= n_b_minus;
  }

  std::uint64_t condition_count(Outcome b) const noexcept { return b == Outcome::Plus ? n_b_plus : n_b_minus; }
  std::uint64_t a_plus_given(Outcome b) const noexcept {
    return b == Outcome::Plus ? n_a_plus_given_b_plus : n_a_plus_given_b_minus;
  }

  OutcomeCounts& operator+=(const OutcomeCounts& o) noexcept {
    n_a_only += o.n_a_only;
    n_a_only_plus += o.n_a_only_plus;
    n_b_then_a += o.n_b_then_a;
    n_b_plus += o.n_b_plus;
    n_b_minus += o.n_b_minus;
    n_a_plus_given_b_plus += o.n_a_plus_given_b_plus;
    n_a_plus_given_b_minus += o.n_a_plus_given_b_minus;
    return *this;
  }
};

// Observed: ratios of counts. Pooled: mean over experiments.
// Displayed: rounded to the report's display precision.
enum class Provenance { Observed, Pooled, Displayed };

inline constexpr std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Observed: return "observed";
    case Provenance::Pooled: return "pooled";
    case Provenance::Displayed: return "displayed";
  }
  return "observed";
}

struct ContextualStatistics {
  double p_a_plus = 0.0;
  double p_a_minus = 0.0;
  double p_b_plus = 0.0;
  double p_b_minus = 0.0;
  // p(A=x | B=y), indexed [x][y] with index_of(); empty when B=y was never observed.
  std::array<std::array<std::optional<double>, 2>, 2> p_a_given_b{};
  OutcomeCounts counts;
  Provenance provenance = Provenance::Observed;

  double p_a(Outcome x) const noexcept { return x == Outcome::Plus ? p_a_plus : p_a_minus; }
  double p_b(Outcome y) const noexcept { return y == Outcome::Plus ? p_b_plus : p_b_minus; }
  std::optional<double> conditional(Outcome x, Outcome y) const noexcept {
    return p_a_given_b[index_of(x)][index_of(y)];
  }
  void set_conditional(Outcome x, Outcome y, std::optional<double> v) noexcept {
    p_a_given_b[index_of(x)][index_of(y)] = v;
  }
};

// Statistics from directly stated probabilities (B=+ and B=- conditionals for A=+;
// complements are filled in). Pass std::nullopt for an unobserved condition.
inline ContextualStatistics make_statistics(double p_a_plus, double p_b_plus, std::optional<double> p_a_plus_given_b_plus,
                                            std::optional<double> p_a_plus_given_b_minus,
                                            Provenance provenance = Provenance::Pooled) {
  ContextualStatistics s;
  s.p_a_plus = p_a_plus;
  s.p_a_minus = 1.0 - p_a_plus;
  s.p_b_plus = p_b_plus;
  s.p_b_minus = 1.0 - p_b_plus;
  auto fill = [&](Outcome y, std::optional<double> plus) {
    s.set_conditional(Outcome::Plus, y, plus);
    s.set_conditional(Outcome::Minus, y, plus ? std::optional<double>(1.0 - *plus) : std::nullopt);
  };
  fill(Outcome::Plus, p_a_plus_given_b_plus);
  fill(Outcome::Minus, p_a_plus_given_b_minus);
  s.provenance = provenance;
  return s;
}

inline OutcomeCounts count_outcomes(const Dataset& d) {
  OutcomeCounts c;
  for (const auto& r : d.records) {
    const bool a_plus = r.target_outcome() == Outcome::Plus;
    if (r.protocol == ProtocolKind::AOnly) {
      ++c.n_a_only;
      if (a_plus) ++c.n_a_only_plus;
    } else {
      ++c.n_b_then_a;
      if (r.conditioning_outcome() == Outcome::Plus) {
        ++c.n_b_plus;
        if (a_plus) ++c.n_a_plus_given_b_plus;
      } else {
        ++c.n_b_minus;
        if (a_plus) ++c.n_a_plus_given_b_minus;
      }
    }
  }
  return c;
}

inline ContextualStatistics estimate_statistics(const OutcomeCounts& c) {
  if (!c.consistent()) throw DataError("inconsistent outcome counts");
  if (c.n_a_only == 0) throw InsufficientData("no A_ONLY sessions: p(A) is undefined");
  if (c.n_b_then_a == 0) throw InsufficientData("no B_THEN_A sessions: p(B) and p(A|B) are undefined");

  ContextualStatistics s;
  s.counts = c;
  s.provenance = Provenance::Observed;
  const auto ratio = [](std::uint64_t k, std::uint64_t n) { return static_cast<double>(k) / static_cast<double>(n); };
  s.p_a_plus = ratio(c.n_a_only_plus, c.n_a_only);
  s.p_a_minus = ratio(c.n_a_only - c.n_a_only_plus, c.n_a_only);
  s.p_b_plus = ratio(c.n_b_plus, c.n_b_then_a);
  s.p_b_minus = ratio(c.n_b_minus, c.n_b_then_a);
  for (Outcome y : kOutcomes) {
    const auto n = c.condition_count(y);
    if (n == 0) continue;
    const auto k = c.a_plus_given(y);
    s.set_conditional(Outcome::Plus, y, ratio(k, n));
    s.set_conditional(Outcome::Minus, y, ratio(n - k, n));
  }
  return s;
}

inline ContextualStatistics estimate_statistics(const Dataset& d) { return estimate_statistics(count_outcomes(d)); }

// Every probability rounded half away from zero to `decimals` places.
inline ContextualStatistics quantize(const ContextualStatistics& s, int decimals = kDisplayDecimals) {
  ContextualStatistics q = s;
  q.p_a_plus = round_to(s.p_a_plus, decimals);
  q.p_a_minus = round_to(s.p_a_minus, decimals);
  q.p_b_plus = round_to(s.p_b_plus, decimals);
  q.p_b_minus = round_to(s.p_b_minus, decimals);
  for (auto& row : q.p_a_given_b)
    for (auto& v : row)
      if (v) v = round_to(*v, decimals);
  q.provenance = Provenance::Displayed;
  return q;
}

// TableCompatible averages an undefined conditional as 0.0 (the published table's
// convention); Strict averages only the experiments where the condition was observed.
enum class PoolingMode { TableCompatible, Strict };

inline constexpr std::string_view to_string(PoolingMode m) {
  return m == PoolingMode::TableCompatible ? "paper" : "strict";
}

// Unweighted mean of the per-experiment probabilities. Complements are taken from the
// pooled A=+ values so every pooled row is normalized.
inline ContextualStatistics pool_statistics(std::span<const ContextualStatistics> stats, PoolingMode mode,
                                            std::vector<std::string>* warnings = nullptr) {
  if (stats.empty()) throw InsufficientData("pooling requires at least one experiment");
  const double n = static_cast<double>(stats.size());

  ContextualStatistics out;
  out.provenance = Provenance::Pooled;
  double sum_a = 0.0, sum_b = 0.0;
  for (const auto& s : stats) {
    sum_a += s.p_a_plus;
    sum_b += s.p_b_plus;
    out.counts += s.counts;
  }
  out.p_a_plus = sum_a / n;
  out.p_a_minus = 1.0 - out.p_a_plus;
  out.p_b_plus = sum_b / n;
  out.p_b_minus = 1.0 - out.p_b_plus;

  for (Outcome y : kOutcomes) {
    double sum = 0.0;
    std::size_t defined = 0;
    for (const auto& s : stats) {
      if (auto v = s.conditional(Outcome::Plus, y)) {
        sum += *v;
        ++defined;
      }
    }
    const std::string name = std::string("p(A=+|B=") + (y == Outcome::Plus ? "+" : "-") + ")";
    std::optional<double> pooled;
    if (mode == PoolingMode::TableCompatible) {
      pooled = sum / n;
    } else {
      if (defined > 0) pooled = sum / static_cast<double>(defined);
      if (defined < stats.size() && warnings)
        warnings->push_back(name + " undefined in " + std::to_string(stats.size() - defined) + " of " +
                            std::to_string(stats.size()) + " experiment(s); excluded from the mean");
    }
    out.set_conditional(Outcome::Plus, y, pooled);
    out.set_conditional(Outcome::Minus, y, pooled ? std::optional<double>(1.0 - *pooled) : std::nullopt);
  }
  return out;
}

inline OutcomeCounts pool_counts(std::span<const OutcomeCounts> counts) {
  OutcomeCounts total;
  for (const auto& c : counts) total += c;
  return total;
}

}  // namespace qontext
