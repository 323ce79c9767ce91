#pragma once
// Dataset generation with prescribed contextual statistics.
//
// ExactCounts resolves every probability to the nearest integer count and
// emits records in a fixed order (A_ONLY plus, A_ONLY minus, then B_THEN_A
// grouped by (B, A) outcome as ++, +-, -+, --).
//
// Bernoulli draws from one std::mt19937_64 engine seeded with the user seed.
// Uniforms are (engine() >> 11) * 2^-53. Draw order: experiments in spec
// order; within one, each A_ONLY subject draws A, then each B_THEN_A subject
// draws B and then A. A draw u yields Plus iff u < p.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rounding.hpp"
#include "trial_model.hpp"

namespace qontext {

enum class SimulationMode { ExactCounts, Bernoulli };

inline constexpr std::string_view kExactGenerator = "qontext.exact/1";
inline constexpr std::string_view kBernoulliGenerator = "qontext.bernoulli/mt19937_64/1";

struct SimulationSpec {
  std::string experiment_id;
  std::uint64_t n_a_only = 0;
  std::uint64_t n_b_then_a = 0;
  double p_b_plus = 0.0;
  double p_a_plus = 0.0;
  double p_a_plus_given_b_plus = 0.0;
  double p_a_plus_given_b_minus = 0.0;
  SimulationMode mode = SimulationMode::ExactCounts;
};

struct SimulationPlan {
  SimulationMode mode = SimulationMode::ExactCounts;
  std::vector<SimulationSpec> experiments;
};

namespace detail {

inline void check_probability(double p, const char* name, const std::string& exp) {
  if (!(p >= 0.0 && p <= 1.0))
    throw UnrepresentableSpec(exp + ": " + name + " must lie in [0, 1], got " + std::to_string(p));
}

// Nearest count for p*n. Exact ties are ambiguous; so is a count whose ratio
// does not display as p at the report precision.
inline std::uint64_t exact_count(double p, std::uint64_t n, const char* name, const std::string& exp) {
  if (n == 0) return 0;
  const double target = p * static_cast<double>(n);
  const double k = std::round(target);
  if (std::fabs(std::fabs(target - std::floor(target)) - 0.5) < 1e-9)
    throw UnrepresentableSpec(exp + ": " + name + " x " + std::to_string(n) + " = " + std::to_string(target) +
                              " lies halfway between two counts");
  const double ratio = k / static_cast<double>(n);
  if (round_to(ratio) != round_to(p))
    throw UnrepresentableSpec(exp + ": " + name + " = " + format_fixed(p) + " is not representable with " +
                              std::to_string(n) + " sessions (nearest count gives " + format_fixed(ratio) + ")");
  return static_cast<std::uint64_t>(k);
}

inline std::string subject_id(const std::string& exp, std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "-s%03llu", static_cast<unsigned long long>(index));
  return exp + buf;
}

inline TrialRecord make_record(const std::string& exp, std::uint64_t index, const ObservablePair& obs,
                               std::optional<Outcome> b, Outcome a, const Json& meta) {
  TrialRecord r;
  r.subject_id = subject_id(exp, index);
  r.experiment_id = exp;
  r.protocol = b ? ProtocolKind::BThenA : ProtocolKind::AOnly;
  if (b) r.responses.push_back({obs.first.id, *b, std::nullopt, Json::object()});
  r.responses.push_back({obs.second.id, a, std::nullopt, Json::object()});
  r.extra["meta"] = meta;
  return r;
}

inline void validate_spec(const SimulationSpec& s) {
  if (s.experiment_id.empty()) throw UnrepresentableSpec("experiment_id must be nonempty");
  check_probability(s.p_b_plus, "p_b_plus", s.experiment_id);
  check_probability(s.p_a_plus, "p_a_plus", s.experiment_id);
  check_probability(s.p_a_plus_given_b_plus, "p_a_plus_given_b_plus", s.experiment_id);
  check_probability(s.p_a_plus_given_b_minus, "p_a_plus_given_b_minus", s.experiment_id);
}

}  // namespace detail

inline Dataset simulate_exact_counts(const SimulationSpec& spec, const ObservablePair& obs = {}) {
  detail::validate_spec(spec);
  const auto& exp = spec.experiment_id;
  if (spec.n_a_only < 1) throw UnrepresentableSpec(exp + ": n_a_only must be at least 1");
  if (spec.n_b_then_a < 1) throw UnrepresentableSpec(exp + ": n_b_then_a must be at least 1");

  const auto a_plus = detail::exact_count(spec.p_a_plus, spec.n_a_only, "p_a_plus", exp);
  const auto b_plus = detail::exact_count(spec.p_b_plus, spec.n_b_then_a, "p_b_plus", exp);
  const auto b_minus = spec.n_b_then_a - b_plus;
  const auto a_given_bp = detail::exact_count(spec.p_a_plus_given_b_plus, b_plus, "p_a_plus_given_b_plus", exp);
  const auto a_given_bm = detail::exact_count(spec.p_a_plus_given_b_minus, b_minus, "p_a_plus_given_b_minus", exp);

  const Json meta = {{"generator", kExactGenerator}};
  Dataset d;
  d.observables = obs;
  std::uint64_t index = 0;
  auto emit = [&](std::uint64_t count, std::optional<Outcome> b, Outcome a) {
    for (std::uint64_t i = 0; i < count; ++i) d.records.push_back(detail::make_record(exp, ++index, obs, b, a, meta));
  };
  emit(a_plus, std::nullopt, Outcome::Plus);
  emit(spec.n_a_only - a_plus, std::nullopt, Outcome::Minus);
  emit(a_given_bp, Outcome::Plus, Outcome::Plus);
  emit(b_plus - a_given_bp, Outcome::Plus, Outcome::Minus);
  emit(a_given_bm, Outcome::Minus, Outcome::Plus);
  emit(b_minus - a_given_bm, Outcome::Minus, Outcome::Minus);
  return d;
}

namespace detail {

inline double next_uniform(std::mt19937_64& engine) { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }

inline Outcome draw(std::mt19937_64& engine, double p) { return next_uniform(engine) < p ? Outcome::Plus : Outcome::Minus; }

inline void append_bernoulli(Dataset& d, const SimulationSpec& spec, std::mt19937_64& engine, const Json& meta) {
  validate_spec(spec);
  std::uint64_t index = 0;
  for (std::uint64_t i = 0; i < spec.n_a_only; ++i)
    d.records.push_back(make_record(spec.experiment_id, ++index, d.observables, std::nullopt,
                                    draw(engine, spec.p_a_plus), meta));
  for (std::uint64_t i = 0; i < spec.n_b_then_a; ++i) {
    const Outcome b = draw(engine, spec.p_b_plus);
    const double p = b == Outcome::Plus ? spec.p_a_plus_given_b_plus : spec.p_a_plus_given_b_minus;
    d.records.push_back(make_record(spec.experiment_id, ++index, d.observables, b, draw(engine, p), meta));
  }
}

}  // namespace detail

inline Dataset simulate_bernoulli(const SimulationSpec& spec, std::uint64_t seed, const ObservablePair& obs = {}) {
  std::mt19937_64 engine(seed);
  Dataset d;
  d.observables = obs;
  detail::append_bernoulli(d, spec, engine, {{"generator", kBernoulliGenerator}, {"seed", seed}});
  return d;
}

// All experiments of a plan into one dataset. Bernoulli plans share one engine stream.
inline Dataset simulate(const SimulationPlan& plan, std::uint64_t seed, const ObservablePair& obs = {}) {
  Dataset d;
  d.observables = obs;
  if (plan.mode == SimulationMode::ExactCounts) {
    for (const auto& spec : plan.experiments) {
      auto part = simulate_exact_counts(spec, obs);
      for (auto& r : part.records) d.records.push_back(std::move(r));
    }
  } else {
    std::mt19937_64 engine(seed);
    const Json meta = {{"generator", kBernoulliGenerator}, {"seed", seed}};
    for (const auto& spec : plan.experiments) detail::append_bernoulli(d, spec, engine, meta);
  }
  return d;
}

// Plan document: {"mode": "exact_counts" | "bernoulli", "experiments": [ {SimulationSpec fields}, ... ]}
inline SimulationPlan parse_simulation_plan(const Json& j) {
  if (!j.is_object()) throw DataError("simulation spec must be a JSON object");
  SimulationPlan plan;
  const auto mode = j.value("mode", std::string("exact_counts"));
  if (mode == "exact_counts")
    plan.mode = SimulationMode::ExactCounts;
  else if (mode == "bernoulli")
    plan.mode = SimulationMode::Bernoulli;
  else
    throw DataError("unknown simulation mode '" + mode + "'");
  if (!j.contains("experiments") || !j["experiments"].is_array())
    throw DataError("simulation spec needs an \"experiments\" array");
  try {
    for (const auto& e : j["experiments"]) {
      SimulationSpec s;
      s.experiment_id = e.at("experiment_id").get<std::string>();
      s.n_a_only = e.at("n_a_only").get<std::uint64_t>();
      s.n_b_then_a = e.at("n_b_then_a").get<std::uint64_t>();
      s.p_b_plus = e.at("p_b_plus").get<double>();
      s.p_a_plus = e.at("p_a_plus").get<double>();
      s.p_a_plus_given_b_plus = e.at("p_a_plus_given_b_plus").get<double>();
      s.p_a_plus_given_b_minus = e.value("p_a_plus_given_b_minus", 0.0);
      s.mode = plan.mode;
      plan.experiments.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad simulation spec: ") + e.what());
  }
  return plan;
}

inline SimulationPlan load_simulation_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open simulation spec '" + path + "'");
  try {
    return parse_simulation_plan(Json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("simulation spec is not valid JSON: ") + e.what());
  }
}

}  // namespace qontext
