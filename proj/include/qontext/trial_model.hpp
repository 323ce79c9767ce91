#pragma once
// Trial records for two-observable context experiments and the
// "qontext/trial/v1" line-delimited JSON format.
//
// One line holds one subject session. A session is either A_ONLY (a single
// response to the second observable) or B_THEN_A (a response to the first
// observable followed by one to the second). Plus means "figures judged
// equal", Minus means "judged not equal".

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace qontext {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kTrialSchema = "qontext/trial/v1";

enum class Outcome { Plus, Minus };

inline constexpr std::string_view to_string(Outcome o) { return o == Outcome::Plus ? "plus" : "minus"; }

inline std::optional<Outcome> parse_outcome(std::string_view s) {
  if (s == "plus") return Outcome::Plus;
  if (s == "minus") return Outcome::Minus;
  return std::nullopt;
}

// Index helper for arrays laid out as [Plus, Minus].
inline constexpr std::size_t index_of(Outcome o) { return o == Outcome::Plus ? 0 : 1; }

inline constexpr Outcome kOutcomes[] = {Outcome::Plus, Outcome::Minus};

struct ObservableId {
  std::string id;
  std::string label;

  bool operator==(const ObservableId&) const = default;
};

// The conditioning observable (administered first) and the target observable.
struct ObservablePair {
  ObservableId first{"B", "test B (conditioning figure pair)"};
  ObservableId second{"A", "test A (target figure pair)"};

  bool operator==(const ObservablePair&) const = default;
};

enum class ProtocolKind { AOnly, BThenA };

inline constexpr std::string_view to_string(ProtocolKind p) { return p == ProtocolKind::AOnly ? "A_ONLY" : "B_THEN_A"; }

inline std::optional<ProtocolKind> parse_protocol(std::string_view s) {
  if (s == "A_ONLY") return ProtocolKind::AOnly;
  if (s == "B_THEN_A") return ProtocolKind::BThenA;
  return std::nullopt;
}

struct Response {
  std::string observable;
  Outcome outcome = Outcome::Plus;
  std::optional<std::int64_t> latency_ms;
  Json extra = Json::object();  // unknown fields, preserved verbatim

  bool operator==(const Response&) const = default;
};

struct TrialRecord {
  std::string subject_id;
  std::string experiment_id;
  ProtocolKind protocol = ProtocolKind::AOnly;
  std::vector<Response> responses;
  std::optional<std::string> presented_at;
  Json extra = Json::object();

  bool operator==(const TrialRecord&) const = default;

  // Outcome of the target observable (always the last response).
  Outcome target_outcome() const { return responses.back().outcome; }
  // Outcome of the conditioning observable; only meaningful for B_THEN_A.
  Outcome conditioning_outcome() const { return responses.front().outcome; }
};

struct Dataset {
  std::vector<TrialRecord> records;
  ObservablePair observables;
  std::string schema_version{kTrialSchema};

  bool empty() const noexcept { return records.empty(); }
  std::size_t size() const noexcept { return records.size(); }

  std::map<std::string, std::size_t> count_by_experiment() const {
    std::map<std::string, std::size_t> out;
    for (const auto& r : records) ++out[r.experiment_id];
    return out;
  }
};

// ---------------------------------------------------------------------------
// Shape rules shared by the parser and the validator.

struct Finding {
  std::optional<std::size_t> record_index;
  std::string code;
  std::string message;
};

inline std::vector<Finding> shape_findings(const TrialRecord& r, const ObservablePair& obs,
                                           std::optional<std::size_t> index = std::nullopt) {
  std::vector<Finding> out;
  auto add = [&](std::string code, std::string msg) { out.push_back({index, std::move(code), std::move(msg)}); };

  if (r.subject_id.empty()) add("empty_subject_id", "subject_id must be nonempty");
  if (r.experiment_id.empty()) add("empty_experiment_id", "experiment_id must be nonempty");

  const std::size_t expected = r.protocol == ProtocolKind::AOnly ? 1 : 2;
  if (r.responses.size() != expected) {
    add("response_count", std::string(to_string(r.protocol)) + " requires " + std::to_string(expected) +
                              " response(s), got " + std::to_string(r.responses.size()));
  } else if (r.protocol == ProtocolKind::AOnly) {
    if (r.responses[0].observable != obs.second.id)
      add("unknown_observable", "A_ONLY response must be for observable '" + obs.second.id + "', got '" +
                                    r.responses[0].observable + "'");
  } else {
    const auto& a = r.responses[0].observable;
    const auto& b = r.responses[1].observable;
    if (a == obs.second.id && b == obs.first.id) {
      add("response_order", "B_THEN_A requires '" + obs.first.id + "' strictly before '" + obs.second.id + "'");
    } else if (a != obs.first.id || b != obs.second.id) {
      add("unknown_observable", "B_THEN_A responses must be '" + obs.first.id + "' then '" + obs.second.id +
                                    "', got '" + a + "' then '" + b + "'");
    }
  }
  for (const auto& resp : r.responses)
    if (resp.latency_ms && *resp.latency_ms < 0) add("negative_latency", "latency_ms must be nonnegative");
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const Response& r) {
  Json j = Json::object();
  j["observable"] = r.observable;
  j["outcome"] = to_string(r.outcome);
  if (r.latency_ms) j["latency_ms"] = *r.latency_ms;
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  return j;
}

inline Json to_json(const TrialRecord& r) {
  Json j = Json::object();
  j["schema"] = kTrialSchema;
  j["subject_id"] = r.subject_id;
  j["experiment_id"] = r.experiment_id;
  j["protocol"] = to_string(r.protocol);
  Json responses = Json::array();
  for (const auto& resp : r.responses) responses.push_back(to_json(resp));
  j["responses"] = std::move(responses);
  if (r.presented_at) j["presented_at"] = *r.presented_at;
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  return j;
}

// Canonical single-line form, without the trailing newline.
inline std::string serialize_record(const TrialRecord& r) { return to_json(r).dump(); }

inline void write_dataset(const Dataset& d, std::ostream& out) {
  for (const auto& r : d.records) out << serialize_record(r) << '\n';
}

inline std::string serialize_dataset(const Dataset& d) {
  std::ostringstream os;
  write_dataset(d, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline const Json& require(const Json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw MalformedRecord(line, std::string("missing field '") + key + "'");
  return *it;
}

inline std::string require_string(const Json& j, const char* key, std::size_t line) {
  const auto& v = require(j, key, line);
  if (!v.is_string()) throw MalformedRecord(line, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline Response parse_response(const Json& j, std::size_t line) {
  if (!j.is_object()) throw MalformedRecord(line, "each response must be an object");
  Response r;
  r.observable = require_string(j, "observable", line);
  auto outcome = parse_outcome(require_string(j, "outcome", line));
  if (!outcome) throw MalformedRecord(line, "outcome must be \"plus\" or \"minus\"");
  r.outcome = *outcome;
  if (auto it = j.find("latency_ms"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw MalformedRecord(line, "latency_ms must be an integer");
    r.latency_ms = it->get<std::int64_t>();
  }
  for (const auto& [k, v] : j.items())
    if (k != "observable" && k != "outcome" && k != "latency_ms") r.extra[k] = v;
  return r;
}

}  // namespace detail

// Parses one JSON object into a record and checks its shape. Throws MalformedRecord.
inline TrialRecord parse_record(const Json& j, std::size_t line, const ObservablePair& obs = {}) {
  using namespace detail;
  if (!j.is_object()) throw MalformedRecord(line, "record must be a JSON object");
  if (require_string(j, "schema", line) != kTrialSchema)
    throw MalformedRecord(line, "unsupported schema (expected \"" + std::string(kTrialSchema) + "\")");

  TrialRecord r;
  r.subject_id = require_string(j, "subject_id", line);
  r.experiment_id = require_string(j, "experiment_id", line);
  auto protocol = parse_protocol(require_string(j, "protocol", line));
  if (!protocol) throw MalformedRecord(line, "protocol must be \"A_ONLY\" or \"B_THEN_A\"");
  r.protocol = *protocol;

  const auto& responses = require(j, "responses", line);
  if (!responses.is_array()) throw MalformedRecord(line, "responses must be an array");
  for (const auto& resp : responses) r.responses.push_back(parse_response(resp, line));

  if (auto it = j.find("presented_at"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw MalformedRecord(line, "presented_at must be a string timestamp");
    r.presented_at = it->get<std::string>();
  }
  static const std::set<std::string> known{"schema",    "subject_id",  "experiment_id",
                                           "protocol",  "responses",   "presented_at"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) r.extra[k] = v;

  if (auto findings = shape_findings(r, obs); !findings.empty()) throw MalformedRecord(line, findings.front().message);
  return r;
}

inline TrialRecord parse_record_line(std::string_view text, std::size_t line = 1, const ObservablePair& obs = {}) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedRecord(line, std::string("invalid JSON: ") + e.what());
  }
  return parse_record(j, line, obs);
}

struct Diagnostic {
  enum class Kind { Malformed, Duplicate };
  std::size_t line = 0;
  Kind kind = Kind::Malformed;
  std::string message;
};

struct ParseResult {
  Dataset dataset;
  std::vector<Diagnostic> diagnostics;

  bool ok() const noexcept { return diagnostics.empty(); }
};

// Reads every line; well-formed records go into the dataset, the rest become diagnostics.
// Blank lines are skipped. Line numbers are 1-based.
inline ParseResult parse_trials(std::istream& in, const ObservablePair& obs = {}, std::string_view source = {}) {
  ParseResult result;
  result.dataset.observables = obs;
  std::set<std::pair<std::string, std::string>> seen;
  std::string text;
  std::size_t line = 0;
  const std::string prefix = source.empty() ? std::string() : std::string(source) + ":";
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      auto record = parse_record_line(text, line, obs);
      if (!seen.emplace(record.subject_id, record.experiment_id).second) {
        DuplicateSubject dup(line, record.subject_id, record.experiment_id);
        result.diagnostics.push_back({line, Diagnostic::Kind::Duplicate, prefix + dup.what()});
        continue;
      }
      result.dataset.records.push_back(std::move(record));
    } catch (const MalformedRecord& e) {
      result.diagnostics.push_back({line, Diagnostic::Kind::Malformed, prefix + e.what()});
    }
  }
  return result;
}

inline ParseResult parse_trials(std::string_view text, const ObservablePair& obs = {}) {
  std::istringstream in{std::string(text)};
  return parse_trials(in, obs);
}

// Loads one file, or every *.jsonl file (sorted by name) in a directory, into one dataset.
// Collects diagnostics across files; duplicates are detected across the whole set.
inline ParseResult load_trials(const std::vector<std::filesystem::path>& paths, const ObservablePair& obs = {}) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") found.push_back(entry.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }

  ParseResult all;
  all.dataset.observables = obs;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) {
      all.diagnostics.push_back({0, Diagnostic::Kind::Malformed, f.string() + ": cannot open file"});
      continue;
    }
    auto part = parse_trials(in, obs, f.string());
    for (auto& d : part.diagnostics) all.diagnostics.push_back(std::move(d));
    for (auto& r : part.dataset.records) {
      if (!seen.emplace(r.subject_id, r.experiment_id).second) {
        all.diagnostics.push_back({0, Diagnostic::Kind::Duplicate,
                                   f.string() + ": duplicate session for subject '" + r.subject_id +
                                       "' in experiment '" + r.experiment_id + "'"});
        continue;
      }
      all.dataset.records.push_back(std::move(r));
    }
  }
  return all;
}

// ---------------------------------------------------------------------------
// Validation and partitioning

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const noexcept { return findings.empty(); }
};

inline ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport report;
  if (d.observables.first.id == d.observables.second.id || d.observables.first.id.empty() ||
      d.observables.second.id.empty())
    report.findings.push_back({std::nullopt, "observable_pair", "dataset must reference two distinct observables"});
  if (d.records.empty()) report.findings.push_back({std::nullopt, "no_records", "no records"});

  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto& r = d.records[i];
    for (auto& f : shape_findings(r, d.observables, i)) report.findings.push_back(std::move(f));
    if (!seen.emplace(r.subject_id, r.experiment_id).second)
      report.findings.push_back({i, "duplicate_session",
                                 "duplicate session for subject '" + r.subject_id + "' in experiment '" +
                                     r.experiment_id + "'"});
  }
  return report;
}

// Experiments keyed by id; each part keeps the input's record order.
inline std::map<std::string, Dataset> partition_by_experiment(const Dataset& d) {
  std::map<std::string, Dataset> parts;
  for (const auto& r : d.records) {
    auto [it, inserted] = parts.try_emplace(r.experiment_id);
    if (inserted) {
      it->second.observables = d.observables;
      it->second.schema_version = d.schema_version;
    }
    it->second.records.push_back(r);
  }
  return parts;
}

}  // namespace qontext
