#pragma once
// Session collector: serves experiment configuration to the runner and
// appends submitted sessions to per-experiment qontext/trial/v1 files
// (<store>/<experiment_id>.jsonl).
//
// Request handling is split from the HTTP binding so the handlers can be
// exercised directly; mount() wires them onto an httplib::Server.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "errors.hpp"
#include "trial_model.hpp"

namespace qontext {

struct Stimulus {
  std::string image;
  std::string prompt;
};

struct ProtocolAssignment {
  enum class Kind { Fixed, Alternating, Random };
  Kind kind = Kind::Alternating;
  ProtocolKind fixed = ProtocolKind::AOnly;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::string experiment_id;
  std::map<std::string, Stimulus> stimuli;  // keyed by observable id
  std::int64_t display_ms = 3000;
  std::int64_t inter_test_gap_ms = 2000;
  std::int64_t response_window_ms = 10000;
  ProtocolAssignment protocol_assignment;
};

inline bool valid_identifier(std::string_view id) {
  static const std::regex pattern("[A-Za-z0-9_-]{1,64}");
  return std::regex_match(id.begin(), id.end(), pattern);
}

inline Json to_json(const ExperimentConfig& c) {
  Json stimuli = Json::object();
  for (const auto& [obs, s] : c.stimuli) stimuli[obs] = {{"image", s.image}, {"prompt", s.prompt}};
  Json assignment = Json::object();
  switch (c.protocol_assignment.kind) {
    case ProtocolAssignment::Kind::Fixed:
      assignment = {{"kind", "fixed"}, {"protocol", to_string(c.protocol_assignment.fixed)}};
      break;
    case ProtocolAssignment::Kind::Alternating: assignment = {{"kind", "alternating"}}; break;
    case ProtocolAssignment::Kind::Random:
      assignment = {{"kind", "random"}, {"seed", c.protocol_assignment.seed}};
      break;
  }
  return {{"experiment_id", c.experiment_id},
          {"stimuli", stimuli},
          {"display_ms", c.display_ms},
          {"inter_test_gap_ms", c.inter_test_gap_ms},
          {"response_window_ms", c.response_window_ms},
          {"protocol_assignment", assignment}};
}

inline ExperimentConfig parse_experiment_config(const Json& j) {
  try {
    ExperimentConfig c;
    c.experiment_id = j.at("experiment_id").get<std::string>();
    if (!valid_identifier(c.experiment_id)) throw DataError("invalid experiment_id '" + c.experiment_id + "'");
    if (auto it = j.find("stimuli"); it != j.end())
      for (const auto& [obs, s] : it->items())
        c.stimuli[obs] = {s.value("image", std::string()), s.value("prompt", std::string())};
    c.display_ms = j.value("display_ms", c.display_ms);
    c.inter_test_gap_ms = j.value("inter_test_gap_ms", c.inter_test_gap_ms);
    c.response_window_ms = j.value("response_window_ms", c.response_window_ms);
    if (c.display_ms <= 0 || c.inter_test_gap_ms <= 0 || c.response_window_ms <= 0)
      throw DataError(c.experiment_id + ": durations must be positive");
    if (auto it = j.find("protocol_assignment"); it != j.end()) {
      const auto kind = it->value("kind", std::string("alternating"));
      if (kind == "fixed") {
        c.protocol_assignment.kind = ProtocolAssignment::Kind::Fixed;
        auto p = parse_protocol(it->at("protocol").get<std::string>());
        if (!p) throw DataError(c.experiment_id + ": unknown fixed protocol");
        c.protocol_assignment.fixed = *p;
      } else if (kind == "random") {
        c.protocol_assignment.kind = ProtocolAssignment::Kind::Random;
        c.protocol_assignment.seed = it->value("seed", std::uint64_t{0});
      } else if (kind == "alternating") {
        c.protocol_assignment.kind = ProtocolAssignment::Kind::Alternating;
      } else {
        throw DataError(c.experiment_id + ": unknown protocol assignment '" + kind + "'");
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad experiment config: ") + e.what());
  }
}

// Accepts {"experiments": [...]}, a bare array, or a single config object.
inline std::vector<ExperimentConfig> parse_experiment_configs(const Json& j) {
  std::vector<ExperimentConfig> out;
  const Json* list = &j;
  if (j.is_object() && j.contains("experiments")) list = &j["experiments"];
  if (list->is_array()) {
    for (const auto& e : *list) out.push_back(parse_experiment_config(e));
  } else {
    out.push_back(parse_experiment_config(*list));
  }
  return out;
}

inline std::vector<ExperimentConfig> load_experiment_configs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open experiment config '" + path.string() + "'");
  try {
    return parse_experiment_configs(Json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("experiment config is not valid JSON: ") + e.what());
  }
}

struct Reply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct CollectorOptions {
  bool allow_replace = false;  // permits ?replace=1 resubmissions
  std::string allow_origin;    // CORS origin; empty disables the header
};

class Collector {
public:
  Collector(std::vector<ExperimentConfig> configs, std::filesystem::path store, CollectorOptions options = {})
      : store_(std::move(store)), options_(std::move(options)) {
    for (auto& c : configs) {
      auto id = c.experiment_id;
      configs_.emplace(std::move(id), std::move(c));
    }
    std::filesystem::create_directories(store_);
    load_existing();
  }

  Reply health() const { return {200, "ok", "text/plain"}; }

  Reply experiment_config(const std::string& id) const {
    if (!valid_identifier(id)) return error(400, "malformed experiment id");
    auto it = configs_.find(id);
    if (it == configs_.end()) return error(404, "unknown experiment '" + id + "'");
    return {200, to_json(it->second).dump()};
  }

  Reply submit_session(const std::string& body, bool replace = false) {
    Json j;
    try {
      j = Json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      return findings_reply({{std::nullopt, "invalid_json", e.what()}});
    }
    TrialRecord record;
    try {
      record = parse_record(j, 1);
    } catch (const MalformedRecord& e) {
      return findings_reply({{std::nullopt, "schema", e.reason()}});
    }
    if (!valid_identifier(record.experiment_id))
      return findings_reply({{std::nullopt, "experiment_id", "experiment_id must match [A-Za-z0-9_-]{1,64}"}});
    if (replace && !options_.allow_replace) return error(403, "replacement is disabled on this collector");

    const std::string line = serialize_record(record);
    auto& slot = store_slot(record.experiment_id);
    std::lock_guard lock(slot.mutex);
    try {
      if (slot.subjects.count(record.subject_id)) {
        if (!replace)
          return error(409, "duplicate session for subject '" + record.subject_id + "' in experiment '" +
                                record.experiment_id + "'");
        retire_record(record.experiment_id, record.subject_id);
      }
      append_line(store_file(record.experiment_id), line);
    } catch (const std::exception& e) {
      return error(500, std::string("store failure: ") + e.what());
    }
    slot.subjects.insert(record.subject_id);
    return {201, line};
  }

  std::filesystem::path store_file(const std::string& experiment_id) const {
    return store_ / (experiment_id + ".jsonl");
  }

  void mount(httplib::Server& server) {
    server.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
      if (!options_.allow_origin.empty()) {
        res.set_header("Access-Control-Allow-Origin", options_.allow_origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
      }
    });
    server.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get("/api/v1/health", [this](const httplib::Request&, httplib::Response& res) { send(res, health()); });
    server.Get(R"(/api/v1/experiments/([^/]+)/config)", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, experiment_config(req.matches[1]));
    });
    server.Post("/api/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      const auto flag = req.get_param_value("replace");
      send(res, submit_session(req.body, flag == "1" || flag == "true"));
    });
  }

private:
  struct StoreSlot {
    std::mutex mutex;
    std::set<std::string> subjects;
  };

  static Reply error(int status, const std::string& message) {
    return {status, Json{{"error", message}}.dump()};
  }

  static Reply findings_reply(const std::vector<Finding>& findings) {
    Json list = Json::array();
    for (const auto& f : findings) list.push_back({{"code", f.code}, {"message", f.message}});
    return {422, Json{{"error", "invalid session record"}, {"findings", list}}.dump()};
  }

  static void send(httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  }

  static void append_line(const std::filesystem::path& file, const std::string& line) {
    std::ofstream out(file, std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + file.string());
    out << line << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + file.string());
  }

  StoreSlot& store_slot(const std::string& experiment_id) {
    std::lock_guard lock(slots_mutex_);
    auto& slot = slots_[experiment_id];
    if (!slot) slot = std::make_unique<StoreSlot>();
    return *slot;
  }

  void load_existing() {
    namespace fs = std::filesystem;
    for (const auto& entry : fs::directory_iterator(store_)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
      std::ifstream in(entry.path());
      auto parsed = parse_trials(in);
      for (const auto& r : parsed.dataset.records) store_slot(r.experiment_id).subjects.insert(r.subject_id);
    }
  }

  // Moves the stored record for subject into <experiment>.jsonl.replaced, tagged, and
  // rewrites the live file without it. Caller holds the slot mutex.
  void retire_record(const std::string& experiment_id, const std::string& subject_id) {
    namespace fs = std::filesystem;
    const auto live = store_file(experiment_id);
    const auto retired = fs::path(live.string() + ".replaced");
    const auto temp = fs::path(live.string() + ".tmp");

    std::ifstream in(live);
    if (!in) throw std::runtime_error("cannot read " + live.string());
    std::vector<std::string> keep;
    std::string text;
    while (std::getline(in, text)) {
      if (text.empty()) continue;
      auto j = Json::parse(text, nullptr, false);
      if (!j.is_discarded() && j.value("subject_id", std::string()) == subject_id) {
        j["replaced_at"] = now_iso8601();
        append_line(retired, j.dump());
      } else {
        keep.push_back(text);
      }
    }
    in.close();
    {
      std::ofstream out(temp, std::ios::trunc | std::ios::binary);
      for (const auto& l : keep) out << l << '\n';
      out.flush();
      if (!out) throw std::runtime_error("write failed for " + temp.string());
    }
    fs::rename(temp, live);
  }

  static std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::map<std::string, ExperimentConfig> configs_;
  std::filesystem::path store_;
  CollectorOptions options_;
  std::mutex slots_mutex_;
  std::map<std::string, std::unique_ptr<StoreSlot>> slots_;
};

}  // namespace qontext
