#pragma once
// Command-line driver. Exit status: 0 success, 1 usage error, 2 data error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "collector.hpp"
#include "errors.hpp"
#include "report.hpp"
#include "synthetic.hpp"
#include "trial_model.hpp"

namespace qontext {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::optional<PhasePair> parse_phase_option(const std::string& text) {
  if (text == "solved") return std::nullopt;
  const std::string prefix = "paper:";
  if (text.rfind(prefix, 0) != 0) throw UsageError("--phases must be 'solved' or 'paper:<theta+>,<theta->'");
  const auto body = text.substr(prefix.size());
  const auto comma = body.find(',');
  if (comma == std::string::npos) throw UsageError("--phases paper: needs two comma-separated values");
  try {
    std::size_t used = 0;
    PhasePair p;
    p.plus = std::stod(body.substr(0, comma), &used);
    p.minus = std::stod(body.substr(comma + 1), &used);
    return p;
  } catch (const std::exception&) {
    throw UsageError("--phases paper: values must be numbers");
  }
}

inline PoolingMode parse_pooling(const std::string& s) {
  if (s == "paper") return PoolingMode::TableCompatible;
  if (s == "strict") return PoolingMode::Strict;
  throw UsageError("--pooling must be 'paper' or 'strict'");
}

inline Format parse_format_option(const std::string& s) {
  if (auto f = parse_format(s)) return *f;
  throw UsageError("--format must be text, json, or csv");
}

// Loads a dataset and fails on any malformed or duplicate line.
inline Dataset load_strict(const std::vector<std::string>& paths, std::ostream& err) {
  std::vector<std::filesystem::path> ps(paths.begin(), paths.end());
  for (const auto& p : ps)
    if (!std::filesystem::exists(p)) throw DataError("no such file or directory: " + p.string());
  auto parsed = load_trials(ps);
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics) err << d.message << '\n';
    throw DataError(std::to_string(parsed.diagnostics.size()) + " invalid line(s)");
  }
  auto report = validate_dataset(parsed.dataset);
  if (!report.ok()) {
    for (const auto& f : report.findings) err << f.message << '\n';
    throw DataError("dataset failed validation");
  }
  return std::move(parsed.dataset);
}

struct AnalysisArgs {
  std::vector<std::string> dataset;
  std::string pooling = "paper";
  std::string format = "text";
  std::string reference;
  std::string phases = "solved";
  bool per_experiment = false;
  bool pooled = false;
};

inline void add_analysis_options(CLI::App* cmd, AnalysisArgs& a, bool with_format = true) {
  cmd->add_option("dataset", a.dataset, "trial file(s) or directories of *.jsonl")->required();
  cmd->add_option("--pooling", a.pooling, "paper (undefined conditionals count as 0, rows pooled as displayed) or strict")
      ->capture_default_str();
  if (with_format) cmd->add_option("--format", a.format, "text, json, or csv")->capture_default_str();
  cmd->add_option("--reference", a.reference, "reference values JSON to compare against");
}

inline AnalysisReport build_from_args(const AnalysisArgs& a, std::ostream& err) {
  ReportOptions opts;
  opts.pooling = parse_pooling(a.pooling);
  opts.explicit_phases = parse_phase_option(a.phases);
  if (!a.reference.empty()) opts.reference = load_reference_values(a.reference);
  return build_report(load_strict(a.dataset, err), opts);
}

inline std::string pooled_only(const AnalysisReport& r, Format f) {
  std::ostringstream os;
  TableRow row{"Mean Value", r.table1.mean ? r.table1.mean->cells : detail::table_cells(r.pooled.statistics, r.pooling)};
  switch (f) {
    case Format::Text:
      detail::text_table(os, {&row});
      os << '\n';
      detail::text_interference(os, r.pooled);
      break;
    case Format::Csv: detail::csv_table(os, {&row}, false); break;
    case Format::Json: {
      Json j = detail::analysis_json(r.pooled);
      j["schema"] = kReportSchema;
      j["table_row"] = detail::table_json({&row})["rows"][0];
      os << j.dump(2) << '\n';
      break;
    }
  }
  return os.str();
}

inline std::string per_experiment_only(const AnalysisReport& r, Format f) {
  std::ostringstream os;
  std::vector<const TableRow*> rows;
  for (const auto& row : r.table1.experiments) rows.push_back(&row);
  switch (f) {
    case Format::Text:
      detail::text_table(os, rows);
      os << '\n';
      for (const auto& e : r.per_experiment) detail::text_interference(os, e);
      break;
    case Format::Csv: detail::csv_table(os, rows, false); break;
    case Format::Json: {
      Json list = Json::array();
      for (const auto& e : r.per_experiment) list.push_back(detail::analysis_json(e));
      os << Json{{"schema", kReportSchema}, {"per_experiment", list}}.dump(2) << '\n';
      break;
    }
  }
  return os.str();
}

inline bool parse_host_port(const std::string& addr, std::string& host, int& port) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) return false;
  host = addr.substr(0, colon);
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    return false;
  }
  return !host.empty() && port >= 0 && port <= 65535;
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contextual probability analysis for two-observable cognitive experiments", "qontext"};
  app.require_subcommand(1);

  std::vector<std::string> validate_paths;
  auto* validate = app.add_subcommand("validate", "check trial files for schema and shape violations");
  validate->add_option("paths", validate_paths, "trial files or directories")->required();

  detail::AnalysisArgs analyze_args, table_args, ttest_args, wave_args;
  auto* analyze = app.add_subcommand("analyze", "full analysis report");
  detail::add_analysis_options(analyze, analyze_args);
  auto* per_flag = analyze->add_flag("--per-experiment", analyze_args.per_experiment, "only per-experiment rows");
  analyze->add_flag("--pooled", analyze_args.pooled, "only the pooled (mean value) row")->excludes(per_flag);

  auto* table1 = app.add_subcommand("table1", "seven-column probability table");
  detail::add_analysis_options(table1, table_args);

  auto* ttest = app.add_subcommand("ttest", "pooled two-sample t-test of columns I and VII");
  detail::add_analysis_options(ttest, ttest_args);

  auto* wave = app.add_subcommand("wavefunction", "wave-function reconstruction and Born check");
  detail::add_analysis_options(wave, wave_args);
  wave->add_option("--phases", wave_args.phases, "solved, or paper:<theta+>,<theta-> in radians")->capture_default_str();

  std::string spec_path, out_path;
  std::uint64_t seed = 0;
  auto* simulate_cmd = app.add_subcommand("simulate", "generate a synthetic trial file");
  simulate_cmd->add_option("--spec", spec_path, "simulation spec JSON")->required();
  simulate_cmd->add_option("--seed", seed, "seed for Bernoulli mode")->capture_default_str();
  simulate_cmd->add_option("--out", out_path, "output .jsonl path")->required();

  std::string addr = "127.0.0.1:8080", store_dir, config_path, allow_origin;
  bool allow_replace = false;
  auto* serve = app.add_subcommand("serve", "run the session collector");
  serve->add_option("--addr", addr, "host:port")->capture_default_str();
  serve->add_option("--store", store_dir, "directory for per-experiment .jsonl files")->required();
  serve->add_option("--experiment-config", config_path, "experiment configuration JSON");
  serve->add_option("--allow-origin", allow_origin, "value for Access-Control-Allow-Origin");
  serve->add_flag("--allow-replace", allow_replace, "accept ?replace=1 resubmissions (old record is retired)");

  std::vector<std::string> argv_store(args.begin(), args.end());
  std::reverse(argv_store.begin(), argv_store.end());
  try {
    app.parse(argv_store);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*validate) {
      std::vector<std::filesystem::path> ps(validate_paths.begin(), validate_paths.end());
      for (const auto& p : ps)
        if (!std::filesystem::exists(p)) throw DataError("no such file or directory: " + p.string());
      auto parsed = load_trials(ps);
      auto report = validate_dataset(parsed.dataset);
      for (const auto& d : parsed.diagnostics) err << d.message << '\n';
      for (const auto& f : report.findings)
        err << (f.record_index ? "record " + std::to_string(*f.record_index) + ": " : std::string()) << f.message
            << '\n';
      if (!parsed.ok() || !report.ok()) return kExitData;
      out << "ok: " << parsed.dataset.size() << " records in " << parsed.dataset.count_by_experiment().size()
          << " experiment(s)\n";
      for (const auto& [id, n] : parsed.dataset.count_by_experiment()) out << "  " << id << ": " << n << '\n';
      return kExitOk;
    }
    if (*analyze) {
      const auto format = detail::parse_format_option(analyze_args.format);
      const auto report = detail::build_from_args(analyze_args, err);
      if (analyze_args.pooled)
        out << detail::pooled_only(report, format);
      else if (analyze_args.per_experiment)
        out << detail::per_experiment_only(report, format);
      else
        out << export_analysis(report, format);
      return kExitOk;
    }
    if (*table1) {
      const auto format = detail::parse_format_option(table_args.format);
      out << render_table1(detail::build_from_args(table_args, err), format);
      return kExitOk;
    }
    if (*ttest) {
      const auto format = detail::parse_format_option(ttest_args.format);
      const auto report = detail::build_from_args(ttest_args, err);
      if (!report.ttest) throw InsufficientData("t-test needs at least two experiments");
      if (format == Format::Json)
        out << report_json(report)["ttest"].dump(2) << '\n';
      else
        out << render_ttest(report);
      return kExitOk;
    }
    if (*wave) {
      const auto format = detail::parse_format_option(wave_args.format);
      const auto report = detail::build_from_args(wave_args, err);
      if (!report.wavefunction) {
        for (const auto& n : report.notes) err << n << '\n';
        throw DataError("wave function could not be constructed");
      }
      if (format == Format::Json) {
        auto j = report_json(report);
        out << Json{{"schema", kReportSchema}, {"wavefunction", j["wavefunction"]}, {"discrepancies", j["discrepancies"]}}
                   .dump(2)
            << '\n';
      } else {
        out << render_wavefunction(report) << render_discrepancies(report);
      }
      return kExitOk;
    }
    if (*simulate_cmd) {
      const auto plan = load_simulation_plan(spec_path);
      const auto dataset = simulate(plan, seed);
      std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
      if (!file) throw DataError("cannot write '" + out_path + "'");
      write_dataset(dataset, file);
      out << "wrote " << dataset.size() << " records to " << out_path << '\n';
      return kExitOk;
    }
    if (*serve) {
      std::string host;
      int port = 0;
      if (!detail::parse_host_port(addr, host, port)) throw UsageError("--addr must be host:port");
      std::vector<ExperimentConfig> configs;
      if (!config_path.empty()) configs = load_experiment_configs(config_path);
      Collector collector(std::move(configs), store_dir, {allow_replace, allow_origin});
      httplib::Server server;
      collector.mount(server);
      out << "collector listening on " << host << ':' << port << ", store " << store_dir << std::endl;
      if (!server.listen(host, port)) throw DataError("cannot listen on " + addr);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace qontext
