#pragma once
// Analysis report: per-experiment and pooled statistics, the seven-column
// probability table, t-test, wave function, and comparisons against
// externally supplied reference values.
//
// Values are kept at full precision; rounding to four decimals happens only
// when a table is rendered.

#include <array>
#include <complex>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "amplitude.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "interference.hpp"
#include "rounding.hpp"
#include "stats.hpp"
#include "trial_model.hpp"

namespace qontext {

inline constexpr std::string_view kReportSchema = "qontext/report/v1";
inline constexpr std::size_t kTableColumns = 7;

inline constexpr std::array<std::string_view, kTableColumns> kColumnRoman{"I", "II", "III", "IV", "V", "VI", "VII"};
inline constexpr std::array<std::string_view, kTableColumns> kColumnTitles{
    "p(A=+)", "p(A=-)", "p(B=+)", "p(B=-)", "p(A=+|B=+)", "p(A=+|B=-)", "p(B=+)p(A=+|B=+)+p(B=-)p(A=+|B=-)"};

using TableCells = std::array<std::optional<double>, kTableColumns>;

struct TableRow {
  std::string label;
  TableCells cells{};
};

struct Table1 {
  std::vector<TableRow> experiments;
  std::optional<TableRow> mean;  // present with two or more experiments
  std::optional<TableRow> sd;

  std::vector<const TableRow*> all_rows() const {
    std::vector<const TableRow*> rows;
    for (const auto& r : experiments) rows.push_back(&r);
    if (mean) rows.push_back(&*mean);
    if (sd) rows.push_back(&*sd);
    return rows;
  }
};

struct ExperimentAnalysis {
  std::string experiment_id;
  ContextualStatistics statistics;
  ContextEffectSummary interference;
};

struct WaveFunctionReport {
  WaveFunction wave;
  std::string phase_source;  // "solved" or "explicit"
  BornCheck born;
  double mean_value = 0.0;
  double expected_mean_value = 0.0;  // p(A=+) - p(A=-)
};

// Externally published numbers to compare against. Every field is optional.
struct ReferenceValues {
  std::optional<double> cos_theta_plus, theta_plus, cos_theta_minus, theta_minus;
  std::optional<ComplexAmplitude> phi_plus, phi_minus;
  std::optional<double> mean_value;
  std::optional<double> t, pooled_sd, p_two_tailed;
  std::optional<TableCells> table_mean, table_sd;
};

inline constexpr double kReferenceTolerance = 1e-3;

struct ReferenceCheck {
  std::string quantity;
  double reference = 0.0;
  double computed = 0.0;
  bool reproduced = false;
  std::string note;

  double difference() const noexcept { return computed - reference; }
};

struct AnalysisReport {
  PoolingMode pooling = PoolingMode::Strict;
  std::vector<ExperimentAnalysis> per_experiment;
  ExperimentAnalysis pooled;
  Table1 table1;
  std::optional<TTestResult> ttest;
  std::optional<WaveFunctionReport> wavefunction;
  std::vector<ReferenceCheck> reference_checks;
  std::vector<ReferenceCheck> discrepancies;  // reference checks that were not reproduced
  std::vector<std::string> notes;
};

struct ReportOptions {
  PoolingMode pooling = PoolingMode::Strict;
  std::optional<PhasePair> explicit_phases;  // default: phases solved from the pooled statistics
  std::optional<ReferenceValues> reference;
};

// ---------------------------------------------------------------------------

namespace detail {

inline TableCells table_cells(const ContextualStatistics& s, PoolingMode mode) {
  TableCells c;
  c[0] = s.p_a_plus;
  c[1] = s.p_a_minus;
  c[2] = s.p_b_plus;
  c[3] = s.p_b_minus;
  c[4] = s.conditional(Outcome::Plus, Outcome::Plus);
  c[5] = s.conditional(Outcome::Plus, Outcome::Minus);
  if (mode == PoolingMode::TableCompatible) {
    if (!c[4]) c[4] = 0.0;
    if (!c[5]) c[5] = 0.0;
  }
  c[6] = classical_prediction(s, Outcome::Plus);
  return c;
}

inline std::vector<double> column(const std::vector<TableRow>& rows, std::size_t col, bool rounded) {
  std::vector<double> v;
  for (const auto& r : rows)
    if (r.cells[col]) v.push_back(rounded ? round_to(*r.cells[col]) : *r.cells[col]);
  return v;
}

inline std::string describe(double x) { return format_fixed(x); }

inline std::string describe(const ComplexAmplitude& z) {
  return format_fixed(z.re) + (z.im < 0 ? " - " : " + ") + format_fixed(std::fabs(z.im)) + "i";
}

inline void compare(AnalysisReport& r, std::string quantity, std::optional<double> reference, double computed,
                    std::string note_if_divergent = {}) {
  if (!reference) return;
  ReferenceCheck c{std::move(quantity), *reference, computed, std::fabs(computed - *reference) <= kReferenceTolerance,
                   {}};
  if (!c.reproduced) {
    c.note = c.quantity + ": reference " + describe(c.reference) + " is not reproduced; computed " +
             describe(c.computed) + " (difference " + describe(c.difference()) + ")";
    if (!note_if_divergent.empty()) c.note += ". " + note_if_divergent;
  }
  r.reference_checks.push_back(c);
  if (!c.reproduced) r.discrepancies.push_back(c);
}

inline void compare_reference(AnalysisReport& r, const ReferenceValues& ref) {
  const auto& pooled = r.pooled.statistics;
  const auto& plus = r.pooled.interference.plus;
  const auto& minus = r.pooled.interference.minus;
  const std::string solved_note =
      "The reference value does not satisfy the interference formula on the pooled statistics";

  if (plus.lambda) compare(r, "cos theta(+)", ref.cos_theta_plus, *plus.lambda, solved_note);
  if (plus.phase_rad) compare(r, "theta(+)", ref.theta_plus, *plus.phase_rad, solved_note);
  if (minus.lambda) compare(r, "cos theta(-)", ref.cos_theta_minus, *minus.lambda, solved_note);
  if (minus.phase_rad) compare(r, "theta(-)", ref.theta_minus, *minus.phase_rad, solved_note);

  // Amplitudes printed with the reference phases, against direct evaluation at those phases.
  if (ref.theta_plus && ref.theta_minus) {
    try {
      const auto w = build_wave_function(pooled, {*ref.theta_plus, *ref.theta_minus});
      for (Outcome x : kOutcomes) {
        const auto& printed = x == Outcome::Plus ? ref.phi_plus : ref.phi_minus;
        if (!printed) continue;
        const std::string sign = x == Outcome::Plus ? "+" : "-";
        const std::string at = "at the reference theta(" + sign + ")";
        compare(r, "Re phi(" + sign + ")", printed->re, w[x].re, "Direct evaluation " + at + " gives " + describe(w[x]));
        compare(r, "Im phi(" + sign + ")", printed->im, w[x].im, "Direct evaluation " + at + " gives " + describe(w[x]));
        compare(r, "|phi(" + sign + ")|^2 of the reference amplitude", printed->norm_squared(), pooled.p_a(x),
                "Born's rule fails for the reference amplitude " + describe(*printed));
      }
    } catch (const std::exception&) {
      // reference phases outside [0, pi] or undefined terms: nothing to compare
    }
  }

  if (r.wavefunction) compare(r, "mean value E(A)", ref.mean_value, r.wavefunction->mean_value);
  if (r.ttest) {
    compare(r, "t", ref.t, r.ttest->t);
    compare(r, "pooled sd", ref.pooled_sd, r.ttest->pooled_sd);
    compare(r, "two-tailed p", ref.p_two_tailed, r.ttest->p_two_tailed);
  }
  auto compare_row = [&](const std::optional<TableRow>& row, const std::optional<TableCells>& cells,
                         const std::string& label) {
    if (!row || !cells) return;
    for (std::size_t i = 0; i < kTableColumns; ++i)
      if ((*cells)[i] && row->cells[i])
        compare(r, label + " column " + std::string(kColumnRoman[i]), (*cells)[i], *row->cells[i]);
  };
  compare_row(r.table1.mean, ref.table_mean, "table mean");
  compare_row(r.table1.sd, ref.table_sd, "table sd");
}

}  // namespace detail

inline AnalysisReport build_report(const Dataset& dataset, const ReportOptions& options = {}) {
  const auto parts = partition_by_experiment(dataset);
  if (parts.empty()) throw InsufficientData("no records");

  AnalysisReport report;
  report.pooling = options.pooling;
  const bool table_mode = options.pooling == PoolingMode::TableCompatible;

  std::vector<ContextualStatistics> to_pool;
  for (const auto& [id, part] : parts) {
    ExperimentAnalysis e;
    e.experiment_id = id;
    try {
      e.statistics = estimate_statistics(part);
    } catch (const InsufficientData& err) {
      throw InsufficientData("experiment '" + id + "': " + err.what());
    }
    e.interference = analyze_interference(e.statistics);
    report.table1.experiments.push_back({id, detail::table_cells(e.statistics, options.pooling)});
    // Table-compatible pooling averages the rows as displayed.
    to_pool.push_back(table_mode ? quantize(e.statistics) : e.statistics);
    report.per_experiment.push_back(std::move(e));
  }

  report.pooled.experiment_id = "pooled";
  report.pooled.statistics = pool_statistics(to_pool, options.pooling, &report.notes);
  report.pooled.interference = analyze_interference(report.pooled.statistics);

  const auto& rows = report.table1.experiments;
  if (rows.size() >= 2) {
    TableRow mean{"Mean Value", {}}, sd{"Standard Deviation", {}};
    for (std::size_t col = 0; col < kTableColumns; ++col) {
      const auto values = detail::column(rows, col, table_mode);
      if (values.size() >= 2) {
        auto [m, s] = sample_mean_std(values);
        mean.cells[col] = m;
        sd.cells[col] = s;
      } else if (values.size() == 1) {
        mean.cells[col] = values.front();
      }
    }
    report.table1.mean = mean;
    report.table1.sd = sd;

    const auto g1 = detail::column(rows, 0, table_mode);
    const auto g7 = detail::column(rows, 6, table_mode);
    if (table_mode) {
      // Test statistic from the summary rows as displayed.
      const SampleSummary s1{g1.size(), round_to(*mean.cells[0]), round_to(*sd.cells[0])};
      const SampleSummary s7{g7.size(), round_to(*mean.cells[6]), round_to(*sd.cells[6])};
      report.ttest = pooled_t_test(s1, s7);
      const auto unrounded = pooled_t_test(g1, g7);
      report.notes.push_back("t-test uses the displayed column summaries; from the unrounded cells t = " +
                             format_fixed(unrounded.t) + ", p = " + format_fixed(unrounded.p_two_tailed));
    } else {
      report.ttest = pooled_t_test(g1, g7);
    }
  }

  const auto& pooled = report.pooled.statistics;
  std::optional<PhasePair> phases = options.explicit_phases;
  std::string source = phases ? "explicit" : "solved";
  if (!phases) {
    if (report.pooled.interference.classification == ContextEffect::Trigonometric)
      phases = solved_phases(pooled);
    else
      report.notes.push_back("no solved phases: pooled context effect is " +
                             std::string(to_string(report.pooled.interference.classification)));
  }
  if (phases) {
    try {
      WaveFunctionReport w;
      w.wave = build_wave_function(pooled, *phases, dataset.observables);
      w.phase_source = source;
      w.born = check_born(w.wave, pooled);
      w.mean_value = mean_value(w.wave);
      w.expected_mean_value = pooled.p_a_plus - pooled.p_a_minus;
      if (!w.born.pass)
        report.notes.push_back("Born-rule violation: |phi(+)|^2 = " + format_fixed(w.born.born_plus) +
                               " but p(A=+) = " + format_fixed(w.born.expected_plus));
      report.wavefunction = w;
    } catch (const std::exception& e) {
      report.notes.push_back(std::string("wave function not constructed: ") + e.what());
    }
  }

  if (options.reference) detail::compare_reference(report, *options.reference);
  return report;
}

// ---------------------------------------------------------------------------
// Reference values file: {"cos_theta_plus": ..., "phi_plus": {"re": .., "im": ..},
// "ttest": {"t":..,"pooled_sd":..,"p_two_tailed":..}, "table1": {"mean": [7], "sd": [7]}, ...}

inline ReferenceValues parse_reference_values(const Json& j) {
  ReferenceValues r;
  auto num = [&](const Json& obj, const char* key) -> std::optional<double> {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw DataError(std::string("reference value '") + key + "' must be a number");
    return it->get<double>();
  };
  auto amp = [&](const char* key) -> std::optional<ComplexAmplitude> {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    auto re = num(*it, "re"), im = num(*it, "im");
    if (!re || !im) throw DataError(std::string("reference amplitude '") + key + "' needs re and im");
    return ComplexAmplitude{*re, *im};
  };
  auto cells = [&](const Json& obj, const char* key) -> std::optional<TableCells> {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (!it->is_array() || it->size() != kTableColumns)
      throw DataError(std::string("reference row '") + key + "' must have 7 entries");
    TableCells c;
    for (std::size_t i = 0; i < kTableColumns; ++i)
      if (!(*it)[i].is_null()) c[i] = (*it)[i].get<double>();
    return c;
  };
  if (!j.is_object()) throw DataError("reference values must be a JSON object");
  r.cos_theta_plus = num(j, "cos_theta_plus");
  r.theta_plus = num(j, "theta_plus");
  r.cos_theta_minus = num(j, "cos_theta_minus");
  r.theta_minus = num(j, "theta_minus");
  r.phi_plus = amp("phi_plus");
  r.phi_minus = amp("phi_minus");
  r.mean_value = num(j, "mean_value");
  if (auto it = j.find("ttest"); it != j.end()) {
    r.t = num(*it, "t");
    r.pooled_sd = num(*it, "pooled_sd");
    r.p_two_tailed = num(*it, "p_two_tailed");
  }
  if (auto it = j.find("table1"); it != j.end()) {
    r.table_mean = cells(*it, "mean");
    r.table_sd = cells(*it, "sd");
  }
  return r;
}

inline ReferenceValues load_reference_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open reference values '" + path + "'");
  try {
    return parse_reference_values(Json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad reference values: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Rendering

enum class Format { Text, Csv, Json };

inline std::optional<Format> parse_format(std::string_view s) {
  if (s == "text") return Format::Text;
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  return std::nullopt;
}

// RFC 4180 field quoting.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

namespace detail {

inline std::string cell_text(const std::optional<double>& v) { return v ? format_fixed(*v) : std::string(); }

inline Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json rounded_json(const std::optional<double>& v) { return v ? Json(round_to(*v)) : Json(nullptr); }

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

inline std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

inline void text_table(std::ostream& os, const std::vector<const TableRow*>& rows) {
  std::size_t label_width = 18;
  for (auto* r : rows) label_width = std::max(label_width, r->label.size());
  os << pad_right("Experiments", label_width);
  for (auto c : kColumnRoman) os << ' ' << pad(std::string(c), 10);
  os << '\n' << pad_right("", label_width);
  for (std::size_t i = 0; i < kTableColumns; ++i)
    os << ' ' << pad(i + 1 < kTableColumns ? std::string(kColumnTitles[i]) : "classical", 10);
  os << '\n';
  for (auto* r : rows) {
    os << pad_right(r->label, label_width);
    for (const auto& c : r->cells) os << ' ' << pad(cell_text(c), 10);
    os << '\n';
  }
}

inline void csv_table(std::ostream& os, const std::vector<const TableRow*>& rows, bool full_precision) {
  os << "row";
  for (auto t : kColumnTitles) os << ',' << csv_field(t);
  os << "\r\n";
  for (auto* r : rows) {
    os << csv_field(r->label);
    for (const auto& c : r->cells) {
      os << ',';
      if (!c) continue;
      if (full_precision) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *c);
        os << buf;
      } else {
        os << format_fixed(*c);
      }
    }
    os << "\r\n";
  }
}

inline Json table_json(const std::vector<const TableRow*>& rows) {
  Json j = Json::object();
  Json cols = Json::array();
  for (std::size_t i = 0; i < kTableColumns; ++i) cols.push_back({{"id", kColumnRoman[i]}, {"title", kColumnTitles[i]}});
  j["columns"] = cols;
  Json out = Json::array();
  for (auto* r : rows) {
    Json row = {{"label", r->label}};
    Json display = Json::array(), values = Json::array();
    for (const auto& c : r->cells) {
      display.push_back(rounded_json(c));
      values.push_back(opt_json(c));
    }
    row["display"] = display;
    row["values"] = values;
    out.push_back(row);
  }
  j["rows"] = out;
  return j;
}

inline Json counts_json(const OutcomeCounts& c) {
  return {{"n_a_only", c.n_a_only},
          {"n_a_only_plus", c.n_a_only_plus},
          {"n_b_then_a", c.n_b_then_a},
          {"n_b_plus", c.n_b_plus},
          {"n_b_minus", c.n_b_minus},
          {"n_a_plus_given_b_plus", c.n_a_plus_given_b_plus},
          {"n_a_plus_given_b_minus", c.n_a_plus_given_b_minus}};
}

inline Json statistics_json(const ContextualStatistics& s) {
  return {{"provenance", to_string(s.provenance)},
          {"p_a_plus", s.p_a_plus},
          {"p_a_minus", s.p_a_minus},
          {"p_b_plus", s.p_b_plus},
          {"p_b_minus", s.p_b_minus},
          {"p_a_plus_given_b_plus", opt_json(s.conditional(Outcome::Plus, Outcome::Plus))},
          {"p_a_minus_given_b_plus", opt_json(s.conditional(Outcome::Minus, Outcome::Plus))},
          {"p_a_plus_given_b_minus", opt_json(s.conditional(Outcome::Plus, Outcome::Minus))},
          {"p_a_minus_given_b_minus", opt_json(s.conditional(Outcome::Minus, Outcome::Minus))},
          {"counts", counts_json(s.counts)}};
}

inline Json interference_json(const InterferenceResult& r) {
  return {{"outcome", to_string(r.outcome)},
          {"classical_prediction", r.classical_prediction},
          {"residual", r.residual},
          {"denominator", r.denominator},
          {"lambda", opt_json(r.lambda)},
          {"phase_rad", opt_json(r.phase_rad)},
          {"classification", to_string(r.classification)}};
}

inline Json analysis_json(const ExperimentAnalysis& e) {
  const auto& f = e.interference;
  return {{"experiment_id", e.experiment_id},
          {"statistics", statistics_json(e.statistics)},
          {"classical_prediction", {{"plus", f.plus.classical_prediction}, {"minus", f.minus.classical_prediction}}},
          {"lambda_plus", opt_json(f.plus.lambda)},
          {"lambda_minus", opt_json(f.minus.lambda)},
          {"phase_plus_rad", opt_json(f.plus.phase_rad)},
          {"phase_minus_rad", opt_json(f.minus.phase_rad)},
          {"classification", to_string(f.classification)},
          {"zero_sum_check", f.zero_sum_check},
          {"interference", {{"plus", interference_json(f.plus)}, {"minus", interference_json(f.minus)}}}};
}

inline Json amplitude_json(const ComplexAmplitude& z) { return {{"re", z.re}, {"im", z.im}}; }

inline Json check_json(const ReferenceCheck& c) {
  return {{"quantity", c.quantity},   {"reference", c.reference}, {"computed", c.computed},
          {"difference", c.difference()}, {"reproduced", c.reproduced}, {"note", c.note}};
}

inline void text_interference(std::ostream& os, const ExperimentAnalysis& e) {
  os << e.experiment_id << ": " << to_string(e.interference.classification) << '\n';
  for (const auto* r : {&e.interference.plus, &e.interference.minus}) {
    os << "  A=" << (r->outcome == Outcome::Plus ? '+' : '-') << "  observed " << format_fixed(e.statistics.p_a(r->outcome))
       << "  classical " << format_fixed(r->classical_prediction) << "  residual " << format_fixed(r->residual)
       << "  denominator " << format_fixed(r->denominator) << "  cos theta "
       << (r->lambda ? format_fixed(*r->lambda) : std::string("undefined")) << "  theta "
       << (r->phase_rad ? format_fixed(*r->phase_rad) : std::string("-")) << '\n';
  }
  os << "  zero-sum check " << format_fixed(e.interference.zero_sum_check) << '\n';
}

}  // namespace detail

inline std::string render_table1(const AnalysisReport& report, Format format) {
  std::ostringstream os;
  const auto rows = report.table1.all_rows();
  switch (format) {
    case Format::Text: detail::text_table(os, rows); break;
    case Format::Csv: detail::csv_table(os, rows, false); break;
    case Format::Json: os << detail::table_json(rows).dump(2) << '\n'; break;
  }
  return os.str();
}

inline std::string render_ttest(const AnalysisReport& report) {
  std::ostringstream os;
  if (!report.ttest) return "t-test: needs at least two experiments\n";
  const auto& t = *report.ttest;
  os << "Student's t-test (pooled variance), columns I vs VII\n"
     << "  t = " << format_fixed(t.t) << "  pooled sd = " << format_fixed(t.pooled_sd) << "  df = " << t.df
     << "  two-tailed p = " << format_fixed(t.p_two_tailed) << '\n'
     << "  group I mean " << format_fixed(t.group_means.first) << " sd " << format_fixed(t.group_sds.first)
     << "; group VII mean " << format_fixed(t.group_means.second) << " sd " << format_fixed(t.group_sds.second) << '\n';
  return os.str();
}

inline std::string render_wavefunction(const AnalysisReport& report) {
  std::ostringstream os;
  if (!report.wavefunction) return "wave function: not available\n";
  const auto& w = *report.wavefunction;
  os << "Wave function (" << w.phase_source << " phases theta(+) = " << format_fixed(w.wave.phases.plus)
     << ", theta(-) = " << format_fixed(w.wave.phases.minus) << ")\n"
     << "  phi(+) = " << detail::describe(w.wave.phi_plus) << '\n'
     << "  phi(-) = " << detail::describe(w.wave.phi_minus) << '\n'
     << "  |phi(+)|^2 = " << format_fixed(w.born.born_plus) << "  p(A=+) = " << format_fixed(w.born.expected_plus) << '\n'
     << "  |phi(-)|^2 = " << format_fixed(w.born.born_minus) << "  p(A=-) = " << format_fixed(w.born.expected_minus) << '\n'
     << "  Born check: " << (w.born.pass ? "PASS" : "FAIL") << '\n'
     << "  mean value (A phi, phi) = " << format_fixed(w.mean_value)
     << "  p(A=+) - p(A=-) = " << format_fixed(w.expected_mean_value) << '\n';
  return os.str();
}

inline std::string render_discrepancies(const AnalysisReport& report) {
  std::ostringstream os;
  if (!report.reference_checks.empty()) {
    os << "Reference comparison (" << report.reference_checks.size() << " values, " << report.discrepancies.size()
       << " not reproduced)\n";
    for (const auto& c : report.discrepancies) os << "  - " << c.note << '\n';
  }
  if (!report.notes.empty()) {
    os << "Notes\n";
    for (const auto& n : report.notes) os << "  - " << n << '\n';
  }
  return os.str();
}

inline Json report_json(const AnalysisReport& report) {
  Json j = Json::object();
  j["schema"] = kReportSchema;
  j["pooling"] = to_string(report.pooling);
  Json per = Json::array();
  for (const auto& e : report.per_experiment) per.push_back(detail::analysis_json(e));
  j["per_experiment"] = per;
  j["pooled"] = detail::analysis_json(report.pooled);
  j["table1"] = detail::table_json(report.table1.all_rows());
  if (report.ttest) {
    const auto& t = *report.ttest;
    j["ttest"] = {{"t", t.t},
                  {"df", t.df},
                  {"pooled_sd", t.pooled_sd},
                  {"p_two_tailed", t.p_two_tailed},
                  {"group_means", {t.group_means.first, t.group_means.second}},
                  {"group_sds", {t.group_sds.first, t.group_sds.second}}};
  } else {
    j["ttest"] = nullptr;
  }
  if (report.wavefunction) {
    const auto& w = *report.wavefunction;
    j["wavefunction"] = {{"phase_source", w.phase_source},
                         {"phases", {{"plus", w.wave.phases.plus}, {"minus", w.wave.phases.minus}}},
                         {"phi_plus", detail::amplitude_json(w.wave.phi_plus)},
                         {"phi_minus", detail::amplitude_json(w.wave.phi_minus)},
                         {"reference_observables", {w.wave.reference_observables.first.id, w.wave.reference_observables.second.id}},
                         {"born", {{"plus", w.born.born_plus}, {"minus", w.born.born_minus}, {"pass", w.born.pass}}},
                         {"mean_value", w.mean_value},
                         {"expected_mean_value", w.expected_mean_value}};
  } else {
    j["wavefunction"] = nullptr;
  }
  Json checks = Json::array(), disc = Json::array();
  for (const auto& c : report.reference_checks) checks.push_back(detail::check_json(c));
  for (const auto& c : report.discrepancies) disc.push_back(detail::check_json(c));
  j["reference_checks"] = checks;
  j["discrepancies"] = disc;
  j["notes"] = report.notes;
  return j;
}

// Full report. CSV carries the table at full precision; text is the human-readable report.
inline std::string export_analysis(const AnalysisReport& report, Format format) {
  std::ostringstream os;
  switch (format) {
    case Format::Json: os << report_json(report).dump(2) << '\n'; break;
    case Format::Csv: detail::csv_table(os, report.table1.all_rows(), true); break;
    case Format::Text:
      os << "Calculated probabilities (pooling: " << to_string(report.pooling) << ")\n";
      os << render_table1(report, Format::Text) << '\n';
      os << "Interference\n";
      for (const auto& e : report.per_experiment) detail::text_interference(os, e);
      detail::text_interference(os, report.pooled);
      os << '\n' << render_ttest(report) << '\n' << render_wavefunction(report);
      if (auto d = render_discrepancies(report); !d.empty()) os << '\n' << d;
      break;
  }
  return os.str();
}

}  // namespace qontext
