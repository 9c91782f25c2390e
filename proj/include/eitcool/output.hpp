#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eitcool/config.hpp"
#include "eitcool/dark_state.hpp"
#include "eitcool/sweep.hpp"

namespace eitcool {

inline constexpr const char* kVersion = "0.1.0";

/// RFC-4180 field: quoted when it holds a comma, quote or line break.
inline std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << csv_field(fields[i]);
  os << "\r\n";
}

namespace detail {

inline std::vector<std::string> axis_names(const SweepSpec& s) {
  if (s.scenario == Scenario::fig3) return {"case", "gamma_g", "beta"};
  std::vector<std::string> out;
  for (const Axis& a : s.axes) out.push_back(a.knob);
  return out;
}

inline std::vector<std::string> leading_fields(const SweepSpec& s, const ResultRecord& r) {
  std::vector<std::string> out;
  if (s.scenario == Scenario::fig3) out.push_back(r.label);
  for (double v : r.axis_values) out.push_back(format_double(v));
  return out;
}

inline std::vector<std::string> summary_fields(const SweepSpec& s, const ResultRecord& r) {
  auto out = leading_fields(s, r);
  for (const auto& kv : r.observables) out.push_back(format_double(kv.second));
  out.push_back(format_double(r.diagnostics.residual));
  out.push_back(r.diagnostics.converged ? "true" : "false");
  return out;
}

}  // namespace detail

/// Grid table: one row per record (fig3: one row per case and time).
inline void write_csv(std::ostream& os, const SweepSpec& s, const std::vector<ResultRecord>& records) {
  if (s.scenario == Scenario::fig3) {
    std::vector<std::string> head = detail::axis_names(s);
    head.push_back("t");
    if (!records.empty()) {
      for (const auto& kv : records.front().series) head.push_back(kv.first);
    }
    const std::size_t n_series = head.size() - 4;
    write_csv_row(os, head);
    for (const ResultRecord& r : records) {
      const auto lead = detail::leading_fields(s, r);
      for (std::size_t i = 0; i < r.times.size(); ++i) {
        auto row = lead;
        row.push_back(format_double(r.times[i]));
        for (std::size_t k = 0; k < n_series; ++k) row.push_back(format_double(r.series.at(k).second[i]));
        write_csv_row(os, row);
      }
    }
    return;
  }
  std::vector<std::string> head = detail::axis_names(s);
  for (const auto& n : observable_names(s)) head.push_back(n);
  head.push_back("residual");
  head.push_back("converged");
  write_csv_row(os, head);
  for (const ResultRecord& r : records) write_csv_row(os, detail::summary_fields(s, r));
}

/// Per-case steady values and settling times of a fig3 run.
inline void write_fig3_summary_csv(std::ostream& os, const SweepSpec& s, const std::vector<ResultRecord>& records) {
  std::vector<std::string> head = detail::axis_names(s);
  for (const auto& n : observable_names(s)) head.push_back(n);
  head.push_back("residual");
  head.push_back("converged");
  write_csv_row(os, head);
  for (const ResultRecord& r : records) write_csv_row(os, detail::summary_fields(s, r));
}

/// gnuplot blocks: a blank line after each outer-axis row (pm3d layout);
/// fig3 cases are separated by two blank lines (one index per case).
inline void write_dat(std::ostream& os, const SweepSpec& s, const std::vector<ResultRecord>& records) {
  if (s.scenario == Scenario::fig3) {
    for (const ResultRecord& r : records) {
      os << "# " << r.label << " gamma_g=" << format_double(r.axis_values[0])
         << " beta=" << format_double(r.axis_values[1]) << "\n# t";
      for (const auto& kv : r.series) os << ' ' << kv.first;
      os << '\n';
      for (std::size_t i = 0; i < r.times.size(); ++i) {
        os << format_double(r.times[i]);
        for (const auto& kv : r.series) os << ' ' << format_double(kv.second[i]);
        os << '\n';
      }
      os << "\n\n";
    }
    return;
  }
  os << '#';
  for (const auto& n : detail::axis_names(s)) os << ' ' << n;
  for (const auto& n : observable_names(s)) os << ' ' << n;
  os << '\n';
  int outer = records.empty() ? 0 : records.front().index.front();
  for (const ResultRecord& r : records) {
    if (r.index.size() > 1 && r.index.front() != outer) {
      os << '\n';
      outer = r.index.front();
    }
    for (double v : r.axis_values) os << format_double(v) << ' ';
    for (std::size_t k = 0; k < r.observables.size(); ++k) {
      os << (k ? " " : "") << format_double(r.observables[k].second);
    }
    os << '\n';
  }
}

/// Metadata sidecar. "spec" holds config text that parses back to `s`.
inline nlohmann::json metadata(const SweepSpec& s, const std::vector<ResultRecord>& records) {
  nlohmann::json j;
  j["tool"] = "eitcool";
  j["version"] = kVersion;
  j["spec"] = to_config_text(s);
  j["scenario"] = to_string(s.scenario);
  nlohmann::json knobs = nlohmann::json::object();
  for (const auto& k : knob_registry()) {
    const auto v = s.knob(k.name);
    knobs[k.name] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  }
  j["resolved_knobs"] = knobs;
  nlohmann::json axes = nlohmann::json::array();
  for (const Axis& a : s.axes) {
    axes.push_back({{"knob", a.knob}, {"min", a.min}, {"max", a.max}, {"points", a.points},
                    {"scale", a.log ? "log" : "linear"}});
  }
  j["axes"] = axes;
  j["solver"] = {{"method", to_string(s.solver.method)},
                 {"tol", s.solver.tol},
                 {"rel_tol", s.solver.rel_tol},
                 {"n_max", s.solver.n_max}};
  if (s.scenario == Scenario::fig3 && !records.empty() && !records.front().times.empty()) {
    j["time_grid"] = {{"points", records.front().times.size()}, {"t_max", records.front().times.back()}};
  }

  double worst = 0.0;
  int failed = 0;
  std::map<std::string, int> kernel_dims;
  nlohmann::json failures = nlohmann::json::array();
  int checked = 0;
  int invalid = 0;
  std::set<std::string> warnings;
  for (const ResultRecord& r : records) {
    const Diagnostics& d = r.diagnostics;
    ++kernel_dims[std::to_string(d.kernel_dimension)];
    if (d.converged) {
      worst = std::max(worst, d.residual);
    } else {
      ++failed;
      failures.push_back({{"index", r.index}, {"error", d.error}});
    }
    try {
      const ValidityReport v = validity_report(r.params);
      ++checked;
      if (!v.pass) ++invalid;
      for (const auto& w : v.warnings) warnings.insert(w.substr(0, w.find(" = ")));
    } catch (const Error&) {
    }
  }
  j["diagnostics"] = {{"records", records.size()},
                      {"failed", failed},
                      {"max_relative_residual", worst},
                      {"kernel_dimensions", kernel_dims},
                      {"failures", failures}};
  j["validity"] = {{"checked", checked}, {"failing", invalid}, {"threshold", 3.0},
                   {"conditions_violated", std::vector<std::string>(warnings.begin(), warnings.end())}};
  return j;
}

struct OutputFiles {
  std::vector<std::string> paths;
};

/// Writes <prefix>.csv, <prefix>.json and, when enabled, <prefix>.dat
/// (fig3 also writes <prefix>_summary.csv).
inline OutputFiles emit_outputs(const std::vector<ResultRecord>& records, const SweepSpec& s,
                                const std::string& prefix_override = "") {
  if (records.empty()) throw DomainError("no records to write");
  const std::string prefix = prefix_override.empty() ? s.output_prefix : prefix_override;
  const std::filesystem::path base(prefix);
  if (base.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(base.parent_path(), ec);
    if (ec) throw ConfigError("cannot create output directory '" + base.parent_path().string() + "'");
  }
  OutputFiles out;
  auto open = [&](const std::string& path, auto&& write) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    write(f);
    f.close();
    if (!f) throw ConfigError("write to '" + path + "' failed");
    out.paths.push_back(path);
  };
  open(prefix + ".csv", [&](std::ostream& os) { write_csv(os, s, records); });
  if (s.scenario == Scenario::fig3) {
    open(prefix + "_summary.csv", [&](std::ostream& os) { write_fig3_summary_csv(os, s, records); });
  }
  open(prefix + ".json", [&](std::ostream& os) { os << metadata(s, records).dump(2) << '\n'; });
  if (s.write_dat) open(prefix + ".dat", [&](std::ostream& os) { write_dat(os, s, records); });
  return out;
}

}  // namespace eitcool
