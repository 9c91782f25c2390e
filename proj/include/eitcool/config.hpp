#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "eitcool/full_model.hpp"
#include "eitcool/steady_state.hpp"
#include "eitcool/types.hpp"

namespace eitcool {

enum class Scenario { fig2a, fig2b, fig2c, fig2d, fig3, fig4, generic };

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::fig2a: return "fig2a";
    case Scenario::fig2b: return "fig2b";
    case Scenario::fig2c: return "fig2c";
    case Scenario::fig2d: return "fig2d";
    case Scenario::fig3: return "fig3";
    case Scenario::fig4: return "fig4";
    case Scenario::generic: return "generic";
  }
  return "?";
}

inline Scenario parse_scenario(const std::string& s) {
  for (Scenario v : {Scenario::fig2a, Scenario::fig2b, Scenario::fig2c, Scenario::fig2d, Scenario::fig3,
                     Scenario::fig4, Scenario::generic}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown scenario '" + s + "'");
}

/// Pipelines available to the generic scenario.
enum class Pipeline { ratio, steady, analytic };

inline std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::ratio: return "ratio";
    case Pipeline::steady: return "steady";
    case Pipeline::analytic: return "analytic";
  }
  return "?";
}

inline Pipeline parse_pipeline(const std::string& s) {
  if (s == "ratio") return Pipeline::ratio;
  if (s == "steady") return Pipeline::steady;
  if (s == "analytic") return Pipeline::analytic;
  throw ConfigError("unknown pipeline '" + s + "'");
}

/// One physical parameter that configs may set and sweeps may scan.
struct KnobInfo {
  std::string name;
  std::string section;
  std::optional<double> default_value;  // empty: derived unless set
  double min;
  double max;
  bool integer = false;
  std::string help;
};

inline const std::vector<KnobInfo>& knob_registry() {
  static const std::vector<KnobInfo> reg = {
      {"n_atoms", "system", 2, 1, 3, true, "number of atoms"},
      {"nu", "system", 1.0, 1e-12, 1e12, false, "trap frequency (unit of all rates)"},
      {"n0", "system", 0.7, 0, 100, false, "initial thermal phonon number"},
      {"omega_r1", "drives", 15.0, 0, 1e6, false, "control Rabi frequency of atom 1"},
      {"probe_ratio", "drives", 0.1, 0, 1e6, false, "Omega_g,j / Omega_r,j"},
      {"drive_ratio", "drives", 0.1, 0, 1e6, false, "Omega_{g(r),j} / Omega_{g(r),1} for j >= 2"},
      {"omega_g1", "drives", std::nullopt, 0, 1e6, false, "explicit probe Rabi frequency, atom 1"},
      {"omega_g2", "drives", std::nullopt, 0, 1e6, false, "explicit probe Rabi frequency, atom 2"},
      {"omega_r2", "drives", std::nullopt, 0, 1e6, false, "explicit control Rabi frequency, atom 2"},
      {"auto_eit_detuning", "drives", 1, 0, 1, true, "1: detuning from the cooling resonance"},
      {"detuning1", "drives", std::nullopt, -1e6, 1e6, false, "explicit detuning, atom 1"},
      {"detuning2", "drives", std::nullopt, -1e6, 1e6, false, "explicit detuning, atom 2"},
      {"detuning3", "drives", std::nullopt, -1e6, 1e6, false, "explicit detuning, atom 3"},
      {"gamma_g", "decay", 18.0, 0, 1e6, false, "total decay rate e -> g"},
      {"gamma_r", "decay", 2.0, 0, 1e6, false, "total decay rate e -> r"},
      {"beta", "decay", 0.7, 0, 1, false, "right-propagating fraction gamma_R / gamma"},
      {"gamma_g_left", "decay", std::nullopt, 0, 1e6, false, "explicit left rate, g channel"},
      {"gamma_g_right", "decay", std::nullopt, 0, 1e6, false, "explicit right rate, g channel"},
      {"gamma_r_left", "decay", std::nullopt, 0, 1e6, false, "explicit left rate, r channel"},
      {"gamma_r_right", "decay", std::nullopt, 0, 1e6, false, "explicit right rate, r channel"},
      {"xi", "geometry", 2.0 * kPi, -1e3, 1e3, false, "phase k_s d between neighbouring traps"},
      {"eta", "geometry", 0.15, 0, 10, false, "Lamb-Dicke parameter of both beams"},
      {"eta_g", "geometry", std::nullopt, 0, 10, false, "Lamb-Dicke parameter, probe"},
      {"eta_r", "geometry", std::nullopt, 0, 10, false, "Lamb-Dicke parameter, control"},
      {"psi_g", "geometry", kPi / 4.0, -1e3, 1e3, false, "probe projection angle"},
      {"psi_r", "geometry", 3.0 * kPi / 4.0, -1e3, 1e3, false, "control projection angle"},
  };
  return reg;
}

inline const KnobInfo* find_knob(std::string_view name) {
  for (const auto& k : knob_registry()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Number with an optional "pi" factor: "2", "0.5pi", "pi", "-1.5e-3".
inline double parse_number(std::string s, const std::string& what) {
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = kPi;
    s.erase(s.size() - 2);
    if (!s.empty() && s.back() == '*') s.pop_back();
    if (s.empty() || s == "+") s = "1";
    if (s == "-") s = "-1";
  }
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("cannot parse '" + s + "' as a number for " + what);
  }
  return v * factor;
}

struct Axis {
  std::string knob;
  double min = 0.0;
  double max = 1.0;
  int points = 21;
  bool log = false;

  std::vector<double> values() const {
    std::vector<double> out(points);
    for (int i = 0; i < points; ++i) {
      const double f = points == 1 ? 0.0 : double(i) / (points - 1);
      out[i] = log ? min * std::pow(max / min, f) : min + (max - min) * f;
    }
    out.front() = min;
    out.back() = max;
    return out;
  }

  friend bool operator==(const Axis&, const Axis&) = default;
};

struct SolverSpec {
  SteadyMethod method = SteadyMethod::null_space;
  double tol = 1e-12;
  double rel_tol = 1e-8;
  int n_max = 2;

  friend bool operator==(const SolverSpec&, const SolverSpec&) = default;
};

struct SweepSpec {
  Scenario scenario = Scenario::generic;
  Pipeline pipeline = Pipeline::ratio;
  std::vector<Axis> axes;
  std::map<std::string, double> knobs;  // explicitly set values only
  std::vector<std::string> observables;  // empty: every column of the pipeline
  SolverSpec solver;
  double t_max = 0.0;  // fig3; 0 = 1000 / gamma_eff,1 of the cooling point
  int t_points = 400;
  std::string output_prefix = "out/eitcool";
  bool write_dat = true;

  /// Explicit value, else registry default; empty for unset derived knobs.
  std::optional<double> knob(const std::string& name) const {
    const KnobInfo* info = find_knob(name);
    if (!info) throw ConfigError("unknown knob '" + name + "'");
    auto it = knobs.find(name);
    if (it != knobs.end()) return it->second;
    return info->default_value;
  }

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& section_keys() {
  static const std::map<std::string, std::set<std::string>> keys = [] {
    std::map<std::string, std::set<std::string>> m;
    for (const auto& k : knob_registry()) m[k.section].insert(k.name);
    m["sweep"] = {"scenario", "pipeline", "observables", "t_max", "t_points"};
    for (int a = 1; a <= 2; ++a) {
      const std::string p = "axis" + std::to_string(a);
      for (const char* s : {"", "_min", "_max", "_points", "_scale"}) m["sweep"].insert(p + s);
    }
    m["solver"] = {"method", "tol", "rel_tol", "n_max"};
    m["output"] = {"prefix", "dat"};
    return m;
  }();
  return keys;
}

inline std::string unquote(std::string v) {
  v.erase(0, v.find_first_not_of(" \t"));
  v.erase(v.find_last_not_of(" \t") + 1);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    v = v.substr(1, v.size() - 2);
  }
  return v;
}

inline bool parse_bool(const std::string& v, const std::string& what) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("cannot parse '" + v + "' as a boolean for " + what);
}

inline void check_knob_value(const KnobInfo& k, double v) {
  if (!(v >= k.min && v <= k.max)) {
    throw ConfigError("value " + format_double(v) + " for '" + k.name + "' is outside [" +
                      format_double(k.min) + ", " + format_double(k.max) + "]");
  }
  if (k.integer && v != std::floor(v)) throw ConfigError("'" + k.name + "' must be an integer");
}

}  // namespace detail

/// Axes and knob overrides that define each figure preset.
inline void apply_scenario_preset(SweepSpec& s) {
  auto axis = [](const std::string& k, double lo, double hi, int n) { return Axis{k, lo, hi, n, false}; };
  std::vector<Axis> preset;
  switch (s.scenario) {
    case Scenario::fig2a: preset = {axis("probe_ratio", 0.02, 0.3, 21), axis("beta", 0, 1, 21)}; break;
    case Scenario::fig2b: preset = {axis("drive_ratio", 0.05, 1.0, 21), axis("beta", 0, 1, 21)}; break;
    case Scenario::fig2c: preset = {axis("gamma_g", 0, 20, 21), axis("beta", 0, 1, 21)}; break;
    case Scenario::fig2d: preset = {axis("xi", 0.5 * kPi, 2.0 * kPi, 31), axis("beta", 0, 1, 21)}; break;
    case Scenario::fig4:
      preset = {axis("beta", 0, 1, 21)};
      for (auto [k, v] : {std::pair{"omega_g1", 1.5}, {"omega_r1", 15.0}, {"omega_g2", 0.015},
                          {"omega_r2", 15.0}, {"eta", 0.1}}) {
        s.knobs.try_emplace(k, v);
      }
      break;
    case Scenario::fig3:
    case Scenario::generic: break;
  }
  if (s.axes.empty()) s.axes = preset;
}

/// Sum of decay rates that the fig2c preset holds fixed.
inline constexpr double kFig2cGammaSum = 20.0;

inline void validate_spec(const SweepSpec& s) {
  for (const auto& [k, v] : s.knobs) {
    const KnobInfo* info = find_knob(k);
    if (!info) throw ConfigError("unknown knob '" + k + "'");
    detail::check_knob_value(*info, v);
  }
  std::set<std::string> seen;
  for (const auto& a : s.axes) {
    const KnobInfo* info = find_knob(a.knob);
    if (!info) throw ConfigError("axis knob '" + a.knob + "' is not in the knob registry");
    if (info->integer) throw ConfigError("axis knob '" + a.knob + "' is integer-valued");
    if (a.points < 2) throw ConfigError("axis '" + a.knob + "' needs at least 2 points");
    if (a.log && !(a.min > 0.0 && a.max > 0.0)) throw ConfigError("log axis '" + a.knob + "' must be positive");
    detail::check_knob_value(*info, a.min);
    detail::check_knob_value(*info, a.max);
    if (!seen.insert(a.knob).second) throw ConfigError("axis knob '" + a.knob + "' repeated");
    if (s.knobs.count(a.knob)) throw ConfigError("knob '" + a.knob + "' is both fixed and scanned");
  }
  // explicit per-atom drives and the ratio knobs cannot both be scanned
  auto scanned = [&](const char* k) { return seen.count(k) > 0; };
  if ((scanned("probe_ratio") && s.knobs.count("omega_g1")) ||
      (scanned("drive_ratio") && (s.knobs.count("omega_g2") || s.knobs.count("omega_r2")))) {
    throw ConfigError("ratio axis conflicts with an explicit Rabi frequency");
  }
  const int explicit_rates = int(s.knobs.count("gamma_g_left")) + int(s.knobs.count("gamma_g_right")) +
                             int(s.knobs.count("gamma_r_left")) + int(s.knobs.count("gamma_r_right"));
  if (explicit_rates != 0 && explicit_rates != 4) {
    throw ConfigError("explicit directional rates need all four of gamma_{g,r}_{left,right}");
  }
  if (explicit_rates == 4 && (scanned("beta") || s.knobs.count("beta"))) {
    throw ConfigError("beta conflicts with explicit directional rates");
  }
  if (s.scenario == Scenario::fig2c) {
    if (scanned("gamma_r") || (scanned("gamma_g") && s.knobs.count("gamma_r"))) {
      throw ConfigError("fig2c ties gamma_r = 20 - gamma_g; gamma_r cannot be set independently");
    }
    if (!scanned("gamma_g") && s.knobs.count("gamma_r")) {
      const double sum = *s.knob("gamma_g") + *s.knob("gamma_r");
      if (std::abs(sum - kFig2cGammaSum) > 1e-12) {
        throw ConfigError("fig2c requires gamma_g + gamma_r = 20 (got " + format_double(sum) + ")");
      }
    }
    if (explicit_rates) throw ConfigError("fig2c does not accept explicit directional rates");
  }
  static const std::set<std::string> known_obs = {"n1_ss", "n2_ss", "n1_tilde", "n2_tilde"};
  for (const auto& o : s.observables) {
    if (!known_obs.count(o)) throw ConfigError("unknown observable '" + o + "'");
  }
  if (!s.observables.empty() && (s.scenario == Scenario::fig3 || s.scenario == Scenario::fig4 ||
                                 (s.scenario == Scenario::generic && s.pipeline == Pipeline::analytic))) {
    throw ConfigError("observables list only applies to steady-state sweeps");
  }
  if (s.solver.n_max < 1 || s.solver.n_max > 8) throw ConfigError("n_max must lie in [1, 8]");
  if (!(s.solver.tol > 0.0)) throw ConfigError("tol must be > 0");
  if (!(s.solver.rel_tol >= 1e-12 && s.solver.rel_tol <= 1e-4)) throw ConfigError("rel_tol must lie in [1e-12, 1e-4]");
  if (s.t_points < 2) throw ConfigError("t_points must be >= 2");
  if (s.t_max < 0.0) throw ConfigError("t_max must be >= 0");
}

/**
 * Parses a flat-section key=value config. Sections: [system] [drives] [decay]
 * [geometry] [sweep] [solver] [output]. Full-line and trailing '#' or ';'
 * comments are allowed; string values may be quoted.
 */
inline SweepSpec parse_config(const std::string& text, std::optional<Scenario> scenario = std::nullopt) {
  std::ostringstream cleaned;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto cut = line.find_first_of("#;");
      if (cut != std::string::npos) line.erase(cut);
      cleaned << line << '\n';
    }
  }
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(cleaned.str());
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  SweepSpec s;
  std::map<int, Axis> axes;
  std::map<int, std::set<std::string>> axis_fields;
  const auto& keys = detail::section_keys();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside a section");
    auto sec = keys.find(section);
    if (sec == keys.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, node] : body) {
      if (!sec->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      const std::string v = detail::unquote(node.data());
      const std::string what = section + "." + key;
      if (const KnobInfo* info = find_knob(key); info && info->section == section) {
        s.knobs[key] = key == "auto_eit_detuning" ? double(detail::parse_bool(v, what)) : parse_number(v, what);
      } else if (key == "scenario") {
        s.scenario = parse_scenario(v);
      } else if (key == "pipeline") {
        s.pipeline = parse_pipeline(v);
      } else if (key == "observables") {
        std::istringstream items(v);
        std::string item;
        while (std::getline(items, item, ',')) {
          item = detail::unquote(item);
          if (!item.empty()) s.observables.push_back(item);
        }
      } else if (key == "t_max") {
        s.t_max = parse_number(v, what);
      } else if (key == "t_points") {
        s.t_points = static_cast<int>(parse_number(v, what));
      } else if (key.rfind("axis", 0) == 0) {
        const int a = key[4] - '0';
        const std::string field = key.substr(5);
        Axis& ax = axes[a];
        axis_fields[a].insert(field);
        if (field.empty()) {
          ax.knob = v;
        } else if (field == "_min") {
          ax.min = parse_number(v, what);
        } else if (field == "_max") {
          ax.max = parse_number(v, what);
        } else if (field == "_points") {
          const double p = parse_number(v, what);
          if (p != std::floor(p)) throw ConfigError(what + " must be an integer");
          ax.points = static_cast<int>(p);
        } else if (field == "_scale") {
          if (v != "linear" && v != "log") throw ConfigError(what + " must be 'linear' or 'log'");
          ax.log = v == "log";
        }
      } else if (key == "method") {
        try {
          s.solver.method = parse_method(v);
        } catch (const ConfigError&) {
          throw ConfigError("unknown solver method '" + v + "' (use null-space or long-time)");
        }
      } else if (key == "tol") {
        s.solver.tol = parse_number(v, what);
      } else if (key == "rel_tol") {
        s.solver.rel_tol = parse_number(v, what);
      } else if (key == "n_max") {
        const double n = parse_number(v, what);
        if (n != std::floor(n)) throw ConfigError("n_max must be an integer");
        s.solver.n_max = static_cast<int>(n);
      } else if (key == "prefix") {
        s.output_prefix = v;
      } else if (key == "dat") {
        s.write_dat = detail::parse_bool(v, what);
      }
    }
  }
  for (const auto& [a, ax] : axes) {
    if (!axis_fields[a].count("")) throw ConfigError("axis" + std::to_string(a) + " has no knob name");
    for (const char* f : {"_min", "_max"}) {
      if (!axis_fields[a].count(f)) throw ConfigError("axis" + std::to_string(a) + f + " is missing");
    }
    if (a == 2 && !axes.count(1)) throw ConfigError("axis2 given without axis1");
    s.axes.push_back(ax);
  }
  if (scenario) s.scenario = *scenario;
  apply_scenario_preset(s);
  validate_spec(s);
  return s;
}

inline SweepSpec load_config(const std::string& path, std::optional<Scenario> scenario = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), scenario);
}

/// Inverse of parse_config: parse_config(to_config_text(s)) == s.
inline std::string to_config_text(const SweepSpec& s) {
  std::ostringstream os;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sec;
  for (const auto& [k, v] : s.knobs) {
    const KnobInfo* info = find_knob(k);
    sec[info->section].emplace_back(k, k == "auto_eit_detuning" ? (v != 0.0 ? "true" : "false") : format_double(v));
  }
  auto& sw = sec["sweep"];
  sw.emplace_back("scenario", to_string(s.scenario));
  sw.emplace_back("pipeline", to_string(s.pipeline));
  for (std::size_t i = 0; i < s.axes.size(); ++i) {
    const std::string p = "axis" + std::to_string(i + 1);
    const Axis& a = s.axes[i];
    sw.emplace_back(p, a.knob);
    sw.emplace_back(p + "_min", format_double(a.min));
    sw.emplace_back(p + "_max", format_double(a.max));
    sw.emplace_back(p + "_points", std::to_string(a.points));
    sw.emplace_back(p + "_scale", a.log ? "log" : "linear");
  }
  if (!s.observables.empty()) {
    std::string joined;
    for (const auto& o : s.observables) joined += (joined.empty() ? "" : ",") + o;
    sw.emplace_back("observables", joined);
  }
  sw.emplace_back("t_max", format_double(s.t_max));
  sw.emplace_back("t_points", std::to_string(s.t_points));
  sec["solver"] = {{"method", to_string(s.solver.method)},
                   {"tol", format_double(s.solver.tol)},
                   {"rel_tol", format_double(s.solver.rel_tol)},
                   {"n_max", std::to_string(s.solver.n_max)}};
  sec["output"] = {{"prefix", "\"" + s.output_prefix + "\""}, {"dat", s.write_dat ? "true" : "false"}};
  for (const char* name : {"system", "drives", "decay", "geometry", "sweep", "solver", "output"}) {
    auto it = sec.find(name);
    if (it == sec.end() || it->second.empty()) continue;
    os << '[' << name << "]\n";
    for (const auto& [k, v] : it->second) os << k << " = " << v << '\n';
    os << '\n';
  }
  return os.str();
}

/// One grid point: knob values by name, axes overriding fixed knobs.
using KnobValues = std::map<std::string, double>;

/// Resolves knob values into a full parameter set.
inline PhysicalParams resolve_params(const SweepSpec& s, const KnobValues& point = {}) {
  auto get = [&](const std::string& k) -> std::optional<double> {
    auto it = point.find(k);
    if (it != point.end()) return it->second;
    return s.knob(k);
  };
  PhysicalParams p;
  p.n_atoms = static_cast<int>(*get("n_atoms"));
  p.nu = *get("nu");
  p.n_max = s.solver.n_max;
  const double wr1 = *get("omega_r1");
  const double wg1 = get("omega_g1").value_or(*get("probe_ratio") * wr1);
  const double dr = *get("drive_ratio");
  p.omega_g.assign(p.n_atoms, 0.0);
  p.omega_r.assign(p.n_atoms, 0.0);
  for (int j = 0; j < p.n_atoms; ++j) {
    const double f = std::pow(dr, j);
    p.omega_r[j] = j == 0 ? wr1 : (j == 1 ? get("omega_r2").value_or(f * wr1) : f * wr1);
    p.omega_g[j] = j == 0 ? wg1 : (j == 1 ? get("omega_g2").value_or(f * wg1) : f * wg1);
  }
  p.auto_eit_detuning = *get("auto_eit_detuning") != 0.0;
  if (!p.auto_eit_detuning) {
    p.detuning.clear();
    for (int j = 0; j < p.n_atoms; ++j) {
      const auto d = get("detuning" + std::to_string(j + 1));
      if (!d) throw ConfigError("auto_eit_detuning = false needs detuning" + std::to_string(j + 1));
      p.detuning.push_back(*d);
    }
  }
  p.gamma_g = *get("gamma_g");
  p.gamma_r = s.scenario == Scenario::fig2c ? kFig2cGammaSum - p.gamma_g : *get("gamma_r");
  p.beta = *get("beta");
  if (get("gamma_g_left")) {
    p.rates = DirectionalRates{*get("gamma_g_left"), *get("gamma_g_right"), *get("gamma_r_left"),
                               *get("gamma_r_right")};
  }
  const double eta = *get("eta");
  p.eta_g = get("eta_g").value_or(eta);
  p.eta_r = get("eta_r").value_or(eta);
  p.psi_g = *get("psi_g");
  p.psi_r = *get("psi_r");
  p.xi = *get("xi");
  p.validate();
  return p;
}

}  // namespace eitcool
