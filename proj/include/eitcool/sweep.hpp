#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "eitcool/analytic.hpp"
#include "eitcool/config.hpp"
#include "eitcool/cooling.hpp"
#include "eitcool/dark_state.hpp"
#include "eitcool/dynamics.hpp"
#include "eitcool/full_model.hpp"

namespace eitcool {

struct Diagnostics {
  double residual = 0.0;  // worst relative steady-state residual
  int kernel_dimension = 0;
  bool converged = true;
  std::string error;
};

struct ResultRecord {
  std::vector<int> index;
  std::vector<double> axis_values;
  std::string label;  // fig3 case name
  PhysicalParams params;
  std::vector<std::pair<std::string, double>> observables;
  std::vector<double> times;
  std::vector<std::pair<std::string, std::vector<double>>> series;
  Diagnostics diagnostics;
  double wall_seconds = 0.0;  // kept out of every output file

  double observable(const std::string& name) const {
    for (const auto& [k, v] : observables) {
      if (k == name) return v;
    }
    throw DomainError("record has no observable '" + name + "'");
  }
  const std::vector<double>& trace_of(const std::string& name) const {
    for (const auto& [k, v] : series) {
      if (k == name) return v;
    }
    throw DomainError("record has no series '" + name + "'");
  }
};

struct Fig3Case {
  std::string name;
  double gamma_g;
  double beta;
};

/// Star points of the time-dynamics figure: gamma_r = 20 - gamma_g.
inline const std::vector<Fig3Case>& fig3_cases() {
  static const std::vector<Fig3Case> cases = {{"heating", 18.0, 0.3}, {"cooling", 18.0, 0.7}, {"neutral", 2.0, 0.7}};
  return cases;
}

/// Observable columns emitted for a spec, in output order.
inline std::vector<std::string> observable_names(const SweepSpec& s) {
  if (s.scenario == Scenario::fig4) {
    return {"n1_full", "n1_closed_form", "n1_ld_limit", "relative_deviation"};
  }
  if (s.scenario == Scenario::fig3) {
    return {"n1_ss", "n1_single_ss", "n1_tilde", "n2_tilde", "settle_n1", "settle_single"};
  }
  if (s.scenario == Scenario::generic && s.pipeline == Pipeline::analytic) {
    return {"n1_closed_form", "n1_ld_limit", "n1_reduced", "ratio_limit"};
  }
  std::vector<std::string> all = {"n1_ss", "n2_ss", "n1_tilde", "n2_tilde"};
  if (s.scenario == Scenario::generic && s.pipeline == Pipeline::steady) {
    all.clear();
    const int n = static_cast<int>(*s.knob("n_atoms"));
    for (int j = 1; j <= n; ++j) all.push_back("n" + std::to_string(j) + "_ss");
  }
  if (s.observables.empty()) return all;
  std::vector<std::string> out;
  for (const auto& o : all) {
    if (std::find(s.observables.begin(), s.observables.end(), o) != s.observables.end()) out.push_back(o);
  }
  return out;
}

/// Grid points in row-major order (last axis fastest).
inline std::vector<std::vector<int>> grid_indices(const SweepSpec& s) {
  if (s.scenario == Scenario::fig3) {
    std::vector<std::vector<int>> out;
    for (int c = 0; c < static_cast<int>(fig3_cases().size()); ++c) out.push_back({c});
    return out;
  }
  std::vector<std::vector<int>> out{{}};
  for (const Axis& a : s.axes) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : out) {
      for (int i = 0; i < a.points; ++i) {
        auto v = prefix;
        v.push_back(i);
        next.push_back(std::move(v));
      }
    }
    out = std::move(next);
  }
  return out;
}

inline int default_thread_count() {
  if (const char* env = std::getenv("EITCOOL_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

inline SteadyStateOptions steady_options(const SweepSpec& s) {
  SteadyStateOptions o;
  o.method = s.solver.method;
  o.tol = s.solver.tol;
  return o;
}

inline PhysicalParams fig3_params(const SweepSpec& s, const Fig3Case& c) {
  return resolve_params(s, {{"gamma_g", c.gamma_g}, {"gamma_r", kFig2cGammaSum - c.gamma_g}, {"beta", c.beta}});
}

inline double optional_or_nan(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

inline void run_fig3_case(const SweepSpec& s, ResultRecord& r, const std::vector<double>& grid) {
  const PhysicalParams& p = r.params;
  const CoolingRatio cr = cooling_ratio(p, steady_options(s));
  r.diagnostics.residual = cr.residual;
  r.diagnostics.kernel_dimension = cr.kernel_dimension;
  const double n0 = *s.knob("n0");
  const HilbertSpace space = full_space(p);
  const Trajectory two = evolve(build_liouvillian(p, space), space, thermal_state(n0, space), grid, s.solver.rel_tol);
  r.times = grid;
  r.series.emplace_back("n1", two.occupation(1));
  r.series.emplace_back("n2", two.occupation(2));
  for (int site = 1; site <= 2; ++site) {
    const PhysicalParams b = single_atom_baseline(p, site);
    const HilbertSpace bs = full_space(b);
    const Trajectory one = evolve(build_liouvillian(b, bs), bs, thermal_state(n0, bs), grid, s.solver.rel_tol);
    r.series.emplace_back("n" + std::to_string(site) + "_single", one.occupation(1));
  }
  r.observables = {{"n1_ss", cr.n_ss[0]},
                   {"n1_single_ss", cr.n_single[0]},
                   {"n1_tilde", cr.n1_tilde},
                   {"n2_tilde", cr.n2_tilde},
                   {"settle_n1", optional_or_nan(settling_time(grid, r.trace_of("n1"), cr.n_ss[0]))},
                   {"settle_single", optional_or_nan(settling_time(grid, r.trace_of("n1_single"), cr.n_single[0]))}};
}

inline void run_point(const SweepSpec& s, ResultRecord& r, const std::vector<std::string>& names,
                      const std::vector<double>& fig3_grid) {
  const SteadyStateOptions opt = steady_options(s);
  if (s.scenario == Scenario::fig3) {
    run_fig3_case(s, r, fig3_grid);
    return;
  }
  std::vector<std::pair<std::string, double>> all;
  if (s.scenario == Scenario::fig4) {
    const SteadyOccupations full = steady_occupations(r.params, opt);
    const EffectiveParams e = effective_params(r.params);
    const double cf = closed_form_n1(e);
    all = {{"n1_full", full.n[0]},
           {"n1_closed_form", cf},
           {"n1_ld_limit", ld_limit_n1(e)},
           {"relative_deviation", std::abs(cf - full.n[0]) / full.n[0]}};
    r.diagnostics.residual = full.residual / full.scale;
    r.diagnostics.kernel_dimension = full.kernel_dimension;
  } else if (s.scenario == Scenario::generic && s.pipeline == Pipeline::analytic) {
    const EffectiveParams e = effective_params(r.params);
    const ReducedSolution red = reduced_linear_system(e);
    all = {{"n1_closed_form", closed_form_n1(e)},
           {"n1_ld_limit", ld_limit_n1(e)},
           {"n1_reduced", red.n1},
           {"ratio_limit", ratio_limit(e.gamma_left(0, 1), e.gamma_right(0, 1))}};
    r.diagnostics.residual = red.residual;
  } else if (s.scenario == Scenario::generic && s.pipeline == Pipeline::steady) {
    const SteadyOccupations so = steady_occupations(r.params, opt);
    for (std::size_t j = 0; j < so.n.size(); ++j) all.emplace_back("n" + std::to_string(j + 1) + "_ss", so.n[j]);
    r.diagnostics.residual = so.residual / so.scale;
    r.diagnostics.kernel_dimension = so.kernel_dimension;
  } else {
    const CoolingRatio c = cooling_ratio(r.params, opt);
    all = {{"n1_ss", c.n_ss[0]}, {"n2_ss", c.n_ss[1]}, {"n1_tilde", c.n1_tilde}, {"n2_tilde", c.n2_tilde}};
    r.diagnostics.residual = c.residual;
    r.diagnostics.kernel_dimension = c.kernel_dimension;
  }
  for (const auto& n : names) {
    for (const auto& kv : all) {
      if (kv.first == n) r.observables.push_back(kv);
    }
  }
}

}  // namespace detail

/// Shared fig3 horizon: explicit t_max, else 1000 / gamma_eff,1 of the cooling case.
inline double fig3_horizon(const SweepSpec& s) {
  if (s.t_max > 0.0) return s.t_max;
  const EffectiveParams e = effective_params(detail::fig3_params(s, fig3_cases()[1]));
  return 1000.0 / e.gamma_eff[0];
}

/// Records for every grid point, ordered by grid index. Solver failures are
/// stored in the record's diagnostics with NaN observables.
inline std::vector<ResultRecord> run_sweep(const SweepSpec& s, int threads = 0) {
  validate_spec(s);
  if (s.scenario == Scenario::generic && s.axes.empty()) throw ConfigError("generic sweep needs at least one axis");
  const auto indices = grid_indices(s);
  const auto names = observable_names(s);
  std::vector<std::vector<double>> axis_values;
  for (const Axis& a : s.axes) axis_values.push_back(a.values());
  const std::vector<double> fig3_grid =
      s.scenario == Scenario::fig3 ? log_time_grid(fig3_horizon(s), s.t_points) : std::vector<double>{};

  std::vector<ResultRecord> records(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    ResultRecord& r = records[k];
    r.index = indices[k];
    if (s.scenario == Scenario::fig3) {
      const Fig3Case& c = fig3_cases()[r.index[0]];
      r.label = c.name;
      r.axis_values = {c.gamma_g, c.beta};
      continue;
    }
    for (std::size_t a = 0; a < s.axes.size(); ++a) r.axis_values.push_back(axis_values[a][r.index[a]]);
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < records.size(); k = next++) {
      ResultRecord& r = records[k];
      const auto start = std::chrono::steady_clock::now();
      try {
        if (s.scenario == Scenario::fig3) {
          r.params = detail::fig3_params(s, fig3_cases()[r.index[0]]);
        } else {
          KnobValues point;
          for (std::size_t a = 0; a < s.axes.size(); ++a) point[s.axes[a].knob] = r.axis_values[a];
          r.params = resolve_params(s, point);
        }
        detail::run_point(s, r, names, fig3_grid);
      } catch (const std::exception& ex) {
        r.diagnostics.converged = false;
        r.diagnostics.error = ex.what();
        if (const auto* d = dynamic_cast<const DegenerateSteadyStateError*>(&ex)) {
          r.diagnostics.kernel_dimension = d->kernel_dimension();
        }
        r.observables.clear();
        for (const auto& n : names) r.observables.emplace_back(n, std::numeric_limits<double>::quiet_NaN());
      }
      r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const int n_threads =
      std::clamp(threads > 0 ? threads : default_thread_count(), 1, static_cast<int>(std::max<std::size_t>(1, records.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return records;
}

}  // namespace eitcool
