// Command-line front end: single points, trajectories, sweeps and checks.

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eitcool/eitcool.hpp"

namespace {

using namespace eitcool;

struct CommonFlags {
  std::string config;
  std::string scenario;
  std::string out;
  int threads = 0;
  int nmax = 0;
  std::string method;
  double tol = 0.0;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "config file ([system] [drives] [decay] [geometry] [sweep] [solver] [output])");
  app->add_option("--scenario", f.scenario, "fig2a fig2b fig2c fig2d fig3 fig4 generic");
  app->add_option("--out", f.out, "output path prefix");
  app->add_option("--threads", f.threads, "worker threads (default: EITCOOL_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
  app->add_option("--nmax", f.nmax, "phonon truncation")->check(CLI::Range(1, 8));
  app->add_option("--method", f.method, "steady-state method")->check(CLI::IsMember({"null-space", "long-time"}));
  app->add_option("--tol", f.tol, "steady-state residual tolerance")->check(CLI::PositiveNumber);
}

SweepSpec load_spec(const CommonFlags& f) {
  std::optional<Scenario> sc;
  if (!f.scenario.empty()) sc = parse_scenario(f.scenario);
  SweepSpec s = f.config.empty() ? parse_config("", sc) : load_config(f.config, sc);
  if (f.nmax > 0) s.solver.n_max = f.nmax;
  if (!f.method.empty()) s.solver.method = parse_method(f.method);
  if (f.tol > 0.0) s.solver.tol = f.tol;
  if (!f.out.empty()) s.output_prefix = f.out;
  validate_spec(s);
  return s;
}

SteadyStateOptions steady_opts(const SweepSpec& s) {
  SteadyStateOptions o;
  o.method = s.solver.method;
  o.tol = s.solver.tol;
  return o;
}

void print_validity(const ValidityReport& v) {
  for (std::size_t j = 0; j < v.atoms.size(); ++j) {
    const AtomValidity& a = v.atoms[j];
    std::cout << "atom " << j + 1 << ": Delta/Omega_r=" << a.detuning_over_omega_r
              << " Omega_r/nu=" << a.omega_r_over_nu << " eta_eff*Omega_eff/nu=" << a.sideband_over_nu
              << " gamma_eff/nu=" << a.gamma_eff_over_nu << (a.pass ? "  ok" : "  VIOLATED") << '\n';
  }
  for (const auto& w : v.warnings) std::cout << "warning: " << w << '\n';
  std::cout << "validity: " << (v.pass ? "pass" : "fail") << " (threshold " << v.threshold << ")\n";
}

int cmd_steady(const CommonFlags& f) {
  const SweepSpec s = load_spec(f);
  const PhysicalParams p = resolve_params(s);
  const SteadyOccupations so = steady_occupations(p, steady_opts(s));
  std::cout << "method: " << to_string(s.solver.method) << "\n";
  for (std::size_t j = 0; j < so.n.size(); ++j) std::cout << "n" << j + 1 << "_ss = " << so.n[j] << '\n';
  std::cout << "relative_residual = " << so.residual / so.scale << "\nkernel_dimension = " << so.kernel_dimension
            << '\n';
  if (p.n_atoms == 2) {
    const CoolingRatio c = cooling_ratio(p, steady_opts(s));
    std::cout << "n1_single = " << c.n_single[0] << "\nn2_single = " << c.n_single[1] << "\nn1_tilde = " << c.n1_tilde
              << "\nn2_tilde = " << c.n2_tilde << '\n';
  }
  return 0;
}

int cmd_evolve(const CommonFlags& f) {
  const SweepSpec s = load_spec(f);
  const PhysicalParams p = resolve_params(s);
  const double t_max = s.t_max > 0.0 ? s.t_max : 1000.0 / effective_params(p).gamma_eff[0];
  const auto grid = log_time_grid(t_max, s.t_points);
  const HilbertSpace space = full_space(p);
  const Trajectory tr =
      evolve(build_liouvillian(p, space), space, thermal_state(*s.knob("n0"), space), grid, s.solver.rel_tol);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!f.out.empty()) {
    file.open(f.out + ".csv", std::ios::binary);
    if (!file) throw ConfigError("cannot write '" + f.out + ".csv'");
    os = &file;
  }
  std::vector<std::string> head{"t"};
  for (int j = 1; j <= p.n_atoms; ++j) head.push_back("n" + std::to_string(j));
  head.push_back("trace");
  head.push_back("min_eigenvalue");
  write_csv_row(*os, head);
  for (const auto& pt : tr.points) {
    std::vector<std::string> row{format_double(pt.t)};
    for (double n : pt.n) row.push_back(format_double(n));
    row.push_back(format_double(pt.trace));
    row.push_back(format_double(pt.min_eigenvalue));
    write_csv_row(*os, row);
  }
  std::cerr << "steps: " << tr.accepted_steps << " accepted, " << tr.rejected_steps << " rejected\n";
  return 0;
}

int cmd_sweep(const CommonFlags& f) {
  const SweepSpec s = load_spec(f);
  const auto records = run_sweep(s, f.threads);
  const OutputFiles files = emit_outputs(records, s);
  int failed = 0;
  for (const auto& r : records) failed += r.diagnostics.converged ? 0 : 1;
  std::cout << to_string(s.scenario) << ": " << records.size() << " points, " << failed << " failed\n";
  for (const auto& path : files.paths) std::cout << "wrote " << path << '\n';
  return failed ? 2 : 0;
}

int cmd_effective(const CommonFlags& f) {
  const SweepSpec s = load_spec(f);
  const PhysicalParams p = resolve_params(s);
  const EffectiveParams e = effective_params(p);
  std::cout << "eta_eff = " << e.eta_eff << '\n';
  for (int j = 0; j < e.n_atoms; ++j) {
    std::cout << "atom " << j + 1 << ": theta=" << e.theta[j] << " phi=" << e.phi[j] << " Omega_eff=" << e.omega_eff[j]
              << " gamma_eff=" << e.gamma_eff[j] << " omega_plus=" << e.omega_plus[j] << '\n';
  }
  std::cout << "gamma_left =\n" << e.gamma_left << "\ngamma_right =\n" << e.gamma_right << '\n';
  std::cout << "resonance_defect = " << e.resonance_defect << '\n';
  print_validity(validity_report(p));
  return 0;
}

int cmd_analytic(const CommonFlags& f) {
  const SweepSpec s = load_spec(f);
  const auto beta_axis = std::find_if(s.axes.begin(), s.axes.end(), [](const Axis& a) { return a.knob == "beta"; });
  std::vector<double> betas;
  if (beta_axis != s.axes.end()) {
    betas = beta_axis->values();
  } else {
    betas = {*s.knob("beta")};
  }
  write_csv_row(std::cout, {"beta", "n1_closed_form", "n1_ld_limit", "ratio_limit", "single_atom_n"});
  for (double b : betas) {
    const PhysicalParams p = resolve_params(s, {{"beta", b}});
    const EffectiveParams e = effective_params(p);
    std::vector<std::string> warnings;
    const double cf = closed_form_n1(e, &warnings);
    write_csv_row(std::cout, {format_double(b), format_double(cf), format_double(ld_limit_n1(e)),
                              format_double(ratio_limit(e.gamma_left(0, 1), e.gamma_right(0, 1))),
                              format_double(single_atom_n(e.gamma_eff[0], e.eta_eff, e.omega_eff[0], e.nu))});
    for (const auto& w : warnings) std::cerr << "warning (beta=" << b << "): " << w << '\n';
  }
  return 0;
}

int cmd_validate(const CommonFlags& f) {
  const SweepSpec s = load_spec(f);
  std::cout << "config ok: scenario " << to_string(s.scenario) << ", " << grid_indices(s).size() << " grid points\n";
  print_validity(validity_report(resolve_params(s)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EIT cooling of trapped atoms coupled through a chiral waveguide", "eitcool"};
  app.set_version_flag("--version", std::string(eitcool::kVersion));
  app.require_subcommand(0, 1);
  CommonFlags flags;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const CommonFlags&);
  };
  const Sub subs[] = {
      {"steady", "steady-state occupations and cooling ratios at one point", cmd_steady},
      {"evolve", "phonon occupations along a trajectory from a thermal state", cmd_evolve},
      {"sweep", "run a figure preset or generic grid and write CSV/JSON/.dat", cmd_sweep},
      {"effective", "print effective dark-state parameters and the validity report", cmd_effective},
      {"analytic", "closed-form target-atom occupation across the beta grid", cmd_analytic},
      {"validate", "check a config without running it", cmd_validate},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> apps;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, flags);
    apps.emplace_back(sub, &s);
  }
  if (argc <= 1) {
    std::cout << app.help();
    return 1;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  for (auto& [sub, s] : apps) {
    if (!sub->parsed()) continue;
    try {
      return s->run(flags);
    } catch (const eitcool::ConfigError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    } catch (const eitcool::Error& e) {
      std::cerr << "solver error: " << e.what() << '\n';
      return 2;
    }
  }
  std::cout << app.help();
  return 1;
}
