#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "eitcool/dynamics.hpp"
#include "eitcool/full_model.hpp"
#include "eitcool/steady_state.hpp"
#include "eitcool/types.hpp"

namespace eitcool {

struct SteadyOccupations {
  std::vector<double> n;  // <n_j>_ss per atom
  double residual = 0.0;
  double scale = 0.0;
  int kernel_dimension = 1;
  int iterations = 0;
};

/// Full-model steady state of `p`, reduced to phonon occupations.
inline SteadyOccupations steady_occupations(const PhysicalParams& p, const SteadyStateOptions& opt = {}) {
  const HilbertSpace space = full_space(p);
  SteadyStateOptions o = opt;
  if (o.method == SteadyMethod::long_time && !o.initial) o.initial = thermal_state(0.7, space).matrix();
  const SteadyStateResult r = steady_state(build_liouvillian(p, space), o);
  SteadyOccupations out;
  for (int j = 1; j <= p.n_atoms; ++j) {
    out.n.push_back(expectation(r.rho, number_operator(space, j)).real());
  }
  out.residual = r.residual;
  out.scale = r.scale;
  out.kernel_dimension = r.null_space_dimension;
  out.iterations = r.iterations;
  return out;
}

struct CoolingRatio {
  double n1_tilde = 0.0;
  double n2_tilde = 0.0;
  std::vector<double> n_ss;      // two-atom occupations
  std::vector<double> n_single;  // per-atom single-atom baselines
  double residual = 0.0;         // worst relative residual of the three solves
  int kernel_dimension = 1;
};

/// Two-atom occupations divided by each atom's single-atom baseline.
inline CoolingRatio cooling_ratio(const PhysicalParams& p, const SteadyStateOptions& opt = {}) {
  if (p.n_atoms != 2) throw DomainError("cooling_ratio needs exactly two atoms");
  const SteadyOccupations two = steady_occupations(p, opt);
  CoolingRatio out;
  out.n_ss = two.n;
  out.residual = two.residual / two.scale;
  out.kernel_dimension = two.kernel_dimension;
  for (int j = 1; j <= 2; ++j) {
    const SteadyOccupations one = steady_occupations(single_atom_baseline(p, j), opt);
    out.n_single.push_back(one.n[0]);
    out.residual = std::max(out.residual, one.residual / one.scale);
  }
  out.n1_tilde = out.n_ss[0] / out.n_single[0];
  out.n2_tilde = out.n_ss[1] / out.n_single[1];
  return out;
}

enum class Observable { n1, n2, n1_tilde, n2_tilde };

inline std::string to_string(Observable o) {
  switch (o) {
    case Observable::n1: return "n1_ss";
    case Observable::n2: return "n2_ss";
    case Observable::n1_tilde: return "n1_tilde";
    case Observable::n2_tilde: return "n2_tilde";
  }
  return "?";
}

struct ConvergenceReport {
  int n_max = 0;
  double value = 0.0;
  double value_next = 0.0;  // at n_max + 1
  double absolute_shift = 0.0;
  double relative_shift = 0.0;
  bool pass = false;
};

/// Recomputes `obs` at n_max and n_max + 1. Passes when the relative shift is
/// below 1e-2 or the absolute shift below 1e-4.
inline ConvergenceReport convergence_check(const PhysicalParams& p, Observable obs,
                                           const SteadyStateOptions& opt = {}) {
  auto eval = [&](int n_max) {
    PhysicalParams q = p;
    q.n_max = n_max;
    if (obs == Observable::n1 || obs == Observable::n2) {
      const int site = obs == Observable::n1 ? 0 : 1;
      if (site >= q.n_atoms) throw DomainError("observable refers to a missing atom");
      return steady_occupations(q, opt).n[site];
    }
    const CoolingRatio c = cooling_ratio(q, opt);
    return obs == Observable::n1_tilde ? c.n1_tilde : c.n2_tilde;
  };
  ConvergenceReport r;
  r.n_max = p.n_max;
  r.value = eval(p.n_max);
  r.value_next = eval(p.n_max + 1);
  r.absolute_shift = std::abs(r.value_next - r.value);
  r.relative_shift = r.value_next != 0.0 ? r.absolute_shift / std::abs(r.value_next)
                                         : (r.absolute_shift == 0.0 ? 0.0 : INFINITY);
  r.pass = r.relative_shift < 1e-2 || r.absolute_shift < 1e-4;
  return r;
}

/**
 * First recorded time after which |value - target| <= target/e at every later
 * sample. Empty when the last sample is still outside the band.
 */
inline std::optional<double> settling_time(const std::vector<double>& times, const std::vector<double>& values,
                                           double target) {
  if (times.size() != values.size()) throw DimensionError("settling_time: size mismatch");
  const double band = std::abs(target) / std::exp(1.0);
  std::optional<double> out;
  for (std::size_t i = times.size(); i-- > 0;) {
    if (std::abs(values[i] - target) > band) break;
    out = times[i];
  }
  return out;
}

}  // namespace eitcool
