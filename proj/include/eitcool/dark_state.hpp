#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "eitcool/full_model.hpp"
#include "eitcool/hilbert_space.hpp"
#include "eitcool/operators.hpp"
#include "eitcool/superoperator.hpp"
#include "eitcool/types.hpp"

namespace eitcool {

struct MixingAngles {
  double theta = 0.0;  // in [0, pi/2]
  double phi = 0.0;    // in [0, pi/2], sin(phi) >= 0 branch
};

/// Rotation angles of the dressed basis. |+> = sin(phi)|e> - cos(phi)|b>,
/// |b> = sin(theta)|g> + cos(theta)|r>, |d> = cos(theta)|g> - sin(theta)|r>.
inline MixingAngles mixing_angles(double omega_g, double omega_r, double delta) {
  if (omega_g == 0.0 && omega_r == 0.0) {
    throw DomainError("mixing angles undefined: both Rabi frequencies vanish");
  }
  const double w = std::hypot(omega_g, omega_r);
  const double root = std::hypot(delta, w);
  // delta + root without cancellation for large negative delta
  const double c = delta >= 0.0 ? delta + root : w * w / (root - delta);
  return {std::atan2(omega_g, omega_r), std::atan2(w, c)};
}

struct DressedEnergies {
  double plus = 0.0;
  double minus = 0.0;
  double dark = 0.0;
};

inline DressedEnergies dressed_energies(double omega_g, double omega_r, double delta) {
  const double root = std::sqrt(omega_g * omega_g + omega_r * omega_r + delta * delta);
  return {0.5 * (-delta + root), 0.5 * (-delta - root), 0.0};
}

/**
 * Quantities of the effective two-level (|d>, |+>) sideband model.
 * gamma_left/right(mu, nu) are 0-based N x N tables; the diagonal holds the
 * same bilinear form evaluated at mu = nu and is not used by the builder.
 */
struct EffectiveParams {
  int n_atoms = 0;
  double nu = 1.0;
  double xi = 0.0;
  double eta_eff = 0.0;
  std::vector<double> theta;
  std::vector<double> phi;
  std::vector<double> omega_eff;
  std::vector<double> gamma_eff;
  std::vector<double> omega_plus;
  Eigen::MatrixXd gamma_left;
  Eigen::MatrixXd gamma_right;
  /// max_j |omega_plus_j - nu|; nonzero only for user detunings.
  double resonance_defect = 0.0;
};

inline EffectiveParams effective_params(const PhysicalParams& p) {
  p.validate();
  const std::vector<double> delta = p.detunings();
  const DirectionalRates d = p.directional_rates();
  const double gg = d.gamma_g();
  const double gr = d.gamma_r();
  EffectiveParams e;
  e.n_atoms = p.n_atoms;
  e.nu = p.nu;
  e.xi = p.xi;
  e.eta_eff = p.eta_g * std::cos(p.psi_g) - p.eta_r * std::cos(p.psi_r);
  std::vector<double> sin_phi(p.n_atoms);
  for (int j = 0; j < p.n_atoms; ++j) {
    const MixingAngles ang = mixing_angles(p.omega_g[j], p.omega_r[j], delta[j]);
    const double w = std::hypot(p.omega_g[j], p.omega_r[j]);
    const double s = std::sin(ang.phi);
    const double ct = std::cos(ang.theta);
    const double st = std::sin(ang.theta);
    sin_phi[j] = s;
    e.theta.push_back(ang.theta);
    e.phi.push_back(ang.phi);
    e.omega_eff.push_back(p.omega_g[j] * p.omega_r[j] * s / w);
    e.gamma_eff.push_back(s * s * (gg * ct * ct + gr * st * st));
    e.omega_plus.push_back(dressed_energies(p.omega_g[j], p.omega_r[j], delta[j]).plus);
    e.resonance_defect = std::max(e.resonance_defect, std::abs(e.omega_plus.back() - p.nu));
  }
  e.gamma_left.resize(p.n_atoms, p.n_atoms);
  e.gamma_right.resize(p.n_atoms, p.n_atoms);
  for (int mu = 0; mu < p.n_atoms; ++mu) {
    for (int nv = 0; nv < p.n_atoms; ++nv) {
      const double s2 = sin_phi[mu] * sin_phi[nv];
      const double cc = std::cos(e.theta[mu]) * std::cos(e.theta[nv]);
      const double ss = std::sin(e.theta[mu]) * std::sin(e.theta[nv]);
      e.gamma_left(mu, nv) = s2 * (d.g_left * cc + d.r_left * ss);
      e.gamma_right(mu, nv) = s2 * (d.g_right * cc + d.r_right * ss);
    }
  }
  return e;
}

/// Effective sideband-cooling Liouvillian on the {|d>, |+>} (x) Fock space.
inline Superoperator build_effective_liouvillian(const EffectiveParams& e, const HilbertSpace& space) {
  if (space.internal_dim() != 2) throw DimensionError("effective model needs internal_dim 2");
  if (space.n_atoms() != e.n_atoms) throw DimensionError("space and params disagree on n_atoms");
  constexpr int kD = static_cast<int>(DressedLevel::d);
  constexpr int kP = static_cast<int>(DressedLevel::plus);
  const SparseMatrix a = local_phonon(space, fock_ladder(space.n_max()));
  const SparseMatrix x = a + adjoint(a);
  const SparseMatrix n = adjoint(a) * a;
  const SparseMatrix pp = local_transition(space, kP, kP);
  const SparseMatrix dp = local_transition(space, kD, kP);

  SparseMatrix h(space.total_dim(), space.total_dim());
  for (int j = 0; j < e.n_atoms; ++j) {
    const SparseMatrix k = (0.5 * e.eta_eff * e.omega_eff[j]) * SparseMatrix(dp * x);
    SparseMatrix local = e.nu * n + e.omega_plus[j] * pp;
    local += kI * (k - adjoint(k));
    h += site_operator(space, j + 1, local);
  }
  for (int mu = 1; mu <= e.n_atoms; ++mu) {
    for (int nv = 1; nv <= e.n_atoms; ++nv) {
      if (mu == nv) continue;
      const double g = mu < nv ? e.gamma_left(mu - 1, nv - 1) : e.gamma_right(mu - 1, nv - 1);
      if (g == 0.0) continue;
      const Complex phase = std::exp(kI * (e.xi * std::abs(mu - nv)));
      const SparseMatrix hop =
          phase * SparseMatrix(transition(space, mu, kP, kD) * transition(space, nv, kD, kP));
      h += (-0.5 * kI * g) * SparseMatrix(hop - adjoint(hop));
    }
  }
  h.prune(Complex(0.0));

  Superoperator out = hamiltonian_liouvillian(h);
  for (int mu = 1; mu <= e.n_atoms; ++mu) {
    const SparseMatrix up = transition(space, mu, kP, kD);
    for (int nv = 1; nv <= e.n_atoms; ++nv) {
      const SparseMatrix down = transition(space, nv, kD, kP);
      if (mu == nv) {
        out = out + chiral_dissipator_term(e.gamma_eff[mu - 1], 1.0, up, down);
        continue;
      }
      const double arg = e.xi * (mu - nv);
      out = out + chiral_dissipator_term(e.gamma_left(mu - 1, nv - 1), std::exp(-kI * arg), up, down);
      out = out + chiral_dissipator_term(e.gamma_right(mu - 1, nv - 1), std::exp(kI * arg), up, down);
    }
  }
  return out.compressed();
}

struct AtomValidity {
  double detuning_over_omega_r = 0.0;
  double omega_r_over_nu = 0.0;
  double sideband_over_nu = 0.0;  // eta_eff * Omega_eff / nu
  double gamma_eff_over_nu = 0.0;
  bool pass = true;
};

struct ValidityReport {
  double threshold = 3.0;
  std::vector<AtomValidity> atoms;
  std::vector<std::string> warnings;
  bool pass = true;
};

/**
 * Checks the hierarchy Delta >> Omega_r >> nu >> (eta_eff Omega_eff, gamma_eff)
 * per atom. A ">>" is flagged when the ratio of the larger to the smaller side
 * falls below `threshold`.
 */
inline ValidityReport validity_report(const PhysicalParams& p, double threshold = 3.0) {
  const EffectiveParams e = effective_params(p);
  const std::vector<double> delta = p.detunings();
  ValidityReport rep;
  rep.threshold = threshold;
  auto flag = [&](AtomValidity& v, int j, const char* name, double ratio) {
    if (!(ratio >= threshold)) {
      v.pass = false;
      std::ostringstream os;
      os << "atom " << j + 1 << ": " << name << " = " << ratio << " < " << threshold;
      rep.warnings.push_back(os.str());
    }
  };
  for (int j = 0; j < p.n_atoms; ++j) {
    AtomValidity v;
    v.detuning_over_omega_r = p.omega_r[j] > 0.0 ? delta[j] / p.omega_r[j] : INFINITY;
    v.omega_r_over_nu = p.omega_r[j] / p.nu;
    v.sideband_over_nu = std::abs(e.eta_eff * e.omega_eff[j]) / p.nu;
    v.gamma_eff_over_nu = e.gamma_eff[j] / p.nu;
    flag(v, j, "Delta/Omega_r", v.detuning_over_omega_r);
    flag(v, j, "Omega_r/nu", v.omega_r_over_nu);
    flag(v, j, "nu/(eta_eff Omega_eff)", 1.0 / v.sideband_over_nu);
    flag(v, j, "nu/gamma_eff", 1.0 / v.gamma_eff_over_nu);
    rep.pass = rep.pass && v.pass;
    rep.atoms.push_back(v);
  }
  if (e.resonance_defect > 1e-6 * p.nu) {
    std::ostringstream os;
    os << "omega_plus differs from nu by " << e.resonance_defect << " (cooling resonance missed)";
    rep.warnings.push_back(os.str());
    rep.pass = false;
  }
  return rep;
}

}  // namespace eitcool
