#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "eitcool/dark_state.hpp"
#include "eitcool/types.hpp"

namespace eitcool {

/// Phonon occupation of one atom under plain sideband cooling.
inline double single_atom_n(double gamma_eff, double eta_eff, double omega_eff, double nu) {
  if (!(nu > 0.0)) throw DomainError("nu must be > 0");
  return gamma_eff * gamma_eff / (16.0 * nu * nu) + eta_eff * eta_eff * omega_eff * omega_eff / (8.0 * nu * nu);
}

/// 1 - 4 gL gR / (gL + gR)^2; symmetric and scale-free.
inline double ratio_limit(double gamma_left, double gamma_right) {
  if (gamma_left < 0.0 || gamma_right < 0.0) throw DomainError("rates must be >= 0");
  const double s = gamma_left + gamma_right;
  if (s == 0.0) throw SingularError("ratio_limit: both rates vanish");
  return 1.0 - 4.0 * gamma_left * gamma_right / (s * s);
}

namespace detail {

struct TwoAtomRates {
  double g1, g2, left, right, a, nu;
};

inline TwoAtomRates two_atom_rates(const EffectiveParams& e) {
  if (e.n_atoms != 2) throw DomainError("the reduced two-atom model needs n_atoms = 2");
  return {e.gamma_eff[0], e.gamma_eff[1], e.gamma_left(0, 1), e.gamma_right(0, 1),
          e.eta_eff * e.omega_eff[0], e.nu};
}

inline void require_cascade_phase(double xi) {
  const double r = std::remainder(xi, 2.0 * kPi);
  if (std::abs(r) > 1e-9) throw DomainError("reduced model requires xi = 0 mod 2 pi");
}

inline void check_positive(double v, const char* name) {
  if (!(v > 0.0)) throw SingularError(std::string(name) + " vanishes");
}

}  // namespace detail

/**
 * Target-atom reduced density-matrix elements relative to rho_{g0g,g0g} = 1.
 * Naming follows |atom1 level, atom1 phonon, atom2 level>.
 */
struct ReducedSolution {
  double rho_e0ge0g = 0.0;  // P
  double rho_g0eg0e = 0.0;  // Q
  double rho_g1gg1g = 0.0;  // G
  Complex rho_e0gg0e;       // X, conj is rho_g0ee0g
  Complex rho_g1ge0g;       // Y, conj is rho_e0gg1g
  Complex rho_g1gg0e;       // Z, conj is rho_g0eg1g
  double rho_e1ge1g = 0.0;
  Complex rho_g1eg0g;
  Complex rho_e1gg0g;
  double n1 = 0.0;
  int rank = 0;
  double residual = 0.0;
  std::vector<std::string> warnings;

  Complex rho_g0ee0g() const { return std::conj(rho_e0gg0e); }
  Complex rho_e0gg1g() const { return std::conj(rho_g1ge0g); }
  Complex rho_g0eg1g() const { return std::conj(rho_g1gg0e); }
};

/**
 * Builds and solves the six stationarity conditions of the two-atom reduced
 * space (atom-2 motion traced out, cascade phase 1). The unknowns close once
 * each coherence is tied to its conjugate partner, giving a 12 x 9 real
 * system solved by column-pivoting QR.
 */
inline ReducedSolution reduced_linear_system(const EffectiveParams& e) {
  detail::require_cascade_phase(e.xi);
  const auto [g1, g2, L, R, a, nu] = detail::two_atom_rates(e);
  detail::check_positive(g1, "gamma_eff,1");
  detail::check_positive(g2, "gamma_eff,2");
  ReducedSolution out;
  if (e.omega_eff[0] > 0.0 && e.omega_eff[1] / e.omega_eff[0] > 0.2) {
    std::ostringstream os;
    os << "driving is not asymmetric: Omega_eff,2/Omega_eff,1 = " << e.omega_eff[1] / e.omega_eff[0];
    out.warnings.push_back(os.str());
  }
  if (a == 0.0) throw SingularError("eta_eff * Omega_eff,1 vanishes");

  // complex unknown slots: P Q G X X* Y Y* Z Z*
  enum { P, Q, G, X, Xc, Y, Yc, Z, Zc };
  const Complex i = kI;
  Eigen::Matrix<Complex, 6, 9> A = Eigen::Matrix<Complex, 6, 9>::Zero();
  Eigen::Matrix<Complex, 6, 1> b = Eigen::Matrix<Complex, 6, 1>::Zero();
  A(0, Yc) = a;  A(0, Y) = -a;  A(0, P) = 2.0 * i * g1;  A(0, Xc) = 2.0 * i * L;  A(0, X) = 2.0 * i * L;
  A(1, Zc) = -a; A(1, Q) = -2.0 * i * L; A(1, P) = -2.0 * i * R; A(1, Xc) = -i * (g1 + g2);
  A(2, P) = a;   A(2, G) = -a; A(2, Z) = -2.0 * i * L; A(2, Y) = -i * g1;
  A(3, X) = -2.0 * i * R; A(3, Xc) = -2.0 * i * R; A(3, Q) = -2.0 * i * g2;
  A(4, X) = a;   A(4, Y) = -2.0 * i * R; A(4, Z) = -i * g2;
  A(5, Yc) = a;  A(5, Y) = -a;
  b(5) = -i * g1 * a * a / (8.0 * nu * nu);

  // real unknowns x = [P, Q, G, Re X, Im X, Re Y, Im Y, Re Z, Im Z]
  Eigen::Matrix<Complex, 9, 9> T = Eigen::Matrix<Complex, 9, 9>::Zero();
  T(P, 0) = 1.0;
  T(Q, 1) = 1.0;
  T(G, 2) = 1.0;
  for (int k : {0, 1, 2}) {
    const int slot = X + 2 * k;
    const int col = 3 + 2 * k;
    T(slot, col) = 1.0;
    T(slot, col + 1) = i;
    T(slot + 1, col) = 1.0;
    T(slot + 1, col + 1) = -i;
  }
  const Eigen::Matrix<Complex, 6, 9> AT = A * T;
  Eigen::Matrix<double, 12, 9> Ar;
  Eigen::Matrix<double, 12, 1> br;
  Ar << AT.real(), AT.imag();
  br << b.real(), b.imag();
  Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 12, 9>> qr(Ar);
  qr.setThreshold(1e-13);
  out.rank = static_cast<int>(qr.rank());
  if (out.rank < 9) throw SingularError("reduced linear system is rank deficient");
  const Eigen::Matrix<double, 9, 1> x = qr.solve(br);
  out.residual = (Ar * x - br).norm();
  if (out.residual > 1e-8 * std::max(1.0, br.norm())) {
    throw SingularError("reduced linear system is inconsistent");
  }
  out.rho_e0ge0g = x(0);
  out.rho_g0eg0e = x(1);
  out.rho_g1gg1g = x(2);
  out.rho_e0gg0e = Complex(x(3), x(4));
  out.rho_g1ge0g = Complex(x(5), x(6));
  out.rho_g1gg0e = Complex(x(7), x(8));
  const double nu2 = nu * nu;
  out.rho_e1ge1g = a * a / (16.0 * nu2);
  out.rho_g1eg0g = -i * R * a / (8.0 * nu2);
  out.rho_e1gg0g = -(4.0 * nu - i * g2) * a / (16.0 * nu2);
  out.n1 = out.rho_e1ge1g + out.rho_g1gg1g;
  return out;
}

namespace detail {

inline void warn_hierarchy(const TwoAtomRates& r, std::vector<std::string>* warnings) {
  if (!warnings) return;
  for (double v : {r.g1, r.g2, r.left, r.right}) {
    if (v > 0.0 && r.nu / v < 3.0) {
      warnings->push_back("nu is not much larger than the effective decay rates");
      return;
    }
  }
}

}  // namespace detail

/**
 * Closed-form target-atom occupation. Written as the single-atom value plus
 * the exchange corrections, so with vanishing cross rates it reproduces
 * single_atom_n bit for bit.
 */
inline double closed_form_n1(const EffectiveParams& e, std::vector<std::string>* warnings = nullptr) {
  detail::require_cascade_phase(e.xi);
  const auto r = detail::two_atom_rates(e);
  detail::check_positive(r.g1, "gamma_eff,1");
  detail::check_positive(r.g2, "gamma_eff,2");
  detail::warn_hierarchy(r, warnings);
  const double nu2 = r.nu * r.nu;
  const double rl = r.right * r.left;
  const double a2 = r.a * r.a;
  const double base = single_atom_n(r.g1, e.eta_eff, e.omega_eff[0], r.nu);
  const double den = (r.g1 + r.g2) / r.g1 * (r.g1 * r.g2 / 4.0 - rl) + a2 / 4.0;
  if (den == 0.0) throw SingularError("closed form: bracket denominator vanishes");
  const double num = (r.g1 + r.g2) * (r.g1 + r.g2) / (r.g1 * r.g2) * rl;
  const double corr = -(r.g1 / r.g2) * rl / (4.0 * nu2) + num / den * a2 / (16.0 * nu2);
  return base + corr;
}

/// eta_eff -> 0 limit of closed_form_n1.
inline double ld_limit_n1(const EffectiveParams& e) {
  const auto r = detail::two_atom_rates(e);
  detail::check_positive(r.g2, "gamma_eff,2");
  const double nu2 = r.nu * r.nu;
  return r.g1 * r.g1 / (16.0 * nu2) - (r.g1 / r.g2) * r.right * r.left / (4.0 * nu2);
}

}  // namespace eitcool
