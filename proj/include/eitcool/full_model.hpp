#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "eitcool/hilbert_space.hpp"
#include "eitcool/operators.hpp"
#include "eitcool/superoperator.hpp"
#include "eitcool/types.hpp"

namespace eitcool {

/// Left/right-propagating decay rates of both excited-state channels.
struct DirectionalRates {
  double g_left = 0.0;
  double g_right = 0.0;
  double r_left = 0.0;
  double r_right = 0.0;

  double gamma_g() const noexcept { return g_left + g_right; }
  double gamma_r() const noexcept { return r_left + r_right; }

  friend bool operator==(const DirectionalRates&, const DirectionalRates&) = default;
};

/**
 * Full experiment description. Frequencies are in units of nu when nu = 1;
 * nothing assumes nu = 1, so a common rescaling of every rate is exact.
 *
 * Decay directionality: beta is the right-propagating fraction, applied to
 * both channels. Setting `rates` bypasses beta entirely.
 */
struct PhysicalParams {
  int n_atoms = 2;
  double nu = 1.0;
  std::vector<double> omega_g{1.5, 0.15};
  std::vector<double> omega_r{15.0, 1.5};
  bool auto_eit_detuning = true;
  std::vector<double> detuning;  // read only when auto_eit_detuning is false
  double gamma_g = 18.0;
  double gamma_r = 2.0;
  double beta = 0.7;
  std::optional<DirectionalRates> rates;
  double eta_g = 0.15;
  double eta_r = 0.15;
  double psi_g = kPi / 4.0;
  double psi_r = 3.0 * kPi / 4.0;
  double xi = 2.0 * kPi;
  int n_max = 2;

  void validate() const {
    if (n_atoms < 1) throw DomainError("n_atoms must be >= 1");
    if (!(nu > 0.0)) throw DomainError("trap frequency nu must be > 0");
    if (static_cast<int>(omega_g.size()) != n_atoms || static_cast<int>(omega_r.size()) != n_atoms) {
      throw DimensionError("one probe and one control Rabi frequency per atom required");
    }
    for (int j = 0; j < n_atoms; ++j) {
      if (omega_g[j] < 0.0 || omega_r[j] < 0.0) throw DomainError("Rabi frequencies must be >= 0");
    }
    if (!auto_eit_detuning && static_cast<int>(detuning.size()) != n_atoms) {
      throw DimensionError("one detuning per atom required");
    }
    const DirectionalRates d = directional_rates();
    for (double r : {d.g_left, d.g_right, d.r_left, d.r_right}) {
      if (r < 0.0 || !std::isfinite(r)) throw DomainError("decay rates must be finite and >= 0");
    }
    if (!rates && (beta < 0.0 || beta > 1.0)) throw DomainError("beta must lie in [0, 1]");
    if (eta_g < 0.0 || eta_r < 0.0) throw DomainError("Lamb-Dicke parameters must be >= 0");
    if (n_max < 1) throw DomainError("n_max must be >= 1");
  }

  DirectionalRates directional_rates() const {
    if (rates) return *rates;
    return {(1.0 - beta) * gamma_g, beta * gamma_g, (1.0 - beta) * gamma_r, beta * gamma_r};
  }

  double total_gamma_g() const { return directional_rates().gamma_g(); }
  double total_gamma_r() const { return directional_rates().gamma_r(); }

  /// Per-atom detuning, resolved from the EIT condition when requested.
  std::vector<double> detunings() const;
};

/// Detuning that puts the bright dressed state at omega_plus = nu.
inline double eit_detuning(double omega_g, double omega_r, double nu) {
  if (!(nu > 0.0)) throw DomainError("nu must be > 0");
  return -nu + (omega_g * omega_g + omega_r * omega_r) / (4.0 * nu);
}

inline std::vector<double> PhysicalParams::detunings() const {
  if (!auto_eit_detuning) return detuning;
  std::vector<double> out(n_atoms);
  for (int j = 0; j < n_atoms; ++j) out[j] = eit_detuning(omega_g[j], omega_r[j], nu);
  return out;
}

/// Single-atom reference for atom `site` (1-based): its own drives, total
/// decay rates, no partner.
inline PhysicalParams single_atom_baseline(const PhysicalParams& p, int site) {
  if (site < 1 || site > p.n_atoms) throw DomainError("site out of range");
  PhysicalParams s = p;
  const int j = site - 1;
  const DirectionalRates d = p.directional_rates();
  s.n_atoms = 1;
  s.omega_g = {p.omega_g[j]};
  s.omega_r = {p.omega_r[j]};
  if (!p.auto_eit_detuning) s.detuning = {p.detuning[j]};
  s.rates = DirectionalRates{0.0, d.gamma_g(), 0.0, d.gamma_r()};
  return s;
}

namespace detail {

inline void require_full_space(const PhysicalParams& p, const HilbertSpace& space) {
  if (space.internal_dim() != 3) throw DimensionError("full model needs internal_dim 3");
  if (space.n_atoms() != p.n_atoms) throw DimensionError("space and params disagree on n_atoms");
}

constexpr int kG = static_cast<int>(Level::g);
constexpr int kR = static_cast<int>(Level::r);
constexpr int kE = static_cast<int>(Level::e);

}  // namespace detail

/// Lamb-Dicke Hamiltonian to first order in eta: detuning, trap, carrier and
/// first-order sideband terms for each atom.
inline SparseMatrix build_h_ld(const PhysicalParams& p, const HilbertSpace& space) {
  p.validate();
  detail::require_full_space(p, space);
  using namespace detail;
  const std::vector<double> delta = p.detunings();
  const SparseMatrix a = local_phonon(space, fock_ladder(space.n_max()));
  const SparseMatrix x = a + adjoint(a);
  const SparseMatrix n = adjoint(a) * a;
  const SparseMatrix eg = local_transition(space, kE, kG);
  const SparseMatrix er = local_transition(space, kE, kR);
  const SparseMatrix ee = local_transition(space, kE, kE);
  const double kg = p.eta_g * std::cos(p.psi_g);
  const double kr = p.eta_r * std::cos(p.psi_r);

  SparseMatrix h(space.total_dim(), space.total_dim());
  for (int j = 0; j < p.n_atoms; ++j) {
    const SparseMatrix carrier = (0.5 * p.omega_g[j]) * eg + (0.5 * p.omega_r[j]) * er;
    const SparseMatrix k = (kg * 0.5 * p.omega_g[j]) * SparseMatrix(eg * x) +
                           (kr * 0.5 * p.omega_r[j]) * SparseMatrix(er * x);
    SparseMatrix local = (-delta[j]) * ee + p.nu * n + carrier + adjoint(carrier);
    local += kI * (k - adjoint(k));
    h += site_operator(space, j + 1, local);
  }
  h.prune(Complex(0.0));
  return h;
}

/// Coherent part of the waveguide exchange; zero for a single atom.
inline SparseMatrix build_h_chiral(const PhysicalParams& p, const HilbertSpace& space) {
  p.validate();
  detail::require_full_space(p, space);
  using namespace detail;
  const DirectionalRates d = p.directional_rates();
  SparseMatrix h(space.total_dim(), space.total_dim());
  for (int m : {kG, kR}) {
    const double left = m == kG ? d.g_left : d.r_left;
    const double right = m == kG ? d.g_right : d.r_right;
    for (int mu = 1; mu <= p.n_atoms; ++mu) {
      for (int nv = 1; nv <= p.n_atoms; ++nv) {
        if (mu == nv) continue;
        const double g = mu < nv ? left : right;
        if (g == 0.0) continue;
        const Complex phase = std::exp(kI * (p.xi * std::abs(mu - nv)));
        const SparseMatrix hop =
            phase * SparseMatrix(transition(space, mu, kE, m) * transition(space, nv, m, kE));
        h += (-0.5 * kI * g) * SparseMatrix(hop - adjoint(hop));
      }
    }
  }
  h.prune(Complex(0.0));
  return h;
}

/// Directional dissipator, summed over both atom orders, both channels and
/// both propagation directions.
inline Superoperator build_dissipator(const PhysicalParams& p, const HilbertSpace& space) {
  p.validate();
  detail::require_full_space(p, space);
  using namespace detail;
  const DirectionalRates d = p.directional_rates();
  Superoperator out(space.total_dim());
  for (int m : {kG, kR}) {
    const double left = m == kG ? d.g_left : d.r_left;
    const double right = m == kG ? d.g_right : d.r_right;
    for (int mu = 1; mu <= p.n_atoms; ++mu) {
      const SparseMatrix a = transition(space, mu, kE, m);
      for (int nv = 1; nv <= p.n_atoms; ++nv) {
        const SparseMatrix b = transition(space, nv, m, kE);
        const double arg = p.xi * (mu - nv);
        out = out + chiral_dissipator_term(left, std::exp(-kI * arg), a, b);
        out = out + chiral_dissipator_term(right, std::exp(kI * arg), a, b);
      }
    }
  }
  return out.compressed();
}

inline Superoperator build_liouvillian(const PhysicalParams& p, const HilbertSpace& space) {
  const SparseMatrix h = build_h_ld(p, space) + build_h_chiral(p, space);
  return (hamiltonian_liouvillian(h) + build_dissipator(p, space)).compressed();
}

/// Convenience: space sized from params.n_max.
inline HilbertSpace full_space(const PhysicalParams& p) { return HilbertSpace(p.n_atoms, 3, p.n_max); }

}  // namespace eitcool
