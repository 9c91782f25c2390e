#include <algorithm>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "eitcool/dark_state.hpp"
#include "eitcool/steady_state.hpp"

using namespace eitcool;

namespace {

// internal three-level Hamiltonian in (g, r, e) order
Eigen::Matrix3d internal_h(double og, double orr, double delta) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  h(2, 2) = -delta;
  h(2, 0) = h(0, 2) = og / 2;
  h(2, 1) = h(1, 2) = orr / 2;
  return h;
}

}  // namespace

TEST(DarkState, DressedEnergiesMatchEigensolve) {
  for (auto [og, orr, delta] : {std::tuple{1.5, 15.0, 55.8125}, {0.15, 1.5, -0.4319}, {3.0, 0.5, -20.0}, {2.0, 2.0, 0.0}}) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(internal_h(og, orr, delta));
    const DressedEnergies d = dressed_energies(og, orr, delta);
    EXPECT_NEAR(es.eigenvalues()(0), d.minus, 1e-12);
    EXPECT_NEAR(es.eigenvalues()(1), d.dark, 1e-12);
    EXPECT_NEAR(es.eigenvalues()(2), d.plus, 1e-12);
    // |e> weight of |+> is sin^2 phi; dark state has no |e> part
    const MixingAngles a = mixing_angles(og, orr, delta);
    EXPECT_NEAR(es.eigenvectors()(2, 2) * es.eigenvectors()(2, 2), std::pow(std::sin(a.phi), 2), 1e-12);
    EXPECT_NEAR(es.eigenvectors()(2, 1), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(es.eigenvectors()(0, 1)), std::cos(a.theta), 1e-12);
  }
}

TEST(DarkState, MixingAngleBranch) {
  const MixingAngles a = mixing_angles(1.5, 15.0, 55.8125);
  EXPECT_NEAR(std::tan(a.theta), 0.1, 1e-15);
  EXPECT_NEAR(std::tan(2 * a.phi), std::hypot(1.5, 15.0) / 55.8125, 1e-14);
  EXPECT_GE(std::sin(a.phi), 0.0);
  // large negative detuning: phi -> pi/2 without cancellation
  const MixingAngles b = mixing_angles(1e-3, 1e-3, -1e6);
  EXPECT_GT(b.phi, 1.5);
  EXPECT_LE(b.phi, kPi / 2);
  EXPECT_THROW(mixing_angles(0.0, 0.0, 1.0), DomainError);
}

TEST(DarkState, EffectiveParamsFigureTwoDefaults) {
  const EffectiveParams e = effective_params(PhysicalParams{});
  EXPECT_NEAR(e.eta_eff, 0.15 * std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(e.omega_plus[0], 1.0, 1e-12);
  EXPECT_NEAR(e.omega_plus[1], 1.0, 1e-12);
  EXPECT_LT(e.resonance_defect, 1e-12);
  EXPECT_NEAR(e.gamma_eff[0], 0.308611, 1e-6);
  // beta = 0.7 splits every pair rate 30/70
  EXPECT_NEAR(e.gamma_right(0, 1) / (e.gamma_left(0, 1) + e.gamma_right(0, 1)), 0.7, 1e-14);
  EXPECT_NEAR(e.gamma_left(0, 0) + e.gamma_right(0, 0), e.gamma_eff[0], 1e-14);
}

TEST(DarkState, EffectiveSingleAtomMatchesCooling) {
  PhysicalParams p;
  p.n_atoms = 1;
  p.omega_g = {1.5};
  p.omega_r = {15.0};
  const EffectiveParams e = effective_params(p);
  const HilbertSpace s(1, 2, 2);
  const SteadyStateResult r = steady_state(build_effective_liouvillian(e, s));
  const double n = expectation(r.rho, number_operator(s, 1)).real();
  // frozen from the dense Python reference of the same effective model
  EXPECT_NEAR(n, 0.0061790, 1e-6);
  const double leading = e.gamma_eff[0] * e.gamma_eff[0] / 16 + std::pow(e.eta_eff * e.omega_eff[0], 2) / 8;
  EXPECT_NEAR(n / leading, 1.0, 2e-3);
}

TEST(DarkState, EffectiveBuilderRejectsWrongSpace) {
  const EffectiveParams e = effective_params(PhysicalParams{});
  EXPECT_THROW(build_effective_liouvillian(e, HilbertSpace(2, 3, 2)), DimensionError);
  EXPECT_THROW(build_effective_liouvillian(e, HilbertSpace(1, 2, 2)), DimensionError);
}

TEST(DarkState, ValidityFlagsWeakAtomTwo) {
  const ValidityReport v = validity_report(PhysicalParams{});
  ASSERT_EQ(v.atoms.size(), 2u);
  EXPECT_TRUE(v.atoms[0].pass);
  EXPECT_FALSE(v.atoms[1].pass);
  EXPECT_FALSE(v.pass);
  const bool has = std::any_of(v.warnings.begin(), v.warnings.end(),
                               [](const std::string& w) { return w.find("atom 2: Omega_r/nu") != std::string::npos; });
  EXPECT_TRUE(has);
  EXPECT_NEAR(v.atoms[0].omega_r_over_nu, 15.0, 1e-15);
}

TEST(DarkState, ValidityPassesForStrongDrives) {
  PhysicalParams p;
  p.omega_g = {3.0, 0.03};
  p.omega_r = {30.0, 30.0};
  const ValidityReport v = validity_report(p);
  EXPECT_TRUE(v.atoms[0].pass);
}

TEST(DarkState, EffectiveTwoAtomReference) {
  // frozen from the dense Python reference of the effective model; the
  // full-model values at the same points are 0.0088777 and 0.0017145
  const double expect[2] = {0.018550474176047414, 0.0016233740994915373};
  int k = 0;
  for (double scale : {1.0, 2.0}) {
    PhysicalParams p;
    p.eta_g = p.eta_r = 0.1;
    p.beta = 0.5;
    p.omega_g = {1.5 * scale, 0.015 * scale};
    p.omega_r = {15.0 * scale, 15.0 * scale};
    const HilbertSpace s(2, 2, 2);
    const SteadyStateResult r = steady_state(build_effective_liouvillian(effective_params(p), s));
    EXPECT_NEAR(expectation(r.rho, number_operator(s, 1)).real(), expect[k++], 1e-9);
  }
}
