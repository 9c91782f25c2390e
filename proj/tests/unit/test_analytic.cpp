#include <random>

#include <gtest/gtest.h>

#include "eitcool/analytic.hpp"
#include "eitcool/dark_state.hpp"

using namespace eitcool;

namespace {

PhysicalParams fig4_set(double og1, double or1, double og2, double or2, double beta) {
  PhysicalParams p;
  p.omega_g = {og1, og2};
  p.omega_r = {or1, or2};
  p.eta_g = p.eta_r = 0.1;
  p.beta = beta;
  return p;
}

}  // namespace

TEST(Analytic, SingleAtomFormula) {
  EXPECT_DOUBLE_EQ(single_atom_n(4.0, 0.5, 2.0, 1.0), 1.0 + 0.125);
  EXPECT_THROW(single_atom_n(1.0, 0.1, 1.0, 0.0), DomainError);
}

TEST(Analytic, RatioLimitIdentities) {
  for (double g : {0.3, 1.0, 18.0, 1e-8}) {
    EXPECT_EQ(ratio_limit(g / 2, g / 2), 0.0);
    EXPECT_EQ(ratio_limit(0.0, g), 1.0);
    EXPECT_EQ(ratio_limit(g, 0.0), 1.0);
  }
  EXPECT_NEAR(ratio_limit(0.3, 0.7), 0.16, 1e-15);
  EXPECT_THROW(ratio_limit(0.0, 0.0), SingularError);
  EXPECT_THROW(ratio_limit(-1.0, 1.0), DomainError);
}

TEST(Analytic, ClosedFormMatchesReducedSystemOnRandomDraws) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    PhysicalParams p;
    const double or1 = 10.0 + 30.0 * u(rng);
    const double probe = 0.05 + 0.25 * u(rng);
    const double drive = 0.01 + 0.19 * u(rng);
    p.omega_r = {or1, or1 * (0.5 + u(rng))};
    p.omega_g = {probe * or1, drive * probe * or1};
    p.gamma_g = 1.0 + 18.0 * u(rng);
    p.gamma_r = 20.0 - p.gamma_g;
    p.beta = 0.02 + 0.96 * u(rng);
    p.eta_g = p.eta_r = 0.05 + 0.15 * u(rng);
    const EffectiveParams e = effective_params(p);
    const double cf = closed_form_n1(e);
    const ReducedSolution r = reduced_linear_system(e);
    EXPECT_EQ(r.rank, 9);
    EXPECT_NEAR(r.n1 / cf, 1.0, 1e-10) << "draw " << k;
  }
}

TEST(Analytic, ZeroCrossCouplingIsSingleAtomExactly) {
  EffectiveParams e = effective_params(PhysicalParams{});
  e.gamma_left(0, 1) = e.gamma_right(0, 1) = 0.0;
  e.gamma_left(1, 0) = e.gamma_right(1, 0) = 0.0;
  EXPECT_EQ(closed_form_n1(e), single_atom_n(e.gamma_eff[0], e.eta_eff, e.omega_eff[0], e.nu));
}

TEST(Analytic, LambDickeLimitIsQuadratic) {
  EffectiveParams e = effective_params(fig4_set(1.5, 15.0, 0.015, 15.0, 0.5));
  auto dev = [&](double eta) {
    e.eta_eff = eta;
    return std::abs(closed_form_n1(e) - ld_limit_n1(e));
  };
  const double ratio = dev(1e-2) / dev(1e-3);
  EXPECT_GT(ratio, 90.0);
  EXPECT_LT(ratio, 110.0);
}

TEST(Analytic, ReducedSystemElements) {
  const EffectiveParams e = effective_params(fig4_set(1.5, 15.0, 0.015, 15.0, 0.7));
  const ReducedSolution r = reduced_linear_system(e);
  EXPECT_GT(r.rho_e0ge0g, 0.0);
  EXPECT_GT(r.rho_g1gg1g, 0.0);
  EXPECT_LT(r.residual, 1e-12);
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_NEAR(r.n1, r.rho_e1ge1g + r.rho_g1gg1g, 1e-18);
}

TEST(Analytic, WarnsOnSymmetricDriving) {
  PhysicalParams p;
  p.omega_g = {1.5, 1.5};
  p.omega_r = {15.0, 15.0};
  EXPECT_FALSE(reduced_linear_system(effective_params(p)).warnings.empty());
}

TEST(Analytic, Preconditions) {
  PhysicalParams p;
  p.xi = kPi;
  EXPECT_THROW(closed_form_n1(effective_params(p)), DomainError);
  EXPECT_THROW(reduced_linear_system(effective_params(p)), DomainError);
  PhysicalParams q;
  q.n_atoms = 1;
  q.omega_g = {1.5};
  q.omega_r = {15.0};
  EXPECT_THROW(closed_form_n1(effective_params(q)), DomainError);
  EffectiveParams e = effective_params(PhysicalParams{});
  e.gamma_eff[1] = 0.0;
  EXPECT_THROW(closed_form_n1(e), SingularError);
  EXPECT_THROW(ld_limit_n1(e), SingularError);
}

TEST(Analytic, FigureFourEndpoints) {
  // beta = 1 removes the backward channel: the ratio limit is 1 and the
  // closed form collapses to the single-atom value
  const EffectiveParams e = effective_params(fig4_set(1.5, 15.0, 0.015, 15.0, 1.0));
  EXPECT_EQ(ratio_limit(e.gamma_left(0, 1), e.gamma_right(0, 1)), 1.0);
  EXPECT_NEAR(closed_form_n1(e), single_atom_n(e.gamma_eff[0], e.eta_eff, e.omega_eff[0], e.nu), 1e-15);
}
