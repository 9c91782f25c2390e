#pragma once

// Test-only reference: the full three-level chiral model written out with
// dense matrices and explicit commutators, sharing no code with the library
// builders. Small spaces only.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using C = std::complex<double>;
using M = Eigen::MatrixXcd;

struct Model {
  std::vector<double> og, orr, delta;
  double g_left_g, g_right_g, g_left_r, g_right_r;
  double eta_g = 0.15, eta_r = 0.15, psi_g = M_PI / 4, psi_r = 3 * M_PI / 4, xi = 2 * M_PI, nu = 1.0;
  int n_max = 1;
};

inline M dkron(const M& a, const M& b) {
  M out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct Built {
  M h;
  std::vector<std::pair<C, std::pair<M, M>>> jumps;  // coef, (A, B): coef (AB r + r AB - 2 B r A)
  std::vector<M> number;
  int dim;
};

inline Built build(const Model& m) {
  const int n = static_cast<int>(m.og.size());
  const int p = m.n_max + 1;
  const int dl = 3 * p;
  M a = M::Zero(p, p);
  for (int k = 1; k < p; ++k) a(k - 1, k) = std::sqrt(double(k));
  auto proj = [&](int i, int k) {
    M q = M::Zero(3, 3);
    q(i, k) = 1.0;
    return dkron(q, M::Identity(p, p));
  };
  auto site = [&](const M& op, int j) {
    M out = M::Identity(1, 1);
    for (int k = 0; k < n; ++k) out = dkron(out, k == j ? op : M(M::Identity(dl, dl)));
    return out;
  };
  const M A = dkron(M::Identity(3, 3), a);
  const M X = A + A.adjoint();
  const int G = 0, R = 1, E = 2;
  Built b;
  b.dim = 1;
  for (int k = 0; k < n; ++k) b.dim *= dl;
  b.h = M::Zero(b.dim, b.dim);
  for (int j = 0; j < n; ++j) {
    M h = -m.delta[j] * proj(E, E) + m.nu * A.adjoint() * A;
    M c = m.og[j] / 2 * proj(E, G) + m.orr[j] / 2 * proj(E, R);
    h += c + M(c.adjoint());
    M t = m.eta_g * std::cos(m.psi_g) * m.og[j] / 2 * proj(E, G) * X +
          m.eta_r * std::cos(m.psi_r) * m.orr[j] / 2 * proj(E, R) * X;
    h += C(0, 1) * (t - M(t.adjoint()));
    b.h += site(h, j);
  }
  const double gl[2] = {m.g_left_g, m.g_left_r};
  const double gr[2] = {m.g_right_g, m.g_right_r};
  for (int lev = 0; lev < 2; ++lev) {
    for (int mu = 0; mu < n; ++mu) {
      for (int nv = 0; nv < n; ++nv) {
        if (mu == nv) continue;
        const double g = mu < nv ? gl[lev] : gr[lev];
        M xo = std::exp(C(0, m.xi * std::abs(mu - nv))) * site(proj(E, lev), mu) * site(proj(lev, E), nv);
        b.h += C(0, -g / 2) * (xo - M(xo.adjoint()));
      }
    }
    for (int s = 0; s < 2; ++s) {
      const double rate = s == 0 ? gl[lev] : gr[lev];
      const double sgn = s == 0 ? -1.0 : 1.0;
      if (rate == 0.0) continue;
      for (int mu = 0; mu < n; ++mu) {
        for (int nv = 0; nv < n; ++nv) {
          const C ph = std::exp(C(0, sgn * m.xi * (mu - nv)));
          b.jumps.push_back({-rate / 2 * ph, {site(proj(E, lev), mu), site(proj(lev, E), nv)}});
        }
      }
    }
  }
  for (int j = 0; j < n; ++j) b.number.push_back(site(A.adjoint() * A, j));
  return b;
}

inline M apply(const Built& b, const M& r) {
  M out = C(0, -1) * (b.h * r - r * b.h);
  for (const auto& [c, ab] : b.jumps) {
    const M AB = ab.first * ab.second;
    out += c * (AB * r + r * AB - 2.0 * ab.second * r * ab.first);
  }
  return out;
}

}  // namespace oracle
