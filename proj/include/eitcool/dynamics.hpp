#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "eitcool/hilbert_space.hpp"
#include "eitcool/linalg.hpp"
#include "eitcool/operators.hpp"
#include "eitcool/superoperator.hpp"
#include "eitcool/types.hpp"

namespace eitcool {

/// Unnormalized geometric weights n0^n / (n0+1)^(n+1), n = 0..n_max.
inline RealVector thermal_weights(double n0, int n_max) {
  if (!(n0 >= 0.0)) throw DomainError("mean phonon number must be >= 0");
  if (n_max < 0) throw DomainError("n_max must be >= 0");
  RealVector w(n_max + 1);
  for (int n = 0; n <= n_max; ++n) w(n) = std::pow(n0, n) / std::pow(n0 + 1.0, n + 1);
  return w;
}

/// Product thermal state with every atom in its lowest internal level (|g>
/// or |d>), truncated at n_max and renormalized to unit trace.
inline DensityMatrix thermal_state(double n0, const HilbertSpace& space) {
  RealVector w = thermal_weights(n0, space.n_max());
  w /= w.sum();
  Matrix rho = Matrix::Zero(space.total_dim(), space.total_dim());
  for (int idx = 0; idx < space.total_dim(); ++idx) {
    double p = 1.0;
    for (const SiteState& s : space.decode(idx)) p *= s.level == 0 ? w(s.phonon) : 0.0;
    rho(idx, idx) = p;
  }
  return DensityMatrix(rho);
}

struct TrajectoryPoint {
  double t = 0.0;
  std::vector<double> n;                         // <n_j> per atom
  std::vector<std::vector<double>> populations;  // [atom][internal level]
  double trace = 1.0;
  double min_eigenvalue = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  int accepted_steps = 0;
  int rejected_steps = 0;

  std::vector<double> times() const {
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.t);
    return out;
  }
  std::vector<double> occupation(int site) const {
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.n.at(site - 1));
    return out;
  }
};

/// Observables recorded along trajectories.
class ObservableSet {
 public:
  explicit ObservableSet(const HilbertSpace& space) : space_(space) {
    for (int j = 1; j <= space.n_atoms(); ++j) {
      number_.push_back(number_operator(space, j));
      std::vector<SparseMatrix> proj;
      for (int a = 0; a < space.internal_dim(); ++a) proj.push_back(transition(space, j, a, a));
      projectors_.push_back(std::move(proj));
    }
  }

  TrajectoryPoint measure(double t, const Matrix& rho) const {
    TrajectoryPoint p;
    p.t = t;
    for (std::size_t j = 0; j < number_.size(); ++j) {
      p.n.push_back(expectation(rho, number_[j]).real());
      std::vector<double> pops;
      for (const auto& pr : projectors_[j]) pops.push_back(expectation(rho, pr).real());
      p.populations.push_back(std::move(pops));
    }
    p.trace = rho.trace().real();
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    p.min_eigenvalue = es.eigenvalues().minCoeff();
    return p;
  }

  const HilbertSpace& space() const noexcept { return space_; }

 private:
  HilbertSpace space_;
  std::vector<SparseMatrix> number_;
  std::vector<std::vector<SparseMatrix>> projectors_;
};

/**
 * Integrates d rho/dt = L(rho) with Dormand-Prince 5(4), recording observables
 * at every time in `t_grid` (the first entry is the initial time). Steps are
 * clipped to land on grid times; rho is Hermitized after every accepted step.
 */
inline Trajectory evolve(const Superoperator& l_op, const HilbertSpace& space, const DensityMatrix& rho0,
                         const std::vector<double>& t_grid, double rel_tol = 1e-8) {
  if (!(rel_tol >= 1e-12 && rel_tol <= 1e-4)) throw DomainError("rel_tol must lie in [1e-12, 1e-4]");
  if (t_grid.empty()) throw DomainError("time grid is empty");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw DomainError("time grid must be strictly increasing");
  }
  const int dim = l_op.dim();
  if (rho0.dim() != dim || space.total_dim() != dim) throw DimensionError("evolve: dimension mismatch");

  // Dormand-Prince coefficients
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  // every stage is a real combination of Hermitian matrices, so the
  // Hermitian fast path applies throughout
  const HermitianAction l(l_op);
  const ObservableSet obs(space);
  const double atol = rel_tol * 1e-3;

  Trajectory traj;
  Matrix y = rho0.matrix();
  double t = t_grid.front();
  traj.points.push_back(obs.measure(t, y));

  Matrix k1 = l.apply(y), k2, k3, k4, k5, k6, k7, ynew;
  double h = 0.0;
  {
    const double d0 = y.cwiseAbs().maxCoeff();
    const double d1 = k1.cwiseAbs().maxCoeff();
    h = (d1 > 0.0) ? 0.01 * std::max(d0, 1e-5) / d1 : 1e-3;
  }
  double err_prev = 1e-4;
  for (std::size_t gi = 1; gi < t_grid.size(); ++gi) {
    const double target = t_grid[gi];
    while (t < target) {
      const double remaining = target - t;
      const double h_free = h;
      bool clipped = false;
      if (h >= remaining) {
        h = remaining;
        clipped = true;
      }
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        throw IntegrationError("step size underflow", t);
      }
      k2 = l.apply(y + h * a21 * k1);
      k3 = l.apply(y + h * (a31 * k1 + a32 * k2));
      k4 = l.apply(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      k5 = l.apply(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      k6 = l.apply(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      k7 = l.apply(ynew);
      const Matrix errm = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double err = 0.0;
      {
        // sqrt(norm) rather than abs: std::abs on complex goes through hypot
        const Complex* pe = errm.data();
        const Complex* py = y.data();
        const Complex* pn = ynew.data();
        for (Eigen::Index i = 0; i < errm.size(); ++i) {
          const double big = std::sqrt(std::max(std::norm(py[i]), std::norm(pn[i])));
          err = std::max(err, std::sqrt(std::norm(pe[i])) / (atol + rel_tol * big));
        }
      }
      if (!std::isfinite(err)) err = 1e10;
      if (err <= 1.0) {
        t = clipped ? target : t + h;
        y = 0.5 * (ynew + ynew.adjoint());
        // first-same-as-last; L commutes with Hermitization
        k1 = 0.5 * (k7 + k7.adjoint());
        ++traj.accepted_steps;
        // PI step-size control
        const double fac = err == 0.0 ? 5.0
                                      : 0.9 * std::pow(err, -0.17) * std::pow(err_prev, 0.04);
        err_prev = std::max(err, 1e-4);
        const double hn = h * std::clamp(fac, 0.2, 5.0);
        // a clipped step says little about the admissible size
        h = clipped ? std::max(hn, h_free) : hn;
      } else {
        ++traj.rejected_steps;
        h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      }
    }
    traj.points.push_back(obs.measure(t, y));
  }
  return traj;
}

/// First point of a log-spaced grid is 0; the rest are log-spaced in
/// [t_max * 1e-3, t_max].
inline std::vector<double> log_time_grid(double t_max, int points) {
  if (points < 2) throw DomainError("time grid needs at least 2 points");
  if (!(t_max > 0.0)) throw DomainError("t_max must be > 0");
  std::vector<double> t{0.0};
  const double lo = std::log10(t_max * 1e-3);
  const double hi = std::log10(t_max);
  for (int i = 0; i < points - 1; ++i) {
    t.push_back(points == 2 ? t_max : std::pow(10.0, lo + (hi - lo) * i / (points - 2)));
  }
  t.back() = t_max;
  return t;
}

}  // namespace eitcool
