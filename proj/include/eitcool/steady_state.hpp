#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "eitcool/linalg.hpp"
#include "eitcool/operators.hpp"
#include "eitcool/superoperator.hpp"
#include "eitcool/types.hpp"

namespace eitcool {

enum class SteadyMethod { null_space, long_time };

inline std::string to_string(SteadyMethod m) {
  return m == SteadyMethod::null_space ? "null-space" : "long-time";
}

inline SteadyMethod parse_method(const std::string& s) {
  if (s == "null-space" || s == "null_space") return SteadyMethod::null_space;
  if (s == "long-time" || s == "long_time") return SteadyMethod::long_time;
  throw ConfigError("unknown steady-state method '" + s + "'");
}

struct SteadyStateOptions {
  SteadyMethod method = SteadyMethod::null_space;
  /// Relative residual target: ||L(rho)||_F <= tol * norm_scale(L).
  double tol = 1e-12;
  /// long_time also stops only once the last increment is below this (Frobenius).
  double state_tol = 1e-9;
  bool check_kernel = true;
  /// Operator spaces up to this size (dim^2) use dense linear algebra.
  int dense_limit = 1024;
  int gmres_restart = 200;
  int gmres_max_iterations = 3000;
  /// Starting state for long_time; maximally mixed when empty.
  std::optional<Matrix> initial;
};

struct SteadyStateResult {
  DensityMatrix rho;
  double residual = 0.0;
  double scale = 0.0;
  int null_space_dimension = 1;
  bool dimension_is_lower_bound = false;
  SteadyMethod method = SteadyMethod::null_space;
  int iterations = 0;
};

namespace detail {

struct KernelInfo {
  int dimension = 1;
  bool lower_bound = false;
};

inline Vector bordered_rhs(int dim) { return vec(Matrix::Identity(dim, dim) / double(dim)); }

/// M(x) = L(x) + tr(x) I/D, vectorized. Nonsingular iff the kernel of L is
/// one-dimensional.
struct BorderedOperator {
  const SparseMatrix& l;
  int dim;
  Vector operator()(const Vector& x) const {
    Vector y = l * x;
    Complex tr = 0.0;
    for (int i = 0; i < dim; ++i) tr += x(static_cast<Eigen::Index>(i) * dim + i);
    tr /= double(dim);
    for (int i = 0; i < dim; ++i) y(static_cast<Eigen::Index>(i) * dim + i) += tr;
    return y;
  }
};

inline KernelInfo dense_kernel(const SparseMatrix& l, double scale) {
  Eigen::ComplexEigenSolver<Matrix> es(Matrix(l), false);
  if (es.info() != Eigen::Success) throw NonConvergenceError("Liouvillian eigensolve failed");
  int count = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i)) < 1e-10 * scale) ++count;
  }
  return {count, false};
}

/// Inverse iteration on the bordered operator. Its spectrum is that of L with
/// one zero eigenvalue moved to 1, so its smallest |eigenvalue| is the second
/// smallest of L.
template <class Solve>
KernelInfo iterative_kernel(const BorderedOperator& m, Solve&& solve, double scale, int dim) {
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> nd;
  Vector x(static_cast<Eigen::Index>(dim) * dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = Complex(nd(rng), nd(rng));
  x.normalize();
  double estimate = INFINITY;
  for (int it = 0; it < 6; ++it) {
    std::optional<Vector> y = solve(x);
    if (!y) return {2, true};
    const double yn = y->norm();
    if (!(yn > 0.0) || !std::isfinite(yn)) return {2, true};
    estimate = std::abs(y->dot(m(*y))) / (yn * yn);
    x = *y / yn;
  }
  if (estimate < 1e-10 * scale) return {2, true};
  return {1, false};
}

}  // namespace detail

/**
 * Steady state of a Liouvillian.
 *
 * null_space: solves the trace-bordered system L(rho) + tr(rho) I/D = I/D.
 * Small operator spaces use a dense LU; larger ones use restarted GMRES with
 * an exact solve of the no-jump part K_L rho + rho K_R as right
 * preconditioner.
 *
 * long_time: implicit Euler with geometrically growing steps until the
 * residual target is met.
 *
 * Throws DegenerateSteadyStateError when the kernel is not one-dimensional.
 */
inline SteadyStateResult steady_state(const Superoperator& l_op, const SteadyStateOptions& opt = {}) {
  const int dim = l_op.dim();
  const long long d2 = static_cast<long long>(dim) * dim;
  const SparseMatrix l = l_op.to_sparse();
  double scale = 0.0;
  for (int k = 0; k < l.outerSize(); ++k) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator it(l, k); it; ++it) col += std::abs(it.value());
    scale = std::max(scale, col);
  }
  if (scale == 0.0) {
    throw DegenerateSteadyStateError("Liouvillian is identically zero", static_cast<int>(d2), false);
  }
  const bool dense = d2 <= opt.dense_limit;
  const detail::BorderedOperator m{l, dim};
  const Vector rhs = detail::bordered_rhs(dim);

  std::optional<SylvesterSolver> sylv;
  std::optional<Eigen::PartialPivLU<Matrix>> lu;
  if (dense) {
    Matrix md = Matrix(l);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        md(static_cast<Eigen::Index>(i) * dim + i, static_cast<Eigen::Index>(j) * dim + j) += 1.0 / dim;
      }
    }
    lu.emplace(md);
  } else {
    auto [kl, kr] = l_op.no_jump_generators();
    sylv.emplace(kl, kr);
  }
  auto precond = [&](const Vector& y) { return vec(sylv->solve(unvec(y, dim))); };
  auto solve_m = [&](const Vector& b, double tol) -> std::optional<Vector> {
    if (dense) return lu->solve(b);
    GmresResult g = gmres(m, precond, b, tol, opt.gmres_restart, opt.gmres_max_iterations);
    if (!g.converged) return std::nullopt;
    return g.x;
  };

  detail::KernelInfo kernel;
  if (opt.check_kernel) {
    kernel = dense ? detail::dense_kernel(l, scale)
                   : detail::iterative_kernel(m, [&](const Vector& b) { return solve_m(b, 1e-8); },
                                              scale, dim);
    if (kernel.dimension != 1) {
      throw DegenerateSteadyStateError(
          "steady state is not unique (kernel dimension " + std::string(kernel.lower_bound ? ">= " : "") +
              std::to_string(kernel.dimension) + ")",
          kernel.dimension, kernel.lower_bound);
    }
  }

  Matrix rho;
  int iterations = 0;
  if (opt.method == SteadyMethod::null_space) {
    if (dense) {
      rho = unvec(lu->solve(rhs), dim);
    } else {
      GmresResult g = gmres(m, precond, rhs, std::min(opt.tol, 1e-12), opt.gmres_restart,
                            opt.gmres_max_iterations);
      iterations = g.iterations;
      if (!g.converged) {
        throw NonConvergenceError("GMRES did not converge (relative residual " +
                                  std::to_string(g.relative_residual) + ")");
      }
      rho = unvec(g.x, dim);
    }
  } else {
    Matrix x = opt.initial ? *opt.initial : Matrix(Matrix::Identity(dim, dim) / double(dim));
    if (x.rows() != dim || x.cols() != dim) throw DimensionError("initial state has wrong dimension");
    std::optional<SylvesterSolver> no_jump = sylv;
    if (!no_jump) {
      auto [kl, kr] = l_op.no_jump_generators();
      no_jump.emplace(kl, kr);
    }
    double dt = 1.0 / scale;
    bool done = false;
    // a small residual alone is not enough when the slowest rate is tiny; at
    // large dt the increment approximates the remaining error in rho
    double last_update = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 400; ++step) {
      const double res = (l * vec(x)).norm();
      if (res <= opt.tol * scale && last_update <= opt.state_tol) {
        done = true;
        break;
      }
      auto a = [&](const Vector& v) -> Vector { return v - dt * (l * v); };
      auto pc = [&](const Vector& v) -> Vector {
        return vec(no_jump->solve(unvec(v, dim), 0.5, 0.5, -dt));
      };
      // increment form: (I - dt L) delta = dt L(x), so the solve tolerance
      // is relative to the update rather than to rho itself
      const Vector b = dt * (l * vec(x));
      GmresResult g = gmres(a, pc, b, 1e-8, opt.gmres_restart, opt.gmres_max_iterations);
      iterations += g.iterations;
      last_update = g.x.norm();
      Matrix next = x + unvec(g.x, dim);
      next = 0.5 * (next + next.adjoint());
      next /= next.trace().real();
      x = next;
      // much larger steps make (I - dt L) too ill-conditioned for the inner solve
      dt = std::min(dt * 4.0, 1e10 / scale);
    }
    if (!done) throw NonConvergenceError("long-time evolution did not reach the residual target");
    rho = x;
  }

  rho = 0.5 * (rho + rho.adjoint());
  const Complex tr = rho.trace();
  if (std::abs(tr) == 0.0) throw SingularError("steady-state candidate has zero trace");
  rho /= tr.real();
  SteadyStateResult out{DensityMatrix(rho), (l * vec(rho)).norm(), scale, kernel.dimension,
                        kernel.lower_bound, opt.method, iterations};
  return out;
}

}  // namespace eitcool
