#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "eitcool/types.hpp"

namespace eitcool {

/**
 * Solves (a I + s K_L) X + X (b I + s K_R) = C for fixed K_L, K_R.
 *
 * Bartels-Stewart: both generators are brought to complex Schur form once,
 * then each solve is one triangular sweep per column. The shifts a, b and the
 * scale s can change between solves without refactoring, which is what the
 * implicit time stepper needs.
 */
class SylvesterSolver {
 public:
  SylvesterSolver(const Matrix& k_left, const Matrix& k_right) {
    if (k_left.rows() != k_left.cols() || k_right.rows() != k_right.cols() ||
        k_left.rows() != k_right.rows()) {
      throw DimensionError("Sylvester generators must be square and equal-sized");
    }
    Eigen::ComplexSchur<Matrix> sl(k_left);
    Eigen::ComplexSchur<Matrix> sr(k_right);
    if (sl.info() != Eigen::Success || sr.info() != Eigen::Success) {
      throw NonConvergenceError("Schur decomposition failed");
    }
    u_ = sl.matrixU();
    t_ = sl.matrixT();
    v_ = sr.matrixU();
    s_ = sr.matrixT();
    scale_ = std::max(t_.cwiseAbs().maxCoeff(), s_.cwiseAbs().maxCoeff());
    if (scale_ == 0.0) scale_ = 1.0;
  }

  int dim() const noexcept { return static_cast<int>(u_.rows()); }

  Matrix solve(const Matrix& c, Complex a = 0.0, Complex b = 0.0, Complex s = 1.0) const {
    const int n = dim();
    // T' Y + Y S' = U^H C V, with T' = aI + sT, S' = bI + sS
    Matrix y = u_.adjoint() * c * v_;
    const double floor = 1e-14 * std::max(1.0, std::abs(s) * scale_);
    for (int k = 0; k < n; ++k) {
      Vector rhs = y.col(k);
      for (int j = 0; j < k; ++j) rhs -= (s * s_(j, k)) * y.col(j);
      const Complex shift = a + b + s * s_(k, k);
      for (int i = n - 1; i >= 0; --i) {
        Complex acc = rhs(i);
        for (int j = i + 1; j < n; ++j) acc -= s * t_(i, j) * y(j, k);
        Complex d = shift + s * t_(i, i);
        if (std::abs(d) < floor) d = (d == Complex(0.0)) ? Complex(floor) : d / std::abs(d) * floor;
        y(i, k) = acc / d;
      }
    }
    return u_ * y * v_.adjoint();
  }

 private:
  Matrix u_, t_, v_, s_;
  double scale_ = 1.0;
};

struct GmresResult {
  Vector x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/**
 * Restarted GMRES with right preconditioning: solves A M^-1 y = b, x = M^-1 y.
 * The reported residual is the true ||b - A x|| / ||b|| at the end.
 */
inline GmresResult gmres(const std::function<Vector(const Vector&)>& apply_a,
                         const std::function<Vector(const Vector&)>& apply_minv, const Vector& b,
                         double tol, int restart = 200, int max_iterations = 2000) {
  GmresResult out;
  const Eigen::Index n = b.size();
  const double bnorm = b.norm();
  out.x = Vector::Zero(n);
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  Vector r = b;
  double beta = bnorm;
  while (out.iterations < max_iterations) {
    const int m = restart;
    std::vector<Vector> basis;
    basis.reserve(m + 1);
    basis.push_back(r / beta);
    Matrix h = Matrix::Zero(m + 1, m);
    std::vector<Complex> cs(m), sn(m);
    Vector g = Vector::Zero(m + 1);
    g(0) = beta;
    int k = 0;
    for (; k < m && out.iterations < max_iterations; ++k) {
      ++out.iterations;
      Vector w = apply_a(apply_minv(basis[k]));
      // modified Gram-Schmidt with one reorthogonalization pass
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= k; ++i) {
          const Complex hij = basis[i].dot(w);
          h(i, k) += hij;
          w -= hij * basis[i];
        }
      }
      const double hn = w.norm();
      h(k + 1, k) = hn;
      for (int i = 0; i < k; ++i) {
        const Complex t = std::conj(cs[i]) * h(i, k) + std::conj(sn[i]) * h(i + 1, k);
        h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
        h(i, k) = t;
      }
      const double denom = std::hypot(std::abs(h(k, k)), hn);
      if (denom == 0.0) {
        cs[k] = 1.0;
        sn[k] = 0.0;
      } else {
        cs[k] = h(k, k) / denom;
        sn[k] = hn / denom;
      }
      h(k, k) = denom;
      h(k + 1, k) = 0.0;
      g(k + 1) = -sn[k] * g(k);
      g(k) = std::conj(cs[k]) * g(k);
      if (hn > 0.0) basis.push_back(w / hn);
      if (std::abs(g(k + 1)) <= tol * bnorm || hn == 0.0) {
        ++k;
        break;
      }
    }
    // back substitution on the k x k triangle
    Vector yk = Vector::Zero(k);
    for (int i = k - 1; i >= 0; --i) {
      Complex acc = g(i);
      for (int j = i + 1; j < k; ++j) acc -= h(i, j) * yk(j);
      yk(i) = acc / h(i, i);
    }
    Vector z = Vector::Zero(n);
    for (int i = 0; i < k; ++i) z += yk(i) * basis[i];
    out.x += apply_minv(z);
    r = b - apply_a(out.x);
    beta = r.norm();
    out.relative_residual = beta / bnorm;
    if (out.relative_residual <= tol) {
      out.converged = true;
      return out;
    }
    if (!std::isfinite(beta)) return out;
  }
  return out;
}

/// Column-stacking vec / unvec.
inline Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline Matrix unvec(const Vector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim) throw DimensionError("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

}  // namespace eitcool
