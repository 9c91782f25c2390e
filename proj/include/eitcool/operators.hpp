#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "eitcool/hilbert_space.hpp"
#include "eitcool/types.hpp"

namespace eitcool {

// LinearOperator is a plain complex sparse matrix; dense only where noted.
using LinearOperator = SparseMatrix;

inline constexpr double kHermitianTol = 1e-10;

inline SparseMatrix identity(int dim) {
  SparseMatrix id(dim, dim);
  id.setIdentity();
  return id;
}

inline SparseMatrix adjoint(const SparseMatrix& op) { return SparseMatrix(op.adjoint()); }

/// Sparse Kronecker product a (x) b.
inline SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros()) * b.nonZeros());
  for (int ka = 0; ka < a.outerSize(); ++ka) {
    for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia) {
      for (int kb = 0; kb < b.outerSize(); ++kb) {
        for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib) {
          trips.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                             ia.value() * ib.value());
        }
      }
    }
  }
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

/// Phonon annihilation operator on Fock states 0..n_max: a|n> = sqrt(n)|n-1>.
inline SparseMatrix fock_ladder(int n_max) {
  if (n_max < 1) throw DomainError("n_max must be >= 1");
  SparseMatrix a(n_max + 1, n_max + 1);
  std::vector<Triplet> trips;
  for (int n = 1; n <= n_max; ++n) trips.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

/// |to><from| on the internal register of one site, identity on its phonons.
inline SparseMatrix local_transition(const HilbertSpace& space, int to, int from) {
  if (to < 0 || to >= space.internal_dim() || from < 0 || from >= space.internal_dim()) {
    throw DomainError("internal level out of range");
  }
  SparseMatrix p(space.internal_dim(), space.internal_dim());
  p.insert(to, from) = 1.0;
  return kron(p, identity(space.phonon_dim()));
}

/// Phonon operator on one site (identity on the internal register).
inline SparseMatrix local_phonon(const HilbertSpace& space, const SparseMatrix& phonon_op) {
  if (phonon_op.rows() != space.phonon_dim() || phonon_op.cols() != space.phonon_dim()) {
    throw DimensionError("phonon operator has wrong dimension");
  }
  return kron(identity(space.internal_dim()), phonon_op);
}

/// Embed a single-site operator at `site` (1-based), identity elsewhere.
inline SparseMatrix site_operator(const HilbertSpace& space, int site, const SparseMatrix& local) {
  if (site < 1 || site > space.n_atoms()) throw DomainError("site out of range");
  const int sd = space.site_dim();
  if (local.rows() != sd || local.cols() != sd) {
    throw DimensionError("local operator dimension " + std::to_string(local.rows()) +
                         " does not match site dimension " + std::to_string(sd));
  }
  long long left = 1;
  long long right = 1;
  for (int j = 1; j < site; ++j) left *= sd;
  for (int j = site + 1; j <= space.n_atoms(); ++j) right *= sd;
  const long long block = sd * right;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(local.nonZeros() * left * right));
  for (int k = 0; k < local.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(local, k); it; ++it) {
      for (long long l = 0; l < left; ++l) {
        for (long long r = 0; r < right; ++r) {
          trips.emplace_back(static_cast<int>(l * block + it.row() * right + r),
                             static_cast<int>(l * block + it.col() * right + r), it.value());
        }
      }
    }
  }
  SparseMatrix out(space.total_dim(), space.total_dim());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

/// |to><from| embedded at `site`.
inline SparseMatrix transition(const HilbertSpace& space, int site, int to, int from) {
  return site_operator(space, site, local_transition(space, to, from));
}

inline SparseMatrix annihilation(const HilbertSpace& space, int site) {
  return site_operator(space, site, local_phonon(space, fock_ladder(space.n_max())));
}

inline SparseMatrix number_operator(const HilbertSpace& space, int site) {
  const SparseMatrix a = fock_ladder(space.n_max());
  return site_operator(space, site, local_phonon(space, SparseMatrix(a.adjoint() * a)));
}

inline double max_abs(const SparseMatrix& m) {
  double out = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) out = std::max(out, std::abs(it.value()));
  }
  return out;
}

/// max |O - O^dagger| elementwise.
inline double hermitian_defect(const SparseMatrix& op) {
  return max_abs(SparseMatrix(op - SparseMatrix(op.adjoint())));
}

inline double hermitian_defect(const Matrix& op) {
  return (op - op.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_hermitian(const SparseMatrix& op, double tol = kHermitianTol) {
  const double defect = hermitian_defect(op);
  if (defect > tol) {
    throw DomainError("operator is not Hermitian (defect " + std::to_string(defect) + ")");
  }
}

/**
 * Density matrix with validated invariants: Hermitian and unit trace to 1e-10,
 * no eigenvalue below -1e-8.
 */
class DensityMatrix {
 public:
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kPositivityTol = 1e-8;

  /// Validates `m` as-is; throws DomainError on any violated invariant.
  explicit DensityMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionError("density matrix must be square");
    if (hermitian_defect(m_) > kHermitianTol) throw DomainError("density matrix is not Hermitian");
    if (std::abs(m_.trace() - Complex(1.0)) > kTraceTol) {
      throw DomainError("density matrix trace is not 1");
    }
    if (min_eigenvalue() < -kPositivityTol) throw DomainError("density matrix is not positive");
  }

  /// Hermitizes and divides by the trace before validating.
  static DensityMatrix normalized(const Matrix& m) {
    Matrix h = 0.5 * (m + m.adjoint());
    const Complex tr = h.trace();
    if (std::abs(tr) == 0.0) throw DomainError("cannot normalize a traceless matrix");
    return DensityMatrix(h / tr.real());
  }

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  Matrix m_;
};

/// tr(rho O).
inline Complex expectation(const Matrix& rho, const SparseMatrix& op) {
  if (rho.rows() != op.rows() || rho.cols() != op.cols()) {
    throw DimensionError("expectation: dimension mismatch");
  }
  Complex acc = 0.0;
  // tr(rho O) = sum_{ij} rho_ij O_ji
  for (int k = 0; k < op.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(op, k); it; ++it) acc += rho(it.col(), it.row()) * it.value();
  }
  return acc;
}

inline Complex expectation(const DensityMatrix& rho, const SparseMatrix& op) {
  return expectation(rho.matrix(), op);
}

}  // namespace eitcool
