#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "eitcool/operators.hpp"
#include "eitcool/types.hpp"

namespace eitcool {

/// coef * left * rho * right; an absent side is the identity.
struct SuperTerm {
  Complex coef{1.0, 0.0};
  std::optional<SparseMatrix> left;
  std::optional<SparseMatrix> right;
};

/**
 * Linear map on dim x dim operators, stored as a sum of sandwich terms.
 *
 * The term form is what the solvers need: terms with only a left or only a
 * right factor make up the no-jump generator K_L rho + rho K_R, the rest are
 * jump (sandwich) terms. A vectorized sparse matrix in column-stacking
 * convention, vec(A X B) = (B^T (x) A) vec(X), is available via to_sparse().
 */
class Superoperator {
 public:
  explicit Superoperator(int dim) : dim_(dim) {}
  Superoperator(int dim, std::vector<SuperTerm> terms) : dim_(dim), terms_(std::move(terms)) {
    for (const auto& t : terms_) check_term(t);
  }

  int dim() const noexcept { return dim_; }
  const std::vector<SuperTerm>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  Matrix apply(const Matrix& rho) const {
    if (rho.rows() != dim_ || rho.cols() != dim_) throw DimensionError("apply: dimension mismatch");
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const auto& t : terms_) {
      if (t.left && t.right) {
        out.noalias() += t.coef * (Matrix(*t.left * rho) * *t.right);
      } else if (t.left) {
        out.noalias() += t.coef * (*t.left * rho);
      } else if (t.right) {
        out.noalias() += t.coef * (rho * *t.right);
      } else {
        out += t.coef * rho;
      }
    }
    return out;
  }

  Superoperator operator+(const Superoperator& other) const {
    if (other.dim_ != dim_) throw DimensionError("superoperator sum: dimension mismatch");
    std::vector<SuperTerm> terms = terms_;
    terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
    return Superoperator(dim_, std::move(terms));
  }

  Superoperator scaled(Complex s) const {
    std::vector<SuperTerm> terms = terms_;
    for (auto& t : terms) t.coef *= s;
    return Superoperator(dim_, std::move(terms));
  }

  /// Merges all one-sided terms into a single left and a single right term.
  Superoperator compressed() const {
    SparseMatrix left(dim_, dim_);
    SparseMatrix right(dim_, dim_);
    std::vector<SuperTerm> out;
    for (const auto& t : terms_) {
      if (t.left && t.right) {
        out.push_back(t);
      } else if (t.left) {
        left += t.coef * *t.left;
      } else if (t.right) {
        right += t.coef * *t.right;
      } else {
        left += t.coef * identity(dim_);
      }
    }
    left.prune(Complex(0.0));
    right.prune(Complex(0.0));
    std::vector<SuperTerm> merged;
    if (left.nonZeros() > 0) merged.push_back({1.0, left, std::nullopt});
    if (right.nonZeros() > 0) merged.push_back({1.0, std::nullopt, right});
    merged.insert(merged.end(), out.begin(), out.end());
    return Superoperator(dim_, std::move(merged));
  }

  /// Dense K_L and K_R of the one-sided part: P(rho) = K_L rho + rho K_R.
  std::pair<Matrix, Matrix> no_jump_generators() const {
    Matrix left = Matrix::Zero(dim_, dim_);
    Matrix right = Matrix::Zero(dim_, dim_);
    for (const auto& t : terms_) {
      if (t.left && t.right) continue;
      if (t.left) {
        left += t.coef * Matrix(*t.left);
      } else if (t.right) {
        right += t.coef * Matrix(*t.right);
      } else {
        left += t.coef * Matrix::Identity(dim_, dim_);
      }
    }
    return {left, right};
  }

  /// Vectorized matrix (column stacking), dim^2 x dim^2.
  SparseMatrix to_sparse() const {
    const int d2 = dim_ * dim_;
    SparseMatrix out(d2, d2);
    const SparseMatrix id = identity(dim_);
    for (const auto& t : terms_) {
      const SparseMatrix& a = t.left ? *t.left : id;
      const SparseMatrix b_t = t.right ? SparseMatrix(t.right->transpose()) : id;
      out += t.coef * kron(b_t, a);
    }
    out.prune(Complex(0.0));
    out.makeCompressed();
    return out;
  }

  Matrix to_dense() const { return Matrix(to_sparse()); }

  /// Max absolute column sum of the vectorized matrix; the scale used by the
  /// residual and kernel tolerances.
  double norm_scale() const {
    const SparseMatrix s = to_sparse();
    double best = 0.0;
    for (int k = 0; k < s.outerSize(); ++k) {
      double col = 0.0;
      for (SparseMatrix::InnerIterator it(s, k); it; ++it) col += std::abs(it.value());
      best = std::max(best, col);
    }
    return best;
  }

 private:
  void check_term(const SuperTerm& t) const {
    auto ok = [this](const std::optional<SparseMatrix>& m) {
      return !m || (m->rows() == dim_ && m->cols() == dim_);
    };
    if (!ok(t.left) || !ok(t.right)) throw DimensionError("superoperator term dimension mismatch");
  }

  int dim_;
  std::vector<SuperTerm> terms_;
};

/**
 * Fast action of a Hermiticity-preserving generator on Hermitian matrices.
 *
 * Uses rho K_R = (K_L rho)^dagger when K_R = K_L^dagger, and merges sandwich
 * terms sharing a right factor. Only valid for Hermitian input; the result is
 * Hermitian up to rounding.
 */
class HermitianAction {
 public:
  explicit HermitianAction(const Superoperator& s) : dim_(s.dim()) {
    SparseMatrix left(dim_, dim_);
    SparseMatrix right(dim_, dim_);
    std::vector<std::pair<SparseMatrix, SparseMatrix>> groups;  // (left sum, right)
    for (const auto& t : s.terms()) {
      if (t.left && t.right) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
          return g.second.nonZeros() == t.right->nonZeros() &&
                 max_abs(SparseMatrix(g.second - *t.right)) == 0.0;
        });
        if (it == groups.end()) {
          groups.emplace_back(SparseMatrix(t.coef * *t.left), *t.right);
        } else {
          it->first += t.coef * *t.left;
        }
      } else if (t.left) {
        left += t.coef * *t.left;
      } else if (t.right) {
        right += t.coef * *t.right;
      } else {
        left += (0.5 * t.coef) * identity(dim_);
        right += (0.5 * t.coef) * identity(dim_);
      }
    }
    if (max_abs(SparseMatrix(right - adjoint(left))) > 1e-12 * std::max(1.0, max_abs(left))) {
      throw DomainError("generator is not Hermiticity-preserving in no-jump form");
    }
    right_ = flatten(right);
    for (auto& [l, r] : groups) groups_.push_back({flatten(l), flatten(r)});
  }

  /// L(rho) for Hermitian rho.
  Matrix apply(const Matrix& rho) const {
    // rho K_R, and K_L rho is its adjoint
    Matrix y = Matrix::Zero(dim_, dim_);
    right_multiply(rho, right_, y);
    Matrix out = y + y.adjoint();
    Matrix t(dim_, dim_);
    for (const auto& g : groups_) {
      t.setZero();
      right_multiply(rho, g.right, t);
      for (std::size_t q = 0; q < g.left.vals.size(); ++q) {
        out.row(g.left.rows[q]) += g.left.vals[q] * t.row(g.left.cols[q]);
      }
    }
    return out;
  }

  int dim() const noexcept { return dim_; }

 private:
  struct Flat {
    std::vector<int> rows, cols;
    std::vector<Complex> vals;
  };
  struct Group {
    Flat left;
    Flat right;
  };

  static Flat flatten(SparseMatrix m) {
    m.prune(Complex(0.0));
    Flat f;
    for (int k = 0; k < m.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
        f.rows.push_back(static_cast<int>(it.row()));
        f.cols.push_back(static_cast<int>(it.col()));
        f.vals.push_back(it.value());
      }
    }
    return f;
  }

  /// out += m * s, one contiguous column axpy per nonzero of s.
  void right_multiply(const Matrix& m, const Flat& s, Matrix& out) const {
    for (std::size_t q = 0; q < s.vals.size(); ++q) out.col(s.cols[q]) += s.vals[q] * m.col(s.rows[q]);
  }

  int dim_;
  Flat right_;
  std::vector<Group> groups_;
};

/// rho -> -i (H rho - rho H).
inline Superoperator hamiltonian_liouvillian(const SparseMatrix& h) {
  if (h.rows() != h.cols()) throw DimensionError("Hamiltonian must be square");
  require_hermitian(h);
  const int dim = static_cast<int>(h.rows());
  if (h.nonZeros() == 0) return Superoperator(dim);
  return Superoperator(dim, {{-kI, h, std::nullopt}, {kI, std::nullopt, h}});
}

/**
 * rho -> -(rate/2) phase (A B rho + rho A B - 2 B rho A).
 *
 * With A = |e>_mu<m| and B = |m>_nu<e| this is one (mu, nu) entry of the
 * directional dissipator; summing over both orders and both directions gives
 * a Hermiticity-preserving generator.
 */
inline Superoperator chiral_dissipator_term(double rate, Complex phase, const SparseMatrix& a,
                                            const SparseMatrix& b) {
  if (rate < 0.0) throw DomainError("dissipator rate must be >= 0");
  if (std::abs(std::abs(phase) - 1.0) > 1e-12) throw DomainError("phase must have unit modulus");
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw DimensionError("dissipator operators must be square and equal-sized");
  }
  const int dim = static_cast<int>(a.rows());
  if (rate == 0.0) return Superoperator(dim);
  const Complex c = -0.5 * rate * phase;
  const SparseMatrix ab = a * b;
  return Superoperator(dim, {{c, ab, std::nullopt}, {c, std::nullopt, ab}, {-2.0 * c, b, a}});
}

}  // namespace eitcool
