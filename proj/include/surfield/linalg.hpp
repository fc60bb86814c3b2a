// Sparse and small-dense linear algebra kernels: CSR products, sparse
// Cholesky square roots of mass matrices, and the dense symmetric
// eigendecomposition used by the oracle sampling path.
#pragma once

#include "surfield/core.hpp"

namespace surfield {

/// Square root of a symmetric positive definite matrix A, applied as a
/// linear operator. Either a sparse lower-triangular Cholesky factor L with
/// L Lᵀ = A, or the entrywise square root of a diagonal (lumped) matrix.
struct CholeskyFactor {
  enum class Kind { SparseLower, Diagonal };

  Kind kind = Kind::Diagonal;
  SparseMatrix lower;      // SparseLower: L, CSR, lower triangular
  SparseMatrix upper;      // SparseLower: cached Lᵀ for back substitution
  VectorXd diag_sqrt;      // Diagonal: strictly positive entries

  Eigen::Index size() const {
    return kind == Kind::SparseLower ? lower.rows() : diag_sqrt.size();
  }
};

/// Full spectral decomposition of a dense symmetric matrix;
/// eigenvalues ascending, eigenvectors column-orthonormal.
struct DenseEig {
  VectorXd eigenvalues;
  MatrixXd eigenvectors;
};

/// A·x with IEEE double accumulation; deterministic for fixed input.
VectorXd spmv(const SparseMatrix& A, const VectorXd& x);

/// Structural CSR sanity: nondecreasing row offsets, strictly increasing
/// column indices within each row, offsets consistent with the value count.
bool csr_layout_valid(const SparseMatrix& A);

/// Entrywise symmetry check |A - Aᵀ|_max <= tol · |A|_max.
bool is_symmetric(const SparseMatrix& A, double tol = 1e-12);

/// Sparse Cholesky A = L Lᵀ in natural ordering (no fill-reducing
/// permutation); throws NotPositiveDefinite when a pivot fails.
CholeskyFactor cholesky(const SparseMatrix& A);

/// Diagonal square-root factor from strictly positive diagonal entries.
CholeskyFactor diagonal_sqrt_factor(const VectorXd& diag);

/// Forward substitution L x = b (Diagonal kind divides entrywise).
VectorXd solve_lower(const CholeskyFactor& f, const VectorXd& b);

/// Back substitution Lᵀ x = b (Diagonal kind divides entrywise).
VectorXd solve_upper(const CholeskyFactor& f, const VectorXd& b);

/// Multiplication by the square root itself: L·x (or diag_sqrt ∘ x).
VectorXd apply_sqrt(const CholeskyFactor& f, const VectorXd& x);

/// Dense symmetric eigendecomposition; rejects non-symmetric input and
/// matrices larger than the oracle cap.
DenseEig dense_eig_sym(const MatrixXd& A, int oracle_cap = kDefaultOracleCap);

}  // namespace surfield
