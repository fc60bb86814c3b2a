#include "surfield/linalg.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <string>

namespace surfield {

namespace {

using ColMajorSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

double max_abs_coeff(const SparseMatrix& A) {
  double m = 0.0;
  for (int row = 0; row < A.outerSize(); ++row) {
    for (SparseMatrix::InnerIterator it(A, row); it; ++it) {
      m = std::max(m, std::abs(it.value()));
    }
  }
  return m;
}

}  // namespace

VectorXd spmv(const SparseMatrix& A, const VectorXd& x) {
  if (A.cols() != x.size()) {
    throw DimensionMismatch("spmv: matrix has " + std::to_string(A.cols()) +
                            " columns but vector has " + std::to_string(x.size()) +
                            " entries");
  }
  return A * x;
}

bool csr_layout_valid(const SparseMatrix& A) {
  if (!A.isCompressed()) return false;
  const int* offsets = A.outerIndexPtr();
  const int* cols = A.innerIndexPtr();
  const int rows = static_cast<int>(A.rows());
  if (offsets[0] != 0) return false;
  for (int r = 0; r < rows; ++r) {
    if (offsets[r + 1] < offsets[r]) return false;
    for (int k = offsets[r] + 1; k < offsets[r + 1]; ++k) {
      if (cols[k - 1] >= cols[k]) return false;
    }
    for (int k = offsets[r]; k < offsets[r + 1]; ++k) {
      if (cols[k] < 0 || cols[k] >= A.cols()) return false;
    }
  }
  return offsets[rows] == static_cast<int>(A.nonZeros());
}

bool is_symmetric(const SparseMatrix& A, double tol) {
  if (A.rows() != A.cols()) return false;
  const SparseMatrix At = SparseMatrix(A.transpose());
  const SparseMatrix diff = A - At;
  const double scale = max_abs_coeff(A);
  return max_abs_coeff(diff) <= tol * (scale > 0.0 ? scale : 1.0);
}

CholeskyFactor cholesky(const SparseMatrix& A) {
  if (A.rows() != A.cols()) {
    throw DimensionMismatch("cholesky: matrix is not square");
  }
  if (!is_symmetric(A)) {
    throw NotPositiveDefinite("cholesky: matrix is not symmetric");
  }
  const ColMajorSparse Ac(A);
  Eigen::SimplicialLLT<ColMajorSparse, Eigen::Lower, Eigen::NaturalOrdering<int>> llt;
  llt.compute(Ac);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("cholesky: pivot failure, matrix is not positive definite");
  }
  const ColMajorSparse L = llt.matrixL();
  CholeskyFactor f;
  f.kind = CholeskyFactor::Kind::SparseLower;
  f.lower = SparseMatrix(L);
  f.upper = SparseMatrix(L.transpose());
  f.lower.makeCompressed();
  f.upper.makeCompressed();
  return f;
}

CholeskyFactor diagonal_sqrt_factor(const VectorXd& diag) {
  CholeskyFactor f;
  f.kind = CholeskyFactor::Kind::Diagonal;
  f.diag_sqrt.resize(diag.size());
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > 0.0)) {
      throw NotPositiveDefinite("diagonal_sqrt_factor: entry " + std::to_string(i) +
                                " is not strictly positive");
    }
    f.diag_sqrt[i] = std::sqrt(diag[i]);
  }
  return f;
}

namespace {

void check_factor_size(const CholeskyFactor& f, const VectorXd& b, const char* op) {
  if (f.size() != b.size()) {
    throw DimensionMismatch(std::string(op) + ": factor of size " +
                            std::to_string(f.size()) + " applied to vector of size " +
                            std::to_string(b.size()));
  }
}

}  // namespace

VectorXd solve_lower(const CholeskyFactor& f, const VectorXd& b) {
  check_factor_size(f, b, "solve_lower");
  if (f.kind == CholeskyFactor::Kind::Diagonal) {
    return b.cwiseQuotient(f.diag_sqrt);
  }
  return f.lower.triangularView<Eigen::Lower>().solve(b);
}

VectorXd solve_upper(const CholeskyFactor& f, const VectorXd& b) {
  check_factor_size(f, b, "solve_upper");
  if (f.kind == CholeskyFactor::Kind::Diagonal) {
    return b.cwiseQuotient(f.diag_sqrt);
  }
  return f.upper.triangularView<Eigen::Upper>().solve(b);
}

VectorXd apply_sqrt(const CholeskyFactor& f, const VectorXd& x) {
  check_factor_size(f, x, "apply_sqrt");
  if (f.kind == CholeskyFactor::Kind::Diagonal) {
    return f.diag_sqrt.cwiseProduct(x);
  }
  return f.lower * x;
}

DenseEig dense_eig_sym(const MatrixXd& A, int oracle_cap) {
  if (A.rows() != A.cols()) {
    throw DimensionMismatch("dense_eig_sym: matrix is not square");
  }
  if (A.rows() > oracle_cap) {
    throw OracleCapExceeded("dense_eig_sym: size " + std::to_string(A.rows()) +
                            " exceeds the dense-path cap " + std::to_string(oracle_cap));
  }
  if (A.rows() == 0) return {};
  const double scale = A.cwiseAbs().maxCoeff();
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (scale > 0.0 ? scale : 1.0)) {
    throw DimensionMismatch("dense_eig_sym: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(A);
  if (solver.info() != Eigen::Success) {
    throw EvaluationError("dense_eig_sym: eigensolver failed to converge");
  }
  DenseEig out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  return out;
}

}  // namespace surfield
