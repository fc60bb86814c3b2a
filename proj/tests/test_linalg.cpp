#include <doctest.h>

#include <cmath>

#include "surfield/assembly.hpp"
#include "surfield/coefficients.hpp"
#include "surfield/linalg.hpp"
#include "surfield/mesh.hpp"
#include "test_helpers.hpp"

using namespace surfield;
using surfield_test::from_dense;
using surfield_test::random_matrix;
using surfield_test::random_spd;
using surfield_test::random_vector;

TEST_CASE("spmv on the 3x3 identity returns the input") {
  SparseMatrix I = from_dense(MatrixXd::Identity(3, 3));
  VectorXd x(3);
  x << 1.0, 2.0, 3.0;
  VectorXd y = spmv(I, x);
  CHECK(y.isApprox(x, 0.0));
}

TEST_CASE("spmv of an empty-pattern matrix is the zero vector") {
  SparseMatrix Z(4, 4);
  Z.makeCompressed();
  VectorXd x = random_vector(4, 11);
  VectorXd y = spmv(Z, x);
  CHECK(y.norm() == 0.0);
}

TEST_CASE("spmv matches the dense product on a random 5x5 matrix") {
  MatrixXd A = random_matrix(5, 5, 23);
  A(1, 3) = 0.0;  // keep a hole in the pattern
  A(4, 0) = 0.0;
  SparseMatrix S = from_dense(A);
  VectorXd x = random_vector(5, 29);
  VectorXd want = A * x;
  VectorXd got = spmv(S, x);
  CHECK((got - want).norm() <= 1e-14 * want.norm());
}

TEST_CASE("spmv rejects a dimension mismatch") {
  SparseMatrix I = from_dense(MatrixXd::Identity(3, 3));
  CHECK_THROWS_AS(spmv(I, VectorXd::Ones(4)), DimensionMismatch);
}

TEST_CASE("spmv adjoint identity holds for symmetric matrices") {
  MatrixXd B = random_matrix(9, 9, 37);
  MatrixXd A = 0.5 * (B + B.transpose());
  SparseMatrix S = from_dense(A);
  for (unsigned seed = 0; seed < 5; ++seed) {
    VectorXd x = random_vector(9, 100 + seed);
    VectorXd y = random_vector(9, 200 + seed);
    const double lhs = spmv(S, x).dot(y);
    const double rhs = x.dot(spmv(S, y));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
  }
}

TEST_CASE("csr layout validator accepts assembled matrices") {
  SurfaceMesh mesh = generate_circle(3);
  AssembledOperator op = assemble(mesh, coefficient_preset("matern", 10.0),
                                  MassMode::Consistent);
  CHECK(csr_layout_valid(op.stiffness));
  CHECK(csr_layout_valid(op.mass));
  CHECK(is_symmetric(op.stiffness));
  CHECK(is_symmetric(op.mass));
}

TEST_CASE("cholesky of a 1x1 matrix is the scalar square root") {
  SparseMatrix A = from_dense(MatrixXd::Constant(1, 1, 4.0));
  CholeskyFactor f = cholesky(A);
  REQUIRE(f.kind == CholeskyFactor::Kind::SparseLower);
  CHECK(MatrixXd(f.lower)(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("cholesky of [[4,2],[2,5]] is [[2,0],[1,2]]") {
  MatrixXd A(2, 2);
  A << 4.0, 2.0, 2.0, 5.0;
  CholeskyFactor f = cholesky(from_dense(A));
  MatrixXd L = MatrixXd(f.lower);
  CHECK(L(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(L(0, 1) == 0.0);
  CHECK(L(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(L(1, 1) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("cholesky reconstructs the circle mass matrix to 1e-12") {
  SurfaceMesh mesh = generate_circle(3);  // 16 vertices
  REQUIRE(mesh.n_vertices() == 16);
  AssembledOperator op = assemble(mesh, coefficient_preset("matern", 1.0),
                                  MassMode::Consistent);
  CholeskyFactor f = cholesky(op.mass);
  MatrixXd L = MatrixXd(f.lower);
  MatrixXd A = MatrixXd(op.mass);
  CHECK((L * L.transpose() - A).norm() <= 1e-12 * A.norm());
}

TEST_CASE("cholesky rejects a matrix with a non-positive pivot") {
  MatrixXd A(2, 2);
  A << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(cholesky(from_dense(A)), NotPositiveDefinite);
}

TEST_CASE("cholesky reconstruction holds for random SPD matrices") {
  for (unsigned seed = 1; seed <= 4; ++seed) {
    MatrixXd A = random_spd(12, seed);
    CholeskyFactor f = cholesky(from_dense(A));
    MatrixXd L = MatrixXd(f.lower);
    CHECK((L * L.transpose() - A).norm() <= 1e-12 * A.norm());
  }
}

TEST_CASE("diagonal factor solves divide entrywise") {
  VectorXd d(2);
  d << 4.0, 16.0;  // factored matrix diag(4,16) → diag_sqrt = (2,4)
  CholeskyFactor f = diagonal_sqrt_factor(d);
  REQUIRE(f.diag_sqrt(0) == 2.0);
  REQUIRE(f.diag_sqrt(1) == 4.0);
  VectorXd b(2);
  b << 2.0, 4.0;
  VectorXd x = solve_lower(f, b);
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-15));
  VectorXd y = solve_upper(f, b);
  CHECK((y - x).norm() == 0.0);
}

TEST_CASE("solve_lower on the hand-checked 2x2 factor") {
  MatrixXd A(2, 2);
  A << 4.0, 2.0, 2.0, 5.0;
  CholeskyFactor f = cholesky(from_dense(A));
  VectorXd b(2);
  b << 2.0, 3.0;
  VectorXd x = solve_lower(f, b);
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("triangular solves match the dense inverse on a random SPD 8x8") {
  MatrixXd A = random_spd(8, 71);
  CholeskyFactor f = cholesky(from_dense(A));
  VectorXd b = random_vector(8, 72);
  VectorXd x = solve_upper(f, solve_lower(f, b));
  VectorXd want = A.inverse() * b;
  CHECK((x - want).norm() <= 1e-11 * want.norm());
}

TEST_CASE("apply_sqrt is the inverse map of solve_lower") {
  MatrixXd A = random_spd(8, 73);
  CholeskyFactor f = cholesky(from_dense(A));
  VectorXd b = random_vector(8, 74);
  VectorXd roundtrip = apply_sqrt(f, solve_lower(f, b));
  CHECK((roundtrip - b).norm() <= 1e-12 * b.norm());

  VectorXd d(3);
  d << 1.0, 4.0, 9.0;
  CholeskyFactor g = diagonal_sqrt_factor(d);
  VectorXd v = random_vector(3, 75);
  VectorXd want = d.cwiseSqrt().asDiagonal() * v;
  CHECK((apply_sqrt(g, v) - want).norm() == 0.0);
}

TEST_CASE("solves reject dimension mismatches") {
  MatrixXd A = random_spd(4, 81);
  CholeskyFactor f = cholesky(from_dense(A));
  CHECK_THROWS_AS(solve_lower(f, VectorXd::Ones(5)), DimensionMismatch);
  CHECK_THROWS_AS(solve_upper(f, VectorXd::Ones(3)), DimensionMismatch);
}

TEST_CASE("dense_eig_sym of diag(1,2,3) returns the ordered eigenvalues") {
  MatrixXd A = VectorXd::LinSpaced(3, 1.0, 3.0).asDiagonal();
  DenseEig eig = dense_eig_sym(A);
  REQUIRE(eig.eigenvalues.size() == 3);
  CHECK(eig.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eig.eigenvalues(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(eig.eigenvalues(2) == doctest::Approx(3.0).epsilon(1e-14));
  // eigenvectors are the identity columns up to sign
  for (int i = 0; i < 3; ++i) {
    VectorXd v = eig.eigenvectors.col(i).cwiseAbs();
    CHECK(v(i) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("dense_eig_sym of the 2x2 exchange matrix gives -1 and 1") {
  MatrixXd A(2, 2);
  A << 0.0, 1.0, 1.0, 0.0;
  DenseEig eig = dense_eig_sym(A);
  CHECK(eig.eigenvalues(0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(eig.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("dense_eig_sym rejects non-symmetric input and oversize matrices") {
  MatrixXd A(2, 2);
  A << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(dense_eig_sym(A), DimensionMismatch);
  CHECK_THROWS_AS(dense_eig_sym(MatrixXd::Identity(11, 11), 10), OracleCapExceeded);
}

TEST_CASE("dense_eig_sym satisfies the residual, trace, and orthonormality bounds") {
  MatrixXd A = random_spd(20, 91);
  DenseEig eig = dense_eig_sym(A);
  const double anorm = A.norm();
  for (int i = 0; i < 20; ++i) {
    VectorXd r = A * eig.eigenvectors.col(i) -
                 eig.eigenvalues(i) * eig.eigenvectors.col(i);
    CHECK(r.norm() <= 1e-9 * anorm);
  }
  MatrixXd vtv = eig.eigenvectors.transpose() * eig.eigenvectors;
  CHECK((vtv - MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(std::abs(eig.eigenvalues.sum() - A.trace()) <= 1e-10 * std::abs(A.trace()));
  // ascending order
  for (int i = 1; i < 20; ++i) CHECK(eig.eigenvalues(i) >= eig.eigenvalues(i - 1));
}

TEST_CASE("operator spectrum stays above the potential floor on a small mesh") {
  SurfaceMesh mesh = generate_circle(3);
  CoefficientField field = coefficient_preset("matern", 10.0);
  AssembledOperator op = assemble(mesh, field, MassMode::Consistent);
  DenseEig eig = dense_eig_sym(dense_S(op));
  CHECK(eig.eigenvalues(0) >= field.v_minus - 1e-9 * std::abs(field.v_minus));
}
