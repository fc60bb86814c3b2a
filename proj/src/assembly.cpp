#include "surfield/assembly.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

namespace surfield {

namespace {

// Element mass blocks for linear elements, to be scaled by the simplex measure.
const Eigen::Matrix2d kSegmentMass = (Eigen::Matrix2d() << 2.0, 1.0, 1.0, 2.0).finished() / 6.0;
const Eigen::Matrix3d kTriangleMass =
    (Eigen::Matrix3d() << 2.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 2.0).finished() / 12.0;

// Largest generalized eigenvalue of the symmetric pencil (R_loc, C_loc) with
// C_loc positive definite; used for the elementwise consistent-mass bound.
template <int N>
double pencil_max_eigenvalue(const Eigen::Matrix<double, N, N>& R_loc,
                             const Eigen::Matrix<double, N, N>& C_loc) {
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> solver(
      R_loc, C_loc, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace

AssembledOperator assemble(const SurfaceMesh& mesh, const CoefficientField& coeffs,
                           MassMode mode) {
  if (!coeffs.diffusion || !coeffs.potential) {
    throw ConfigError("assemble: coefficient field is missing diffusion or potential");
  }
  if (!(coeffs.v_minus >= 0.0)) {
    throw NotPositiveDefinite("assemble: coefficients must have v_minus >= 0");
  }
  const int n = mesh.n_vertices();
  const int nt = mesh.n_simplices();
  const int arity = mesh.dim + 1;
  std::vector<Eigen::Triplet<double>> mass_trips;
  std::vector<Eigen::Triplet<double>> stiff_trips;
  mass_trips.reserve(static_cast<size_t>(nt) * arity * arity);
  stiff_trips.reserve(static_cast<size_t>(nt) * arity * arity);
  double elementwise_bound = 0.0;

  if (mesh.dim == 1) {
    for (int t = 0; t < nt; ++t) {
      const int i = mesh.simplices(t, 0);
      const int j = mesh.simplices(t, 1);
      const Eigen::RowVector2d p0 = mesh.vertices.row(i);
      const Eigen::RowVector2d p1 = mesh.vertices.row(j);
      const Eigen::RowVector2d edge = p1 - p0;
      const double len = edge.norm();
      if (len <= 0.0) throw DegeneratePoint("assemble: zero-length segment");
      const VectorXd centroid_on_surface =
          closest_point(mesh.kind, VectorXd((0.5 * (p0 + p1)).transpose()));
      const MatrixXd D = coeffs.diffusion(centroid_on_surface);
      const double V = coeffs.potential(centroid_on_surface);
      const Eigen::RowVector2d tangent = edge / len;
      const double d_tt = tangent * D * tangent.transpose();
      const double stiff_scale = d_tt / len;
      const Eigen::Matrix2d C_loc = len * kSegmentMass;
      Eigen::Matrix2d R_loc;
      R_loc << stiff_scale, -stiff_scale, -stiff_scale, stiff_scale;
      R_loc += V * C_loc;
      const int idx[2] = {i, j};
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          mass_trips.emplace_back(idx[a], idx[b], C_loc(a, b));
          stiff_trips.emplace_back(idx[a], idx[b], R_loc(a, b));
        }
      }
      elementwise_bound = std::max(elementwise_bound, pencil_max_eigenvalue<2>(R_loc, C_loc));
    }
  } else if (mesh.dim == 2) {
    for (int t = 0; t < nt; ++t) {
      const int i = mesh.simplices(t, 0);
      const int j = mesh.simplices(t, 1);
      const int k = mesh.simplices(t, 2);
      const Eigen::RowVector3d p0 = mesh.vertices.row(i);
      const Eigen::RowVector3d p1 = mesh.vertices.row(j);
      const Eigen::RowVector3d p2 = mesh.vertices.row(k);
      const Eigen::RowVector3d cross = (p1 - p0).cross(p2 - p0);
      const double two_area = cross.norm();
      if (two_area <= 0.0) throw DegeneratePoint("assemble: degenerate triangle");
      const double area = 0.5 * two_area;
      const Eigen::RowVector3d nu = cross / two_area;
      const VectorXd centroid_on_surface =
          closest_point(mesh.kind, VectorXd(((p0 + p1 + p2) / 3.0).transpose()));
      const MatrixXd D = coeffs.diffusion(centroid_on_surface);
      const double V = coeffs.potential(centroid_on_surface);
      const Eigen::Matrix3d tangent_proj =
          Eigen::Matrix3d::Identity() - nu.transpose() * nu;
      const Eigen::Matrix3d D_elem = tangent_proj * D * tangent_proj;
      // Hat-function gradients: ∇ψ_a = ν × e_a / (2|T|) with e_a the opposite edge.
      Eigen::Matrix3d grads;
      grads.row(0) = nu.cross(p2 - p1) / two_area;
      grads.row(1) = nu.cross(p0 - p2) / two_area;
      grads.row(2) = nu.cross(p1 - p0) / two_area;
      const Eigen::Matrix3d C_loc = area * kTriangleMass;
      Eigen::Matrix3d R_loc = area * (grads * D_elem * grads.transpose());
      R_loc += V * C_loc;
      const int idx[3] = {i, j, k};
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          mass_trips.emplace_back(idx[a], idx[b], C_loc(a, b));
          stiff_trips.emplace_back(idx[a], idx[b], R_loc(a, b));
        }
      }
      elementwise_bound = std::max(elementwise_bound, pencil_max_eigenvalue<3>(R_loc, C_loc));
    }
  } else {
    throw DimensionMismatch("assemble: dim must be 1 or 2");
  }

  AssembledOperator op;
  op.n = n;
  op.mode = mode;
  op.mass.resize(n, n);
  op.mass.setFromTriplets(mass_trips.begin(), mass_trips.end());
  op.mass.makeCompressed();
  op.stiffness.resize(n, n);
  op.stiffness.setFromTriplets(stiff_trips.begin(), stiff_trips.end());
  op.stiffness.makeCompressed();
  op.lumped_diag = VectorXd(op.mass * VectorXd::Ones(n));
  op.sqrt_mass = mode == MassMode::Consistent ? cholesky(op.mass)
                                              : diagonal_sqrt_factor(op.lumped_diag);
  op.lambda_min = coeffs.v_minus;
  op.lambda_max = mode == MassMode::Consistent
                      ? elementwise_bound
                      : gershgorin_row_bound(op.stiffness, op.lumped_diag);
  return op;
}

double gershgorin_row_bound(const SparseMatrix& R, const VectorXd& diag) {
  if (R.rows() != diag.size()) {
    throw DimensionMismatch("gershgorin_row_bound: diagonal size mismatch");
  }
  double bound = 0.0;
  for (int row = 0; row < R.outerSize(); ++row) {
    double abs_sum = 0.0;
    for (SparseMatrix::InnerIterator it(R, row); it; ++it) {
      abs_sum += std::abs(it.value());
    }
    if (!(diag[row] > 0.0)) {
      throw NotPositiveDefinite("gershgorin_row_bound: nonpositive diagonal entry " +
                                std::to_string(row));
    }
    bound = std::max(bound, abs_sum / diag[row]);
  }
  return bound;
}

double gershgorin_bound(const AssembledOperator& op) { return op.lambda_max; }

VectorXd apply_S(const AssembledOperator& op, const VectorXd& x) {
  return solve_lower(op.sqrt_mass, spmv(op.stiffness, solve_upper(op.sqrt_mass, x)));
}

MatrixXd dense_S(const AssembledOperator& op, int oracle_cap) {
  if (op.n > oracle_cap) {
    throw OracleCapExceeded("dense_S: size " + std::to_string(op.n) +
                            " exceeds the dense-path cap " + std::to_string(oracle_cap));
  }
  MatrixXd S(op.n, op.n);
  VectorXd e = VectorXd::Zero(op.n);
  for (int col = 0; col < op.n; ++col) {
    e[col] = 1.0;
    S.col(col) = apply_S(op, e);
    e[col] = 0.0;
  }
  return S;
}

double polyhedral_area(const SurfaceMesh& mesh) {
  double total = 0.0;
  if (mesh.dim == 1) {
    for (int t = 0; t < mesh.n_simplices(); ++t) {
      total += (mesh.vertices.row(mesh.simplices(t, 1)) -
                mesh.vertices.row(mesh.simplices(t, 0)))
                   .norm();
    }
  } else {
    for (int t = 0; t < mesh.n_simplices(); ++t) {
      const Eigen::RowVector3d p0 = mesh.vertices.row(mesh.simplices(t, 0));
      const Eigen::RowVector3d p1 = mesh.vertices.row(mesh.simplices(t, 1));
      const Eigen::RowVector3d p2 = mesh.vertices.row(mesh.simplices(t, 2));
      total += 0.5 * (p1 - p0).cross(p2 - p0).norm();
    }
  }
  return total;
}

}  // namespace surfield
