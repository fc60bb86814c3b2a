// Linear surface finite elements: mass and stiffness assembly for the
// bilinear form ∫ (D ∇u)·∇v dA + ∫ V u v dA on a polyhedral surface, the
// square root of the mass matrix, and the symmetric operator
// S = √C⁻¹ R √C⁻ᵀ with certified spectral bounds.
#pragma once

#include "surfield/coefficients.hpp"
#include "surfield/linalg.hpp"
#include "surfield/mesh.hpp"

namespace surfield {

enum class MassMode { Consistent, Lumped };

/// Assembled FEM operator. `mass` always stores the consistent mass matrix C
/// (the true L² Gram matrix, used for norms and covariance identities);
/// `mass_mode` only selects the square root: a sparse Cholesky factor of C
/// (Consistent) or the square root of the row-sum diagonal (Lumped), which is
/// what enters S and the sampling formulas.
struct AssembledOperator {
  SparseMatrix mass;        // consistent C
  SparseMatrix stiffness;   // R
  CholeskyFactor sqrt_mass; // per mass_mode
  VectorXd lumped_diag;     // row sums of C
  double lambda_min = 0.0;  // = coefficients v_minus
  double lambda_max = 0.0;  // certified upper bound on the spectrum of S
  int n = 0;
  MassMode mode = MassMode::Consistent;
};

/// Assemble C and R with exact element mass blocks (|T|/12·[[2,1,1],[1,2,1],
/// [1,1,2]] for triangles, |T|/6·[[2,1],[1,2]] for segments) and one-point
/// projected-centroid quadrature for the coefficients: D_T = Π_h D(a(c_T)) Π_h
/// with Π_h the element tangent projector and a(·) the closest-point map; the
/// potential term is V(a(c_T)) times the element mass block.
AssembledOperator assemble(const SurfaceMesh& mesh, const CoefficientField& coeffs,
                           MassMode mode);

/// Row bound max_i Σ_j |R_ij| / diag_i (Gershgorin on diag⁻¹R). A rigorous
/// spectral bound for the lumped operator; NOT generally an upper bound for
/// the consistent-mass spectrum, where assemble() certifies the elementwise
/// generalized-eigenvalue bound max_T λ_max(R_T, C_T) instead.
double gershgorin_row_bound(const SparseMatrix& R, const VectorXd& diag);

/// The certified spectral upper bound used by op (row bound for Lumped,
/// elementwise generalized bound for Consistent).
double gershgorin_bound(const AssembledOperator& op);

/// √C⁻¹ R √C⁻ᵀ x via back substitution, sparse product, forward substitution;
/// S is never formed densely.
VectorXd apply_S(const AssembledOperator& op, const VectorXd& x);

/// Materialize S column by column through apply_S (oracle paths only).
MatrixXd dense_S(const AssembledOperator& op, int oracle_cap = kDefaultOracleCap);

/// Total polyhedral area Σ_T |T| (for the circle this equals the inscribed
/// polygon perimeter 2^{k+2} sin(π·2^{-(k+1)})).
double polyhedral_area(const SurfaceMesh& mesh);

}  // namespace surfield
