// Field sampling: nodal white noise, the Chebyshev sampler Z = γ(L)W on a
// fixed mesh, the dense eigendecomposition reference sampler, projection of
// fine-mesh noise onto nested coarse meshes, and empirical covariance
// diagnostics.
#pragma once

#include "surfield/assembly.hpp"
#include "surfield/chebyshev.hpp"
#include "surfield/mesh.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace surfield {

/// An i.i.d. standard normal vector attached to the sampling seed that
/// produced it (and, during multilevel runs, the mesh level it lives on).
struct WhiteNoise {
  VectorXd values;
  std::uint64_t seed = 0;
  std::optional<int> level;
};

/// Nodal weights of a sampled field Z = Σ_i z_i ψ_i on a given mesh.
struct FieldSample {
  VectorXd nodal_weights;
  const SurfaceMesh* mesh = nullptr;
  std::string density_label;
  int chopped_degree = 0;
};

/// n i.i.d. N(0,1) draws from a fixed-width Mersenne Twister stream with an
/// explicit Box–Muller transform, so values are identical across platforms.
WhiteNoise white_noise(int n, std::uint64_t seed);

/// Chebyshev sampler: weights = √C^{-T} P_{γ,M}(S) W with
/// S = √C^{-1} R √C^{-T}, using the operator's stored mass factor.
FieldSample sample_field(const AssembledOperator& op, const ChebyshevPoly& poly,
                         const WhiteNoise& noise, const SurfaceMesh& mesh,
                         const std::string& density_label);

/// Reference sampler via the dense eigendecomposition of S:
/// weights = √C^{-T} V γ(Λ) Vᵀ W. Refuses meshes larger than oracle_cap.
FieldSample exact_sample(const AssembledOperator& op,
                         const SpectralDensity& density,
                         const WhiteNoise& noise, const SurfaceMesh& mesh,
                         int oracle_cap = kDefaultOracleCap);

/// Push fine-mesh white noise to the coarse mesh so both samples share one
/// driving noise: W_c = √C_c^{-1} Pᵀ √C_f W_f, with each operator's stored
/// mass factor.
WhiteNoise project_noise(const WhiteNoise& fine, const Prolongation& prolong,
                         const AssembledOperator& coarse_op,
                         const AssembledOperator& fine_op);

/// Unbiased sample covariance (mean-subtracted, 1/(n−1) normalization) of the
/// nodal weights of at least two samples drawn on a common mesh.
MatrixXd empirical_covariance(const std::vector<FieldSample>& samples);

/// Exact defect ‖√C_c^{-1} Pᵀ C_f P √C_c^{-T} − I‖_max of the noise
/// projection, computed densely with the consistent-mass Cholesky factor of
/// the coarse Gram matrix. Refuses coarse meshes larger than oracle_cap.
double projection_covariance_defect(const Prolongation& prolong,
                                    const SparseMatrix& coarse_mass,
                                    const SparseMatrix& fine_mass,
                                    int oracle_cap = kDefaultOracleCap);

/// Dense symmetric inverse square root via eigendecomposition; throws
/// NotPositiveDefinite when an eigenvalue is ≤ 0. Used by covariance
/// whitening checks.
MatrixXd inverse_sqrt_sym(const MatrixXd& A);

}  // namespace surfield
