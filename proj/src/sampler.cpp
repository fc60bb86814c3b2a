#include "surfield/sampler.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace surfield {

WhiteNoise white_noise(int n, std::uint64_t seed) {
  if (n < 0) throw DimensionMismatch("white_noise: negative length");
  WhiteNoise noise;
  noise.seed = seed;
  noise.values.resize(n);
  std::mt19937_64 gen(seed);
  // 53-bit uniforms + explicit Box–Muller; std::normal_distribution is
  // implementation-defined and would break cross-platform reproducibility.
  auto uniform53 = [&gen]() {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
  };
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < n; i += 2) {
    const double u1 = 1.0 - uniform53();  // in (0, 1]
    const double u2 = uniform53();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    noise.values[i] = radius * std::cos(two_pi * u2);
    if (i + 1 < n) noise.values[i + 1] = radius * std::sin(two_pi * u2);
  }
  return noise;
}

FieldSample sample_field(const AssembledOperator& op, const ChebyshevPoly& poly,
                         const WhiteNoise& noise, const SurfaceMesh& mesh,
                         const std::string& density_label) {
  if (noise.values.size() != op.n || mesh.n_vertices() != op.n) {
    throw DimensionMismatch("sample_field: operator (" + std::to_string(op.n) +
                            "), mesh (" + std::to_string(mesh.n_vertices()) +
                            ") and noise (" + std::to_string(noise.values.size()) +
                            ") sizes disagree");
  }
  if (poly.lambda_min > op.lambda_min || poly.lambda_max < op.lambda_max) {
    throw IntervalTooSmall(
        "sample_field: interpolation interval [" + std::to_string(poly.lambda_min) +
        ", " + std::to_string(poly.lambda_max) + "] does not cover the operator's [" +
        std::to_string(op.lambda_min) + ", " + std::to_string(op.lambda_max) +
        "]; the Clenshaw recurrence may diverge outside it");
  }
  const VectorXd filtered = cheb_apply(
      poly, [&op](const VectorXd& v) { return apply_S(op, v); }, noise.values);
  FieldSample sample;
  sample.nodal_weights = solve_upper(op.sqrt_mass, filtered);
  sample.mesh = &mesh;
  sample.density_label = density_label;
  sample.chopped_degree = poly.active_degree();
  return sample;
}

FieldSample exact_sample(const AssembledOperator& op, const SpectralDensity& density,
                         const WhiteNoise& noise, const SurfaceMesh& mesh,
                         int oracle_cap) {
  if (noise.values.size() != op.n || mesh.n_vertices() != op.n) {
    throw DimensionMismatch("exact_sample: operator, mesh and noise sizes disagree");
  }
  if (!density.gamma) throw ConfigError("exact_sample: density has no gamma");
  MatrixXd S = dense_S(op, oracle_cap);
  S = 0.5 * (S + S.transpose()).eval();  // symmetric up to solver roundoff
  const DenseEig eig = dense_eig_sym(S, oracle_cap);
  VectorXd filtered = eig.eigenvectors.transpose() * noise.values;
  for (Eigen::Index i = 0; i < filtered.size(); ++i) {
    const double g = density.gamma(eig.eigenvalues[i]);
    if (!std::isfinite(g)) {
      throw EvaluationError("exact_sample: gamma is not finite at eigenvalue " +
                            std::to_string(eig.eigenvalues[i]));
    }
    filtered[i] *= g;
  }
  FieldSample sample;
  sample.nodal_weights = solve_upper(op.sqrt_mass, eig.eigenvectors * filtered);
  sample.mesh = &mesh;
  sample.density_label = density.label;
  sample.chopped_degree = -1;  // reference path: no polynomial involved
  return sample;
}

WhiteNoise project_noise(const WhiteNoise& fine, const Prolongation& prolong,
                         const AssembledOperator& coarse_op,
                         const AssembledOperator& fine_op) {
  if (fine.values.size() != prolong.fine_n || fine_op.n != prolong.fine_n) {
    throw DimensionMismatch("project_noise: fine size mismatch");
  }
  if (coarse_op.n != prolong.coarse_n) {
    throw DimensionMismatch("project_noise: coarse size mismatch");
  }
  WhiteNoise coarse;
  coarse.seed = fine.seed;
  if (fine.level) coarse.level = *fine.level - 1;
  const VectorXd lifted = apply_sqrt(fine_op.sqrt_mass, fine.values);
  const VectorXd restricted = prolong.matrix.transpose() * lifted;
  coarse.values = solve_lower(coarse_op.sqrt_mass, restricted);
  return coarse;
}

MatrixXd empirical_covariance(const std::vector<FieldSample>& samples) {
  if (samples.size() < 2) {
    throw ConfigError("empirical_covariance needs at least two samples");
  }
  const Eigen::Index n = samples.front().nodal_weights.size();
  const SurfaceMesh* mesh = samples.front().mesh;
  VectorXd mean = VectorXd::Zero(n);
  for (const FieldSample& s : samples) {
    if (s.nodal_weights.size() != n) {
      throw DimensionMismatch("empirical_covariance: inconsistent sample sizes");
    }
    if (mesh != nullptr && s.mesh != nullptr && s.mesh != mesh) {
      throw DimensionMismatch("empirical_covariance: samples live on different meshes");
    }
    mean += s.nodal_weights;
  }
  mean /= static_cast<double>(samples.size());
  MatrixXd cov = MatrixXd::Zero(n, n);
  for (const FieldSample& s : samples) {
    const VectorXd centered = s.nodal_weights - mean;
    cov.noalias() += centered * centered.transpose();
  }
  return cov / static_cast<double>(samples.size() - 1);
}

double projection_covariance_defect(const Prolongation& prolong,
                                    const SparseMatrix& coarse_mass,
                                    const SparseMatrix& fine_mass, int oracle_cap) {
  if (coarse_mass.rows() != prolong.coarse_n || fine_mass.rows() != prolong.fine_n) {
    throw DimensionMismatch("projection_covariance_defect: mass/prolongation mismatch");
  }
  if (prolong.coarse_n > oracle_cap) {
    throw OracleCapExceeded("projection_covariance_defect: coarse size " +
                            std::to_string(prolong.coarse_n) +
                            " exceeds the dense-path cap " + std::to_string(oracle_cap));
  }
  const CholeskyFactor coarse_factor = cholesky(coarse_mass);
  const SparseMatrix gram =
      SparseMatrix(prolong.matrix.transpose()) * SparseMatrix(fine_mass * prolong.matrix);
  MatrixXd G = MatrixXd(gram);
  // K = L_c^{-1} G L_c^{-T}, column by column through the sparse factor.
  const int n = prolong.coarse_n;
  MatrixXd half(n, n);
  for (int j = 0; j < n; ++j) half.col(j) = solve_lower(coarse_factor, G.col(j));
  MatrixXd K(n, n);
  for (int j = 0; j < n; ++j) K.col(j) = solve_lower(coarse_factor, half.row(j).transpose());
  return (K - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
}

MatrixXd inverse_sqrt_sym(const MatrixXd& A) {
  const DenseEig eig = dense_eig_sym(A, static_cast<int>(A.rows()));
  VectorXd inv_sqrt(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    if (!(eig.eigenvalues[i] > 0.0)) {
      throw NotPositiveDefinite("inverse_sqrt_sym: eigenvalue " +
                                std::to_string(eig.eigenvalues[i]) + " is not positive");
    }
    inv_sqrt[i] = 1.0 / std::sqrt(eig.eigenvalues[i]);
  }
  return eig.eigenvectors * inv_sqrt.asDiagonal() * eig.eigenvectors.transpose();
}

}  // namespace surfield
