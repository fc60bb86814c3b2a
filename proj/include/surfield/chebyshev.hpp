// Chebyshev machinery: amplitude spectral densities γ, first-kind
// interpolation of γ on a spectral interval, coefficient chopping, scalar
// Clenshaw evaluation, and the operator Clenshaw recurrence that applies the
// polynomial of a sparse symmetric operator to a vector.
#pragma once

#include "surfield/core.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>

namespace surfield {

/// Amplitude spectral density γ with decay exponent α (|γ(λ)| ≲ λ^{-α}
/// for large λ; the field is well-defined for α > d/4).
struct SpectralDensity {
  std::function<double(double)> gamma;
  double alpha = 0.0;
  std::string label;
};

/// Chebyshev interpolant of γ on [lambda_min, lambda_max] with coefficients
/// c_0..c_M in the first-kind basis; chopped_degree marks the last
/// coefficient kept by chop().
struct ChebyshevPoly {
  double lambda_min = 0.0;
  double lambda_max = 1.0;
  VectorXd coeffs;
  std::optional<int> chopped_degree;
  double epsilon = 0.0;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  int active_degree() const { return chopped_degree.value_or(degree()); }
};

/// γ(λ) = (κ² + λ)^{-α}.
SpectralDensity density_matern(double kappa2, double alpha);
/// γ(λ) = V₀^α (λ + cos(0.9π)·√λ)^{-α}.
SpectralDensity density_circle_experiment(double v0, double alpha);
/// γ(λ) = C₀ λ^{-α}.
SpectralDensity density_power(double c0, double alpha);
/// γ(λ) = sin(λ)·λ^{-α}.
SpectralDensity density_oscillatory(double alpha);

/// Lookup by config/CLI name ("matern", "circle_experiment", "power",
/// "oscillatory") with the named parameters (kappa2 / v0 / c0).
SpectralDensity make_density(const std::string& name, double alpha,
                             const std::map<std::string, double>& params);

/// Numerical proxy for the decay requirement: max of |γ(λ)|·λ^α over a
/// logarithmic grid of [lambda_min, 10⁶·lambda_min].
double density_decay_constant(const SpectralDensity& density, double lambda_min);

/// Interpolation coefficients at the M+1 Chebyshev–Gauss nodes mapped onto
/// the interval: c_k = (2−δ_{k0})/(M+1) · Σ_j γ(x_j) cos(kπ(j+1/2)/(M+1)).
/// Throws EvaluationError when γ is not finite at a node.
ChebyshevPoly cheb_fit(const SpectralDensity& density, double lambda_min,
                       double lambda_max, int M);

/// Smallest m such that |c_k|/max_j|c_j| < epsilon for every k > m;
/// evaluation and operator application then stop at degree m.
ChebyshevPoly chop(ChebyshevPoly poly, double epsilon);

/// Scalar Clenshaw evaluation at λ. Arguments outside the interval emit a
/// one-time warning on stderr (the recurrence may amplify) but still evaluate.
double cheb_eval(const ChebyshevPoly& poly, double lambda);

/// Operator Clenshaw: P(S)·w where apply_op computes S·v and S has spectrum
/// inside the interval. Uses exactly active_degree()+1 operator applications
/// (none for a constant polynomial).
VectorXd cheb_apply(const ChebyshevPoly& poly,
                    const std::function<VectorXd(const VectorXd&)>& apply_op,
                    const VectorXd& w);

/// Degree rule M_h = ceil((d/2+3)·h⁻¹·|log h| / (c_v_scale·√v_minus)).
/// Throws InvalidMeshSize for h ≥ 1.
int degree_rule(double h, int d, double v_minus, double c_v_scale);

/// Threshold below which a chop tolerance is provably harmless at mesh size
/// h: |log h|⁻¹·h^{3+d/2}. A chop epsilon above it may dominate the
/// discretization error on fine meshes.
double chop_epsilon_requirement(double h, int d);

}  // namespace surfield
