// Coefficients of the second-order operator: tangential symmetric positive
// semidefinite diffusion matrices D(x) and positive potentials V(x), with the
// built-in analytic presets used by the experiments.
//
// Spherical convention used throughout: θ = polar angle from the +z axis in
// [0, π], φ = azimuth atan2(y, x) mapped to [0, 2π). On the circle, θ is the
// usual planar angle atan2(y, x) mapped to [0, 2π).
#pragma once

#include "surfield/core.hpp"

#include <functional>
#include <optional>
#include <string>

namespace surfield {

/// Pointwise operator coefficients on the surface. diffusion(x) is a
/// symmetric (d+1)×(d+1) matrix annihilating the outward normal at surface
/// points; potential(x) lies in [v_minus, v_plus] with v_minus > 0 for
/// sampling-capable fields.
struct CoefficientField {
  std::function<MatrixXd(const VectorXd&)> diffusion;
  std::function<double(const VectorXd&)> potential;
  double v_minus = 0.0;
  double v_plus = 0.0;
  std::string label;
};

/// Circle experiment: D = I − ννᵀ; V = 3V₀ on the open half circle
/// θ ∈ (π/2, 3π/2), V₀ elsewhere, with V₀ = 10⁴.
CoefficientField preset_circle_experiment();

/// Sphere experiment: D = ∇f ∇fᵀ + ρ ∇⊥f (∇⊥f)ᵀ with
/// f = 2 cosθ cosφ sin²θ, ∇⊥f = x × ∇f, ρ = 0.1 + 0.6/(1 + e^{−4cosθ}),
/// and V = 500(1 + 5 cos²(πθ)). At the poles the gradient frame degenerates;
/// D falls back to 0.1·(I − ννᵀ) there, keeping a positive tangential bound.
CoefficientField preset_sphere_experiment();

/// Stationary Whittle–Matérn coefficients: D = I − ννᵀ, V ≡ κ².
CoefficientField preset_matern(double kappa2);

/// Localized potential: D = I − ννᵀ; V = 10⁵ where x₂⁶ + x₁³ − x₃² lies in
/// (0.1, 0.5) and 10 elsewhere.
CoefficientField preset_localized_potential();

/// Skew-gradient diffusion: f(x) = x₂, D = ρ₁ ∇f ∇fᵀ + ρ₂ X_f X_fᵀ with
/// X_f = x × ∇f, ρ₁ = 1, ρ₂ = 25, and constant V = 10.
CoefficientField preset_skew_gradient();

/// Lookup by config/CLI name: "circle_experiment", "sphere_experiment",
/// "matern" (requires kappa2), "localized_potential", "skew_gradient".
CoefficientField coefficient_preset(const std::string& name,
                                    std::optional<double> kappa2 = {});

/// Outward unit normal of a point on the unit circle/sphere (x itself after
/// normalization).
VectorXd unit_normal(const VectorXd& x);

/// Tangential projector I − ννᵀ at a surface point.
MatrixXd tangential_projector(const VectorXd& x);

}  // namespace surfield
