#include "surfield/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace surfield {

namespace {

constexpr double kPi = std::numbers::pi;

void require_ambient(const VectorXd& x, int ambient, const char* preset) {
  if (x.size() != ambient) {
    throw DimensionMismatch(std::string(preset) + ": expected a point in R^" +
                            std::to_string(ambient) + ", got dimension " +
                            std::to_string(x.size()));
  }
}

// Planar angle in [0, 2π).
double circle_angle(const VectorXd& x) {
  double theta = std::atan2(x[1], x[0]);
  if (theta < 0.0) theta += 2.0 * kPi;
  return theta;
}

// Surface gradient of f(θ, φ) = 2 cosθ cosφ sin²θ on the unit sphere and the
// associated skew direction x × ∇f, in the orthonormal frame (e_θ, e_φ).
struct SphereFrame {
  double theta = 0.0;
  double sin_theta = 0.0;
  double cos_theta = 0.0;
  Eigen::Vector3d e_theta;
  Eigen::Vector3d e_phi;
  bool degenerate = false;
};

SphereFrame sphere_frame(const VectorXd& x) {
  SphereFrame fr;
  const double z = std::clamp(x[2], -1.0, 1.0);
  fr.theta = std::acos(z);
  fr.sin_theta = std::sin(fr.theta);
  fr.cos_theta = std::cos(fr.theta);
  if (fr.sin_theta <= 1e-12) {
    fr.degenerate = true;
    return fr;
  }
  const double phi = std::atan2(x[1], x[0]);
  const double sp = std::sin(phi);
  const double cp = std::cos(phi);
  fr.e_theta << fr.cos_theta * cp, fr.cos_theta * sp, -fr.sin_theta;
  fr.e_phi << -sp, cp, 0.0;
  return fr;
}

}  // namespace

VectorXd unit_normal(const VectorXd& x) {
  const double norm = x.norm();
  if (norm < 1e-14) {
    throw DegeneratePoint("unit_normal: undefined at the origin");
  }
  return x / norm;
}

MatrixXd tangential_projector(const VectorXd& x) {
  const VectorXd nu = unit_normal(x);
  return MatrixXd::Identity(x.size(), x.size()) - nu * nu.transpose();
}

CoefficientField preset_circle_experiment() {
  constexpr double v0 = 1e4;
  CoefficientField field;
  field.label = "circle_experiment";
  field.v_minus = v0;
  field.v_plus = 3.0 * v0;
  field.diffusion = [](const VectorXd& x) {
    require_ambient(x, 2, "circle_experiment diffusion");
    return tangential_projector(x);
  };
  field.potential = [](const VectorXd& x) {
    require_ambient(x, 2, "circle_experiment potential");
    const double theta = circle_angle(x);
    const bool upper = theta > 0.5 * kPi && theta < 1.5 * kPi;
    return upper ? 3.0 * v0 : v0;
  };
  return field;
}

CoefficientField preset_sphere_experiment() {
  CoefficientField field;
  field.label = "sphere_experiment";
  field.v_minus = 500.0;
  field.v_plus = 3000.0;
  field.diffusion = [](const VectorXd& x) {
    require_ambient(x, 3, "sphere_experiment diffusion");
    const SphereFrame fr = sphere_frame(x);
    if (fr.degenerate) {
      // ∇f → 0 at the poles; keep a small tangential floor instead of 0/0.
      return MatrixXd(0.1 * tangential_projector(x));
    }
    const double st = fr.sin_theta;
    const double ct = fr.cos_theta;
    const double phi = std::atan2(x[1], x[0]);
    const double sp = std::sin(phi);
    const double cp = std::cos(phi);
    const double df_dtheta = 2.0 * cp * st * (2.0 * ct * ct - st * st);
    const double df_dphi_over_sin = -2.0 * sp * ct * st;
    const Eigen::Vector3d grad = df_dtheta * fr.e_theta + df_dphi_over_sin * fr.e_phi;
    const Eigen::Vector3d skew = Eigen::Vector3d(x[0], x[1], x[2]).cross(grad);
    const double rho = 0.1 + 0.6 / (1.0 + std::exp(-4.0 * ct));
    // Outer products are materialized first so that D is exactly symmetric
    // (scaling a vector before the outer product breaks symmetry by an ulp).
    const Eigen::Matrix3d Dg = grad * grad.transpose();
    const Eigen::Matrix3d Ds = skew * skew.transpose();
    return MatrixXd(Dg + rho * Ds);
  };
  field.potential = [](const VectorXd& x) {
    require_ambient(x, 3, "sphere_experiment potential");
    const double theta = std::acos(std::clamp(x[2], -1.0, 1.0));
    const double c = std::cos(kPi * theta);
    return 500.0 * (1.0 + 5.0 * c * c);
  };
  return field;
}

CoefficientField preset_matern(double kappa2) {
  if (!(kappa2 > 0.0)) {
    throw ConfigError("matern preset: kappa2 must be positive");
  }
  CoefficientField field;
  field.label = "matern";
  field.v_minus = kappa2;
  field.v_plus = kappa2;
  field.diffusion = [](const VectorXd& x) { return tangential_projector(x); };
  field.potential = [kappa2](const VectorXd&) { return kappa2; };
  return field;
}

CoefficientField preset_localized_potential() {
  CoefficientField field;
  field.label = "localized_potential";
  field.v_minus = 10.0;
  field.v_plus = 1e5;
  field.diffusion = [](const VectorXd& x) {
    require_ambient(x, 3, "localized_potential diffusion");
    return tangential_projector(x);
  };
  field.potential = [](const VectorXd& x) {
    require_ambient(x, 3, "localized_potential potential");
    const double g = std::pow(x[1], 6) + std::pow(x[0], 3) - x[2] * x[2];
    return (g > 0.1 && g < 0.5) ? 1e5 : 10.0;
  };
  return field;
}

CoefficientField preset_skew_gradient() {
  CoefficientField field;
  field.label = "skew_gradient";
  field.v_minus = 10.0;
  field.v_plus = 10.0;
  field.diffusion = [](const VectorXd& x) {
    require_ambient(x, 3, "skew_gradient diffusion");
    constexpr double rho1 = 1.0;
    constexpr double rho2 = 25.0;
    // f(x) = x₂ (second coordinate); surface gradient = Π e₂.
    const Eigen::Vector3d p(x[0], x[1], x[2]);
    const Eigen::Vector3d nu = p.normalized();
    const Eigen::Vector3d e2(0.0, 1.0, 0.0);
    const Eigen::Vector3d grad = e2 - nu * nu.dot(e2);
    const Eigen::Vector3d skew = p.cross(e2);
    const Eigen::Matrix3d Dg = grad * grad.transpose();
    const Eigen::Matrix3d Ds = skew * skew.transpose();
    return MatrixXd(rho1 * Dg + rho2 * Ds);
  };
  field.potential = [](const VectorXd&) { return 10.0; };
  return field;
}

CoefficientField coefficient_preset(const std::string& name, std::optional<double> kappa2) {
  if (name == "circle_experiment") return preset_circle_experiment();
  if (name == "sphere_experiment") return preset_sphere_experiment();
  if (name == "matern") {
    if (!kappa2) throw ConfigError("matern preset requires kappa2");
    return preset_matern(*kappa2);
  }
  if (name == "localized_potential") return preset_localized_potential();
  if (name == "skew_gradient") return preset_skew_gradient();
  throw ConfigError("unknown coefficient preset '" + name + "'");
}

}  // namespace surfield
