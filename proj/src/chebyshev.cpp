#include "surfield/chebyshev.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <numbers>
#include <string>

namespace surfield {

namespace {

constexpr double kPi = std::numbers::pi;

void require_alpha(double alpha, const char* name) {
  if (!(alpha > 0.0)) {
    throw ConfigError(std::string(name) + ": alpha must be positive");
  }
}

}  // namespace

SpectralDensity density_matern(double kappa2, double alpha) {
  require_alpha(alpha, "density_matern");
  if (!(kappa2 > 0.0)) throw ConfigError("density_matern: kappa2 must be positive");
  SpectralDensity d;
  d.alpha = alpha;
  d.label = "matern";
  d.gamma = [kappa2, alpha](double lam) { return std::pow(kappa2 + lam, -alpha); };
  return d;
}

SpectralDensity density_circle_experiment(double v0, double alpha) {
  require_alpha(alpha, "density_circle_experiment");
  if (!(v0 > 0.0)) throw ConfigError("density_circle_experiment: v0 must be positive");
  SpectralDensity d;
  d.alpha = alpha;
  d.label = "circle_experiment";
  const double shift = std::cos(0.9 * kPi);
  d.gamma = [v0, alpha, shift](double lam) {
    return std::pow(v0, alpha) * std::pow(lam + shift * std::sqrt(lam), -alpha);
  };
  return d;
}

SpectralDensity density_power(double c0, double alpha) {
  require_alpha(alpha, "density_power");
  if (!(c0 > 0.0)) throw ConfigError("density_power: c0 must be positive");
  SpectralDensity d;
  d.alpha = alpha;
  d.label = "power";
  d.gamma = [c0, alpha](double lam) { return c0 * std::pow(lam, -alpha); };
  return d;
}

SpectralDensity density_oscillatory(double alpha) {
  require_alpha(alpha, "density_oscillatory");
  SpectralDensity d;
  d.alpha = alpha;
  d.label = "oscillatory";
  d.gamma = [alpha](double lam) { return std::sin(lam) * std::pow(lam, -alpha); };
  return d;
}

SpectralDensity make_density(const std::string& name, double alpha,
                             const std::map<std::string, double>& params) {
  auto take_only = [&params, &name](const char* key) {
    if (params.size() != 1 || params.begin()->first != key) {
      for (const auto& [k, v] : params) {
        if (k != key) {
          throw ConfigError("density '" + name + "': unknown parameter '" + k + "'");
        }
      }
      throw ConfigError("density '" + name + "' requires parameter '" + key + "'");
    }
    return params.begin()->second;
  };
  if (name == "matern") return density_matern(take_only("kappa2"), alpha);
  if (name == "circle_experiment") return density_circle_experiment(take_only("v0"), alpha);
  if (name == "power") return density_power(take_only("c0"), alpha);
  if (name == "oscillatory") {
    if (!params.empty()) {
      throw ConfigError("density 'oscillatory': unknown parameter '" +
                        params.begin()->first + "'");
    }
    return density_oscillatory(alpha);
  }
  throw ConfigError("unknown density '" + name + "'");
}

double density_decay_constant(const SpectralDensity& density, double lambda_min) {
  if (!density.gamma) throw ConfigError("density_decay_constant: density has no gamma");
  if (!(lambda_min > 0.0)) {
    throw ConfigError("density_decay_constant: lambda_min must be positive");
  }
  const int points = 241;
  double best = 0.0;
  for (int i = 0; i < points; ++i) {
    const double lam =
        lambda_min * std::pow(1e6, static_cast<double>(i) / (points - 1));
    const double value = std::abs(density.gamma(lam)) * std::pow(lam, density.alpha);
    if (std::isfinite(value)) best = std::max(best, value);
  }
  return best;
}

ChebyshevPoly cheb_fit(const SpectralDensity& density, double lambda_min,
                       double lambda_max, int M) {
  if (!density.gamma) throw ConfigError("cheb_fit: density has no gamma");
  if (M < 0) throw ConfigError("cheb_fit: degree must be nonnegative");
  if (!(lambda_max > lambda_min) ||
      lambda_max - lambda_min <= 1e-12 * std::max(1.0, std::abs(lambda_max))) {
    throw IntervalTooSmall("cheb_fit: [" + std::to_string(lambda_min) + ", " +
                           std::to_string(lambda_max) + "] is not a usable interval");
  }
  const int nodes = M + 1;
  const double half_width = 0.5 * (lambda_max - lambda_min);
  const double center = 0.5 * (lambda_max + lambda_min);
  VectorXd values(nodes);
  VectorXd angles(nodes);
  for (int j = 0; j < nodes; ++j) {
    angles[j] = kPi * (j + 0.5) / nodes;
    const double lam = center + half_width * std::cos(angles[j]);
    const double v = density.gamma(lam);
    if (!std::isfinite(v)) {
      throw EvaluationError("cheb_fit: gamma is not finite at lambda = " +
                            std::to_string(lam));
    }
    values[j] = v;
  }
  ChebyshevPoly poly;
  poly.lambda_min = lambda_min;
  poly.lambda_max = lambda_max;
  poly.coeffs.resize(nodes);
  for (int k = 0; k < nodes; ++k) {
    double acc = 0.0;
    for (int j = 0; j < nodes; ++j) {
      acc += values[j] * std::cos(static_cast<double>(k) * angles[j]);
    }
    poly.coeffs[k] = (k == 0 ? 1.0 : 2.0) * acc / nodes;
  }
  return poly;
}

ChebyshevPoly chop(ChebyshevPoly poly, double epsilon) {
  if (!(epsilon > 0.0) || epsilon >= 1.0) {
    throw ConfigError("chop: epsilon must lie in (0, 1)");
  }
  const double c_max = poly.coeffs.cwiseAbs().maxCoeff();
  const double cut = epsilon * c_max;
  int last = 0;
  for (int k = 0; k <= poly.degree(); ++k) {
    if (std::abs(poly.coeffs[k]) >= cut) last = k;
  }
  poly.chopped_degree = last;
  poly.epsilon = epsilon;
  return poly;
}

namespace {

std::atomic<bool> g_warned_outside_interval{false};

void warn_outside_interval(double lambda, const ChebyshevPoly& poly) {
  if (!g_warned_outside_interval.exchange(true)) {
    std::cerr << "[surfield] warning: Chebyshev evaluation at lambda = " << lambda
              << " outside the fit interval [" << poly.lambda_min << ", "
              << poly.lambda_max << "]; the recurrence may amplify out-of-interval "
              << "components (reported once)\n";
  }
}

}  // namespace

double cheb_eval(const ChebyshevPoly& poly, double lambda) {
  if (poly.coeffs.size() == 0) throw ConfigError("cheb_eval: empty polynomial");
  const double width = poly.lambda_max - poly.lambda_min;
  const double t = (2.0 * lambda - (poly.lambda_max + poly.lambda_min)) / width;
  if (std::abs(t) > 1.0 + 1e-12) warn_outside_interval(lambda, poly);
  const int m = poly.active_degree();
  double b1 = 0.0, b2 = 0.0;
  for (int k = m; k >= 1; --k) {
    const double next = poly.coeffs[k] + 2.0 * t * b1 - b2;
    b2 = b1;
    b1 = next;
  }
  return poly.coeffs[0] + t * b1 - b2;
}

VectorXd cheb_apply(const ChebyshevPoly& poly,
                    const std::function<VectorXd(const VectorXd&)>& apply_op,
                    const VectorXd& w) {
  if (poly.coeffs.size() == 0) throw ConfigError("cheb_apply: empty polynomial");
  if (!apply_op) throw ConfigError("cheb_apply: missing operator");
  const int m = poly.active_degree();
  if (m == 0) return poly.coeffs[0] * w;
  const double width = poly.lambda_max - poly.lambda_min;
  const double shift = poly.lambda_max + poly.lambda_min;
  auto mapped = [&](const VectorXd& v) -> VectorXd {
    return (2.0 * apply_op(v) - shift * v) / width;
  };
  VectorXd b1 = VectorXd::Zero(w.size());
  VectorXd b2 = VectorXd::Zero(w.size());
  for (int k = m; k >= 1; --k) {
    VectorXd next = poly.coeffs[k] * w + 2.0 * mapped(b1) - b2;
    b2 = std::move(b1);
    b1 = std::move(next);
  }
  return poly.coeffs[0] * w + mapped(b1) - b2;
}

int degree_rule(double h, int d, double v_minus, double c_v_scale) {
  if (!(h > 0.0) || h >= 1.0) {
    throw InvalidMeshSize("degree_rule: mesh size must lie in (0, 1), got " +
                          std::to_string(h));
  }
  if (d != 1 && d != 2) throw ConfigError("degree_rule: d must be 1 or 2");
  if (!(v_minus > 0.0)) throw ConfigError("degree_rule: v_minus must be positive");
  if (!(c_v_scale > 0.0)) throw ConfigError("degree_rule: c_v_scale must be positive");
  const double raw = (0.5 * d + 3.0) * std::abs(std::log(h)) /
                     (h * c_v_scale * std::sqrt(v_minus));
  const double capped = std::ceil(raw);
  if (!(capped < 5e7)) {
    throw InvalidMeshSize("degree_rule: degree " + std::to_string(capped) +
                          " is out of the supported range");
  }
  return static_cast<int>(capped);
}

double chop_epsilon_requirement(double h, int d) {
  if (!(h > 0.0) || h >= 1.0) {
    throw InvalidMeshSize("chop_epsilon_requirement: mesh size must lie in (0, 1)");
  }
  if (d != 1 && d != 2) {
    throw ConfigError("chop_epsilon_requirement: d must be 1 or 2");
  }
  return std::pow(h, 3.0 + 0.5 * d) / std::abs(std::log(h));
}

}  // namespace surfield
