// Experiment drivers: strict JSON configuration, the multilevel
// strong-convergence study, visualization snapshots, and the oracle suite
// comparing the Chebyshev sampler with the dense reference sampler.
#include "surfield/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

namespace surfield {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError(msg); }

/// Shortest round-trip decimal form, for CSV output.
std::string fmt_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

int surface_dim(const std::string& surface) {
  if (surface == "circle") return 1;
  if (surface == "sphere") return 2;
  config_fail("surface must be \"circle\" or \"sphere\", got \"" + surface + "\"");
}

MassMode parse_mass_mode(const std::string& s) {
  if (s == "consistent") return MassMode::Consistent;
  if (s == "lumped") return MassMode::Lumped;
  config_fail("mass_mode must be \"consistent\" or \"lumped\", got \"" + s + "\"");
}

void require_keys(const json& obj, const char* where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      config_fail(std::string("unknown key \"") + item.key() + "\" in " + where);
    }
  }
}

void read_string(const json& j, const char* key, std::string& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_string()) config_fail(std::string(key) + " must be a string");
  out = j.at(key).get<std::string>();
}

void read_double(const json& j, const char* key, double& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number()) config_fail(std::string(key) + " must be a number");
  out = j.at(key).get<double>();
}

void read_int(const json& j, const char* key, int& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number_integer()) {
    config_fail(std::string(key) + " must be an integer");
  }
  out = j.at(key).get<int>();
}

void read_bool(const json& j, const char* key, bool& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_boolean()) config_fail(std::string(key) + " must be a boolean");
  out = j.at(key).get<bool>();
}

void read_seed(const json& j, const char* key, std::uint64_t& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0)) {
    config_fail(std::string(key) + " must be a non-negative integer");
  }
  out = v.get<std::uint64_t>();
}

DensitySpec parse_density(const json& j) {
  if (!j.is_object()) config_fail("density must be an object");
  require_keys(j, "density", {"name", "params", "alphas"});
  DensitySpec spec;
  if (!j.contains("name")) config_fail("density.name is required");
  if (!j.at("name").is_string()) config_fail("density.name must be a string");
  spec.name = j.at("name").get<std::string>();
  if (j.contains("params")) {
    const json& params = j.at("params");
    if (!params.is_object()) config_fail("density.params must be an object");
    for (const auto& item : params.items()) {
      if (!item.value().is_number()) {
        config_fail("density.params." + item.key() + " must be a number");
      }
      spec.params[item.key()] = item.value().get<double>();
    }
  }
  if (!j.contains("alphas") || !j.at("alphas").is_array() || j.at("alphas").empty()) {
    config_fail("density.alphas must be a non-empty array");
  }
  for (const json& a : j.at("alphas")) {
    if (!a.is_number()) config_fail("density.alphas entries must be numbers");
    spec.alphas.push_back(a.get<double>());
  }
  return spec;
}

void validate_config(const ExperimentConfig& cfg) {
  const int d = surface_dim(cfg.surface);
  if (cfg.coarse_levels.empty()) config_fail("coarse_levels must be non-empty");
  for (std::size_t i = 1; i < cfg.coarse_levels.size(); ++i) {
    if (cfg.coarse_levels[i] <= cfg.coarse_levels[i - 1]) {
      config_fail("coarse_levels must be strictly increasing");
    }
  }
  if (cfg.fine_level <= cfg.coarse_levels.back()) {
    config_fail("fine_level must exceed every coarse level");
  }
  if (cfg.density.name.empty()) config_fail("density.name is required");
  if (cfg.density.alphas.empty()) config_fail("density.alphas must be non-empty");
  for (double alpha : cfg.density.alphas) {
    if (!(alpha > 0.25 * d)) {
      config_fail("alpha = " + fmt_double(alpha) + " does not exceed d/4 = " +
                  fmt_double(0.25 * d) + "; the field is not well-defined");
    }
  }
  if (cfg.n_samples < 1) config_fail("n_samples must be >= 1");
  if (!(cfg.c_v_scale > 0.0)) config_fail("c_v_scale must be positive");
  if (!(cfg.chop_epsilon >= 0.0 && cfg.chop_epsilon < 1.0)) {
    config_fail("chop_epsilon must lie in [0, 1)");
  }
}

SurfaceMesh base_mesh(const std::string& surface, int level) {
  return surface == "circle" ? generate_circle(level) : generate_icosphere(level);
}

/// Dense correction that re-whitens a projected noise vector: the inverse
/// square root of Cov(W_c) = √C_c⁻¹ Pᵀ (√C_f √C_fᵀ) P √C_c⁻ᵀ, with each
/// factor taken from the operator actually used by project_noise.
MatrixXd whitening_correction(const Prolongation& prolong,
                              const AssembledOperator& coarse_op,
                              const AssembledOperator& fine_op) {
  const int nc = prolong.coarse_n;
  if (nc > kDefaultOracleCap) {
    throw OracleCapExceeded(
        "whiten_projection needs dense-path sizes; coarse level has " +
        std::to_string(nc) + " vertices (cap " + std::to_string(kDefaultOracleCap) + ")");
  }
  MatrixXd cov(nc, nc);
  VectorXd basis = VectorXd::Zero(nc);
  for (int j = 0; j < nc; ++j) {
    basis(j) = 1.0;
    const VectorXd back = solve_upper(coarse_op.sqrt_mass, basis);
    const VectorXd lifted = spmv(prolong.matrix, back);
    VectorXd massed;
    if (fine_op.mode == MassMode::Consistent) {
      massed = spmv(fine_op.mass, lifted);
    } else {
      massed = fine_op.lumped_diag.cwiseProduct(lifted);
    }
    const VectorXd restricted = prolong.matrix.transpose() * massed;
    cov.col(j) = solve_lower(coarse_op.sqrt_mass, restricted);
    basis(j) = 0.0;
  }
  const MatrixXd sym = 0.5 * (cov + cov.transpose());
  return inverse_sqrt_sym(sym);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_fail("config root must be a JSON object");
  require_keys(j, "config",
               {"surface", "coefficients", "kappa2", "mass_mode", "coarse_levels",
                "fine_level", "density", "n_samples", "seed", "c_v_scale",
                "chop_epsilon", "whiten_projection", "output_csv"});
  ExperimentConfig cfg;
  read_string(j, "surface", cfg.surface);
  read_string(j, "coefficients", cfg.coefficients);
  read_double(j, "kappa2", cfg.kappa2);
  if (j.contains("mass_mode")) {
    if (!j.at("mass_mode").is_string()) config_fail("mass_mode must be a string");
    cfg.mass_mode = parse_mass_mode(j.at("mass_mode").get<std::string>());
  }
  if (j.contains("coarse_levels")) {
    if (!j.at("coarse_levels").is_array()) {
      config_fail("coarse_levels must be an array of integers");
    }
    for (const json& lvl : j.at("coarse_levels")) {
      if (!lvl.is_number_integer()) {
        config_fail("coarse_levels entries must be integers");
      }
      cfg.coarse_levels.push_back(lvl.get<int>());
    }
  }
  read_int(j, "fine_level", cfg.fine_level);
  if (!j.contains("density")) config_fail("config requires a density");
  cfg.density = parse_density(j.at("density"));
  read_int(j, "n_samples", cfg.n_samples);
  read_seed(j, "seed", cfg.seed);
  read_double(j, "c_v_scale", cfg.c_v_scale);
  read_double(j, "chop_epsilon", cfg.chop_epsilon);
  read_bool(j, "whiten_projection", cfg.whiten_projection);
  read_string(j, "output_csv", cfg.output_csv);
  validate_config(cfg);
  return cfg;
}

double fit_slope(const std::vector<RatePoint>& points) {
  if (points.size() < 2) {
    throw ConfigError("fit_slope needs at least two ladder points");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const RatePoint& p : points) {
    if (!(p.h > 0.0) || !(p.rmse > 0.0)) {
      throw ConfigError("fit_slope needs positive h and rmse at every point");
    }
    const double x = std::log(p.h);
    const double y = std::log(p.rmse);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) {
    throw ConfigError("fit_slope needs at least two distinct mesh sizes");
  }
  return (n * sxy - sx * sy) / denom;
}

RateReport run_convergence(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_config(config);
  const int d = surface_dim(config.surface);
  const CoefficientField coeffs =
      coefficient_preset(config.coefficients, config.kappa2);

  // Contiguous mesh chain from the coarsest studied level up to the fine
  // reference level; intermediate levels participate in the noise projection
  // even when they are not sampled.
  const int base = config.coarse_levels.front();
  std::vector<SurfaceMesh> meshes;
  std::vector<Prolongation> prolongs;  // prolongs[i]: chain level i -> i+1
  meshes.push_back(base_mesh(config.surface, base));
  while (*meshes.back().level < config.fine_level) {
    auto refined = refine(meshes.back());
    prolongs.push_back(std::move(refined.second));
    meshes.push_back(std::move(refined.first));
  }
  const int n_levels = static_cast<int>(meshes.size());
  const int fine_idx = n_levels - 1;

  std::vector<AssembledOperator> ops(n_levels);
  std::vector<double> hs(n_levels);
  for (int i = 0; i < n_levels; ++i) {
    ops[i] = assemble(meshes[i], coeffs, config.mass_mode);
    hs[i] = mesh_size(meshes[i]);
  }

  // Chain indices of the sampled (coarse) levels.
  std::vector<int> sampled;
  sampled.reserve(config.coarse_levels.size());
  for (int lvl : config.coarse_levels) sampled.push_back(lvl - base);

  // Interpolation degree per sampled level (alpha-independent), one
  // interpolant per (sampled level, alpha).
  const int n_alpha = static_cast<int>(config.density.alphas.size());
  std::vector<int> fit_degrees(n_levels, 0);
  std::vector<std::vector<ChebyshevPoly>> polys(n_levels);
  std::vector<std::string> labels(n_alpha);
  auto is_sampled = [&](int i) {
    return i == fine_idx ||
           std::find(sampled.begin(), sampled.end(), i) != sampled.end();
  };
  bool chop_warned = false;
  for (int i = 0; i < n_levels; ++i) {
    if (!is_sampled(i)) continue;
    if (config.chop_epsilon > 0.0 && !chop_warned &&
        config.chop_epsilon > chop_epsilon_requirement(hs[i], d)) {
      std::cerr << "warning: chop_epsilon " << config.chop_epsilon
                << " exceeds the provably harmless threshold "
                << chop_epsilon_requirement(hs[i], d) << " at h = " << hs[i]
                << "; chopping may dominate the discretization error\n";
      chop_warned = true;
    }
    fit_degrees[i] = degree_rule(hs[i], d, coeffs.v_minus, config.c_v_scale);
    polys[i].reserve(n_alpha);
    for (int a = 0; a < n_alpha; ++a) {
      SpectralDensity density = make_density(
          config.density.name, config.density.alphas[a], config.density.params);
      labels[a] = density.label;
      ChebyshevPoly poly =
          cheb_fit(density, ops[i].lambda_min, ops[i].lambda_max, fit_degrees[i]);
      if (config.chop_epsilon > 0.0) poly = chop(std::move(poly), config.chop_epsilon);
      polys[i].push_back(std::move(poly));
    }
  }

  // Optional diagnostic whitening of each projection step.
  std::vector<MatrixXd> whiten;
  if (config.whiten_projection) {
    whiten.resize(n_levels - 1);
    for (int i = 0; i + 1 < n_levels; ++i) {
      whiten[i] = whitening_correction(prolongs[i], ops[i], ops[i + 1]);
    }
  }

  // One slot per sample so the reduction order (and therefore the output)
  // does not depend on the thread count.
  std::vector<MatrixXd> err2(config.n_samples);
  const int n_coarse = static_cast<int>(sampled.size());
  parallel_for(config.n_samples, [&](int s) {
    MatrixXd local = MatrixXd::Zero(n_alpha, n_coarse);
    std::vector<WhiteNoise> chain(n_levels);
    chain[fine_idx] = white_noise(meshes[fine_idx].n_vertices(),
                                  config.seed + static_cast<std::uint64_t>(s));
    chain[fine_idx].level = config.fine_level;
    for (int i = fine_idx - 1; i >= 0; --i) {
      chain[i] = project_noise(chain[i + 1], prolongs[i], ops[i], ops[i + 1]);
      if (!whiten.empty()) chain[i].values = whiten[i] * chain[i].values;
    }
    for (int a = 0; a < n_alpha; ++a) {
      const FieldSample fine_sample = sample_field(
          ops[fine_idx], polys[fine_idx][a], chain[fine_idx], meshes[fine_idx],
          labels[a]);
      for (int c = 0; c < n_coarse; ++c) {
        const int ic = sampled[c];
        const FieldSample coarse_sample =
            sample_field(ops[ic], polys[ic][a], chain[ic], meshes[ic], labels[a]);
        VectorXd lifted = coarse_sample.nodal_weights;
        for (int i = ic; i < fine_idx; ++i) lifted = spmv(prolongs[i].matrix, lifted);
        const VectorXd diff = lifted - fine_sample.nodal_weights;
        local(a, c) = diff.dot(spmv(ops[fine_idx].mass, diff));
      }
    }
    err2[s] = std::move(local);
  });

  RateReport report;
  report.config = config;
  report.curves.reserve(n_alpha);
  for (int a = 0; a < n_alpha; ++a) {
    RateCurve curve;
    curve.alpha = config.density.alphas[a];
    curve.theoretical_slope = 2.0 * std::min(curve.alpha - 0.25 * d, 1.0);
    curve.points.reserve(n_coarse);
    for (int c = 0; c < n_coarse; ++c) {
      const int ic = sampled[c];
      double mean = 0.0;
      for (int s = 0; s < config.n_samples; ++s) mean += err2[s](a, c);
      mean /= static_cast<double>(config.n_samples);
      RatePoint point;
      point.level = config.coarse_levels[c];
      point.h = hs[ic];
      point.n_vertices = meshes[ic].n_vertices();
      point.rmse = std::sqrt(mean);
      point.cheb_degree = fit_degrees[ic];
      point.chopped_degree = polys[ic][a].active_degree();
      curve.points.push_back(point);
    }
    curve.slope = curve.points.size() >= 2
                      ? fit_slope(curve.points)
                      : std::numeric_limits<double>::quiet_NaN();
    report.curves.push_back(std::move(curve));
  }
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void write_rate_csv(const RateReport& report, std::ostream& out) {
  out << "alpha,h,n_vertices,rmse,cheb_degree,chopped_degree\n";
  for (const RateCurve& curve : report.curves) {
    for (const RatePoint& p : curve.points) {
      out << fmt_double(curve.alpha) << ',' << fmt_double(p.h) << ','
          << p.n_vertices << ',' << fmt_double(p.rmse) << ',' << p.cheb_degree
          << ',' << p.chopped_degree << '\n';
    }
  }
}

FieldSample snapshot(const SnapshotConfig& config) {
  const int d = surface_dim(config.surface);
  if (config.density.alphas.empty()) {
    config_fail("snapshot density needs at least one alpha");
  }
  const SurfaceMesh mesh = base_mesh(config.surface, config.level);
  const CoefficientField coeffs =
      coefficient_preset(config.coefficients, config.kappa2);
  const AssembledOperator op = assemble(mesh, coeffs, config.mass_mode);
  const SpectralDensity density = make_density(
      config.density.name, config.density.alphas.front(), config.density.params);
  const int degree =
      degree_rule(mesh_size(mesh), d, coeffs.v_minus, config.c_v_scale);
  const ChebyshevPoly poly =
      cheb_fit(density, op.lambda_min, op.lambda_max, degree);
  const WhiteNoise noise = white_noise(mesh.n_vertices(), config.seed);
  FieldSample sample = sample_field(op, poly, noise, mesh, density.label);

  write_ply(config.output_prefix + ".ply", mesh, sample.nodal_weights);
  if (d == 1) {
    // Angle/value table in vertex order (already ordered by angle).
    const std::string csv_path = config.output_prefix + ".csv";
    std::ofstream csv(csv_path);
    if (!csv) throw ParseError(csv_path + ": cannot open file for writing");
    csv << "theta,value\n";
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      double theta = std::atan2(mesh.vertices(v, 1), mesh.vertices(v, 0));
      if (theta < 0.0) theta += 2.0 * M_PI;
      csv << fmt_double(theta) << ',' << fmt_double(sample.nodal_weights(v)) << '\n';
    }
    // Offset polyline: displace each vertex along the outward normal
    // proportionally to the sampled value.
    const double peak = sample.nodal_weights.cwiseAbs().maxCoeff();
    const double scale = peak > 0.0 ? 0.25 / peak : 0.0;
    SurfaceMesh offset = mesh;
    offset.kind = SurfaceKind::Generic;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      offset.vertices.row(v) =
          mesh.vertices.row(v) * (1.0 + scale * sample.nodal_weights(v));
    }
    write_ply(config.output_prefix + "_offset.ply", offset, sample.nodal_weights);
  }
  sample.mesh = nullptr;  // the sampling mesh is local to this call
  return sample;
}

OracleReport run_oracle_suite(double tolerance, std::uint64_t seed,
                              double interval_shrink) {
  if (!(interval_shrink > 0.0 && interval_shrink <= 1.0)) {
    config_fail("interval_shrink must lie in (0, 1]");
  }
  struct CaseSpec {
    const char* surface;
    const char* coefficients;
    double kappa2;  // consumed by the matern preset only
    const char* density;
    std::map<std::string, double> params;
    double alpha;
    double c_v_scale;
  };
  // Every density family on both reference meshes, mixing stationary and
  // fully variable coefficients. The per-case interpolation budgets keep the
  // degree rule's output large enough to resolve each density to far below
  // the comparison tolerance.
  const std::vector<CaseSpec> cases = {
      {"circle", "matern", 10.0, "matern", {{"kappa2", 10.0}}, 1.0, 0.1},
      {"circle", "circle_experiment", 0.0, "circle_experiment", {{"v0", 1e4}}, 1.05, 0.01},
      {"circle", "matern", 10.0, "power", {{"c0", 1.0}}, 1.5, 0.1},
      {"circle", "matern", 10.0, "oscillatory", {}, 1.0, 0.05},
      {"sphere", "matern", 10.0, "matern", {{"kappa2", 10.0}}, 1.5, 0.05},
      {"sphere", "matern", 10.0, "power", {{"c0", 500.0}}, 1.25, 0.05},
      {"sphere", "sphere_experiment", 0.0, "power", {{"c0", 500.0}}, 2.25, 0.01},
      {"sphere", "matern", 10.0, "oscillatory", {}, 1.0, 0.01},
      {"sphere", "matern", 1e4, "circle_experiment", {{"v0", 1e4}}, 0.75, 0.01},
  };

  OracleReport report;
  report.cases.reserve(cases.size());
  report.all_passed = true;
  for (std::size_t idx = 0; idx < cases.size(); ++idx) {
    const CaseSpec& spec = cases[idx];
    const bool circle = std::string(spec.surface) == "circle";
    const SurfaceMesh mesh = circle ? generate_circle(4) : generate_icosphere(1);
    const CoefficientField coeffs = coefficient_preset(
        spec.coefficients, spec.kappa2 > 0.0 ? std::optional<double>(spec.kappa2)
                                             : std::nullopt);
    const AssembledOperator op = assemble(mesh, coeffs, MassMode::Consistent);
    const SpectralDensity density =
        make_density(spec.density, spec.alpha, spec.params);
    const int degree =
        degree_rule(mesh_size(mesh), mesh.dim, coeffs.v_minus, spec.c_v_scale);
    const double hi =
        op.lambda_min + interval_shrink * (op.lambda_max - op.lambda_min);
    ChebyshevPoly poly = cheb_fit(density, op.lambda_min, hi, degree);
    poly = chop(std::move(poly), 1e-12);
    const WhiteNoise noise =
        white_noise(mesh.n_vertices(), seed + static_cast<std::uint64_t>(idx));
    double rel = std::numeric_limits<double>::infinity();
    try {
      const FieldSample via_cheb =
          sample_field(op, poly, noise, mesh, density.label);
      const FieldSample via_eig = exact_sample(op, density, noise, mesh);
      const double ref_norm = via_eig.nodal_weights.norm();
      rel = (via_cheb.nodal_weights - via_eig.nodal_weights).norm() /
            std::max(ref_norm, std::numeric_limits<double>::min());
    } catch (const SurfieldError&) {
      // A rejected interval is a reported failure, never a thrown one.
    }

    OracleCase result;
    result.surface = spec.surface;
    result.density = density.label;
    result.alpha = spec.alpha;
    result.degree = degree;
    result.chopped_degree = poly.active_degree();
    result.rel_l2_error = rel;
    result.tolerance = tolerance;
    result.passed = rel <= tolerance;
    report.all_passed = report.all_passed && result.passed;
    report.cases.push_back(std::move(result));
  }
  return report;
}

}  // namespace surfield
