// Experiment drivers: strict JSON configuration, the multilevel
// strong-convergence study with rate fitting, field snapshots for
// visualization, and the self-checking oracle suite comparing the Chebyshev
// sampler against the dense reference sampler.
#pragma once

#include "surfield/sampler.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace surfield {

/// One density to study: name + parameters, one curve per alpha.
struct DensitySpec {
  std::string name;
  std::map<std::string, double> params;  // kappa2 / v0 / c0 as applicable
  std::vector<double> alphas;
};

/// Full description of a convergence run, loadable from JSON (unknown keys
/// rejected) with CLI overrides applied afterwards.
struct ExperimentConfig {
  std::string surface = "circle";          // "circle" | "sphere"
  std::string coefficients = "matern";     // preset name
  double kappa2 = 1.0;                     // used by the matern preset
  MassMode mass_mode = MassMode::Lumped;
  std::vector<int> coarse_levels;
  int fine_level = 0;
  DensitySpec density;
  int n_samples = 25;
  std::uint64_t seed = 0;
  double c_v_scale = 1.0;
  double chop_epsilon = 0.0;               // 0 disables chopping
  bool whiten_projection = false;          // re-whiten projected noise with the
                                           // dense covariance inverse square root
                                           // (diagnostic; needs dense-path sizes)
  std::string output_csv;                  // empty: stdout only

  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
};

/// One (level, alpha) measurement of the multilevel study.
struct RatePoint {
  int level = 0;
  double h = 0.0;
  int n_vertices = 0;
  double rmse = 0.0;
  int cheb_degree = 0;
  int chopped_degree = 0;
};

/// All measurements for one alpha plus the fitted log-log slope and the
/// asymptotic strong rate 2·min{α − d/4, 1} it should approach.
struct RateCurve {
  double alpha = 0.0;
  std::vector<RatePoint> points;
  double slope = 0.0;  // NaN when fewer than two ladder points
  double theoretical_slope = 0.0;
};

/// Outcome of run_convergence: one curve per alpha plus run metadata.
struct RateReport {
  ExperimentConfig config;
  std::vector<RateCurve> curves;
  double elapsed_seconds = 0.0;
};

/// Ordinary least-squares slope of log(rmse) against log(h).
double fit_slope(const std::vector<RatePoint>& points);

/// Run the full multilevel strong-convergence study described by the config:
/// for each coarse level and each alpha, sample n_samples fields on the
/// coarse and fine meshes from shared noise and record the root-mean-square
/// fine-mesh mass-norm error.
RateReport run_convergence(const ExperimentConfig& config);

/// CSV rows `alpha,h,n_vertices,rmse,cheb_degree,chopped_degree`.
void write_rate_csv(const RateReport& report, std::ostream& out);

/// Parameters of a single-field visualization snapshot.
struct SnapshotConfig {
  std::string surface = "sphere";
  int level = 3;
  std::string coefficients = "matern";
  double kappa2 = 1.0;
  MassMode mass_mode = MassMode::Lumped;
  DensitySpec density;                  // first alpha is used
  std::uint64_t seed = 0;
  double c_v_scale = 1.0;
  std::string output_prefix = "field";  // writes <prefix>.ply (+ .csv on circles)
};

/// Sample one field and write it to PLY (plus an angle/value CSV and an
/// offset-polyline PLY on circles). Returns the sample.
FieldSample snapshot(const SnapshotConfig& config);

/// One line of the oracle suite: sampler-vs-reference discrepancy for a
/// surface/density combination.
struct OracleCase {
  std::string surface;
  std::string density;
  double alpha = 0.0;
  int degree = 0;
  int chopped_degree = 0;
  double rel_l2_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct OracleReport {
  std::vector<OracleCase> cases;
  bool all_passed = false;
};

/// Compare the Chebyshev sampler with the dense reference sampler on a
/// level-4 circle and a level-1 icosphere for every density family, at the
/// per-case interpolation budgets pinned in the implementation. Every case
/// must match to within tolerance (default 1e-8).
///
/// interval_shrink < 1 deliberately fits each polynomial on a truncated
/// spectral interval (a diagnostic: the equivalence checks must then fail and
/// be reported as failures — with rel_l2_error = +inf when the sampler
/// rejects the interval — never thrown).
OracleReport run_oracle_suite(double tolerance = 1e-8,
                              std::uint64_t seed = 20240517,
                              double interval_shrink = 1.0);

}  // namespace surfield
