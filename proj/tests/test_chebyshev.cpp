#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "surfield/assembly.hpp"
#include "surfield/chebyshev.hpp"
#include "surfield/coefficients.hpp"
#include "surfield/linalg.hpp"
#include "surfield/mesh.hpp"
#include "test_helpers.hpp"

using namespace surfield;

namespace {

constexpr double kPi = std::numbers::pi;

SpectralDensity identity_density() {
  SpectralDensity d;
  d.gamma = [](double lambda) { return lambda; };
  d.alpha = 1.0;
  d.label = "identity";
  return d;
}

SpectralDensity constant_density(double value) {
  SpectralDensity d;
  d.gamma = [value](double) { return value; };
  d.alpha = 1.0;
  d.label = "constant";
  return d;
}

ChebyshevPoly poly_from_coeffs(std::vector<double> coeffs, double lo, double hi) {
  ChebyshevPoly p;
  p.lambda_min = lo;
  p.lambda_max = hi;
  p.coeffs = Eigen::Map<VectorXd>(coeffs.data(), static_cast<int>(coeffs.size()));
  return p;
}

// Chebyshev nodes of the (M+1)-point Gauss grid mapped onto [lo, hi].
std::vector<double> cheb_nodes(int M, double lo, double hi) {
  std::vector<double> xs;
  for (int j = 0; j <= M; ++j) {
    const double t = std::cos(kPi * (j + 0.5) / (M + 1));
    xs.push_back(0.5 * (hi - lo) * t + 0.5 * (hi + lo));
  }
  return xs;
}

}  // namespace

TEST_CASE("fitting the identity on [0,1] with degree one gives c0=c1=1/2") {
  ChebyshevPoly p = cheb_fit(identity_density(), 0.0, 1.0, 1);
  REQUIRE(p.coeffs.size() == 2);
  CHECK(p.coeffs(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p.coeffs(1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p.lambda_min == 0.0);
  CHECK(p.lambda_max == 1.0);
  CHECK_FALSE(p.chopped_degree.has_value());
}

TEST_CASE("fitting a constant puts everything into c0") {
  ChebyshevPoly p = cheb_fit(constant_density(7.0), 2.0, 9.0, 5);
  REQUIRE(p.coeffs.size() == 6);
  CHECK(p.coeffs(0) == doctest::Approx(7.0).epsilon(1e-14));
  for (int k = 1; k <= 5; ++k) CHECK(std::abs(p.coeffs(k)) <= 1e-13);
}

TEST_CASE("the interpolant reproduces the density at its own nodes") {
  SpectralDensity d = density_matern(10.0, 1.2);
  const double lo = 10.0, hi = 300.0;
  const int M = 40;
  ChebyshevPoly p = cheb_fit(d, lo, hi, M);
  for (double x : cheb_nodes(M, lo, hi)) {
    CHECK(cheb_eval(p, x) == doctest::Approx(d.gamma(x)).epsilon(1e-12));
  }
}

TEST_CASE("non-finite density values are rejected naming the node") {
  SpectralDensity bad;
  bad.gamma = [](double lambda) { return 1.0 / (lambda - 5.0); };
  bad.alpha = 1.0;
  bad.label = "pole";
  // Degree 0: single node at the interval midpoint 5 -> division by zero.
  CHECK_THROWS_AS(cheb_fit(bad, 4.0, 6.0, 0), EvaluationError);
  try {
    cheb_fit(bad, 4.0, 6.0, 0);
  } catch (const EvaluationError& err) {
    CHECK(std::string(err.what()).find("lambda") != std::string::npos);
  }
}

TEST_CASE("chop keeps only the leading coefficient of a flat tail") {
  ChebyshevPoly p = poly_from_coeffs({1.0, 1e-13, 1e-14}, 1.0, 2.0);
  ChebyshevPoly c = chop(p, 1e-12);
  REQUIRE(c.chopped_degree.has_value());
  CHECK(*c.chopped_degree == 0);
  CHECK(c.active_degree() == 0);
  CHECK(c.epsilon == 1e-12);
}

TEST_CASE("chop honours a non-monotone tail") {
  // The trailing condition must hold for every k beyond the cut, so the
  // large c3 after a tiny c2 forces m = 3.
  ChebyshevPoly p = poly_from_coeffs({1.0, 0.5, 1e-13, 0.2}, 1.0, 2.0);
  ChebyshevPoly c = chop(p, 1e-12);
  REQUIRE(c.chopped_degree.has_value());
  CHECK(*c.chopped_degree == 3);
}

TEST_CASE("chop leaves the circle-experiment fit far below the fitted degree") {
  SurfaceMesh mesh = generate_circle(6);
  CoefficientField field = preset_circle_experiment();
  AssembledOperator op = assemble(mesh, field, MassMode::Consistent);
  const int M = degree_rule(mesh_size(mesh), 1, field.v_minus, 0.1);
  SpectralDensity d = density_circle_experiment(1e4, 1.05);
  ChebyshevPoly p = chop(cheb_fit(d, op.lambda_min, op.lambda_max, M), 1e-12);
  REQUIRE(p.chopped_degree.has_value());
  CHECK(*p.chopped_degree < p.degree() / 2);
  CHECK(*p.chopped_degree > 0);
  // Trailing coefficients really are below the threshold.
  const double cmax = p.coeffs.cwiseAbs().maxCoeff();
  for (int k = *p.chopped_degree + 1; k <= p.degree(); ++k) {
    CHECK(std::abs(p.coeffs(k)) < 1e-12 * cmax);
  }
}

TEST_CASE("chop requires a positive threshold") {
  ChebyshevPoly p = poly_from_coeffs({1.0, 0.5}, 1.0, 2.0);
  CHECK_THROWS_AS(chop(p, 0.0), ConfigError);
  CHECK_THROWS_AS(chop(p, -1e-3), ConfigError);
}

TEST_CASE("cheb_eval of a constant polynomial is the constant everywhere") {
  ChebyshevPoly p = poly_from_coeffs({7.0}, 1.0, 2.0);
  for (double x : {1.0, 1.3, 1.99}) CHECK(cheb_eval(p, x) == 7.0);
}

TEST_CASE("cheb_eval reproduces the identity fit at interior points") {
  ChebyshevPoly p = cheb_fit(identity_density(), 0.0, 1.0, 1);
  CHECK(cheb_eval(p, 0.25) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(cheb_eval(p, 0.75) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("doubling the degree shrinks the matern fit error at least tenfold") {
  SpectralDensity d = density_matern(10.0, 1.5);
  const double lo = 10.0, hi = 500.0;
  double prev_err = -1.0;
  for (int M : {8, 16, 32}) {
    ChebyshevPoly p = cheb_fit(d, lo, hi, M);
    double err = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double x = lo + (hi - lo) * (i + 0.5) / 50.0;
      err = std::max(err, std::abs(cheb_eval(p, x) - d.gamma(x)));
    }
    if (prev_err > 0.0) CHECK(err <= prev_err / 10.0);
    prev_err = err;
  }
}

TEST_CASE("fitting a polynomial of matching degree recovers it exactly") {
  SpectralDensity cubic;
  cubic.gamma = [](double x) { return 2.0 - x + 0.5 * x * x - 0.125 * x * x * x; };
  cubic.alpha = 1.0;
  cubic.label = "cubic";
  for (int M : {3, 6}) {
    ChebyshevPoly p = cheb_fit(cubic, 1.0, 4.0, M);
    const double scale = p.coeffs.cwiseAbs().maxCoeff();
    for (int i = 0; i <= 20; ++i) {
      const double x = 1.0 + 3.0 * i / 20.0;
      CHECK(std::abs(cheb_eval(p, x) - cubic.gamma(x)) <= 1e-13 * scale);
    }
  }
}

TEST_CASE("interval convergence is geometric until the rounding floor") {
  SpectralDensity d = density_matern(1.0, 0.75);
  const double lo = 1.0, hi = 60.0;
  std::vector<double> errs;
  for (int M : {10, 20, 30, 40}) {
    ChebyshevPoly p = cheb_fit(d, lo, hi, M);
    double err = 0.0;
    for (int i = 0; i < 64; ++i) {
      const double x = lo + (hi - lo) * (i + 0.5) / 64.0;
      err = std::max(err, std::abs(cheb_eval(p, x) - d.gamma(x)));
    }
    errs.push_back(err);
  }
  // Each +10 degrees multiplies the error by a fixed factor < 1/4.
  for (std::size_t i = 1; i < errs.size(); ++i) {
    if (errs[i - 1] > 1e-14) CHECK(errs[i] <= errs[i - 1] / 4.0);
  }
}

TEST_CASE("operator Clenshaw applies the identity polynomial as S itself") {
  SurfaceMesh mesh = generate_circle(4);
  AssembledOperator op = assemble(mesh, coefficient_preset("matern", 10.0),
                                  MassMode::Consistent);
  ChebyshevPoly p = cheb_fit(identity_density(), op.lambda_min, op.lambda_max, 3);
  VectorXd w = surfield_test::random_vector(op.n, 5);
  VectorXd got = cheb_apply(p, [&](const VectorXd& v) { return apply_S(op, v); }, w);
  VectorXd want = apply_S(op, w);
  CHECK((got - want).norm() <= 1e-12 * want.norm());
}

TEST_CASE("operator Clenshaw on a diagonal operator matches scalar evaluation") {
  VectorXd diag(4);
  diag << 1.0, 2.0, 3.0, 4.0;
  SpectralDensity d = density_matern(1.0, 1.0);
  ChebyshevPoly p = cheb_fit(d, 0.5, 4.5, 24);
  VectorXd w = surfield_test::random_vector(4, 9);
  VectorXd got = cheb_apply(
      p, [&](const VectorXd& v) { return VectorXd(diag.asDiagonal() * v); }, w);
  for (int i = 0; i < 4; ++i) {
    CHECK(got(i) == doctest::Approx(cheb_eval(p, diag(i)) * w(i)).epsilon(1e-12));
  }
}

TEST_CASE("operator Clenshaw uses exactly one application per active degree") {
  VectorXd diag(3);
  diag << 1.0, 2.0, 3.0;
  VectorXd w = VectorXd::Ones(3);
  auto counted = [&](int* counter) {
    return [counter, &diag](const VectorXd& v) {
      ++*counter;
      return VectorXd(diag.asDiagonal() * v);
    };
  };
  // Unchopped degree 5: six applications.
  ChebyshevPoly p = cheb_fit(density_matern(1.0, 1.0), 0.5, 3.5, 5);
  int count = 0;
  cheb_apply(p, counted(&count), w);
  CHECK(count == 6);
  // Chopped to m: m+1 applications.
  ChebyshevPoly q = poly_from_coeffs({1.0, 0.5, 0.25, 1e-15, 1e-15}, 0.5, 3.5);
  q = chop(q, 1e-12);
  REQUIRE(q.active_degree() == 2);
  count = 0;
  cheb_apply(q, counted(&count), w);
  CHECK(count == 3);
  // Constant polynomial needs no applications at all.
  ChebyshevPoly c = poly_from_coeffs({4.0}, 0.5, 3.5);
  count = 0;
  VectorXd got = cheb_apply(c, counted(&count), w);
  CHECK(count == 0);
  CHECK((got - 4.0 * w).norm() == 0.0);
}

TEST_CASE("operator Clenshaw matches the spectral-decomposition oracle") {
  SurfaceMesh mesh = generate_icosphere(1);
  AssembledOperator op = assemble(mesh, coefficient_preset("matern", 10.0),
                                  MassMode::Consistent);
  SpectralDensity d = density_matern(10.0, 1.5);
  const int M = degree_rule(mesh_size(mesh), 2, 10.0, 0.05);
  ChebyshevPoly p = cheb_fit(d, op.lambda_min, op.lambda_max, M);
  DenseEig eig = dense_eig_sym(dense_S(op));
  VectorXd w = surfield_test::random_vector(op.n, 17);
  VectorXd evals(op.n);
  for (int i = 0; i < op.n; ++i) evals(i) = cheb_eval(p, eig.eigenvalues(i));
  VectorXd want = eig.eigenvectors *
                  (evals.asDiagonal() * (eig.eigenvectors.transpose() * w));
  VectorXd got = cheb_apply(p, [&](const VectorXd& v) { return apply_S(op, v); }, w);
  CHECK((got - want).norm() <= 1e-10 * want.norm());
}

TEST_CASE("operator Clenshaw rejects mismatched dimensions") {
  ChebyshevPoly p = poly_from_coeffs({1.0, 0.5}, 0.5, 3.5);
  auto op3 = [](const VectorXd& v) -> VectorXd {
    if (v.size() != 3) throw DimensionMismatch("operator expects size 3");
    return v;
  };
  CHECK_THROWS_AS(cheb_apply(p, op3, VectorXd::Ones(4)), DimensionMismatch);
}

TEST_CASE("chopped application stays within the remainder bound") {
  SurfaceMesh mesh = generate_circle(4);
  CoefficientField field = preset_circle_experiment();
  AssembledOperator op = assemble(mesh, field, MassMode::Consistent);
  SpectralDensity d = density_circle_experiment(1e4, 1.05);
  const int M = degree_rule(mesh_size(mesh), 1, field.v_minus, 0.1);
  const double eps = 1e-12;
  ChebyshevPoly full = cheb_fit(d, op.lambda_min, op.lambda_max, M);
  ChebyshevPoly cut = chop(full, eps);
  const double cmax = full.coeffs.cwiseAbs().maxCoeff();
  auto apply = [&](const VectorXd& v) { return apply_S(op, v); };
  for (unsigned seed = 0; seed < 5; ++seed) {
    VectorXd w = surfield_test::random_vector(op.n, 300 + seed);
    VectorXd a = cheb_apply(full, apply, w);
    VectorXd b = cheb_apply(cut, apply, w);
    const double bound =
        std::sqrt(static_cast<double>(op.n)) * M * cmax * eps * w.norm();
    CHECK((a - b).norm() <= bound);
  }
}

TEST_CASE("degree rule reproduces the closed-form example and monotonicity") {
  CHECK(degree_rule(std::exp(-1.0), 1, 1.0, 1.0) == 10);
  int prev = 0;
  for (double h : {0.5, 0.25, 0.125, 0.0625}) {
    const int M = degree_rule(h, 1, 1.0, 1.0);
    CHECK(M > prev);
    prev = M;
  }
  // Dimension raises the constant from 3.5 to 4.
  CHECK(degree_rule(0.1, 2, 1.0, 1.0) >= degree_rule(0.1, 1, 1.0, 1.0));
  CHECK_THROWS_AS(degree_rule(1.0, 1, 1.0, 1.0), InvalidMeshSize);
  CHECK_THROWS_AS(degree_rule(1.5, 1, 1.0, 1.0), InvalidMeshSize);
}

TEST_CASE("chop tolerance requirement scales as h^(3+d/2)/|log h|") {
  const double h = 0.01;
  CHECK(chop_epsilon_requirement(h, 1) ==
        doctest::Approx(std::pow(h, 3.5) / std::abs(std::log(h))).epsilon(1e-14));
  CHECK(chop_epsilon_requirement(h, 2) ==
        doctest::Approx(std::pow(h, 4.0) / std::abs(std::log(h))).epsilon(1e-14));
}

TEST_CASE("large-degree fit plus chop leaves the fine-ladder sampler unchanged") {
  // Finest ladder entry of the first experiment: the rule produces a degree
  // in the minutes-of-compute range, chop cuts it by an order of magnitude,
  // and the two samplers agree to the chop tolerance.
  SurfaceMesh mesh = generate_circle(13);
  CoefficientField field = preset_circle_experiment();
  AssembledOperator op = assemble(mesh, field, MassMode::Consistent);
  const double h = mesh_size(mesh);
  const int M = degree_rule(h, 1, field.v_minus, 1.0);
  CHECK(M >= 1000);
  SpectralDensity d = density_circle_experiment(1e4, 1.05);
  ChebyshevPoly full = cheb_fit(d, op.lambda_min, op.lambda_max, M);
  ChebyshevPoly cut = chop(full, 1e-12);
  REQUIRE(cut.chopped_degree.has_value());
  // The spectral interval spans four decades here, so the tail decays slowly:
  // chop removes a few hundred degrees rather than an order of magnitude.
  CHECK(*cut.chopped_degree < M);
  auto apply = [&](const VectorXd& v) { return apply_S(op, v); };
  VectorXd w = surfield_test::random_vector(op.n, 77);
  VectorXd a = cheb_apply(full, apply, w);
  VectorXd b = cheb_apply(cut, apply, w);
  CHECK((a - b).norm() <= 1e-10 * a.norm());
}

TEST_CASE("built-in densities match their closed forms and decay proxies") {
  const double lam = 37.0;
  SpectralDensity m = density_matern(10.0, 1.5);
  CHECK(m.gamma(lam) == doctest::Approx(std::pow(10.0 + lam, -1.5)).epsilon(1e-15));
  CHECK(m.alpha == 1.5);

  SpectralDensity c = density_circle_experiment(1e4, 1.05);
  const double want_c =
      std::pow(1e4, 1.05) *
      std::pow(lam + std::cos(0.9 * kPi) * std::sqrt(lam), -1.05);
  CHECK(c.gamma(lam) == doctest::Approx(want_c).epsilon(1e-14));

  SpectralDensity p = density_power(500.0, 1.25);
  CHECK(p.gamma(lam) == doctest::Approx(500.0 * std::pow(lam, -1.25)).epsilon(1e-15));

  SpectralDensity o = density_oscillatory(0.6);
  CHECK(o.gamma(lam) ==
        doctest::Approx(std::sin(lam) * std::pow(lam, -0.6)).epsilon(1e-15));

  // Decay proxy |gamma| * lambda^alpha stays bounded on a log grid.
  for (const SpectralDensity* d : {&m, &c, &p, &o}) {
    CHECK(density_decay_constant(*d, 10.0) < 1e7);
  }
}

TEST_CASE("densities resolve by name with their parameters") {
  std::map<std::string, double> params;
  params["kappa2"] = 10.0;
  CHECK(make_density("matern", 1.5, params).label == "matern");
  params.clear();
  params["v0"] = 1e4;
  CHECK(make_density("circle_experiment", 1.05, params).label == "circle_experiment");
  params.clear();
  params["c0"] = 500.0;
  CHECK(make_density("power", 1.25, params).label == "power");
  params.clear();
  CHECK(make_density("oscillatory", 0.6, params).label == "oscillatory");
  CHECK_THROWS_AS(make_density("unknown", 1.0, params), ConfigError);
  CHECK_THROWS_AS(make_density("matern", 1.0, params), ConfigError);  // kappa2 missing
}
