#include <doctest.h>

#include <random>

#include "qmod/bundle.hpp"

using namespace qmod;

namespace {

std::mt19937_64 rng(41);

SpectralField random_smooth(const TorusGeometry& geom, int rows, int cols,
                            int band, double amp) {
  std::normal_distribution<double> g;
  SpectralField f(geom, rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      for (int m1 = -band; m1 <= band; ++m1)
        for (int m2 = -band; m2 <= band; ++m2)
          f.coef(r, c, m1, m2) = amp * cx(g(rng), g(rng)) /
                                 (1.0 + m1 * m1 + m2 * m2);
  return f;
}

SpectralField random_hermitian_field(const TorusGeometry& geom, int d, int band,
                                     double amp) {
  SpectralField f = random_smooth(geom, d, d, band, amp);
  SpectralField out = f;
  out += f.dagger();
  out *= cx(0.5);
  return out;
}

SpectralField positive_metric(const TorusGeometry& geom, int d, int band,
                              double amp) {
  SpectralField u = random_hermitian_field(geom, d, band, amp);
  GridField expd = u.to_grid().herm_exp();
  return SpectralField::from_grid(geom, expd);
}

}  // namespace

TEST_CASE("mode derivatives match the analytic eigenvalues") {
  TorusGeometry geom(cx(0.3, 1.1), 2.0, 6);
  SpectralField e = SpectralField::mode(geom, 1, 1, 0, 0, 2, -3, cx(1.0));
  SpectralField dz = e.dz();
  CHECK(std::abs(dz.coef(0, 0, 2, -3) - geom.lambda_z(2, -3)) < 1e-14);
  SpectralField dzb = e.dzbar();
  CHECK(std::abs(dzb.coef(0, 0, 2, -3) - geom.lambda_zbar(2, -3)) < 1e-14);
  // z-derivative of an antiholomorphic mode pattern: lambda_zbar(m) =
  // -conj(lambda_z(m)).
  CHECK(std::abs(geom.lambda_zbar(2, -3) + std::conj(geom.lambda_z(2, -3))) <
        1e-14);
}

TEST_CASE("grid roundtrip and products are exact for band-limited data") {
  TorusGeometry geom(cx(0.0, 1.0), 1.0, 5);
  SpectralField f = random_smooth(geom, 2, 2, 5, 1.0);
  SpectralField back = SpectralField::from_grid(geom, f.to_grid());
  SpectralField diff = back - f;
  CHECK(diff.coef_norm() < 1e-12 * f.coef_norm());

  // Quadratic products of band-limited fields integrate exactly: compare the
  // grid integral of f g against the Parseval sum of coefficients.
  SpectralField g = random_smooth(geom, 2, 2, 5, 1.0);
  GridField prod = f.to_grid().matmul(g.dagger().to_grid());
  cx grid_int = geom.area() * prod.trace().mean();
  cx parseval = 0.0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      for (int m1 = -5; m1 <= 5; ++m1)
        for (int m2 = -5; m2 <= 5; ++m2)
          parseval += geom.area() * f.coef(r, c, m1, m2) *
                      std::conj(g.coef(r, c, m1, m2));
  CHECK(std::abs(grid_int - parseval) < 1e-12 * std::abs(parseval));
}

TEST_CASE("discrete Stokes: integrals of dzbar-derivatives vanish") {
  TorusGeometry geom(cx(0.2, 0.9), 1.7, 6);
  SpectralField f = random_smooth(geom, 1, 1, 6, 1.0);
  GridField d = f.dzbar().to_grid();
  CHECK(std::abs(geom.area() * d.entry(0, 0).mean()) < 1e-12);
  // dzbar dz + dz dzbar = 2 dz dzbar on scalars; they commute exactly.
  SpectralField ab = f.dz().dzbar();
  SpectralField ba = f.dzbar().dz();
  CHECK((ab - ba).coef_norm() < 1e-12 * f.coef_norm());
}

TEST_CASE("curvature of the flat metric vanishes") {
  TorusGeometry geom(cx(0.0, 1.0), 1.0, 6);
  SpectralField h = SpectralField::constant(geom, Matrix::Identity(2, 2));
  SpectralField alpha(geom, 2, 2);
  SpectralField f = curvature_form(geom, h, alpha);
  CHECK(f.sup_abs() < 1e-13);
}

TEST_CASE("conformal rank-1 curvature matches the spectral Laplacian oracle") {
  TorusGeometry geom(cx(0.3, 1.2), 2.3, 12);
  SpectralField u = random_hermitian_field(geom, 1, 2, 0.15);
  SpectralField h = SpectralField::from_grid(geom, u.to_grid().herm_exp());
  SpectralField alpha(geom, 1, 1);
  SpectralField f = curvature_form(geom, h, alpha);
  // sqrt(-1) Lambda F = g^{1bar1} F_{z zbar} should equal -(1/2) Delta_g u
  // with Delta_g = 2 g^{1bar1} dz dzbar.
  SpectralField lambda_f = f;
  lambda_f *= cx(geom.g_inverse());
  SpectralField lap = u.dz().dzbar();
  lap *= cx(-geom.g_inverse());
  SpectralField diff = lambda_f - lap;
  CHECK(diff.sup_abs() < 1e-7);

  // Degree normalization: the c1 integrand has zero integral.
  cx deg = geom.area() * f.to_grid().entry(0, 0).mean() * cx(0, 1) *
           cx(geom.g_inverse());
  CHECK(std::abs(deg) < 1e-10);
}

TEST_CASE("curvature transforms covariantly under constant gauge") {
  TorusGeometry geom(cx(0.1, 1.0), 1.0, 6);
  SpectralField h = positive_metric(geom, 2, 2, 0.25);
  SpectralField alpha = random_smooth(geom, 2, 2, 2, 0.2);
  SpectralField f = curvature_form(geom, h, alpha);

  Matrix g(2, 2);
  g << cx(1.1, 0.2), cx(0.3, -0.1), cx(0.0, 0.4), cx(0.8, 0.0);
  Matrix ginv = g.inverse();
  // h' = g^dag h g, alpha' = g^{-1} alpha g (constant gauge):
  // F' = g^{-1} F g exactly.
  GridField gg = SpectralField::constant(geom, g).to_grid();
  GridField ggd = SpectralField::constant(geom, g.adjoint().eval()).to_grid();
  GridField gi = SpectralField::constant(geom, ginv).to_grid();
  SpectralField h2 =
      SpectralField::from_grid(geom, ggd.matmul(h.to_grid()).matmul(gg));
  SpectralField alpha2 =
      SpectralField::from_grid(geom, gi.matmul(alpha.to_grid()).matmul(gg));
  SpectralField f2 = curvature_form(geom, h2, alpha2);
  SpectralField expected =
      SpectralField::from_grid(geom, gi.matmul(f.to_grid()).matmul(gg));
  SpectralField diff = f2 - expected;
  CHECK(diff.sup_abs() < 1e-10 * std::max(1.0, f.sup_abs()));
}

TEST_CASE("torus residual reduces to the absolute case for constant data") {
  TorusGeometry geom(cx(0.0, 1.0), 1.0, 5);
  Quiver q;
  q.add_vertex("v1");
  q.add_vertex("v2");
  q.add_arrow("a0", "v1", "v2");
  q.add_arrow("a1", "v1", "v2");
  TorusBundle bundle;
  bundle.ranks = {1, 1};
  bundle.alpha = {SpectralField(geom, 1, 1), SpectralField(geom, 1, 1)};
  bundle.phi = {SpectralField::constant(geom, Matrix::Identity(1, 1)),
                SpectralField::constant(geom, Matrix::Identity(1, 1))};
  TorusMetrics h = identity_metrics(geom, bundle.ranks);
  StabilityParameters p{{-1.0, 1.0}, {}, {}};
  auto res = vortex_residual_torus(geom, q, bundle, h, p);

  Representation rep{{1, 1},
                     {Matrix::Identity(1, 1), Matrix::Identity(1, 1)}};
  auto abs_res = moment_residual(q, rep, MetricAssignment::identity(rep), p);
  for (int v = 0; v < 2; ++v) {
    CHECK(std::abs(res[v].mean()(0, 0) - abs_res[v](0, 0)) < 1e-13);
    CHECK(res[v].sup_abs() ==
          doctest::Approx(std::abs(abs_res[v](0, 0))).epsilon(1e-10));
  }
}

TEST_CASE("discrete trace identity for the torus residual") {
  TorusGeometry geom(cx(0.25, 1.3), 1.9, 6);
  Quiver q;
  q.add_vertex("v1", 2);
  q.add_vertex("v2", 1);
  q.add_arrow("a", "v1", "v2");
  TorusBundle bundle;
  bundle.ranks = {1, 2};
  bundle.alpha = {SpectralField(geom, 1, 1), random_smooth(geom, 2, 2, 2, 0.2)};
  bundle.phi = {random_smooth(geom, 2, 1, 2, 0.5)};
  TorusMetrics h;
  h.h = {positive_metric(geom, 1, 2, 0.3), positive_metric(geom, 2, 2, 0.3)};
  StabilityParameters p{{0.4, -0.2}, {}, {}};
  auto res = vortex_residual_torus(geom, q, bundle, h, p);
  // Grid average of the traces summed over vertices equals -sum tau' r
  // plus the (vanishing) curvature integrals.
  cx acc = 0.0;
  for (int v = 0; v < 2; ++v) acc += res[v].to_grid().trace().mean();
  cx expected = -(p.tau_prime[0] * 1 + p.tau_prime[1] * 2);
  CHECK(std::abs(acc - expected) < 1e-10);
}

TEST_CASE("heat flow: conformal line bundle converges and keeps the mean") {
  TorusGeometry geom(cx(0.2, 1.0), 1.5, 8);
  Quiver q;
  q.add_vertex("v");
  TorusBundle bundle;
  bundle.ranks = {1};
  bundle.alpha = {SpectralField(geom, 1, 1)};
  TorusMetrics h0;
  SpectralField u0 = random_hermitian_field(geom, 1, 3, 0.4);
  u0.coef(0, 0, 0, 0) += 0.7;  // nonzero mean to track
  h0.h = {SpectralField::from_grid(geom, u0.to_grid().herm_exp())};
  StabilityParameters p{{0.0}, {}, {}};
  TorusFlowOptions opts;
  opts.tol = 1e-11;
  auto [h, report] = heat_flow_torus(geom, q, bundle, p, opts, h0);
  REQUIRE(report.verdict == FlowVerdict::converged);
  SpectralField logh =
      SpectralField::from_grid(geom, h.h[0].to_grid().herm_log());
  // Constant limit with the mean of u0 preserved.
  CHECK(std::abs(logh.coef(0, 0, 0, 0) - u0.coef(0, 0, 0, 0)) < 2e-6);
  SpectralField centered = logh;
  centered.coef(0, 0, 0, 0) = 0.0;
  CHECK(centered.sup_abs() < 1e-8);
}

TEST_CASE("heat flow: absolute-case embedded Kronecker solves to h2/h1 = 1/2") {
  TorusGeometry geom(cx(0.0, 1.0), 1.0, 5);
  Quiver q;
  q.add_vertex("v1");
  q.add_vertex("v2");
  q.add_arrow("a0", "v1", "v2");
  q.add_arrow("a1", "v1", "v2");
  TorusBundle bundle;
  bundle.ranks = {1, 1};
  bundle.alpha = {SpectralField(geom, 1, 1), SpectralField(geom, 1, 1)};
  bundle.phi = {SpectralField::constant(geom, Matrix::Identity(1, 1)),
                SpectralField::constant(geom, Matrix::Identity(1, 1))};
  StabilityParameters p{{-1.0, 1.0}, {}, {}};
  TorusFlowOptions opts;
  opts.tol = 1e-10;
  auto [h, report] = heat_flow_torus(geom, q, bundle, p, opts);
  REQUIRE(report.verdict == FlowVerdict::converged);
  cx ratio = h.h[1].mean()(0, 0) / h.h[0].mean()(0, 0);
  CHECK(std::abs(ratio - cx(0.5)) < 1e-9);
  // Constant over the grid.
  SpectralField offmean = h.h[1];
  offmean.coef(0, 0, 0, 0) = 0.0;
  CHECK(offmean.sup_abs() < 1e-9);
}

TEST_CASE("heat flow: infeasible weights are rejected") {
  TorusGeometry geom(cx(0.0, 1.0), 1.0, 4);
  Quiver q;
  q.add_vertex("v");
  TorusBundle bundle;
  bundle.ranks = {1};
  bundle.alpha = {SpectralField(geom, 1, 1)};
  StabilityParameters p{{0.5}, {}, {}};
  auto [h, report] = heat_flow_torus(geom, q, bundle, p, {});
  CHECK(report.verdict == FlowVerdict::infeasible);
}

TEST_CASE("holomorphy residual detects non-morphisms") {
  TorusGeometry geom(cx(0.0, 1.0), 1.0, 5);
  Quiver q;
  q.add_vertex("v1");
  q.add_vertex("v2");
  q.add_arrow("a", "v1", "v2");
  TorusBundle bundle;
  bundle.ranks = {1, 1};
  bundle.alpha = {SpectralField(geom, 1, 1), SpectralField(geom, 1, 1)};
  bundle.phi = {SpectralField::constant(geom, Matrix::Identity(1, 1))};
  CHECK(bundle.holomorphy_residual(q) < 1e-14);
  bundle.phi[0].coef(0, 0, 1, 0) = 0.3;  // non-constant against flat alpha
  CHECK(bundle.holomorphy_residual(q) > 1e-3);
}
