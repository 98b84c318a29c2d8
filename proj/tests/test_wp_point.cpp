#include <doctest.h>

#include "qmod/pointbackend.hpp"

using namespace qmod;

namespace {

Quiver kronecker(int arrows) {
  Quiver q;
  q.add_vertex("v1");
  q.add_vertex("v2");
  for (int i = 0; i < arrows; ++i)
    q.add_arrow("a" + std::to_string(i), "v1", "v2");
  return q;
}

// phi(s) = (1, s) on the two-arrow Kronecker quiver, dims (1,1).
// Closed forms with the det-h gauge: h2/h1 = 1/(1+|s|^2) =: rho,
// G(s) = rho(s)^2 and R_{1 1b 1 1b}(0) = 2.
FamilySpec kronecker_family(const Vector& base) {
  FamilySpec fam;
  fam.params = 1;
  fam.base = base;
  fam.dims = {1, 1};
  MPoly<Matrix> p0 = MPoly<Matrix>::constant(1, Matrix::Identity(1, 1));
  MPoly<Matrix> p1;
  p1.k = 1;
  p1.add_term({0}, (base[0] * Matrix::Identity(1, 1)).eval());
  p1.add_term({1}, Matrix::Identity(1, 1));
  fam.arrows = {p0, p1};
  return fam;
}

StabilityParameters kron_params() { return {{-1.0, 1.0}, {}, {}}; }

}  // namespace

TEST_CASE("kodaira_spencer frozen values on the Kronecker family") {
  Quiver q = kronecker(2);
  PointFamilyBackend backend(q, {}, kronecker_family(Vector::Zero(1)),
                             kron_params());
  // At s = 0 the naive representative (0, -1) is already harmonic.
  const auto& mu = backend.mu(0);
  CHECK(sup_abs(mu[0]) < 1e-9);
  CHECK(std::abs(mu[1](0, 0) - cx(-1.0)) < 1e-9);

  // Harmonicity: (d0)* mu = 0.
  CHECK(backend.center().norm0(backend.center().delta_adjoint(mu)) < 1e-9);

  // The projected representative differs from the naive one by im(d0):
  // here they coincide.
  Matrix g = backend.gram(Vector::Zero(1));
  CHECK(std::abs(g(0, 0) - cx(1.0)) < 1e-8);
}

TEST_CASE("constant family has vanishing mu and gram") {
  Quiver q = kronecker(2);
  FamilySpec fam;
  fam.params = 1;
  fam.base = Vector::Zero(1);
  fam.dims = {1, 1};
  fam.arrows = {MPoly<Matrix>::constant(1, Matrix::Identity(1, 1)),
                MPoly<Matrix>::constant(1, Matrix::Identity(1, 1))};
  PointFamilyBackend backend(q, {}, fam, kron_params());
  CHECK(backend.center().norm1(backend.mu(0)) < 1e-12);
  CHECK(sup_abs(backend.gram(Vector::Zero(1))) < 1e-12);
}

TEST_CASE("rigid family projects to zero") {
  // A2 with phi(s) = 1 + s: H1 = 0, so the projected representative vanishes.
  Quiver q = kronecker(1);
  FamilySpec fam;
  fam.params = 1;
  fam.base = Vector::Zero(1);
  fam.dims = {1, 1};
  MPoly<Matrix> p;
  p.k = 1;
  p.add_term({0}, Matrix::Identity(1, 1));
  p.add_term({1}, Matrix::Identity(1, 1));
  fam.arrows = {p};
  PointFamilyBackend backend(q, {}, fam, kron_params());
  CHECK(backend.center().norm1(backend.mu(0)) < 1e-10);
}

TEST_CASE("gram matches the closed form along the family") {
  Quiver q = kronecker(2);
  Vector base(1);
  base[0] = cx(0.37, -0.21);
  PointFamilyBackend backend(q, {}, kronecker_family(base), kron_params());
  Matrix g = backend.gram(Vector::Zero(1));
  double rho = 1.0 / (1.0 + std::norm(base[0]));
  CHECK(std::abs(g(0, 0) - cx(rho * rho)) < 1e-8);
}

TEST_CASE("wp derivative: formula equals finite differences and closed form") {
  Quiver q = kronecker(2);
  Vector base(1);
  base[0] = cx(0.4, 0.1);
  PointFamilyBackend backend(q, {}, kronecker_family(base), kron_params());
  WpGeometry geo(backend);

  Tensor3 formula = geo.derivative_formula();
  Tensor3 fd = geo.derivative_fd();
  CHECK(WpGeometry<PointFamilyBackend>::tensor3_gap(formula, fd) < 1e-4);

  double rho = 1.0 / (1.0 + std::norm(base[0]));
  cx closed = -2.0 * std::conj(base[0]) * rho * rho * rho;
  CHECK(std::abs(formula.at(0, 0, 0) - closed) < 1e-7);
}

TEST_CASE("mu_{i;k} is delta-adjoint-closed") {
  Quiver q = kronecker(2);
  Vector base(1);
  base[0] = cx(0.4, 0.1);
  PointFamilyBackend backend(q, {}, kronecker_family(base), kron_params());
  auto mik = backend.mu_ik(0, 0);
  CHECK(backend.center().norm0(backend.center().delta_adjoint(mik)) < 1e-6);
}

TEST_CASE("normal coordinates kill the first derivatives") {
  Quiver q = kronecker(2);
  Vector base(1);
  base[0] = cx(0.4, 0.1);
  PointFamilyBackend backend(q, {}, kronecker_family(base), kron_params());
  WpGeometry geo(backend);
  ReparamData rep = geo.normal_coordinates();
  PointFamilyBackend nb = backend.reparameterized(rep);
  WpGeometry ngeo(nb);

  Matrix g = ngeo.metric();
  CHECK(std::abs(g(0, 0) - cx(1.0)) < 1e-7);

  Tensor3 fd = ngeo.derivative_fd();
  CHECK(fd.max_abs() < 1e-6);
  CHECK(ngeo.harmonic_mu_ik_norm() < 1e-5);
}

TEST_CASE("curvature: tf formula equals the fd oracle and the frozen value") {
  Quiver q = kronecker(2);
  PointFamilyBackend backend(q, {}, kronecker_family(Vector::Zero(1)),
                             kron_params());
  WpGeometry geo(backend);
  // s = 0 is already a normal center: G = 1, dG = 0.
  CHECK(geo.metric()(0, 0).real() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(geo.derivative_formula().max_abs() < 1e-8);

  CurvatureBreakdown tf = geo.curvature_tf();
  CHECK(std::abs(tf.total.at(0, 0, 0, 0) - cx(2.0)) < 1e-7);
  CHECK(tf.wedge_term.max_abs() == 0.0);

  FdQuality quality;
  Tensor4 fd = geo.curvature_fd(&quality);
  CHECK(std::abs(fd.at(0, 0, 0, 0) - cx(2.0)) < 1e-5);
  double gap = std::abs(fd.at(0, 0, 0, 0) - tf.total.at(0, 0, 0, 0)) /
               (std::abs(fd.at(0, 0, 0, 0)) + 1e-12);
  CHECK(gap < 1e-3);
}

TEST_CASE("curvature at a generic center after reparameterization") {
  Quiver q = kronecker(2);
  Vector base(1);
  base[0] = cx(0.5, -0.3);
  PointFamilyBackend backend(q, {}, kronecker_family(base), kron_params());
  WpGeometry geo(backend);
  PointFamilyBackend nb = backend.reparameterized(geo.normal_coordinates());
  WpGeometry ngeo(nb);

  CurvatureBreakdown tf = ngeo.curvature_tf();
  Tensor4 fd = ngeo.curvature_fd();
  double gap = std::abs(fd.at(0, 0, 0, 0) - tf.total.at(0, 0, 0, 0)) /
               (std::abs(fd.at(0, 0, 0, 0)) + 1e-12);
  CHECK(gap < 1e-3);
  // The moduli space here is P^1 with a Fubini-Study metric: in the
  // G-unitary frame the holomorphic sectional curvature is constant, so the
  // normalized value 2 recurs at every center.
  CHECK(std::abs(tf.total.at(0, 0, 0, 0) - cx(2.0)) < 1e-5);
}

TEST_CASE("block families produce block grams") {
  // Disjoint union of two Kronecker pairs, one parameter each.
  Quiver q;
  q.add_vertex("v1");
  q.add_vertex("v2");
  q.add_vertex("w1");
  q.add_vertex("w2");
  q.add_arrow("a0", "v1", "v2");
  q.add_arrow("a1", "v1", "v2");
  q.add_arrow("b0", "w1", "w2");
  q.add_arrow("b1", "w1", "w2");
  FamilySpec fam;
  fam.params = 2;
  fam.base = Vector::Zero(2);
  fam.base[0] = cx(0.2, 0.0);
  fam.base[1] = cx(0.0, 0.3);
  fam.dims = {1, 1, 1, 1};
  MPoly<Matrix> c = MPoly<Matrix>::constant(2, Matrix::Identity(1, 1));
  MPoly<Matrix> s0, s1;
  s0.k = 2;
  s0.add_term({1, 0}, Matrix::Identity(1, 1));
  s1.k = 2;
  s1.add_term({0, 1}, Matrix::Identity(1, 1));
  fam.arrows = {c, s0, c, s1};
  StabilityParameters params{{-1.0, 1.0, -1.0, 1.0}, {}, {}};
  PointFamilyBackend backend(q, {}, fam, params);
  Matrix g = backend.gram(Vector::Zero(2));
  CHECK(std::abs(g(0, 1)) < 1e-10);
  CHECK(g(0, 0).real() > 0.0);
  CHECK(g(1, 1).real() > 0.0);

  // Mixed-block curvature components vanish.
  WpGeometry geo(backend);
  PointFamilyBackend nb = backend.reparameterized(geo.normal_coordinates());
  WpGeometry ngeo(nb);
  CurvatureBreakdown tf = ngeo.curvature_tf();
  CHECK(std::abs(tf.total.at(0, 1, 0, 1)) < 1e-6);
  CHECK(std::abs(tf.total.at(0, 0, 1, 1)) < 1e-6);
  double gap = 0.0;
  Tensor4 fd = ngeo.curvature_fd();
  for (size_t i = 0; i < fd.v.size(); ++i)
    gap = std::max(gap, std::abs(fd.v[i] - tf.total.v[i]));
  CHECK(gap / (fd.max_abs() + 1e-12) < 1e-3);
}

TEST_CASE("kahler check on a two-parameter family") {
  Quiver q = kronecker(3);
  FamilySpec fam;
  fam.params = 2;
  fam.base = Vector::Zero(2);
  fam.dims = {1, 1};
  MPoly<Matrix> c = MPoly<Matrix>::constant(2, Matrix::Identity(1, 1));
  MPoly<Matrix> p0, p1;
  p0.k = 2;
  p0.add_term({0, 0}, Matrix::Constant(1, 1, cx(0.4)));
  p0.add_term({1, 0}, Matrix::Identity(1, 1));
  p1.k = 2;
  p1.add_term({0, 0}, Matrix::Constant(1, 1, cx(0.1, 0.2)));
  p1.add_term({0, 1}, Matrix::Identity(1, 1));
  // Couple the parameters so the metric is not block trivial.
  p1.add_term({2, 0}, Matrix::Constant(1, 1, cx(0.3)));
  fam.arrows = {c, p0, p1};
  StabilityParameters params{{-1.0, 1.0}, {}, {}};
  PointFamilyBackend backend(q, {}, fam, params);
  WpGeometry geo(backend);

  Matrix g = geo.metric();
  CHECK(sup_abs(g - g.adjoint().eval()) <= 1e-12 * sup_abs(g));
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  KahlerReport kr = geo.kahler_check();
  CHECK(kr.closed);
  CHECK(kr.antisymmetry_residual <= 1e-4 * kr.scale);

  Tensor3 formula = geo.derivative_formula();
  Tensor3 fd = geo.derivative_fd();
  CHECK(WpGeometry<PointFamilyBackend>::tensor3_gap(formula, fd) < 1e-4);
}

TEST_CASE("orthogonality of mu against delta images") {
  Quiver q = kronecker(2);
  Vector base(1);
  base[0] = cx(0.3, 0.2);
  PointFamilyBackend backend(q, {}, kronecker_family(base), kron_params());
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  for (int t = 0; t < 25; ++t) {
    VertexBlocks xi{Matrix::Constant(1, 1, cx(g(rng), g(rng))),
                    Matrix::Constant(1, 1, cx(g(rng), g(rng)))};
    cx ip = backend.center().inner1(backend.mu(0), backend.center().delta(xi));
    CHECK(std::abs(ip) < 1e-9);
  }
}
