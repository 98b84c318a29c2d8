#include <doctest.h>

#include <random>

#include "qmod/representation.hpp"
#include "qmod/stability.hpp"

using namespace qmod;

namespace {

Quiver a2() {
  Quiver q;
  q.add_vertex("v1");
  q.add_vertex("v2");
  q.add_arrow("a", "v1", "v2");
  return q;
}

Quiver commuting_square() {
  // v1 -> v2 -> v4 and v1 -> v3 -> v4 with relation (d c) - (b a).
  Quiver q;
  q.add_vertex("v1");
  q.add_vertex("v2");
  q.add_vertex("v3");
  q.add_vertex("v4");
  q.add_arrow("a", "v1", "v2");
  q.add_arrow("b", "v2", "v4");
  q.add_arrow("c", "v1", "v3");
  q.add_arrow("d", "v3", "v4");
  return q;
}

Relation square_relation(const Quiver& q) {
  Relation r;
  r.terms.push_back(
      {cx(1.0), Path::of_arrows(q, {q.arrow_index("b"), q.arrow_index("a")})});
  r.terms.push_back(
      {cx(-1.0), Path::of_arrows(q, {q.arrow_index("d"), q.arrow_index("c")})});
  return r;
}

}  // namespace

TEST_CASE("quiver construction rejects bad data") {
  Quiver q;
  q.add_vertex("v1");
  CHECK_THROWS_AS(q.add_vertex("v1"), QuiverError);
  CHECK_THROWS_AS(q.add_arrow("a", "v1", "nope"), QuiverError);
  CHECK_THROWS_AS(q.add_vertex("w", 0), QuiverError);
}

TEST_CASE("trivial path evaluates to the identity") {
  Quiver q = a2();
  Representation rep{{3, 3}, {Matrix::Identity(3, 3)}};
  Matrix id = evaluate_path(q, rep, Path::trivial(0));
  CHECK(sup_abs(id - Matrix::Identity(3, 3)) == 0.0);
}

TEST_CASE("single-arrow path evaluates to the arrow map") {
  Quiver q = a2();
  Representation rep{{1, 1}, {Matrix::Constant(1, 1, cx(2.0))}};
  Matrix m = evaluate_path(q, rep, Path::of_arrows(q, {0}));
  CHECK(m(0, 0) == cx(2.0));
}

TEST_CASE("nilpotent loop squares to zero") {
  Quiver q;
  q.add_vertex("v");
  q.add_arrow("a", "v", "v");
  Matrix n(2, 2);
  n << 0, 1, 0, 0;
  Representation rep{{2}, {n}};
  Matrix m = evaluate_path(q, rep, Path::of_arrows(q, {0, 0}));
  CHECK(sup_abs(m) == 0.0);
}

TEST_CASE("path evaluation is functorial under composition") {
  Quiver q = commuting_square();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  auto rnd = [&](int r, int c) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = cx(g(rng), g(rng));
    return m;
  };
  Representation rep{{2, 3, 2, 2}, {rnd(3, 2), rnd(2, 3), rnd(2, 2), rnd(2, 2)}};
  Path p = Path::of_arrows(q, {q.arrow_index("b")});
  Path r = Path::of_arrows(q, {q.arrow_index("a")});
  Matrix lhs = evaluate_path(q, rep, p.compose(q, r));
  Matrix rhs = evaluate_path(q, rep, p) * evaluate_path(q, rep, r);
  CHECK(sup_abs(lhs - rhs) <= 1e-13 * std::max(1.0, sup_abs(rhs)));
}

TEST_CASE("relation evaluation: zero rep and commuting maps") {
  Quiver q = commuting_square();
  Relation r = square_relation(q);

  Representation zero{{1, 1, 1, 1},
                      {Matrix::Zero(1, 1), Matrix::Zero(1, 1),
                       Matrix::Zero(1, 1), Matrix::Zero(1, 1)}};
  CHECK(sup_abs(evaluate_relation(q, zero, r)) == 0.0);

  Representation comm{{1, 1, 1, 1},
                      {Matrix::Constant(1, 1, cx(2.0)), Matrix::Constant(1, 1, cx(3.0)),
                       Matrix::Constant(1, 1, cx(6.0)), Matrix::Constant(1, 1, cx(1.0))}};
  CHECK(sup_abs(evaluate_relation(q, comm, r)) == 0.0);
  CHECK(satisfies_relations(q, comm, {r}));

  Representation generic{{1, 1, 1, 1},
                         {Matrix::Constant(1, 1, cx(2.0)), Matrix::Constant(1, 1, cx(3.0)),
                          Matrix::Constant(1, 1, cx(1.0)), Matrix::Constant(1, 1, cx(1.0))}};
  Matrix val = evaluate_relation(q, generic, r);
  CHECK(val(0, 0) == cx(5.0));
  CHECK_FALSE(satisfies_relations(q, generic, {r}));
}

TEST_CASE("relation linearity in coefficients") {
  Quiver q = commuting_square();
  Relation r = square_relation(q);
  Representation rep{{1, 1, 1, 1},
                     {Matrix::Constant(1, 1, cx(2.0)), Matrix::Constant(1, 1, cx(3.0)),
                      Matrix::Constant(1, 1, cx(1.0)), Matrix::Constant(1, 1, cx(7.0))}};
  Relation scaled = r;
  cx alpha(2.0, -1.5);
  for (auto& t : scaled.terms) t.coeff *= alpha;
  CHECK(sup_abs(evaluate_relation(q, rep, scaled) -
                (alpha * evaluate_relation(q, rep, r)).eval()) < 1e-14);
}

TEST_CASE("relation endpoint validation") {
  Quiver q = commuting_square();
  Relation bad;
  bad.terms.push_back({cx(1.0), Path::of_arrows(q, {q.arrow_index("a")})});
  bad.terms.push_back({cx(1.0), Path::of_arrows(q, {q.arrow_index("b")})});
  Representation rep{{1, 1, 1, 1},
                     {Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                      Matrix::Identity(1, 1), Matrix::Identity(1, 1)}};
  CHECK_THROWS_AS(evaluate_relation(q, rep, bad), QuiverError);
}

TEST_CASE("sigma_slope hand values") {
  CHECK(sigma_slope({1}, 0.0, {}) == 0.0);
  CHECK(sigma_slope({1, 2}, 0.0, {3.0}) == doctest::Approx(1.5));
  CHECK(sigma_slope({2, 3}, 5.0, {1.0}) == doctest::Approx(7.0 / 3.0));
}

TEST_CASE("sigma_slope scale invariance") {
  std::vector<long> ranks{2, 5, 9};
  std::vector<double> sigma{0.7, 1.3};
  double base = sigma_slope(ranks, 4.0, sigma);
  std::vector<long> scaled{6, 15, 27};
  CHECK(sigma_slope(scaled, 12.0, sigma) == doctest::Approx(base));
}

TEST_CASE("feasibility report") {
  Quiver q = a2();
  StabilityParameters p;
  p.tau_prime = {-1.0, 1.0};
  auto rep = check_feasibility(q, {1, 1}, p);
  CHECK(rep.feasible);
  CHECK(rep.trace_sum == 0.0);

  p.tau_prime = {1.0, 1.0};
  auto rep2 = check_feasibility(q, {1, 1}, p);
  CHECK_FALSE(rep2.feasible);
  CHECK(rep2.trace_sum == doctest::Approx(2.0));

  Quiver lone;
  lone.add_vertex("v");
  StabilityParameters p3;
  p3.tau_prime = {0.0};
  CHECK(check_feasibility(lone, {4}, p3).feasible);
}

TEST_CASE("feasibility is invariant under vertex permutation") {
  Quiver q1;
  q1.add_vertex("v1");
  q1.add_vertex("v2");
  Quiver q2;
  q2.add_vertex("v2");
  q2.add_vertex("v1");
  StabilityParameters p1{{-2.0, 1.0}, {}, {}};
  StabilityParameters p2{{1.0, -2.0}, {}, {}};
  CHECK(check_feasibility(q1, {1, 2}, p1).feasible ==
        check_feasibility(q2, {2, 1}, p2).feasible);
}

TEST_CASE("sigma/tau consistency per the step relation") {
  Quiver q = a2();
  StabilityParameters p;
  p.tau_prime = {-1.0, 1.0};
  p.tau = std::vector<double>{0.0, 2.0};
  p.sigma = std::vector<double>{2.0};
  auto rep = check_feasibility(q, {1, 1}, p);
  CHECK(rep.sigma_consistent);
  CHECK(rep.sigma_positive);

  p.sigma = std::vector<double>{-2.0};
  auto rep2 = check_feasibility(q, {1, 1}, p);
  CHECK_FALSE(rep2.sigma_consistent);
}
