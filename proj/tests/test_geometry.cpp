#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "minorlab/geometry.hpp"
#include "minorlab/rng.hpp"

using namespace minorlab;

namespace {

// Regular simplex in R^d: centred standard basis of R^{d+1} in an orthonormal
// basis of the hyperplane sum x = 0.
std::vector<std::vector<double>> regular_simplex(std::size_t d) {
  Eigen::MatrixXd E = Eigen::MatrixXd::Identity(d + 1, d + 1);
  E.rowwise() -= E.colwise().mean();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d + 1, d);
  for (std::size_t j = 0; j < d; ++j) {
    A(j, j) = 1;
    A(d, j) = -1;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d + 1, d);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i <= d; ++i) {
    Eigen::VectorXd p = Q.transpose() * E.col(static_cast<Eigen::Index>(i));
    out.emplace_back(p.data(), p.data() + d);
  }
  return out;
}

Eigen::VectorXd barycentric(const std::vector<std::vector<double>>& V, const std::vector<double>& q) {
  const auto d = static_cast<Eigen::Index>(q.size());
  Eigen::MatrixXd M(d + 1, d + 1);
  Eigen::VectorXd b(d + 1);
  for (Eigen::Index j = 0; j <= d; ++j) {
    for (Eigen::Index k = 0; k < d; ++k) M(k, j) = V[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
    M(d, j) = 1;
  }
  for (Eigen::Index k = 0; k < d; ++k) b(k) = q[static_cast<std::size_t>(k)];
  b(d) = 1;
  return M.fullPivLu().solve(b);
}

}  // namespace

TEST_CASE("sphere samples") {
  PolytopeSample P = sample_polytope(3, 2.0, 100, 4);
  CHECK(P.vertices.size() == 100);
  for (const auto& v : P.vertices) CHECK(std::hypot(v[0], v[1], v[2]) == doctest::Approx(2.0).epsilon(1e-14));
  PolytopeSample Q = sample_polytope(3, 2.0, 100, 4);
  CHECK(P.vertices == Q.vertices);
  CHECK_THROWS_AS(sample_polytope(3, 1.0, 3, 1), std::invalid_argument);
}

TEST_CASE("simplex solver") {
  // min -x1 - x2 s.t. x1 + 2 x2 + s1 = 4, 3 x1 + x2 + s2 = 6.
  LPResult r = simplex_solve({{1, 2, 1, 0}, {3, 1, 0, 1}}, {4, 6}, {-1, -1, 0, 0});
  REQUIRE(r.status == LPResult::Status::Optimal);
  CHECK(r.objective == doctest::Approx(-2.8));
  CHECK(r.x[0] == doctest::Approx(1.6));
  CHECK(r.x[1] == doctest::Approx(1.2));
  CHECK(simplex_solve({{1, 1}}, {-1}, {0, 0}).status == LPResult::Status::Infeasible);
  CHECK(simplex_solve({{1, -1}}, {0}, {-1, 0}).status == LPResult::Status::Unbounded);
}

TEST_CASE("hull membership basics") {
  PolytopeSample P = sample_polytope(2, 1.0, 50, 3);
  CHECK(hull_contains(P, {0.0, 0.0}));
  CHECK_FALSE(hull_contains(P, {2.0, 0.0}));
  CHECK(hull_contains(P, P.vertices[7]));
}

TEST_CASE("LP membership agrees with barycentric coordinates on regular simplices") {
  CounterStream s(31, StreamPurpose::Fixture, 0);
  for (std::size_t d = 2; d <= 5; ++d) {
    auto V = regular_simplex(d);
    std::size_t agree = 0, tested = 0;
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> q(d);
      for (auto& x : q) x = 2.0 * s.next_uniform() - 1.0;
      Eigen::VectorXd lam = barycentric(V, q);
      if (lam.cwiseAbs().minCoeff() < 1e-7) continue;  // too close to a facet to call
      ++tested;
      agree += hull_contains(V, q) == (lam.minCoeff() >= 0);
    }
    CAPTURE(d);
    CHECK(agree == tested);
    CHECK(tested > 900);
  }
}

TEST_CASE("membership is monotone along rays from the origin") {
  PolytopeSample P = sample_polytope(3, 1.0, 60, 8);
  REQUIRE(hull_contains(P, {0.0, 0.0, 0.0}));
  CounterStream s(32, StreamPurpose::Fixture, 0);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> x(3);
    for (auto& v : x) v = 2.0 * s.next_uniform() - 1.0;
    if (!hull_contains(P, x)) continue;
    for (double t : {0.25, 0.5, 0.9}) CHECK(hull_contains(P, {t * x[0], t * x[1], t * x[2]}));
  }
}

TEST_CASE("square: vertical edges are not transverse to e2") {
  PolytopeSample P;
  P.d = 2;
  P.vertices = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  TransversalityReport r = transversality_check(P, {0.0, 1.0});
  CHECK(r.n_facets == 4);
  CHECK_FALSE(r.all_transverse);
  CHECK(r.offenders.size() == 2);
  for (const auto& f : r.offenders) CHECK(f.normal[1] == doctest::Approx(0.0));
  CHECK_THROWS_AS(transversality_check(P, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("random samples are transverse to e2") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TransversalityReport r = transversality_check(sample_polytope(2, 1.0, 100, seed), {0.0, 1.0});
    CHECK(r.all_transverse);
  }
  TransversalityReport r3 = transversality_check(sample_polytope(3, 1.0, 80, 1), {0.0, 0.0, 1.0});
  CHECK(r3.all_transverse);
  CHECK(r3.n_facets == 2 * 80 - 4);  // simplicial sphere triangulation
}

TEST_CASE("facet enumeration is limited to d <= 3") {
  CHECK_THROWS_AS(transversality_check(sample_polytope(4, 1.0, 20, 1), {0, 0, 0, 1}), std::invalid_argument);
}

TEST_CASE("hull of 200 points on the circle of radius 2 is close to the disk") {
  PolytopeSample P = sample_polytope(2, 2.0, 200, 5);
  const double h = hausdorff_probe_2d(P, 1000);
  CHECK(h >= 0);
  CHECK(h < 0.1);
}

TEST_CASE("hull containment of a sublevel set") {
  PolytopeSample P = sample_polytope(2, 2.0, 200, 5);
  auto H = symbolic::parse_scalar("x1^2 + x2^2", 2);
  SublevelContainment in = hull_contains_sublevel(P, H, 1.0, 200, 3);
  CHECK(in.contained);
  CHECK(in.n_inside == 200);
  SublevelContainment out = hull_contains_sublevel(P, H, 9.0, 50, 3);
  CHECK_FALSE(out.contained);
  CHECK(out.first_outside.has_value());
}
