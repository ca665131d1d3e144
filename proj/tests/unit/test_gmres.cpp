#include <catch_amalgamated.hpp>

#include <cmath>

#include "kls/core/householder.hpp"
#include "kls/core/random.hpp"
#include "kls/gmres.hpp"
#include "kls/problems.hpp"

using namespace kls;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Vector true_relres(const LinearOperator& A, const Vector& x, const Vector& b) {
  Vector r(A.rows());
  A.apply(x, r);
  for (Index i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return Vector{norm2(r) / norm2(b)};
}

}  // namespace

TEST_CASE("identity converges in one iteration", "[gmres]") {
  const auto I = CsrMatrix::from_dense(DenseColMat::identity(7));
  Rng rng(1);
  const auto b = rng.normal_vector(7);
  for (Scheme s : all_schemes) {
    GmresConfig c;
    c.scheme = s;
    c.rtol = 1e-12;
    const auto r = gmres_solve(I, b, c);
    CHECK(r.iterations == 1);
    CHECK(r.converged);
    for (Index i = 0; i < 7; ++i) CHECK_THAT(r.x[i], WithinAbs(b[i], 1e-14));
  }
}

TEST_CASE("full GMRES solves a small nonsymmetric system", "[gmres]") {
  const auto A = manteuffel_build(ManteuffelSpec{5, 0.5});
  Rng rng(2);
  const auto xs = rng.normal_vector(25);
  Vector b(25);
  A.apply(xs, b);
  for (Scheme s : {Scheme::Cgs2, Scheme::Dcgs2, Scheme::Mgs, Scheme::Householder, Scheme::IcwyMgs}) {
    CAPTURE(scheme_id(s));
    GmresConfig c;
    c.scheme = s;
    c.max_iters = 25;
    c.rtol = 1e-12;
    const auto r = gmres_solve(A, b, c);
    CHECK(r.converged);
    for (Index i = 0; i < 25; ++i) CHECK_THAT(r.x[i], WithinAbs(xs[i], 1e-9));
    CHECK(true_relres(A, r.x, b)[0] < 1e-11);
    CHECK(r.backward_errors.back() < 1e-14);
  }
}

TEST_CASE("residual history: monotone, matches the true residual", "[gmres]") {
  const auto L = laplace3d(6, 6, 6);
  Rng rng(3);
  const auto b = rng.normal_vector(L.rows());
  GmresConfig c;
  c.max_iters = 12;
  const auto r = gmres_solve(L, b, c);
  REQUIRE(r.residuals.size() == 13);
  REQUIRE(r.residuals.back() > 1e-6);
  CHECK(r.residuals[0] == 1.0);
  for (Index i = 1; i < r.residuals.size(); ++i) CHECK(r.residuals[i] <= r.residuals[i - 1] * (1 + 1e-12));
  CHECK_THAT(r.residuals.back(), WithinRel(true_relres(L, r.x, b)[0], 1e-6));
}

TEST_CASE("cgs2 and dcgs2 residual histories agree; reductions 3n+1 vs n+2", "[gmres]") {
  const auto L = laplace3d(8, 8, 8);
  Rng rng(4);
  const auto b = rng.normal_vector(L.rows());
  GmresConfig c;
  c.max_iters = 30;
  c.scheme = Scheme::Cgs2;
  const auto r1 = gmres_solve(L, b, c);
  c.scheme = Scheme::Dcgs2;
  const auto r2 = gmres_solve(L, b, c);
  REQUIRE(r1.residuals.size() == r2.residuals.size());
  for (Index i = 0; i < r1.residuals.size(); ++i) CHECK_THAT(r1.residuals[i], WithinAbs(r2.residuals[i], 1e-12));
  CHECK(r1.ledger.reductions == 3 * 30 + 1);
  CHECK(r2.ledger.reductions == 30 + 2);
  CHECK(r2.reductions.back() == r2.ledger.reductions);
}

TEST_CASE("restarted GMRES", "[gmres]") {
  const auto A = manteuffel_build(ManteuffelSpec{8});
  Rng rng(5);
  const auto b = rng.normal_vector(64);
  GmresConfig c;
  c.max_iters = 200;
  c.restart = 10;
  c.rtol = 1e-10;
  const auto r = gmres_solve(A, b, c);
  CHECK(r.converged);
  CHECK(r.iterations > 10);
  CHECK(true_relres(A, r.x, b)[0] < 1e-9);
}

TEST_CASE("stagnation is flagged", "[gmres]") {
  // Cyclic shift with b = e1: no progress until the Krylov space is full.
  std::vector<std::tuple<Index, Index, double>> t;
  const Index n = 40;
  for (Index i = 0; i < n; ++i) t.emplace_back((i + 1) % n, i, 1.0);
  const auto P = CsrMatrix::from_triplets(n, n, t);
  Vector b(n);
  b[0] = 1.0;
  GmresConfig c;
  c.max_iters = 35;
  const auto r = gmres_solve(P, b, c);
  CHECK(r.stagnated);
  CHECK(r.iterations == 20);
  CHECK_THAT(r.residuals.back(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("backward error", "[gmres]") {
  const auto I = CsrMatrix::from_dense(DenseColMat::identity(3));
  const Vector b{1, 0, 0};
  CHECK(backward_error(I, Vector{1, 0, 0}, b) == 0.0);
  // r = b: ||b|| / (||A||_F * 0 + ||b||) = 1
  CHECK(backward_error(I, Vector(3), b) == 1.0);
}

TEST_CASE("gmres preconditions", "[gmres]") {
  const auto I = CsrMatrix::from_dense(DenseColMat::identity(3));
  GmresConfig c;
  CHECK_THROWS_AS(gmres_solve(I, Vector(2), c), DimensionError);
  c.max_iters = 0;
  CHECK_THROWS_AS(gmres_solve(I, Vector(3, 1.0), c), DimensionError);
}
