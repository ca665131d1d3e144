#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "kls/bench/experiments.hpp"

using namespace kls;
using namespace kls::bench;

namespace {

std::string text(const Table& t) {
  std::ostringstream os;
  t.write(os);
  return os.str();
}

}  // namespace

TEST_CASE("parallel_map keeps order and rethrows", "[bench]") {
  const auto v = parallel_map<Index>(100, 4, [](Index i) { return i * i; });
  for (Index i = 0; i < 100; ++i) CHECK(v[i] == i * i);
  CHECK_THROWS_AS(parallel_map<int>(10, 3,
                                    [](Index i) -> int {
                                      if (i == 7) throw BreakdownError("x");
                                      return 0;
                                    }),
                  BreakdownError);
}

TEST_CASE("qr-stability table does not depend on jobs", "[bench]") {
  QrStabilityConfig c;
  c.m = 60;
  c.n = 12;
  c.kappas = {1e0, 1e4, 1e8, 1e12};
  const auto a = text(qr_stability_table(c, qr_stability(c)));
  c.jobs = 4;
  const auto b = text(qr_stability_table(c, qr_stability(c)));
  CHECK(a == b);
  CHECK(a.rfind("# kls_bench 1.0.0\n", 0) == 0);
  CHECK(a.find("\nscheme,kappa,loo,rre,reductions,status\n") != std::string::npos);
  CHECK(a.find("dcgs2,1.000000e+00,") != std::string::npos);
}

TEST_CASE("loglog slope", "[bench]") {
  std::vector<double> x, y;
  for (int e = 0; e < 6; ++e) {
    x.push_back(std::pow(10.0, e));
    y.push_back(3e-16 * std::pow(10.0, 2.0 * e));
  }
  CHECK_THAT(loglog_slope(x, y), Catch::Matchers::WithinAbs(2.0, 1e-12));
  CHECK(std::isnan(loglog_slope({1.0}, {1.0})));
}

TEST_CASE("unsaturated range keeps points between floor and ceiling", "[bench]") {
  std::vector<QrStabilityRow> rows;
  for (double loo : {1e-16, 1e-10, 1e-5, 0.5}) {
    QrStabilityRow r;
    r.scheme = Scheme::Cgs;
    r.kappa = loo;
    r.loo = loo;
    rows.push_back(r);
  }
  rows[2].status = "breakdown";
  const auto [x, y] = unsaturated(rows, Scheme::Cgs);
  REQUIRE(x.size() == 1);
  CHECK(y[0] == 1e-10);
}

TEST_CASE("sync-count passes, and the injected mismatch fails", "[bench]") {
  SyncCountConfig c;
  c.m = 400;
  c.n = 20;
  for (const auto& r : sync_count(c)) {
    CAPTURE(scheme_id(r.scheme));
    CHECK(r.pass);
    if (r.scheme == Scheme::Mgs) CHECK(r.measured == 210);
    if (r.scheme == Scheme::Cgs2) CHECK(r.measured == 60);
  }
  c.inject_off_by_one = true;
  for (const auto& r : sync_count(c)) CHECK_FALSE(r.pass);
}

TEST_CASE("arnoldi-stability rows", "[bench]") {
  const auto A = manteuffel_build(ManteuffelSpec{6});
  ArnoldiStabilityConfig c;
  c.schemes = {Scheme::Cgs2, Scheme::Dcgs2};
  c.steps = 22;
  c.stride = 5;
  const auto rows = arnoldi_stability(A, c);
  std::vector<Index> steps;
  for (const auto& r : rows)
    if (r.scheme == Scheme::Dcgs2) steps.push_back(r.step);
  CHECK(steps == std::vector<Index>{5, 10, 15, 20, 22});
  for (const auto& r : rows) {
    CHECK(r.loo < 1e-13);
    CHECK(r.rre < 1e-13);
  }
  c.jobs = 2;
  CHECK(text(arnoldi_stability_table({}, c, rows)) == text(arnoldi_stability_table({}, c, arnoldi_stability(A, c))));
}

TEST_CASE("eig sweep on a small operator", "[bench]") {
  EigSweepConfig c;
  c.schemes = {Scheme::Cgs2, Scheme::Dcgs2};
  c.spec = ManteuffelSpec{5};
  c.restarts = {10, 25};
  const auto rows = eig_sweep(c);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.status == "ok");
    if (r.restart == 25) {
      CHECK(r.forward_converged == 25);
      CHECK(r.invariant_dim == 25);
    }
  }
  CHECK(text(eig_table(c, rows)).find("cgs2,10,") != std::string::npos);
}

TEST_CASE("gmres table", "[bench]") {
  const auto A = manteuffel_build(ManteuffelSpec{8});
  GmresRunConfig c;
  c.iters = 10;
  const auto runs = gmres_runs(A, c);
  const auto t = gmres_table({{"problem", "manteuffel"}}, c, runs);
  CHECK(t.rows.size() == 22);
  CHECK(t.rows.front().rfind("cgs2,0,1.000000e+00,", 0) == 0);
  CHECK(t.rows.back().rfind("dcgs2,10,", 0) == 0);
  CHECK(runs[1].result.reductions.back() == 12);
}

TEST_CASE("mm-run on a file from the corpus", "[bench]") {
  std::ifstream in(KLS_TEST_DATA "/mm/convdiff_k4.mtx");
  const auto A = parse_matrix_market(in);
  // 9 distinct eigenvalues: stay below the invariant Krylov dimension.
  const auto rows = mm_run(A, {Scheme::Cgs2, Scheme::Dcgs2, Scheme::Mgs}, 8, 1);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.status == "ok");
    CHECK(r.steps == 8);
    CHECK(r.loo < 1e-10);
    CHECK(r.gmres_relres < 1.0);
  }
  CHECK_THAT(rows[0].gmres_relres, Catch::Matchers::WithinRel(rows[1].gmres_relres, 1e-8));
  CHECK_THROWS_AS(mm_run(CsrMatrix(2, 3), {Scheme::Cgs}, 1, 1), DimensionError);
}
