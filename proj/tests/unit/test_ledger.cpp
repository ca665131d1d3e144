#include <catch_amalgamated.hpp>

#include <sstream>

#include "kls/core/kernels.hpp"
#include "kls/core/ledger.hpp"
#include "kls/core/random.hpp"
#include "kls/ortho_schemes.hpp"
#include "kls/scheme.hpp"

using namespace kls;

TEST_CASE("kernel classes and reductions", "[ledger]") {
  SyncLedger led;
  Rng rng(1);
  const auto Q = rng.normal_matrix(10, 3);
  const auto x = rng.normal_vector(10);

  mv_trans_mv(Q.view(), as_block(x.span()), &led);
  CHECK(led.reductions == 1);
  CHECK(led.count(KernelClass::MvTransMv) == 1);
  CHECK(led.flops == 2 * 10 * 3);

  Vector y = x;
  mv_times_mat_add_mv(y.span(), Q.view(), Vector{1, 2, 3}, -1.0, 1.0, &led);
  CHECK(led.reductions == 1);
  CHECK(led.count(KernelClass::MvTimesMatAddMv) == 1);

  dot(x, x, &led);
  norm2(x, &led);
  CHECK(led.reductions == 3);
  CHECK(led.count(KernelClass::MvDot) == 2);

  // An empty basis still costs one synchronization.
  const DenseColMat empty(10, 0);
  mv_trans_mv(empty.view(), as_block(x.span()), &led);
  CHECK(led.reductions == 4);

  led.reset();
  CHECK(led.reductions == 0);
  CHECK(led.flops == 0);
}

TEST_CASE("null ledger records nothing", "[ledger]") {
  Rng rng(2);
  const auto Q = rng.normal_matrix(5, 2);
  CHECK_NOTHROW(mv_trans_mv(Q.view(), Q.view(), nullptr));
}

TEST_CASE("closed-form counts", "[ledger]") {
  CHECK(predicted_counts(Scheme::Cgs, 50).total_synchs == 100);
  CHECK(predicted_counts(Scheme::Cgs2, 50).total_synchs == 150);
  CHECK(predicted_counts(Scheme::Cgs2Lagged, 50).total_synchs == 100);
  CHECK(predicted_counts(Scheme::IcwyMgs, 50).total_synchs == 50);
  CHECK(predicted_counts(Scheme::Dcgs2, 50).total_synchs == 50);
  CHECK(predicted_counts(Scheme::Mgs, 50).per_iter_synchs == 50);
  CHECK(predicted_counts(Scheme::Cgs2, 50).per_iter_synchs == 3);
  CHECK(predicted_counts(Scheme::Dcgs2, 50).per_iter_synchs == 1);
  CHECK_THROWS_AS(predicted_counts(Scheme::Householder, 5), UnknownSchemeError);
  CHECK(default_slack(Scheme::Dcgs2, 50) == 2);
  CHECK(default_slack(Scheme::Cgs2, 50) == 0);
}

TEST_CASE("mgs with 20 columns costs sum_{j=1..20} j reductions", "[ledger]") {
  Rng rng(4);
  const auto A = rng.normal_matrix(100, 20);
  SyncLedger led;
  factorize(A, Scheme::Mgs, &led);
  std::uint64_t sum = 0;
  for (int j = 1; j <= 20; ++j) sum += j;
  CHECK(led.reductions == sum);
  CHECK(assert_matches(led, predicted_counts(Scheme::Mgs, 20), default_slack(Scheme::Mgs, 20)).pass);
}

TEST_CASE("assert_matches detects a mismatch", "[ledger]") {
  SyncLedger led;
  led.reductions = 101;
  const auto p = predicted_counts(Scheme::Cgs, 50);
  const auto r = assert_matches(led, p);
  CHECK_FALSE(r.pass);
  CHECK(r.delta_total == 1);
  led.reductions = 99;
  CHECK_FALSE(assert_matches(led, p, 5).pass);
  led.reductions = 100;
  CHECK(assert_matches(led, p).pass);
}

TEST_CASE("ledger CSV row", "[ledger]") {
  SyncLedger led;
  led.record(KernelClass::MvTransMv, 4, 2, 1);
  led.record(KernelClass::MvDot, 4, 1, 1);
  std::ostringstream os;
  write_ledger_row(os, "r1", Scheme::Dcgs2, 3, 4, led);
  CHECK(os.str() == "r1,dcgs2,3,4,2,1,1,0,24\n");
  CHECK(std::string(ledger_csv_header).rfind("run_id,scheme", 0) == 0);
}

TEST_CASE("scheme ids round-trip", "[scheme]") {
  for (Scheme s : all_schemes) CHECK(parse_scheme(scheme_id(s)) == s);
  CHECK_THROWS_AS(parse_scheme("gram"), UnknownSchemeError);
  CHECK(is_lagged(Scheme::Dcgs2));
  CHECK(is_lagged(Scheme::IcwyMgs));
  CHECK_FALSE(is_lagged(Scheme::Cgs2Lagged));
}
