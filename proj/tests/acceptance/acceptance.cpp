// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "kls/kls.hpp"

using namespace kls;
using namespace kls::bench;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sprint(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> kappa_range(int lo, int hi) {
  std::vector<double> k;
  for (int e = lo; e <= hi; ++e) k.push_back(std::pow(10.0, e));
  return k;
}

Outcome sync_counts() {
  const auto rows = sync_count(SyncCountConfig{});
  const std::vector<std::pair<Scheme, std::uint64_t>> want{{Scheme::Cgs, 100},  {Scheme::Cgs2, 150},
                                                           {Scheme::Cgs2Lagged, 100}, {Scheme::Mgs, 1275},
                                                           {Scheme::IcwyMgs, 50}};
  Outcome o{true, ""};
  for (const auto& r : rows) {
    o.detail += sprint(o.detail.empty() ? "%s=%llu" : " %s=%llu", std::string(scheme_id(r.scheme)).c_str(), (unsigned long long)r.measured);
    o.pass = o.pass && r.pass && r.status == "ok";
    for (const auto& [s, n] : want)
      if (s == r.scheme && r.measured != n) o.pass = false;
    if (r.scheme == Scheme::Dcgs2 && r.measured > 52) o.pass = false;
  }
  o.pass = o.pass && rows.size() == 7;
  return o;
}

Outcome loo_ceiling() {
  QrStabilityConfig c;
  c.schemes = {Scheme::Cgs2, Scheme::Dcgs2};
  c.kappas = kappa_range(0, 12);
  double worst = 0.0;
  bool ok = true;
  for (const auto& r : qr_stability(c)) {
    ok = ok && r.status == "ok" && r.loo <= 1e-12;
    worst = std::max(worst, r.loo);
  }
  return {ok, sprint("max LOO %.2e over kappa 1e0..1e12", worst)};
}

// One shared sweep for the growth-law and HRT criteria.
const std::vector<QrStabilityRow>& sweep() {
  static const auto rows = [] {
    QrStabilityConfig c;
    c.schemes = {Scheme::Cgs, Scheme::Mgs, Scheme::Dcgs2, Scheme::Dcgs2Hrt};
    c.kappas = kappa_range(0, 14);
    c.jobs = 4;
    return qr_stability(c);
  }();
  return rows;
}

Outcome growth_laws() {
  const auto [xc, yc] = unsaturated(sweep(), Scheme::Cgs);
  const auto [xm, ym] = unsaturated(sweep(), Scheme::Mgs);
  const double sc = loglog_slope(xc, yc), sm = loglog_slope(xm, ym);
  const bool ok = xc.size() >= 3 && xm.size() >= 3 && std::abs(sc - 2.0) <= 0.5 && std::abs(sm - 1.0) <= 0.5;
  return {ok, sprint("slope cgs %.3f (%zu pts), mgs %.3f (%zu pts)", sc, xc.size(), sm, xm.size())};
}

Outcome hrt_defect() {
  bool ok = true;
  Index checked = 0;
  double hrt_min = INFINITY, dcgs2_max = 0.0;
  for (const auto& r : sweep()) {
    if (r.kappa < 1e9) continue;
    if (r.scheme == Scheme::Dcgs2Hrt) {
      ok = ok && r.status == "ok" && r.loo > 1e-7 && r.rre > 1e-7;
      hrt_min = std::min({hrt_min, r.loo, r.rre});
      ++checked;
    } else if (r.scheme == Scheme::Dcgs2) {
      ok = ok && r.status == "ok" && r.loo <= 1e-7 && r.rre <= 1e-7;
      dcgs2_max = std::max({dcgs2_max, r.loo, r.rre});
    }
  }
  return {ok && checked == 6,
          sprint("kappa 1e9..1e14: hrt min(LOO,RRE) %.2e, dcgs2 max(LOO,RRE) %.2e", hrt_min, dcgs2_max)};
}

Outcome operator_specs() {
  const auto d = eig_diagnostics(manteuffel_build(ManteuffelSpec{50}));
  const auto within = [](double v, double ref, double rel) { return std::abs(v - ref) <= rel * ref; };
  const bool ok = within(d.norm2, 7.99, 0.01) && within(d.cond, 3.32e2, 0.02) && within(d.nonnormality, 2.81e-4, 0.05);
  return {ok, sprint("norm %.4f, cond %.4e, nonnormality %.4e", d.norm2, d.cond, d.nonnormality)};
}

Outcome eigenvalue_formula() {
  bool ok = true;
  double worst = 0.0;
  for (Index k = 1; k <= 12; ++k) {
    const ManteuffelSpec spec{k};
    const auto ev = dense_eigenvalues(assemble_dense(manteuffel_build(spec)));
    const auto rep = match_eigenvalues(ev, manteuffel_eigenvalues(spec), 1e-8);
    ok = ok && rep.converged == k * k && !rep.over_multiplicity;
    for (Index e = 0; e < rep.distinct.size(); ++e) ok = ok && rep.used[e] == rep.distinct[e].multiplicity;
    for (double f : rep.forward_error) worst = std::max(worst, f);
  }
  return {ok, sprint("k=1..12, max |lambda - formula| %.2e", worst)};
}

Outcome krylov_schur() {
  const ManteuffelSpec spec{10};
  const auto A = manteuffel_build(spec);
  const auto exact = manteuffel_eigenvalues(spec);
  bool ok = true;
  Index values = 0;
  double worst = 0.0;
  for (Scheme s : {Scheme::Dcgs2, Scheme::Cgs2})
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      KrylovSchurConfig c;
      c.scheme = s;
      c.max_basis = 100;
      c.nev = 100;
      c.tol = 1e-7;
      const auto r = krylov_schur_run(A, c, seed);
      const auto rep = match_eigenvalues(r.values, exact, c.tol);
      ok = ok && !r.values.empty() && rep.converged == r.values.size() && !rep.over_multiplicity &&
           !r.over_multiplicity;
      values += r.values.size();
      for (double f : rep.forward_error) worst = std::max(worst, f);
    }
  // The flag must stay silent under thick restarts too.
  EigSweepConfig e;
  e.schemes = {Scheme::Dcgs2, Scheme::Cgs2};
  for (const auto& r : eig_sweep(e)) ok = ok && r.status == "ok";
  // Informational: with a small restarted basis a value locked on residual <
  // tol can sit slightly further than tol from the exact one (Cond > 1).
  KrylovSchurConfig small;
  small.max_basis = 40;
  small.nev = 100;
  small.max_restarts = 200;
  const auto r = krylov_schur_run(A, small, 5);
  double locked_fe = 0.0;
  for (double f : match_eigenvalues(r.values, exact, small.tol).forward_error) locked_fe = std::max(locked_fe, f);
  return {ok, sprint("n_max=100, 10 runs, %lld values, max forward error %.2e; sweep flag clear; "
                     "info: basis 40 restarted max forward error %.2e",
                     (long long)values, worst, locked_fe)};
}

Outcome arnoldi_equivalence() {
  const auto A = manteuffel_build(ManteuffelSpec{20});
  Rng rng(3);
  const auto b = rng.normal_vector(A.rows());
  const auto a1 = arnoldi_expand(A, Scheme::Cgs2, b, 50);
  const auto a2 = arnoldi_expand(A, Scheme::Dcgs2, b, 50);
  const auto H1 = a1.h(), H2 = a2.h();
  double diff = 0.0;
  for (Index j = 0; j < H1.cols(); ++j)
    for (Index i = 0; i < H1.rows(); ++i) diff = std::max(diff, std::abs(H1(i, j) - H2(i, j)));
  const double bound = 1e-8 * operator_frobenius_norm(A);
  const double r1 = representation_error_arnoldi(A, a1.q().view(), H1);
  const double r2 = representation_error_arnoldi(A, a2.q().view(), H2);
  const bool ok = H1.cols() == 50 && H2.cols() == 50 && diff <= bound && r1 <= 1e-12 && r2 <= 1e-12;
  return {ok, sprint("max |dH| %.2e (bound %.2e), RRE cgs2 %.2e dcgs2 %.2e", diff, bound, r1, r2)};
}

Outcome gmres_proxy() {
  const auto L = laplace3d(24, 24, 24);
  const auto b = default_rhs(L);
  GmresConfig g;
  g.max_iters = 100;
  g.scheme = Scheme::Cgs2;
  const auto r1 = gmres_solve(L, b, g);
  g.scheme = Scheme::Dcgs2;
  const auto r2 = gmres_solve(L, b, g);
  double diff = 0.0;
  bool ok = r1.residuals.size() == 101 && r2.residuals.size() == 101;
  for (Index i = 0; ok && i < r1.residuals.size(); ++i)
    diff = std::max(diff, std::abs(r1.residuals[i] - r2.residuals[i]));
  ok = ok && diff <= 1e-8 && r2.ledger.reductions <= 102 && r1.ledger.reductions >= 300;
  return {ok, sprint("max residual diff %.2e, reductions dcgs2 %llu cgs2 %llu", diff,
                     (unsigned long long)r2.ledger.reductions, (unsigned long long)r1.ledger.reductions)};
}

Outcome eig_ordering() {
  EigSweepConfig c;
  c.schemes = {Scheme::Cgs2, Scheme::Dcgs2, Scheme::Mgs, Scheme::Cgs};
  c.restarts = {25, 50, 75};
  c.jobs = 4;
  const auto rows = eig_sweep(c);
  bool ok = rows.size() == 12;
  std::string d;
  for (Index i = 0; ok && i < 3; ++i) {
    const Index cgs2 = rows[4 * i].forward_converged, dcgs2 = rows[4 * i + 1].forward_converged;
    const Index mgs = rows[4 * i + 2].forward_converged, cgs = rows[4 * i + 3].forward_converged;
    ok = ok && std::abs(long(cgs2) - long(dcgs2)) <= 2 && std::min(cgs2, dcgs2) >= mgs && mgs >= cgs;
    d += sprint("n=%lld: %lld/%lld/%lld/%lld ", (long long)c.restarts[i], (long long)cgs2, (long long)dcgs2,
                (long long)mgs, (long long)cgs);
  }
  for (const auto& r : rows) ok = ok && r.status == "ok";
  return {ok, d + "(cgs2/dcgs2/mgs/cgs)"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;  // 0: no runtime limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {"sync-count exactness", 5, sync_counts},
      {"LOO ceiling cgs2/dcgs2", 30, loo_ceiling},
      {"LOO growth laws", 0, growth_laws},
      {"dcgs2-hrt defect", 0, hrt_defect},
      {"operator specs k=50", 60, operator_specs},
      {"eigenvalue formula k<=12", 0, eigenvalue_formula},
      {"Krylov-Schur correctness k=10", 0, krylov_schur},
      {"Arnoldi equivalence k=20", 0, arnoldi_equivalence},
      {"GMRES 24^3 Laplace", 0, gmres_proxy},
      {"eigenvalue count ordering", 0, eig_ordering},
  };
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (all[i].limit_s > 0 && t >= all[i].limit_s) {
      o.pass = false;
      o.detail += sprint(" [over %.0f s limit]", all[i].limit_s);
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, all[i].name, o.detail.c_str(), t);
    std::fflush(stdout);
  }
  return failed;
}
