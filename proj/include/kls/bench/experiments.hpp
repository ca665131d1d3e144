#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kls/arnoldi.hpp"
#include "kls/core/ledger.hpp"
#include "kls/eigensolver.hpp"
#include "kls/gmres.hpp"
#include "kls/metrics.hpp"
#include "kls/ortho_schemes.hpp"
#include "kls/problems.hpp"

// Experiment drivers behind the kls_bench subcommands. Each returns its rows
// in a fixed order so output is identical for any --jobs value.

namespace kls::bench {

inline constexpr const char* library_version = "1.0.0";

/// One `# key: value` header line per entry.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

inline std::string status_of(const std::exception& e) {
  if (dynamic_cast<const PythagoreanBreakdown*>(&e)) return "pythagorean-breakdown";
  if (dynamic_cast<const BreakdownError*>(&e)) return "breakdown";
  if (dynamic_cast<const IterationLimitError*>(&e)) return "iteration-limit";
  return "error";
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << std::scientific << v;
  return os.str();
}

/// Runs fn(i) for i in [0, count) on up to `jobs` threads; results keep index
/// order.
template <class R>
std::vector<R> parallel_map(Index count, Index jobs, const std::function<R(Index)>& fn) {
  std::vector<R> out(count);
  jobs = std::max<Index>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (Index i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<Index> next{0};
  std::vector<std::exception_ptr> errs(jobs);
  std::vector<std::thread> pool;
  for (Index t = 0; t < jobs; ++t)
    pool.emplace_back([&, t] {
      try {
        for (Index i; (i = next++) < count;) out[i] = fn(i);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

/// A CSV table: config echo, a column line, rows.
struct Table {
  ConfigEcho config;
  std::string columns;
  std::vector<std::string> rows;

  void write(std::ostream& os) const {
    os << "# kls_bench " << library_version << '\n';
    for (const auto& [k, v] : config) os << "# " << k << ": " << v << '\n';
    os << columns << '\n';
    for (const auto& r : rows) os << r << '\n';
  }
};

inline std::string scheme_list(const std::vector<Scheme>& s) {
  std::string out;
  for (Scheme x : s) out += (out.empty() ? "" : " ") + std::string(scheme_id(x));
  return out;
}

// ---- qr-stability ----------------------------------------------------------

struct QrStabilityConfig {
  std::vector<Scheme> schemes{all_schemes.begin(), all_schemes.end()};
  std::vector<double> kappas;
  Index m = 200;
  Index n = 50;
  std::uint64_t seed = 1;
  Index jobs = 1;
};

struct QrStabilityRow {
  Scheme scheme{};
  double kappa = 0.0;
  double loo = NAN;
  double rre = NAN;
  std::uint64_t reductions = 0;
  std::string status = "ok";
};

/// Default sweep 1e0, 1e1, ..., 1e16.
inline std::vector<double> default_kappas() {
  std::vector<double> k;
  for (int e = 0; e <= 16; ++e) k.push_back(std::pow(10.0, e));
  return k;
}

inline std::vector<QrStabilityRow> qr_stability(const QrStabilityConfig& cfg) {
  const auto kappas = cfg.kappas.empty() ? default_kappas() : cfg.kappas;
  const Index ns = cfg.schemes.size(), nk = kappas.size();
  // One test matrix per kappa, shared by every scheme.
  std::vector<DenseColMat> mats(nk);
  for (Index i = 0; i < nk; ++i) mats[i] = synthetic_kappa(cfg.m, cfg.n, kappas[i], cfg.seed);
  return parallel_map<QrStabilityRow>(ns * nk, cfg.jobs, [&](Index idx) {
    const Index ik = idx / ns, is = idx % ns;
    QrStabilityRow row;
    row.scheme = cfg.schemes[is];
    row.kappa = kappas[ik];
    SyncLedger led;
    try {
      const auto f = factorize(mats[ik], row.scheme, &led);
      row.loo = loss_of_orthogonality(f.q.view());
      row.rre = representation_error_qr(mats[ik], f.q.view(), f.r);
    } catch (const std::exception& e) {
      row.status = status_of(e);
    }
    row.reductions = led.reductions;
    return row;
  });
}

inline Table qr_stability_table(const QrStabilityConfig& cfg, const std::vector<QrStabilityRow>& rows) {
  Table t;
  t.config = {{"subcommand", "qr-stability"}, {"schemes", scheme_list(cfg.schemes)}, {"m", std::to_string(cfg.m)},
              {"n", std::to_string(cfg.n)}, {"seed", std::to_string(cfg.seed)}};
  t.columns = "scheme,kappa,loo,rre,reductions,status";
  for (const auto& r : rows)
    t.rows.push_back(std::string(scheme_id(r.scheme)) + ',' + fmt(r.kappa) + ',' + fmt(r.loo) + ',' + fmt(r.rre) +
                     ',' + std::to_string(r.reductions) + ',' + r.status);
  return t;
}

/// Least-squares slope of log10(y) against log10(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const Index n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (Index i = 0; i < n; ++i) {
    const double a = std::log10(x[i]), b = std::log10(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  const double den = n * sxx - sx * sx;
  return den != 0.0 ? (n * sxy - sx * sy) / den : NAN;
}

/// Points where LOO is above the rounding floor (> 100 eps) and below
/// saturation (< 1e-2): the range where a growth law can be observed.
inline std::pair<std::vector<double>, std::vector<double>> unsaturated(const std::vector<QrStabilityRow>& rows,
                                                                      Scheme s, double floor = 1e-13,
                                                                      double ceiling = 1e-2) {
  std::vector<double> x, y;
  for (const auto& r : rows)
    if (r.scheme == s && r.status == "ok" && r.loo > floor && r.loo < ceiling) {
      x.push_back(r.kappa);
      y.push_back(r.loo);
    }
  return {x, y};
}

// ---- arnoldi-stability ------------------------------------------------------

struct ArnoldiStabilityConfig {
  std::vector<Scheme> schemes{all_schemes.begin(), all_schemes.end()};
  Index steps = 300;
  Index stride = 5;
  std::uint64_t seed = 1;
  Index jobs = 1;
};

struct ArnoldiStabilityRow {
  Scheme scheme{};
  Index step = 0;
  double loo = NAN;
  double rre = NAN;
  std::uint64_t reductions = 0;
  std::string status = "ok";
};

/// Metrics of the first `step` columns every `stride` completed steps and at
/// the end. A breakdown ends the scheme's series with a status row.
inline std::vector<ArnoldiStabilityRow> arnoldi_stability(const LinearOperator& op,
                                                          const ArnoldiStabilityConfig& cfg) {
  const Index m = op.rows();
  const double norm_a = operator_frobenius_norm(op);
  Rng rng(cfg.seed);
  const Vector b = rng.normal_vector(m);
  const Index stride = std::max<Index>(1, cfg.stride);
  auto per_scheme = parallel_map<std::vector<ArnoldiStabilityRow>>(
      cfg.schemes.size(), cfg.jobs, [&](Index is) {
        std::vector<ArnoldiStabilityRow> rows;
        const Scheme s = cfg.schemes[is];
        SyncLedger led;
        Arnoldi arn(op, s, &led);
        IncrementalLoo loo;
        IncrementalRre rre(op, norm_a);
        Index emitted = 0;
        auto emit = [&](Index upto) {
          const DenseColMat H = arn.h();
          const Index n = std::min(upto, H.cols());
          DenseColMat Hn(n + 1, n);
          for (Index j = 0; j < n; ++j)
            for (Index i = 0; i <= n; ++i) Hn(i, j) = H(i, j);
          ArnoldiStabilityRow r;
          r.scheme = s;
          r.step = n;
          r.loo = loo.update(arn.q().block(0, std::min(arn.q().cols(), n + 1)));
          r.rre = rre.update(arn.q().view(), Hn);
          r.reductions = led.reductions;
          rows.push_back(r);
          emitted = n;
        };
        try {
          arn.start(b);
          const Index steps = std::min(cfg.steps, m);
          for (Index j = 0; j < steps; ++j) {
            const bool more = arn.step();
            if (arn.steps() > emitted && arn.steps() % stride == 0) emit(arn.steps());
            if (!more) break;
          }
          arn.finalize();
          if (arn.steps() > emitted) emit(arn.steps());
        } catch (const std::exception& e) {
          ArnoldiStabilityRow r;
          r.scheme = s;
          r.step = arn.steps();
          r.reductions = led.reductions;
          r.status = status_of(e);
          rows.push_back(r);
        }
        return rows;
      });
  std::vector<ArnoldiStabilityRow> out;
  for (auto& v : per_scheme) out.insert(out.end(), v.begin(), v.end());
  return out;
}

inline Table arnoldi_stability_table(const ConfigEcho& problem, const ArnoldiStabilityConfig& cfg,
                                     const std::vector<ArnoldiStabilityRow>& rows) {
  Table t;
  t.config = {{"subcommand", "arnoldi-stability"}};
  t.config.insert(t.config.end(), problem.begin(), problem.end());
  t.config.insert(t.config.end(), {{"schemes", scheme_list(cfg.schemes)},
                                   {"steps", std::to_string(cfg.steps)},
                                   {"stride", std::to_string(cfg.stride)},
                                   {"seed", std::to_string(cfg.seed)}});
  t.columns = "scheme,step,loo,rre,reductions,status";
  for (const auto& r : rows)
    t.rows.push_back(std::string(scheme_id(r.scheme)) + ',' + std::to_string(r.step) + ',' + fmt(r.loo) + ',' +
                     fmt(r.rre) + ',' + std::to_string(r.reductions) + ',' + r.status);
  return t;
}

// ---- eig ----------------------------------------------------------------------

struct EigSweepConfig {
  std::vector<Scheme> schemes{all_schemes.begin(), all_schemes.end()};
  ManteuffelSpec spec{10};
  std::vector<Index> restarts{5, 10, 25, 50, 75};
  double tol = 1e-7;
  Index max_restarts = 50;
  std::uint64_t seed = 1;
  Index jobs = 1;
};

struct EigSweepRow {
  Scheme scheme{};
  Index restart = 0;
  Index forward_converged = 0;
  Index invariant_dim = 0;
  Index restarts_used = 0;
  std::string status = "ok";
};

/// For each restart size n: Krylov-Schur with a basis of at most n vectors
/// (thick restart to n/2 plus locked), asking for every eigenvalue, within
/// the restart budget. forward_converged counts Schur diagonal entries within
/// tol of a distinct closed-form eigenvalue.
inline std::vector<EigSweepRow> eig_sweep(const EigSweepConfig& cfg) {
  const CsrMatrix A = manteuffel_build(cfg.spec);
  const Index ns = cfg.schemes.size(), nr = cfg.restarts.size();
  return parallel_map<EigSweepRow>(ns * nr, cfg.jobs, [&](Index idx) {
    const Index ir = idx / ns, is = idx % ns;
    EigSweepRow row;
    row.scheme = cfg.schemes[is];
    row.restart = cfg.restarts[ir];
    try {
      KrylovSchurConfig kc;
      kc.scheme = row.scheme;
      kc.max_basis = std::min(row.restart, A.rows());
      kc.tol = cfg.tol;
      kc.max_restarts = cfg.max_restarts;
      kc.nev = A.rows();
      const auto r = krylov_schur_run(A, kc, cfg.seed);
      const auto fc = forward_error_count(r.ritz_values, cfg.spec, cfg.tol);
      row.forward_converged = fc.count;
      row.invariant_dim = r.invariant_dim;
      row.restarts_used = r.restarts;
      if (fc.over_multiplicity || r.over_multiplicity) row.status = "over-multiplicity";
    } catch (const std::exception& e) {
      row.status = status_of(e);
    }
    return row;
  });
}

inline Table eig_table(const EigSweepConfig& cfg, const std::vector<EigSweepRow>& rows) {
  Table t;
  t.config = {{"subcommand", "eig"},
              {"schemes", scheme_list(cfg.schemes)},
              {"manteuffel_k", std::to_string(cfg.spec.k)},
              {"beta", fmt(cfg.spec.beta)},
              {"tol", fmt(cfg.tol)},
              {"max_restarts", std::to_string(cfg.max_restarts)},
              {"seed", std::to_string(cfg.seed)}};
  t.columns = "scheme,restart,n_converged_forward_error,invariant_subspace_dim,restarts_used,status";
  for (const auto& r : rows)
    t.rows.push_back(std::string(scheme_id(r.scheme)) + ',' + std::to_string(r.restart) + ',' +
                     std::to_string(r.forward_converged) + ',' + std::to_string(r.invariant_dim) + ',' +
                     std::to_string(r.restarts_used) + ',' + r.status);
  return t;
}

// ---- gmres --------------------------------------------------------------------

struct GmresRunConfig {
  std::vector<Scheme> schemes{Scheme::Cgs2, Scheme::Dcgs2};
  Index iters = 100;
  Index restart = 0;
  double rtol = 0.0;
  Index jobs = 1;
};

struct GmresRun {
  Scheme scheme{};
  GmresResult result;
  std::string status = "ok";
};

/// Right-hand side A*ones normalized, x0 = 0.
inline Vector default_rhs(const LinearOperator& op) {
  Vector ones(op.cols(), 1.0), b(op.rows());
  op.apply(ones, b);
  const double nb = norm2(b);
  if (nb > 0.0)
    for (double& v : b) v /= nb;
  return b;
}

inline std::vector<GmresRun> gmres_runs(const LinearOperator& op, const GmresRunConfig& cfg) {
  const Vector b = default_rhs(op);
  return parallel_map<GmresRun>(cfg.schemes.size(), cfg.jobs, [&](Index is) {
    GmresRun run;
    run.scheme = cfg.schemes[is];
    GmresConfig g;
    g.max_iters = cfg.iters;
    g.restart = cfg.restart;
    g.rtol = cfg.rtol;
    g.scheme = run.scheme;
    try {
      run.result = gmres_solve(op, b, g);
      if (run.result.stagnated) run.status = "stagnated";
    } catch (const std::exception& e) {
      run.status = status_of(e);
    }
    return run;
  });
}

inline Table gmres_table(const ConfigEcho& problem, const GmresRunConfig& cfg, const std::vector<GmresRun>& runs) {
  Table t;
  t.config = {{"subcommand", "gmres"}};
  t.config.insert(t.config.end(), problem.begin(), problem.end());
  t.config.insert(t.config.end(), {{"schemes", scheme_list(cfg.schemes)},
                                   {"iters", std::to_string(cfg.iters)},
                                   {"restart", std::to_string(cfg.restart)},
                                   {"rtol", fmt(cfg.rtol)}});
  t.columns = "scheme,iter,relres,backward_error,reductions,status";
  for (const auto& run : runs) {
    const auto& r = run.result;
    for (Index i = 0; i < r.residuals.size(); ++i) {
      const bool last = i + 1 == r.residuals.size();
      t.rows.push_back(std::string(scheme_id(run.scheme)) + ',' + std::to_string(i) + ',' + fmt(r.residuals[i]) +
                       ',' + fmt(r.backward_errors[i]) + ',' + std::to_string(r.reductions[i]) + ',' +
                       (last ? run.status : std::string("ok")));
    }
    if (r.residuals.empty())
      t.rows.push_back(std::string(scheme_id(run.scheme)) + ",0,nan,nan,0," + run.status);
  }
  return t;
}

// ---- sync-count ---------------------------------------------------------------

struct SyncCountConfig {
  std::vector<Scheme> schemes{Scheme::Cgs,     Scheme::Cgs2,  Scheme::Cgs2Lagged, Scheme::Mgs,
                              Scheme::IcwyMgs, Scheme::Dcgs2, Scheme::Dcgs2Hrt};
  Index m = 5000;
  Index n = 50;
  std::uint64_t seed = 1;
  /// Test mode: perturb the measured counts by one to check that a mismatch
  /// is reported.
  bool inject_off_by_one = false;
};

struct SyncCountRow {
  Scheme scheme{};
  std::uint64_t measured = 0;
  std::uint64_t predicted = 0;
  std::uint64_t slack = 0;
  bool pass = false;
  std::string status = "ok";
};

inline std::vector<SyncCountRow> sync_count(const SyncCountConfig& cfg) {
  Rng rng(cfg.seed);
  const DenseColMat A = rng.normal_matrix(cfg.m, cfg.n);
  std::vector<SyncCountRow> rows;
  for (Scheme s : cfg.schemes) {
    SyncCountRow row;
    row.scheme = s;
    SyncLedger led;
    try {
      factorize(A, s, &led);
      if (cfg.inject_off_by_one) led.reductions += 1 + default_slack(s, cfg.n);
      const auto pred = predicted_counts(s, cfg.n);
      row.predicted = pred.total_synchs;
      row.slack = default_slack(s, cfg.n);
      row.pass = assert_matches(led, pred, row.slack).pass;
    } catch (const std::exception& e) {
      row.status = status_of(e);
    }
    row.measured = led.reductions;
    rows.push_back(row);
  }
  return rows;
}

inline Table sync_count_table(const SyncCountConfig& cfg, const std::vector<SyncCountRow>& rows) {
  Table t;
  t.config = {{"subcommand", "sync-count"}, {"schemes", scheme_list(cfg.schemes)}, {"m", std::to_string(cfg.m)},
              {"n", std::to_string(cfg.n)}, {"seed", std::to_string(cfg.seed)}};
  if (cfg.inject_off_by_one) t.config.emplace_back("inject_off_by_one", "true");
  t.columns = "scheme,n,reductions,predicted,slack,pass,status";
  for (const auto& r : rows)
    t.rows.push_back(std::string(scheme_id(r.scheme)) + ',' + std::to_string(cfg.n) + ',' +
                     std::to_string(r.measured) + ',' + std::to_string(r.predicted) + ',' +
                     std::to_string(r.slack) + ',' + (r.pass ? "pass" : "fail") + ',' + r.status);
  return t;
}

// ---- mm-run -------------------------------------------------------------------

struct MmRunRow {
  Scheme scheme{};
  Index steps = 0;
  double loo = NAN;
  double rre = NAN;
  double gmres_relres = NAN;
  std::uint64_t arnoldi_reductions = 0;
  std::string status = "ok";
};

/// Summary for a user matrix: final Arnoldi LOO/RRE after `steps` steps and
/// the GMRES relative residual after the same number of iterations.
inline std::vector<MmRunRow> mm_run(const CsrMatrix& A, const std::vector<Scheme>& schemes, Index steps,
                                    std::uint64_t seed, Index jobs = 1) {
  detail::require_dims(A.rows() == A.cols(), "mm_run: matrix must be square");
  Rng rng(seed);
  const Vector b0 = rng.normal_vector(A.rows());
  const Vector rhs = default_rhs(A);
  return parallel_map<MmRunRow>(schemes.size(), jobs, [&](Index is) {
    MmRunRow row;
    row.scheme = schemes[is];
    SyncLedger led;
    try {
      const auto arn = arnoldi_expand(A, row.scheme, b0, std::min(steps, A.rows()), &led);
      const DenseColMat H = arn.h();
      row.steps = H.cols();
      row.loo = loss_of_orthogonality(arn.q().block(0, std::min(arn.q().cols(), H.cols() + 1)));
      row.rre = representation_error_arnoldi(A, arn.q().view(), H);
      GmresConfig g;
      g.max_iters = std::max<Index>(1, std::min(steps, A.rows()));
      g.scheme = row.scheme;
      const auto gr = gmres_solve(A, rhs, g);
      row.gmres_relres = gr.residuals.empty() ? NAN : gr.residuals.back();
      if (gr.stagnated) row.status = "stagnated";
    } catch (const std::exception& e) {
      row.status = status_of(e);
    }
    row.arnoldi_reductions = led.reductions;
    return row;
  });
}

inline Table mm_run_table(const ConfigEcho& problem, const std::vector<Scheme>& schemes, Index steps,
                          std::uint64_t seed, const std::vector<MmRunRow>& rows) {
  Table t;
  t.config = {{"subcommand", "mm-run"}};
  t.config.insert(t.config.end(), problem.begin(), problem.end());
  t.config.insert(t.config.end(), {{"schemes", scheme_list(schemes)},
                                   {"steps", std::to_string(steps)},
                                   {"seed", std::to_string(seed)}});
  t.columns = "scheme,steps,loo,rre,gmres_relres,arnoldi_reductions,status";
  for (const auto& r : rows)
    t.rows.push_back(std::string(scheme_id(r.scheme)) + ',' + std::to_string(r.steps) + ',' + fmt(r.loo) + ',' +
                     fmt(r.rre) + ',' + fmt(r.gmres_relres) + ',' + std::to_string(r.arnoldi_reductions) + ',' +
                     r.status);
  return t;
}

}  // namespace kls::bench
