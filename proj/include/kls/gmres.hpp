#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "kls/arnoldi.hpp"
#include "kls/core/dense.hpp"
#include "kls/core/ledger.hpp"
#include "kls/operator.hpp"

namespace kls {

struct GmresConfig {
  Index max_iters = 100;
  Index restart = 0;   ///< 0: no restart
  double rtol = 0.0;   ///< stop when ||r||/||r0|| <= rtol (0: run all iterations)
  Scheme scheme = Scheme::Dcgs2;
  Index stagnation_window = 20;
};

struct GmresResult {
  Vector x;
  std::vector<double> residuals;        ///< ||r_k|| / ||r_0||, k = 0..iterations
  std::vector<double> backward_errors;  ///< per entry of residuals
  std::vector<std::uint64_t> reductions;  ///< cumulative, per entry of residuals
  Index iterations = 0;
  bool converged = false;
  bool happy_breakdown = false;
  bool stagnated = false;
  SyncLedger ledger;
};

/// ||b - Ax|| / (||A||_F ||x|| + ||b||).
inline double backward_error(const LinearOperator& op, std::span<const double> x, std::span<const double> b,
                             std::optional<double> norm_a = std::nullopt) {
  Vector r(op.rows());
  op.apply(x, r);
  for (Index i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const double na = norm_a ? *norm_a : operator_frobenius_norm(op);
  const double den = na * norm2(x) + norm2(b);
  return den > 0.0 ? norm2(r) / den : 0.0;
}

namespace detail {

/// Incremental least-squares solve of min ||beta e1 - Hbar y|| by Givens
/// rotations.
class GivensLsq {
 public:
  explicit GivensLsq(double beta) : g_{beta} {}

  /// Adds Hessenberg column j (length j+2); returns |g_{j+1}|, the new
  /// residual norm.
  double add_column(std::span<const double> hcol) {
    const Index j = r_.size();
    std::vector<double> h(hcol.begin(), hcol.end());
    h.resize(j + 2, 0.0);
    for (Index i = 0; i < j; ++i) {
      const double a = c_[i] * h[i] + s_[i] * h[i + 1];
      const double b = -s_[i] * h[i] + c_[i] * h[i + 1];
      h[i] = a;
      h[i + 1] = b;
    }
    const double a = h[j], b = h[j + 1];
    const double rr = std::hypot(a, b);
    const double c = rr > 0.0 ? a / rr : 1.0;
    const double s = rr > 0.0 ? b / rr : 0.0;
    c_.push_back(c);
    s_.push_back(s);
    h[j] = rr;
    h.resize(j + 1);
    r_.push_back(std::move(h));
    const double gj = g_[j];
    g_[j] = c * gj;
    g_.push_back(-s * gj);
    return std::abs(g_[j + 1]);
  }

  /// y solving the leading k x k triangular system.
  std::vector<double> solve(Index k) const {
    std::vector<double> y(k);
    for (Index i = k; i-- > 0;) {
      double s = g_[i];
      for (Index j = i + 1; j < k; ++j) s -= r_[j][i] * y[j];
      y[i] = r_[i][i] != 0.0 ? s / r_[i][i] : 0.0;
    }
    return y;
  }

 private:
  std::vector<double> g_;
  std::vector<double> c_, s_;
  std::vector<std::vector<double>> r_;  // columns of the triangular factor
};

}  // namespace detail

/// GMRES on op x = b from x0 (default 0) with the chosen orthogonalization
/// scheme. The delayed schemes report iteration j once column j of H is
/// complete, i.e. one step later; the residual history is the same.
inline GmresResult gmres_solve(const LinearOperator& op, std::span<const double> b, const GmresConfig& cfg,
                               std::optional<Vector> x0 = std::nullopt) {
  const Index m = op.rows();
  detail::require_dims(op.cols() == m && b.size() == m && cfg.max_iters >= 1 && cfg.rtol >= 0.0,
                       "gmres_solve: bad shapes or configuration");
  GmresResult res;
  res.x = x0 ? *x0 : Vector(m);
  SyncLedger* led = &res.ledger;
  const double norm_a = operator_frobenius_norm(op);
  const Index cycle_len = cfg.restart ? cfg.restart : cfg.max_iters;

  double r0norm = -1.0;
  auto record = [&](double relres) {
    res.residuals.push_back(relres);
    res.backward_errors.push_back(backward_error(op, res.x, b, norm_a));
    res.reductions.push_back(led->reductions);
  };

  while (res.iterations < cfg.max_iters && !res.converged && !res.happy_breakdown && !res.stagnated) {
    Vector r(m);
    apply_op(op, res.x, r, led);
    for (Index i = 0; i < m; ++i) r[i] = b[i] - r[i];
    Arnoldi arn(op, cfg.scheme, led);
    arn.start(r);

    const Vector xbase = res.x;
    std::optional<detail::GivensLsq> lsq;
    Index done = 0;
    const Index len = std::min(cycle_len, cfg.max_iters - res.iterations);
    auto update_x = [&](Index k) {
      const auto y = lsq->solve(k);
      res.x = xbase;
      mv_times_mat_add_mv(res.x.span(), arn.q().block(0, k), y, 1.0, 1.0);
    };
    auto consume = [&]() {
      while (done < arn.steps()) {
        if (!lsq) {
          lsq.emplace(arn.start_norm());
          if (r0norm < 0.0) {
            r0norm = arn.start_norm();
            record(1.0);
          }
        }
        const double rn = lsq->add_column(arn.h_col(done));
        ++done;
        ++res.iterations;
        update_x(done);
        const double rel = rn / r0norm;
        record(rel);
        if (cfg.rtol > 0.0 && rel <= cfg.rtol) res.converged = true;
        const Index w = cfg.stagnation_window;
        if (w > 0 && res.residuals.size() > w) {
          const double old = res.residuals[res.residuals.size() - 1 - w];
          if (!(rel < old * (1.0 - 1e-10))) res.stagnated = true;
        }
        if (res.converged || res.stagnated) return true;
      }
      return false;
    };

    bool stop = false;
    for (Index i = 0; i < len && !stop; ++i) {
      const bool more = arn.step();
      stop = consume();
      if (!more) break;
    }
    if (!stop && !arn.happy_breakdown()) {
      arn.finalize();
      stop = consume();
    }
    if (arn.happy_breakdown()) {
      res.happy_breakdown = true;
      consume();
      if (!res.residuals.empty() && res.residuals.back() <= 1e-12) res.converged = true;
    }
    if (done == 0) break;
  }
  return res;
}

}  // namespace kls
