#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>

#include "kls/core/dense.hpp"
#include "kls/scheme.hpp"

namespace kls {

/// Kernel taxonomy of the distributed implementation. Only MvTransMv and MvDot
/// carry a global reduction.
enum class KernelClass : std::uint8_t { MvTransMv = 0, MvTimesMatAddMv = 1, MvDot = 2 };

inline constexpr bool is_reducing(KernelClass k) { return k != KernelClass::MvTimesMatAddMv; }

/// Per-run counters of reducing kernel invocations and nominal flops.
///
/// A ledger belongs to one run and is passed explicitly to every kernel; a
/// null ledger pointer means "do not account" (used by metric evaluation so
/// that measuring a run does not perturb its counts).
struct SyncLedger {
  std::uint64_t reductions = 0;
  std::array<std::uint64_t, 3> kernel_counts{};
  std::uint64_t flops = 0;
  std::uint64_t operator_applications = 0;
  Index processes = 1;

  /// rows is the distributed dimension m; cols_b and cols_x are the block
  /// widths of the two operands (1 for MvDot).
  void record(KernelClass k, Index rows, Index cols_b, Index cols_x) {
    ++kernel_counts[static_cast<int>(k)];
    if (is_reducing(k)) ++reductions;
    flops += 2ull * rows * cols_b * cols_x;
  }

  /// Redundant (non-distributed) work such as small triangular solves.
  void add_flops(std::uint64_t f) { flops += f; }
  void record_operator() { ++operator_applications; }

  std::uint64_t count(KernelClass k) const { return kernel_counts[static_cast<int>(k)]; }

  void reset() {
    Index p = processes;
    *this = SyncLedger{};
    processes = p;
  }
};

/// Closed-form cost of a scheme, from the per-iteration and total cost tables.
struct CostPrediction {
  Scheme scheme{};
  bool arnoldi = false;
  Index n = 0;
  std::uint64_t per_iter_synchs = 0;  ///< at iteration n
  std::uint64_t total_synchs = 0;
  std::uint64_t mvtransmv = 0;        ///< expected split of total_synchs
  std::uint64_t mvdot = 0;
  double flop_lead = 0.0;             ///< coefficient of (m/p) n^2
  double flop_cubic = 0.0;            ///< coefficient of n^3 (redundant work)
};

/// Closed forms for the tabulated schemes. Householder is not tabulated.
inline CostPrediction predicted_counts(Scheme s, Index n, bool arnoldi = false) {
  CostPrediction p;
  p.scheme = s;
  p.arnoldi = arnoldi;
  p.n = n;
  const std::uint64_t N = n;
  switch (s) {
    case Scheme::Mgs:
      p.per_iter_synchs = N;
      p.total_synchs = N * N / 2;
      p.mvdot = p.total_synchs;
      p.flop_lead = 2.0;
      break;
    case Scheme::IcwyMgs:
      p.per_iter_synchs = 1;
      p.total_synchs = N;
      p.mvtransmv = N;
      p.flop_lead = 3.0;
      p.flop_cubic = 1.0 / 3.0;
      break;
    case Scheme::Cgs:
      p.per_iter_synchs = 2;
      p.total_synchs = 2 * N;
      p.mvtransmv = N;
      p.mvdot = N;
      p.flop_lead = 2.0;
      break;
    case Scheme::Cgs2:
      p.per_iter_synchs = 3;
      p.total_synchs = 3 * N;
      p.mvtransmv = 2 * N;
      p.mvdot = N;
      p.flop_lead = 4.0;
      break;
    case Scheme::Cgs2Lagged:
      p.per_iter_synchs = 2;
      p.total_synchs = 2 * N;
      p.mvtransmv = 2 * N;
      p.flop_lead = 4.0;
      break;
    case Scheme::Dcgs2:
    case Scheme::Dcgs2Hrt:
      p.per_iter_synchs = 1;
      p.total_synchs = N;
      p.mvtransmv = N;
      p.flop_lead = 4.0;
      if (arnoldi && s == Scheme::Dcgs2) p.flop_cubic = 1.0 / 3.0;
      break;
    case Scheme::Householder:
      throw UnknownSchemeError("no tabulated cost for scheme 'householder'");
  }
  return p;
}

/// Allowed excess of measured over predicted reductions: the documented
/// final-iteration cleanup of the delayed schemes, and the lower-order n/2 of
/// sum_j j for MGS.
inline std::uint64_t default_slack(Scheme s, Index n) {
  switch (s) {
    case Scheme::Dcgs2:
    case Scheme::Dcgs2Hrt: return 2;
    case Scheme::Mgs: return (n + 1) / 2;
    default: return 0;
  }
}

struct LedgerCheck {
  bool pass = false;
  std::int64_t delta_total = 0;  ///< measured - predicted
  std::int64_t delta_mvtransmv = 0;
  std::int64_t delta_mvdot = 0;
  std::uint64_t slack = 0;
};

inline LedgerCheck assert_matches(const SyncLedger& l, const CostPrediction& p, std::uint64_t slack = 0) {
  LedgerCheck r;
  r.slack = slack;
  r.delta_total = static_cast<std::int64_t>(l.reductions) - static_cast<std::int64_t>(p.total_synchs);
  r.delta_mvtransmv = static_cast<std::int64_t>(l.count(KernelClass::MvTransMv)) - static_cast<std::int64_t>(p.mvtransmv);
  r.delta_mvdot = static_cast<std::int64_t>(l.count(KernelClass::MvDot)) - static_cast<std::int64_t>(p.mvdot);
  r.pass = r.delta_total >= 0 && r.delta_total <= static_cast<std::int64_t>(slack);
  return r;
}

inline constexpr const char* ledger_csv_header = "run_id,scheme,n,m,reductions,mvtransmv,mvdot,mvtimes,flops";

inline void write_ledger_row(std::ostream& os, const std::string& run_id, Scheme s, Index n, Index m,
                             const SyncLedger& l) {
  os << run_id << ',' << scheme_id(s) << ',' << n << ',' << m << ',' << l.reductions << ','
     << l.count(KernelClass::MvTransMv) << ',' << l.count(KernelClass::MvDot) << ','
     << l.count(KernelClass::MvTimesMatAddMv) << ',' << l.flops << '\n';
}

}  // namespace kls
