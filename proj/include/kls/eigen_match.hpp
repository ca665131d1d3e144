#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "kls/core/dense.hpp"
#include "kls/problems.hpp"

namespace kls {

struct MatchReport {
  /// Per computed value: index into `distinct` (or -1) and |lambda - mu|.
  std::vector<long> matched_to;
  std::vector<double> forward_error;
  std::vector<ValueMultiplicity> distinct;
  std::vector<Index> used;
  Index converged = 0;  ///< matches with forward error < tol
  bool over_multiplicity = false;
};

/// Greedy matching of computed values against exact values (repeats in
/// `exact` give multiplicities). Each computed value, in order, takes the
/// closest exact value not yet used up. A computed value that lies within tol
/// only of used-up exact values is one eigenvalue too many: it raises
/// over_multiplicity and is left unmatched.
inline MatchReport match_eigenvalues(const std::vector<std::complex<double>>& computed,
                                     const std::vector<std::complex<double>>& exact, double tol) {
  MatchReport r;
  r.distinct = multiplicity_map(exact);
  r.used.assign(r.distinct.size(), 0);
  for (const auto& mu : computed) {
    long best = -1;
    double bestd = std::numeric_limits<double>::infinity();
    double nearest_any = std::numeric_limits<double>::infinity();
    for (Index e = 0; e < r.distinct.size(); ++e) {
      const double d = std::abs(r.distinct[e].value - mu);
      nearest_any = std::min(nearest_any, d);
      if (r.used[e] < r.distinct[e].multiplicity && d < bestd) {
        bestd = d;
        best = static_cast<long>(e);
      }
    }
    if (nearest_any < tol && !(bestd < tol)) {
      r.over_multiplicity = true;
      r.matched_to.push_back(-1);
      r.forward_error.push_back(nearest_any);
      continue;
    }
    if (best >= 0 && bestd < tol) {
      ++r.used[static_cast<Index>(best)];
      ++r.converged;
      r.matched_to.push_back(best);
    } else {
      r.matched_to.push_back(-1);
    }
    r.forward_error.push_back(bestd);
  }
  return r;
}

}  // namespace kls
