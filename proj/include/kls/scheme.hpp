#pragma once

#include <array>
#include <string>
#include <string_view>

#include "kls/core/error.hpp"

namespace kls {

/// Orthogonalization schemes. The string ids are part of the CLI and CSV
/// interface and must not change.
enum class Scheme { Cgs, Cgs2, Cgs2Lagged, Mgs, IcwyMgs, Dcgs2, Dcgs2Hrt, Householder };

inline constexpr std::array<Scheme, 8> all_schemes{Scheme::Cgs,     Scheme::Cgs2,  Scheme::Cgs2Lagged,
                                                   Scheme::Mgs,     Scheme::IcwyMgs, Scheme::Dcgs2,
                                                   Scheme::Dcgs2Hrt, Scheme::Householder};

inline constexpr std::string_view scheme_id(Scheme s) {
  switch (s) {
    case Scheme::Cgs: return "cgs";
    case Scheme::Cgs2: return "cgs2";
    case Scheme::Cgs2Lagged: return "cgs2-lagged";
    case Scheme::Mgs: return "mgs";
    case Scheme::IcwyMgs: return "icwy-mgs";
    case Scheme::Dcgs2: return "dcgs2";
    case Scheme::Dcgs2Hrt: return "dcgs2-hrt";
    case Scheme::Householder: return "householder";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view id) {
  for (Scheme s : all_schemes)
    if (scheme_id(s) == id) return s;
  throw UnknownSchemeError("unknown scheme id '" + std::string(id) + "'");
}

/// Schemes whose normalization of column j happens during the push of column
/// j+1 (so a finalize step is required).
inline constexpr bool is_lagged(Scheme s) {
  return s == Scheme::Dcgs2 || s == Scheme::Dcgs2Hrt || s == Scheme::IcwyMgs;
}

}  // namespace kls
