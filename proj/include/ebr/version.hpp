#pragma once

#include <array>
#include <cstdio>
#include <string>
#include <string_view>

#include "ebr/rng.hpp"

namespace ebr {

inline constexpr std::string_view kVersion = "0.1.0";

// Modelling choices that affect every number the library produces. They are
// echoed in output metadata and hashed into a short fingerprint.
inline constexpr std::array<std::string_view, 9> kDesignDecisions = {
    "standardize: grand mean, population sd over n*m cells",
    "orientation: rows = units, columns = periods",
    "padding: top-left embedding, N(0,1) fill in column-major order",
    "scaling: s = k^(1/6) (sqrt(2) lambda1 - 2 sqrt(k)), no finite-k correction",
    "decision: upper tail, reject when P(TW1 > s) < alpha; median p over paddings",
    "ar1: x1 = e1, xt = phi x(t-1) + (1 - phi) et",
    "linear_csd: one-factor equicorrelation, per-period common factor",
    "nonmono: first ceil(n/2) units, one eps per unit, recursion on updated values",
    "rng: splitmix64 key hashing, xoshiro256**, Marsaglia polar normals",
};

inline std::string design_fingerprint() {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::string_view d : kDesignDecisions) {
    h = derive_seed({h, fnv1a64(d)});
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ebr
