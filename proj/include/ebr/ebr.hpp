#pragma once

// Eigenvalue-based randomness (EBR) test for panel residual matrices.
//
//   E  --standardize-->  E*  --pad_to_square-->  Z  --symmetrize-->  S
//   lambda1 = largest eigenvalue of S,  s = tw_scale(lambda1, k),
//   p = P(TW1 > s),  reject when p < alpha.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ebr/errors.hpp"
#include "ebr/residual.hpp"
#include "ebr/rng.hpp"
#include "ebr/spectral.hpp"
#include "ebr/twdist.hpp"

namespace ebr {

struct EbrConfig {
  double alpha = 0.05;
  int padding_reps = 1;  // odd, so the median p-value is an observed value
  std::uint64_t seed = 0;
  int beta = 1;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (padding_reps < 1 || padding_reps % 2 == 0) {
      throw ConfigError("padding_reps must be a positive odd integer");
    }
    if (beta != 1) throw ConfigError("only beta = 1 (GOE) is supported");
  }
};

struct PaddingOutcome {
  double lambda1;
  double s_stat;
  double p_value;

  bool operator==(const PaddingOutcome&) const = default;
};

struct EbrResult {
  double lambda1 = 0.0;  // of the padding draw that realises the median p
  double s_stat = 0.0;
  double p_value = 1.0;
  bool reject = false;
  Eigen::Index k = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int padding_reps = 1;
  std::vector<PaddingOutcome> per_padding;

  bool operator==(const EbrResult&) const = default;
};

inline void to_json(nlohmann::json& j, const PaddingOutcome& p) {
  j = nlohmann::json{{"lambda1", p.lambda1}, {"s_stat", p.s_stat}, {"p_value", p.p_value}};
}

inline void to_json(nlohmann::json& j, const EbrResult& r) {
  j = nlohmann::json{{"lambda1", r.lambda1},   {"s_stat", r.s_stat},
                     {"p_value", r.p_value},   {"reject", r.reject},
                     {"k", r.k},               {"alpha", r.alpha},
                     {"seed", r.seed},         {"padding_reps", r.padding_reps},
                     {"per_padding", r.per_padding}};
}

// Grand-mean / grand-standard-deviation standardisation over all n*m
// elements, with the population convention (divide by n*m).
inline ResidualMatrix standardize(const ResidualMatrix& e) {
  const Eigen::MatrixXd& v = e.values();
  const double count = static_cast<double>(v.size());
  const double mean = v.sum() / count;
  const double var = (v.array() - mean).square().sum() / count;
  const double sd = std::sqrt(var);
  if (!(sd > 0.0) || !std::isfinite(sd)) {
    throw DegenerateInputError("standardize: residual matrix has zero variance");
  }
  return ResidualMatrix(((v.array() - mean) / sd).matrix(), e.label());
}

// Embeds E* in the top-left block of a k x k matrix, k = max(n, m), and
// fills the rest with iid N(0, 1) draws taken in column-major order:
//   n > m (tall): extra columns on the right,
//   n < m (wide): extra rows below,
//   n = m:        no padding, the stream is not touched.
inline Eigen::MatrixXd pad_to_square(const ResidualMatrix& e_star, RandomStream& rng) {
  const Eigen::Index n = e_star.n_units();
  const Eigen::Index m = e_star.m_periods();
  const Eigen::Index k = std::max(n, m);
  Eigen::MatrixXd z(k, k);
  z.topLeftCorner(n, m) = e_star.values();
  if (n > m) {
    for (Eigen::Index j = m; j < k; ++j)
      for (Eigen::Index i = 0; i < k; ++i) z(i, j) = rng.normal();
  } else if (n < m) {
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index i = n; i < k; ++i) z(i, j) = rng.normal();
  }
  return z;
}

inline SymmetricMatrix symmetrize(const Eigen::MatrixXd& z) {
  if (!z.allFinite()) throw DomainError("symmetrize: non-finite entry");
  return SymmetricMatrix::symmetrize(z);
}

// Maps the largest eigenvalue of S = (Z + Z^T) / 2 to the Tracy-Widom scale.
// For iid N(0, 1) entries in Z, S has off-diagonal variance 1/2 and diagonal
// variance 1, so sqrt(2) S is the standard GOE (off-diagonal variance 1,
// diagonal variance 2) whose top eigenvalue satisfies
// k^{1/6} (lambda - 2 sqrt(k)) -> TW1. No finite-k correction is applied.
inline double tw_scale(double lambda1, Eigen::Index k) {
  if (k < 2) throw DomainError("tw_scale: matrix order must be at least 2");
  const double kd = static_cast<double>(k);
  return std::pow(kd, 1.0 / 6.0) * (std::sqrt(2.0) * lambda1 - 2.0 * std::sqrt(kd));
}

// Stream key separating padding draws from any other use of the seed.
inline constexpr std::uint64_t kPaddingStreamDomain = 0x70616464696e67ULL;  // "padding"

// One-sided (upper tail) test: structured residuals push lambda1 above the
// GOE edge. Deterministic given (e, cfg).
inline EbrResult ebr_test(const ResidualMatrix& e, const EbrConfig& cfg, const TwTable& table) {
  cfg.validate();
  if (table.empty()) throw ConfigError("ebr_test: Tracy-Widom table is missing");

  const ResidualMatrix e_star = standardize(e);
  const Eigen::Index k = std::max(e.n_units(), e.m_periods());

  EbrResult result;
  result.k = k;
  result.alpha = cfg.alpha;
  result.seed = cfg.seed;
  result.padding_reps = cfg.padding_reps;
  result.per_padding.reserve(static_cast<std::size_t>(cfg.padding_reps));
  for (int rep = 0; rep < cfg.padding_reps; ++rep) {
    RandomStream rng = RandomStream::derived(
        {cfg.seed, kPaddingStreamDomain, static_cast<std::uint64_t>(rep)});
    const SymmetricMatrix s = symmetrize(pad_to_square(e_star, rng));
    const double lambda1 = largest_eigenvalue(s);
    const double s_stat = tw_scale(lambda1, k);
    result.per_padding.push_back({lambda1, s_stat, tw1_sf(s_stat, table)});
  }

  std::vector<std::size_t> order(result.per_padding.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.per_padding[a].p_value < result.per_padding[b].p_value;
  });
  const PaddingOutcome& median = result.per_padding[order[order.size() / 2]];
  result.lambda1 = median.lambda1;
  result.s_stat = median.s_stat;
  result.p_value = median.p_value;
  result.reject = result.p_value < cfg.alpha;
  return result;
}

}  // namespace ebr
