#pragma once

// Pairwise unit-by-unit correlation diagnostics (Pearson, Kendall tau-b,
// Spearman) summarised over the lower triangle of the correlation matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ebr/dgp.hpp"
#include "ebr/errors.hpp"
#include "ebr/rng.hpp"

namespace ebr {

// nullopt when either series is constant.
inline std::optional<double> pearson(const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const Eigen::Ref<const Eigen::VectorXd>& y) {
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double sxx = dx.square().sum();
  const double syy = dy.square().sum();
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp((dx * dy).sum() / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Tau-b with the usual tie correction; O(m^2).
inline std::optional<double> kendall_tau_b(const Eigen::Ref<const Eigen::VectorXd>& x,
                                           const Eigen::Ref<const Eigen::VectorXd>& y) {
  const Eigen::Index m = x.size();
  std::int64_t concordant_minus_discordant = 0;
  std::int64_t ties_x = 0;
  std::int64_t ties_y = 0;
  for (Eigen::Index i = 1; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double a = x(i) - x(j);
      const double b = y(i) - y(j);
      if (a == 0.0) ++ties_x;
      if (b == 0.0) ++ties_y;
      if (a != 0.0 && b != 0.0) concordant_minus_discordant += ((a > 0.0) == (b > 0.0)) ? 1 : -1;
    }
  }
  const auto pairs = static_cast<std::int64_t>(m) * (m - 1) / 2;
  const double denom = std::sqrt(static_cast<double>(pairs - ties_x) *
                                 static_cast<double>(pairs - ties_y));
  if (!(denom > 0.0)) return std::nullopt;
  return static_cast<double>(concordant_minus_discordant) / denom;
}

// Ranks 1..m with ties sharing their average rank.
inline Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index m = x.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
  Eigen::VectorXd ranks(m);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x(order[j + 1]) == x(order[i])) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t r = i; r <= j; ++r) ranks(order[r]) = rank;
    i = j + 1;
  }
  return ranks;
}

inline std::optional<double> spearman(const Eigen::Ref<const Eigen::VectorXd>& x,
                                      const Eigen::Ref<const Eigen::VectorXd>& y) {
  return pearson(average_ranks(x), average_ranks(y));
}

struct CorrelationSummary {
  double pearson_mean = 0.0;
  double pearson_sd = 0.0;
  double kendall_mean = 0.0;
  double kendall_sd = 0.0;
  double spearman_mean = 0.0;
  double spearman_sd = 0.0;
  // Spread of the per-matrix lower-triangle means across replications.
  double pearson_sd_of_means = 0.0;
  double kendall_sd_of_means = 0.0;
  double spearman_sd_of_means = 0.0;
  std::size_t replications = 0;
  std::size_t pairs = 0;  // unit pairs visited, over all replications
  std::size_t pearson_excluded = 0;
  std::size_t kendall_excluded = 0;
  std::size_t spearman_excluded = 0;
};

inline void to_json(nlohmann::json& j, const CorrelationSummary& s) {
  j = nlohmann::json{{"pearson_mean", s.pearson_mean},   {"pearson_sd", s.pearson_sd},
                     {"kendall_mean", s.kendall_mean},   {"kendall_sd", s.kendall_sd},
                     {"spearman_mean", s.spearman_mean}, {"spearman_sd", s.spearman_sd},
                     {"pearson_sd_of_means", s.pearson_sd_of_means},
                     {"kendall_sd_of_means", s.kendall_sd_of_means},
                     {"spearman_sd_of_means", s.spearman_sd_of_means},
                     {"replications", s.replications},
                     {"pairs", s.pairs},                 {"pearson_excluded", s.pearson_excluded},
                     {"kendall_excluded", s.kendall_excluded},
                     {"spearman_excluded", s.spearman_excluded}};
}

// Pools lower-triangle correlations between units (rows) of any number of
// matrices. Undefined correlations (constant series) are counted, not pooled.
class CorrelationAccumulator {
public:
  void add(const Eigen::MatrixXd& x) {
    if (x.rows() < 2) throw DomainError("correlation summary needs at least 2 units");
    const Eigen::Index n = x.rows();
    std::vector<Eigen::VectorXd> rows;
    std::vector<Eigen::VectorXd> ranks;
    rows.reserve(static_cast<std::size_t>(n));
    ranks.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      rows.emplace_back(x.row(i).transpose());
      ranks.push_back(average_ranks(rows.back()));
    }
    Moments p, k, s;
    for (Eigen::Index i = 1; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        const auto a = static_cast<std::size_t>(i);
        const auto b = static_cast<std::size_t>(j);
        ++pairs_;
        push(pearson_, p, pearson(rows[a], rows[b]));
        push(kendall_, k, kendall_tau_b(rows[a], rows[b]));
        push(spearman_, s, pearson(ranks[a], ranks[b]));
      }
    }
    ++replications_;
    if (p.count > 0) push(pearson_means_, p.mean);
    if (k.count > 0) push(kendall_means_, k.mean);
    if (s.count > 0) push(spearman_means_, s.mean);
  }

  CorrelationSummary summary() const {
    CorrelationSummary s;
    s.pairs = pairs_;
    s.replications = replications_;
    s.pearson_sd_of_means = pearson_means_.mean_sd().second;
    s.kendall_sd_of_means = kendall_means_.mean_sd().second;
    s.spearman_sd_of_means = spearman_means_.mean_sd().second;
    std::tie(s.pearson_mean, s.pearson_sd) = pearson_.mean_sd();
    std::tie(s.kendall_mean, s.kendall_sd) = kendall_.mean_sd();
    std::tie(s.spearman_mean, s.spearman_sd) = spearman_.mean_sd();
    s.pearson_excluded = pairs_ - pearson_.count;
    s.kendall_excluded = pairs_ - kendall_.count;
    s.spearman_excluded = pairs_ - spearman_.count;
    return s;
  }

private:
  // Welford running moments; sd uses the n - 1 denominator.
  struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    std::pair<double, double> mean_sd() const {
      const double sd = count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1)) : 0.0;
      return {count > 0 ? mean : std::nan(""), sd};
    }
  };

  static void push(Moments& acc, double value) {
    ++acc.count;
    const double delta = value - acc.mean;
    acc.mean += delta / static_cast<double>(acc.count);
    acc.m2 += delta * (value - acc.mean);
  }

  static void push(Moments& pooled, Moments& local, std::optional<double> value) {
    if (!value) return;
    push(pooled, *value);
    push(local, *value);
  }

  std::size_t pairs_ = 0;
  std::size_t replications_ = 0;
  Moments pearson_, kendall_, spearman_;
  Moments pearson_means_, kendall_means_, spearman_means_;
};

inline constexpr std::uint64_t kCorrelationStreamDomain = 0x636f7272ULL;  // "corr"

// Generates `reps` matrices from `spec` reshaped to n x m (replication r uses
// the stream derived from (seed, "corr", r)) and pools their correlations.
inline CorrelationSummary correlation_summary(const DgpSpec& spec, Eigen::Index n, Eigen::Index m,
                                              int reps, std::uint64_t seed) {
  if (n < 3) throw DomainError("correlation_summary: need n >= 3 units");
  if (reps < 1) throw ConfigError("correlation_summary: reps must be positive");
  const DgpSpec shaped = spec.with_shape(n, m);
  CorrelationAccumulator acc;
  for (int r = 0; r < reps; ++r) {
    RandomStream rng =
        RandomStream::derived({seed, kCorrelationStreamDomain, static_cast<std::uint64_t>(r)});
    acc.add(generate(shaped, rng).values());
  }
  return acc.summary();
}

}  // namespace ebr
