#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "ebr/airy.hpp"
#include "ebr/painleve.hpp"
#include "ebr/twdist.hpp"
#include "oracles.hpp"

namespace {

// Published TW1 moments (Tracy-Widom tabulations, e.g. Bornemann's
// high-precision evaluation): mean -1.2065335745820, variance 1.6077810345810.
constexpr double kTw1Mean = -1.2065335745820;
constexpr double kTw1Variance = 1.6077810345810;

const ebr::TwTable& table() { return ebr::default_tw_table(); }

// Ai via the modified Bessel function, independent of the asymptotic series.
double airy_ai_bessel(double x) {
  const double z = 2.0 / 3.0 * x * std::sqrt(x);
  return std::sqrt(x / 3.0) / std::numbers::pi * std::cyl_bessel_k(1.0 / 3.0, z);
}
double airy_ai_prime_bessel(double x) {
  const double z = 2.0 / 3.0 * x * std::sqrt(x);
  return -x / (std::numbers::pi * std::sqrt(3.0)) * std::cyl_bessel_k(2.0 / 3.0, z);
}

TEST(Airy, AsymptoticMatchesBesselRepresentation) {
  for (double x : {7.0, 7.5, 8.0, 10.0, 12.0}) {
    const auto v = ebr::airy_asymptotic(x);
    EXPECT_NEAR(v.ai / airy_ai_bessel(x), 1.0, 1e-10) << x;
    EXPECT_NEAR(v.ai_prime / airy_ai_prime_bessel(x), 1.0, 1e-10) << x;
  }
  for (double x : {5.0, 6.0}) {
    const auto v = ebr::airy_asymptotic(x);
    EXPECT_NEAR(v.ai / airy_ai_bessel(x), 1.0, 1e-7) << x;
  }
}

TEST(Airy, RejectsSmallArguments) {
  EXPECT_THROW(ebr::airy_asymptotic(1.0), ebr::DomainError);
  EXPECT_THROW(ebr::airy_asymptotic(std::nan("")), ebr::DomainError);
}

class HastingsMcLeod : public ::testing::Test {
protected:
  static void SetUpTestSuite() { solution_ = new ebr::PainleveSolution(ebr::solve_hastings_mcleod()); }
  static void TearDownTestSuite() { delete solution_; }
  static ebr::PainleveSolution* solution_;
};
ebr::PainleveSolution* HastingsMcLeod::solution_ = nullptr;

TEST_F(HastingsMcLeod, PositiveAndAiryAtRightBoundary) {
  const auto& sol = *solution_;
  for (double q : sol.q_values) ASSERT_GT(q, 0.0);
  EXPECT_NEAR(sol.q_values.front() / airy_ai_bessel(sol.s_grid.front()), 1.0, 1e-6);
  for (std::size_t i = 1; i < sol.s_grid.size(); ++i) ASSERT_LT(sol.s_grid[i], sol.s_grid[i - 1]);
}

TEST_F(HastingsMcLeod, SatisfiesPainleveTwoAtMidpoints) {
  // q'' at the midpoint of [s_i, s_{i+1}] from a fourth-order stencil on the
  // integrated q' values at s_{i-1}, s_i, s_{i+1}, s_{i+2}.
  const auto& sol = *solution_;
  const double h = sol.s_grid[0] - sol.s_grid[1];
  double worst = 0.0;
  for (std::size_t i = 1; i + 2 < sol.s_grid.size(); ++i) {
    const double mid = 0.5 * (sol.s_grid[i] + sol.s_grid[i + 1]);
    if (mid < -8.0) break;
    // Grid is descending, so index order is the reverse of s order.
    const double d2q = (sol.q_prime_values[i - 1] - 27.0 * sol.q_prime_values[i] +
                        27.0 * sol.q_prime_values[i + 1] - sol.q_prime_values[i + 2]) /
                       (-24.0 * h);
    // q at the midpoint by the matching fourth-order interpolant.
    const double q = (-sol.q_values[i - 1] + 9.0 * sol.q_values[i] + 9.0 * sol.q_values[i + 1] -
                      sol.q_values[i + 2]) /
                     16.0;
    worst = std::max(worst, std::abs(d2q - (mid * q + 2.0 * q * q * q)));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(TwTable, InvariantsHold) {
  const auto& t = table();
  const auto s = t.s_grid();
  const auto c = t.cdf_values();
  const auto f = t.pdf_values();
  ASSERT_GT(s.size(), 3000u);
  for (std::size_t i = 1; i < s.size(); ++i) {
    ASSERT_GT(s[i], s[i - 1]);
    ASSERT_GE(c[i], c[i - 1]);
  }
  for (double v : f) ASSERT_GE(v, 0.0);
  EXPECT_LT(c.front(), 1e-8);
  EXPECT_GT(c.back(), 1.0 - 1e-8);
  const double mass = ebr::oracle::trapezoid({s.begin(), s.end()}, {f.begin(), f.end()});
  EXPECT_NEAR(mass, 1.0, 1e-3);
}

TEST(TwTable, TailLimitsOverDefaultRange) {
  const ebr::TwTable t = ebr::build_tw1_table(-10.0, 8.0, 0.005);
  EXPECT_LT(ebr::tw1_cdf(-10.0, t), 1e-8);
  EXPECT_GT(ebr::tw1_cdf(8.0 - 1e-9, t), 1.0 - 1e-8);
}

TEST(TwTable, MomentsMatchPublishedValues) {
  const auto m = ebr::table_moments(table());
  EXPECT_NEAR(m.mean, kTw1Mean, 5e-3);
  EXPECT_NEAR(m.variance, kTw1Variance, 1e-2);
  // Much tighter in practice.
  EXPECT_NEAR(m.mean, kTw1Mean, 1e-6);
  EXPECT_NEAR(m.variance, kTw1Variance, 1e-5);
}

TEST(TwTable, DensityIsDerivativeOfCdf) {
  const auto& t = table();
  const auto s = t.s_grid();
  const auto c = t.cdf_values();
  const auto f = t.pdf_values();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] < -6.0 || s[i] > 4.0) continue;
    const double numeric = (c[i + 1] - c[i - 1]) / (s[i + 1] - s[i - 1]);
    worst = std::max(worst, std::abs(numeric - f[i]));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(TwCdf, ClampsOutsideTable) {
  const auto& t = table();
  EXPECT_EQ(ebr::tw1_cdf(t.s_max() + 1.0, t), 1.0);
  EXPECT_EQ(ebr::tw1_cdf(t.s_min() - 1.0, t), 0.0);
  EXPECT_EQ(ebr::tw1_sf(t.s_min() - 1.0, t), 1.0);
  EXPECT_EQ(ebr::tw1_sf(t.s_max() + 1.0, t), 0.0);
  EXPECT_EQ(ebr::tw1_cdf(100.0, t), 1.0);
}

TEST(TwCdf, NinetyFifthPercentile) {
  // 0.9793 is the commonly tabulated TW1 95% point.
  EXPECT_NEAR(ebr::tw1_cdf(0.9793, table()), 0.95, 2e-3);
  EXPECT_NEAR(ebr::tw1_sf(0.9793, table()), 0.05, 2e-3);
}

TEST(TwCdf, LeftSkewMeanAboveMedian) {
  const double mean = ebr::table_moments(table()).mean;
  const double f = ebr::tw1_cdf(mean, table());
  EXPECT_GT(f, 0.5);
  EXPECT_LT(f, 0.65);
}

TEST(TwCdf, MonotoneOnFineSweep) {
  const auto& t = table();
  double prev = 0.0;
  for (double s = t.s_min(); s <= t.s_max(); s += 0.0007) {
    const double v = ebr::tw1_cdf(s, t);
    ASSERT_GE(v, prev) << s;
    prev = v;
  }
}

TEST(TwSf, ComplementIdentityOnGrid) {
  const auto& t = table();
  for (double s : t.s_grid()) ASSERT_NEAR(ebr::tw1_sf(s, t) + ebr::tw1_cdf(s, t), 1.0, 1e-12);
  for (double s = -9.0; s < 7.9; s += 0.0123) {
    ASSERT_NEAR(ebr::tw1_sf(s, t) + ebr::tw1_cdf(s, t), 1.0, 1e-12);
  }
}

TEST(TwSf, RightTailKeepsRelativeAccuracy) {
  // Between grid points the log-survival interpolant must agree with the
  // tabulated survival at the nodes and stay strictly positive.
  const auto& t = table();
  const auto s = t.s_grid();
  const auto c = t.cdf_values();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 4.0 || s[i] > 7.5) continue;
    const double survival = 1.0 - c[i];
    ASSERT_NEAR(ebr::tw1_sf(s[i], t) / survival, 1.0, 1e-9);
    const double mid = 0.5 * (s[i] + s[i + 1]);
    const double sf_mid = ebr::tw1_sf(mid, t);
    ASSERT_GT(sf_mid, 0.0);
    ASSERT_LT(sf_mid, survival);
    ASSERT_GT(sf_mid, 1.0 - c[i + 1]);
  }
}

TEST(TwQuantile, RoundTrips) {
  const auto& t = table();
  EXPECT_NEAR(ebr::tw1_quantile(ebr::tw1_cdf(0.0, t), t), 0.0, 1e-6);
  for (double p : {0.01, 0.05, 0.5, 0.95, 0.99}) {
    EXPECT_LT(std::abs(ebr::tw1_cdf(ebr::tw1_quantile(p, t), t) - p), 1e-6) << p;
  }
}

TEST(TwQuantile, KnownPoints) {
  const auto& t = table();
  EXPECT_NEAR(ebr::tw1_quantile(0.95, t), 0.9793, 5e-3);
  EXPECT_LT(ebr::tw1_quantile(0.5, t), -1.20);
}

TEST(TwQuantile, RejectsOutOfRangeProbabilities) {
  const auto& t = table();
  EXPECT_THROW(ebr::tw1_quantile(0.0, t), ebr::DomainError);
  EXPECT_THROW(ebr::tw1_quantile(1.0, t), ebr::DomainError);
  EXPECT_THROW(ebr::tw1_quantile(-0.5, t), ebr::DomainError);
}

TEST(TwTable, EmptyTableIsAConfigurationError) {
  const ebr::TwTable empty;
  EXPECT_TRUE(empty.empty());
  EXPECT_THROW(ebr::tw1_cdf(0.0, empty), ebr::ConfigError);
  EXPECT_THROW(ebr::tw1_quantile(0.5, empty), ebr::ConfigError);
}

TEST(TwTable, BuildPreconditions) {
  EXPECT_THROW(ebr::build_tw1_table(-7.0, 8.0, 0.005), ebr::ConfigError);
  EXPECT_THROW(ebr::build_tw1_table(-10.0, 5.0, 0.005), ebr::ConfigError);
  EXPECT_THROW(ebr::build_tw1_table(-10.0, 8.0, 0.05), ebr::ConfigError);
}

TEST(TwTable, ConstructorRejectsBrokenTables) {
  std::vector<double> s{-1.0, 0.0, 1.0};
  EXPECT_THROW(ebr::TwTable(s, {0.0, 0.6, 0.5}, {0.1, 0.1, 0.1}), ebr::ConstructionError);
  EXPECT_THROW(ebr::TwTable(s, {0.0, 0.5, 1.0}, {0.5, -0.1, 0.5}), ebr::ConstructionError);
  EXPECT_THROW(ebr::TwTable({0.0, 0.0, 1.0}, {0.0, 0.5, 1.0}, {0.5, 0.5, 0.5}),
               ebr::ConstructionError);
}

TEST(TwCache, SaveThenLoadIsBitwiseIdentical) {
  const auto path = std::filesystem::temp_directory_path() / "ebr_tw_cache_test.csv";
  const ebr::TwTableParams params;
  ebr::save_tw_table(table(), params, path);
  const auto loaded = ebr::load_tw_table(params, path);
  ASSERT_TRUE(loaded.has_value());
  ASSERT_EQ(loaded->size(), table().size());
  for (std::size_t i = 0; i < table().size(); ++i) {
    ASSERT_EQ(loaded->s_grid()[i], table().s_grid()[i]);
    ASSERT_EQ(loaded->cdf_values()[i], table().cdf_values()[i]);
    ASSERT_EQ(loaded->pdf_values()[i], table().pdf_values()[i]);
  }
  EXPECT_EQ(ebr::tw1_sf(1.5, *loaded), ebr::tw1_sf(1.5, table()));

  // Different grid parameters invalidate the cache.
  ebr::TwTableParams other = params;
  other.step = 0.004;
  EXPECT_FALSE(ebr::load_tw_table(other, path).has_value());
  std::filesystem::remove(path);
}

TEST(TwCache, StaleOrCorruptFileIsRebuilt) {
  const auto path = std::filesystem::temp_directory_path() / "ebr_tw_cache_stale.csv";
  {
    std::ofstream out(path);
    out << "# ebr-tw1-table v0 s_min=-10 s_max=8 step=0.005\ns,cdf,pdf\n0,0.5,0.3\n";
  }
  const ebr::TwTableParams params;
  EXPECT_FALSE(ebr::load_tw_table(params, path).has_value());
  const ebr::TwTable rebuilt = ebr::load_or_build_tw_table(params, path);
  EXPECT_EQ(rebuilt.size(), table().size());
  EXPECT_TRUE(ebr::load_tw_table(params, path).has_value());
  std::filesystem::remove(path);
}

TEST(TwOracle, SmallScaleMonteCarloAgreement) {
  // 3000 draws of the k = 400 GOE top eigenvalue through the tridiagonal
  // model. Finite-k bias plus sampling noise stays well inside 0.05.
  ebr::RandomStream rng(2024);
  std::vector<double> sample;
  for (int r = 0; r < 3000; ++r) {
    sample.push_back(ebr::oracle::edge_scaled(ebr::oracle::goe_top_eigenvalue_tridiagonal(400, rng), 400));
  }
  const double d = ebr::oracle::ks_distance(sample, [](double s) { return ebr::tw1_cdf(s, table()); });
  EXPECT_LT(d, 0.05);
}

}  // namespace
