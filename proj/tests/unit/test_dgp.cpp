#include <gtest/gtest.h>

#include <cmath>

#include "ebr/correlation.hpp"
#include "ebr/dgp.hpp"
#include "ebr/ebr.hpp"

namespace {

using ebr::DgpSpec;
using ebr::RandomStream;

double mean(const Eigen::MatrixXd& x) { return x.mean(); }
double variance(const Eigen::MatrixXd& x) {
  const double mu = x.mean();
  return (x.array() - mu).square().sum() / static_cast<double>(x.size() - 1);
}

TEST(GenIid, DeterministicForFixedSeed) {
  RandomStream a(1), b(1);
  EXPECT_EQ(ebr::gen_iid(7, 9, a), ebr::gen_iid(7, 9, b));
}

TEST(GenIid, Moments) {
  RandomStream rng = RandomStream::derived({3, 0, 0});
  const Eigen::MatrixXd x = ebr::gen_iid(100, 100, rng);
  EXPECT_NEAR(mean(x), 0.0, 0.03);
  EXPECT_GE(variance(x), 0.95);
  EXPECT_LE(variance(x), 1.05);
}

TEST(GenIid, ReplicationStreamsDiffer) {
  RandomStream r0 = RandomStream::derived({3, 0, 0});
  RandomStream r1 = RandomStream::derived({3, 0, 1});
  EXPECT_NE(ebr::gen_iid(10, 10, r0), ebr::gen_iid(10, 10, r1));
}

TEST(GenAr1, ZeroPhiEqualsIid) {
  RandomStream a(4), b(4);
  EXPECT_EQ(ebr::gen_ar1(12, 15, 0.0, a), ebr::gen_iid(12, 15, b));
}

TEST(GenAr1, HandIteration) {
  Eigen::MatrixXd eps(1, 3);
  eps << 1, -1, 2;
  const Eigen::MatrixXd x = ebr::ar1_filter(eps, 0.5);
  EXPECT_DOUBLE_EQ(x(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(x(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(x(0, 2), 1.0);
}

TEST(GenAr1, LagOneAutocorrelation) {
  double total = 0.0;
  int count = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    RandomStream rng = RandomStream::derived({5, r});
    const Eigen::MatrixXd x = ebr::gen_ar1(10, 50, 0.8, rng);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const Eigen::VectorXd a = x.row(i).head(49).transpose();
      const Eigen::VectorXd b = x.row(i).tail(49).transpose();
      total += *ebr::pearson(a, b);
      ++count;
    }
  }
  const double rho1 = total / count;
  EXPECT_GE(rho1, 0.6);
  EXPECT_LE(rho1, 0.9);
}

TEST(GenLinearCsd, OffDiagonalCorrelationMatchesRho) {
  RandomStream rng(6);
  const Eigen::MatrixXd x = ebr::gen_linear_csd(50, 5000, 0.5, rng);
  double sum = 0.0;
  int pairs = 0;
  for (Eigen::Index i = 1; i < 50; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      sum += *ebr::pearson(x.row(i).transpose(), x.row(j).transpose());
      ++pairs;
    }
  }
  const double mean_corr = sum / pairs;
  EXPECT_GE(mean_corr, 0.47);
  EXPECT_LE(mean_corr, 0.53);
  for (Eigen::Index i = 0; i < 50; ++i) {
    const double v = variance(x.row(i));
    EXPECT_GE(v, 0.9);
    EXPECT_LE(v, 1.1);
  }
}

TEST(GenLinearCsd, ZeroRhoHasIidMoments) {
  RandomStream rng(7);
  const Eigen::MatrixXd x = ebr::gen_linear_csd(100, 100, 0.0, rng);
  EXPECT_NEAR(mean(x), 0.0, 0.03);
  EXPECT_GE(variance(x), 0.95);
  EXPECT_LE(variance(x), 1.05);
}

TEST(GenNonmono, HandIteration) {
  Eigen::MatrixXd base = Eigen::MatrixXd::Zero(2, 3);
  base(1, 1) = 7.0;
  const Eigen::MatrixXd x = ebr::nonmono_transform(base, Eigen::VectorXd::Zero(1));
  EXPECT_DOUBLE_EQ(x(0, 1), 1.0);
  EXPECT_NEAR(x(0, 2), 1.38177, 1e-5);
  EXPECT_DOUBLE_EQ(x(0, 2), std::sin(1.0) + std::cos(1.0));
  EXPECT_EQ(x(1, 1), 7.0);
}

TEST(GenNonmono, UnselectedUnitsEqualIidBase) {
  for (Eigen::Index n : {2, 7, 50}) {
    RandomStream a(8), b(8);
    const Eigen::MatrixXd x = ebr::gen_nonmono(n, 20, a);
    const Eigen::MatrixXd base = ebr::gen_iid(n, 20, b);
    const Eigen::Index affected = ebr::nonmono_affected_units(n);
    EXPECT_EQ(affected, (n + 1) / 2);
    EXPECT_EQ(n - affected, n / 2);
    EXPECT_EQ(Eigen::MatrixXd(x.bottomRows(n - affected)), Eigen::MatrixXd(base.bottomRows(n - affected)));
    // First period of affected units is the base draw.
    EXPECT_EQ(Eigen::VectorXd(x.col(0)), Eigen::VectorXd(base.col(0)));
    EXPECT_NE(Eigen::MatrixXd(x.topRows(affected)), Eigen::MatrixXd(base.topRows(affected)));
  }
}

TEST(GenNonmono, LowCorrelationYetRejected) {
  RandomStream rng = RandomStream::derived({9, 0});
  const Eigen::MatrixXd x = ebr::gen_nonmono(50, 50, rng);
  ebr::CorrelationAccumulator acc;
  acc.add(x);
  EXPECT_LE(std::abs(acc.summary().pearson_mean), 0.05);
  ebr::EbrConfig cfg;
  cfg.seed = 10;
  EXPECT_TRUE(ebr::ebr_test(ebr::ResidualMatrix(x), cfg, ebr::default_tw_table()).reject);
}

TEST(Generate, DeterministicFunctionOfSpecAndStream) {
  for (const DgpSpec& spec : {DgpSpec::iid(9, 4), DgpSpec::ar1(9, 4, 0.3),
                              DgpSpec::linear_csd(9, 4, 0.2), DgpSpec::nonmono(9, 4)}) {
    RandomStream a = RandomStream::derived({11, 2, 3});
    RandomStream b = RandomStream::derived({11, 2, 3});
    EXPECT_EQ(ebr::generate(spec, a).values(), ebr::generate(spec, b).values());
    EXPECT_EQ(ebr::generate(spec, a).label(), spec.model_descriptor());
  }
}

TEST(DgpSpec, Validation) {
  EXPECT_NO_THROW(DgpSpec::ar1(5, 5, 0.0).validate());
  EXPECT_THROW(DgpSpec::ar1(5, 5, 1.0).validate(), ebr::ConfigError);
  EXPECT_THROW(DgpSpec::linear_csd(5, 5, -0.1).validate(), ebr::ConfigError);
  DgpSpec bad = DgpSpec::nonmono(5, 5);
  bad.phi = 0.5;
  EXPECT_THROW(bad.validate(), ebr::ConfigError);
  bad = DgpSpec::iid(5, 5);
  bad.rho = 0.5;
  EXPECT_THROW(bad.validate(), ebr::ConfigError);
  EXPECT_THROW(DgpSpec::iid(1, 5).validate(), ebr::ConfigError);
  bad = DgpSpec::nonmono(5, 5);
  bad.affected_fraction = 0.3;
  EXPECT_THROW(bad.validate(), ebr::ConfigError);
  EXPECT_THROW(ebr::parse_dgp_kind("garch"), ebr::ConfigError);
}

TEST(DgpSpec, JsonRoundTrip) {
  for (const DgpSpec& spec : {DgpSpec::iid(30, 15), DgpSpec::ar1(50, 20, 0.8),
                              DgpSpec::linear_csd(100, 50, 0.2), DgpSpec::nonmono(50, 50)}) {
    const nlohmann::json j = spec;
    EXPECT_EQ(j.get<DgpSpec>(), spec);
  }
  EXPECT_EQ(nlohmann::json::parse(R"({"kind":"linear-csd","rho":0.5})").get<DgpSpec>().rho, 0.5);
}

}  // namespace
