#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ebr/ebr.hpp"
#include "ebr/spectral.hpp"
#include "oracles.hpp"

namespace {

using ebr::SymmetricMatrix;

SymmetricMatrix sym(const Eigen::MatrixXd& m) { return SymmetricMatrix::from_symmetric(m); }

SymmetricMatrix random_symmetric(Eigen::Index k, ebr::RandomStream& rng) {
  return SymmetricMatrix::symmetrize(ebr::oracle::gaussian_matrix(k, k, rng));
}

TEST(LargestEigenvalue, Diagonal) {
  Eigen::MatrixXd d = Eigen::Vector3d(3, 1, -2).asDiagonal();
  EXPECT_NEAR(ebr::largest_eigenvalue(sym(d)), 3.0, 1e-14);
}

TEST(LargestEigenvalue, OffDiagonalPair) {
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 1, 0;
  EXPECT_NEAR(ebr::largest_eigenvalue(sym(m)), 1.0, 1e-14);
}

TEST(AllEigenvalues, DiagonalDescending) {
  Eigen::MatrixXd d = Eigen::Vector3d(1, -2, 3).asDiagonal();
  const auto ev = ebr::all_eigenvalues(sym(d));
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_NEAR(ev[0], 3.0, 1e-14);
  EXPECT_NEAR(ev[1], 1.0, 1e-14);
  EXPECT_NEAR(ev[2], -2.0, 1e-14);
}

TEST(AllEigenvalues, DegenerateEigenvalue) {
  const auto ev = ebr::all_eigenvalues(sym(2.0 * Eigen::MatrixXd::Identity(2, 2)));
  EXPECT_DOUBLE_EQ(ev[0], 2.0);
  EXPECT_DOUBLE_EQ(ev[1], 2.0);
}

TEST(AllEigenvalues, SumEqualsTrace) {
  ebr::RandomStream rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const SymmetricMatrix s = random_symmetric(50, rng);
    const auto ev = ebr::all_eigenvalues(s);
    double sum = 0.0;
    for (double v : ev) sum += v;
    const double scale = s.matrix().cwiseAbs().maxCoeff();
    EXPECT_NEAR(sum, s.matrix().trace(), 1e-8 * 50 * scale);
    for (std::size_t i = 1; i < ev.size(); ++i) ASSERT_GE(ev[i - 1], ev[i]);
  }
}

TEST(LargestEigenvalue, ShiftEquivariance) {
  ebr::RandomStream rng(6);
  for (double c : {-3.5, 0.25, 10.0}) {
    const SymmetricMatrix s = random_symmetric(30, rng);
    const Eigen::MatrixXd shifted =
        s.matrix() + c * Eigen::MatrixXd::Identity(s.order(), s.order());
    EXPECT_NEAR(ebr::largest_eigenvalue(sym(shifted)), ebr::largest_eigenvalue(s) + c, 1e-10);
  }
}

TEST(LargestEigenvalue, OrthogonalSimilarityInvariance) {
  ebr::RandomStream rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    const SymmetricMatrix s = random_symmetric(40, rng);
    const Eigen::MatrixXd q = ebr::oracle::random_orthogonal(40, rng);
    Eigen::MatrixXd rotated = q.transpose() * s.matrix() * q;
    // Re-impose exact symmetry lost to rounding in the products.
    rotated = (0.5 * (rotated + rotated.transpose())).eval();
    EXPECT_NEAR(ebr::largest_eigenvalue(sym(rotated)), ebr::largest_eigenvalue(s), 1e-9);
  }
}

TEST(AllEigenvalues, AgreeWithCharacteristicPolynomialForSmallOrders) {
  ebr::RandomStream rng(8);
  for (Eigen::Index k = 1; k <= 4; ++k) {
    for (int rep = 0; rep < 5; ++rep) {
      const SymmetricMatrix s = random_symmetric(k, rng);
      const auto expected = ebr::oracle::brute_force_eigenvalues(s.matrix());
      const auto actual = ebr::all_eigenvalues(s);
      ASSERT_EQ(expected.size(), actual.size()) << "k=" << k;
      for (std::size_t i = 0; i < actual.size(); ++i) EXPECT_NEAR(actual[i], expected[i], 1e-8);
    }
  }
}

TEST(LargestEigenvalue, GaussianEdgeAtOrder200) {
  // Semicircle edge of S = (Z + Z^T)/2 with iid N(0,1) Z sits at sqrt(2k).
  ebr::RandomStream rng(9);
  double mean = 0.0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    mean += ebr::largest_eigenvalue(random_symmetric(200, rng)) / reps;
  }
  EXPECT_NEAR(mean, std::sqrt(2.0 * 200.0), 1.5);
}

TEST(LargestEigenvalue, DeterministicForSameInput) {
  ebr::RandomStream rng(10);
  const SymmetricMatrix s = random_symmetric(80, rng);
  EXPECT_EQ(ebr::all_eigenvalues(s), ebr::all_eigenvalues(s));
}

TEST(Spectral, RejectsNonFiniteEntries) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  m(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(ebr::largest_eigenvalue(sym(m)), ebr::DomainError);
  m(1, 1) = std::nan("");
  EXPECT_THROW(ebr::all_eigenvalues(sym(m)), ebr::DomainError);
}

TEST(SymmetricMatrix, RejectsAsymmetricInput) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2.0000001, 1;
  EXPECT_THROW(sym(m), ebr::DomainError);
  EXPECT_THROW(sym(Eigen::MatrixXd::Zero(2, 3)), ebr::DomainError);
}

TEST(SymmetricMatrix, SymmetrizeIsExactlySymmetric) {
  ebr::RandomStream rng(12);
  const SymmetricMatrix s = random_symmetric(60, rng);
  EXPECT_EQ((s.matrix() - s.matrix().transpose()).cwiseAbs().maxCoeff(), 0.0);
}

}  // namespace
