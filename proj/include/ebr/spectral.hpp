#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ebr/errors.hpp"

namespace ebr {

// Real symmetric matrix. Symmetry is exact: either enforced when building
// from a square matrix via symmetrize(), or checked bit-for-bit by
// from_symmetric().
class SymmetricMatrix {
public:
  static SymmetricMatrix symmetrize(const Eigen::MatrixXd& z) {
    if (z.rows() != z.cols()) throw DomainError("symmetrize: matrix must be square");
    const Eigen::Index k = z.rows();
    Eigen::MatrixXd s(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      s(j, j) = z(j, j);
      for (Eigen::Index i = j + 1; i < k; ++i) {
        // Floating-point addition commutes, so both halves get the same bits.
        const double v = 0.5 * (z(i, j) + z(j, i));
        s(i, j) = v;
        s(j, i) = v;
      }
    }
    return SymmetricMatrix(std::move(s));
  }

  static SymmetricMatrix from_symmetric(Eigen::MatrixXd s) {
    if (s.rows() != s.cols()) throw DomainError("SymmetricMatrix: matrix must be square");
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      for (Eigen::Index i = j + 1; i < s.rows(); ++i) {
        if (s(i, j) != s(j, i) && !(std::isnan(s(i, j)) && std::isnan(s(j, i)))) {
          throw DomainError("SymmetricMatrix: input is not exactly symmetric");
        }
      }
    }
    return SymmetricMatrix(std::move(s));
  }

  Eigen::Index order() const noexcept { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }

private:
  explicit SymmetricMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
  Eigen::MatrixXd m_;
};

namespace detail {

inline void require_spectral_input(const SymmetricMatrix& s) {
  if (s.order() < 1) throw DomainError("eigenvalues: empty matrix");
  if (!s.matrix().allFinite()) throw DomainError("eigenvalues: non-finite matrix entry");
}

}  // namespace detail

// Householder tridiagonalisation followed by implicit symmetric QR (Eigen's
// SelfAdjointEigenSolver); deterministic for a given input.
inline std::vector<double> all_eigenvalues(const SymmetricMatrix& s) {
  detail::require_spectral_input(s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw DomainError("eigenvalues: symmetric QR iteration did not converge");
  }
  const Eigen::VectorXd& ev = solver.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline double largest_eigenvalue(const SymmetricMatrix& s) {
  return all_eigenvalues(s).front();
}

}  // namespace ebr
