#pragma once

#include <string>
#include <utility>

#include <Eigen/Dense>

#include "ebr/errors.hpp"

namespace ebr {

// Panel residuals in canonical orientation: one row per cross-sectional
// unit, one column per time period (n_units x m_periods).
class ResidualMatrix {
public:
  explicit ResidualMatrix(Eigen::MatrixXd values, std::string label = {})
      : values_(std::move(values)), label_(std::move(label)) {
    if (values_.rows() < 2 || values_.cols() < 2) {
      throw DomainError("ResidualMatrix: need at least 2 units and 2 periods, got " +
                        std::to_string(values_.rows()) + "x" + std::to_string(values_.cols()));
    }
    if (!values_.allFinite()) throw DomainError("ResidualMatrix: all values must be finite");
  }

  Eigen::Index n_units() const noexcept { return values_.rows(); }
  Eigen::Index m_periods() const noexcept { return values_.cols(); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  double operator()(Eigen::Index unit, Eigen::Index period) const { return values_(unit, period); }
  const std::string& label() const noexcept { return label_; }

  ResidualMatrix transposed() const { return ResidualMatrix(values_.transpose(), label_); }

private:
  Eigen::MatrixXd values_;
  std::string label_;
};

}  // namespace ebr
