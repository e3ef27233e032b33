#pragma once

#include <cmath>
#include <numbers>

#include "ebr/errors.hpp"

namespace ebr {

struct AiryValues {
  double ai;
  double ai_prime;
};

// Ai(x) and Ai'(x) for large positive x from the asymptotic expansion
//   Ai(x)  ~  e^{-z} / (2 sqrt(pi) x^{1/4}) * sum_k (-1)^k u_k / z^k
//   Ai'(x) ~ -x^{1/4} e^{-z} / (2 sqrt(pi)) * sum_k (-1)^k v_k / z^k
// with z = 2/3 x^{3/2}. The series is summed up to its smallest term; the
// truncation error is then of order e^{-2z} relative: about 1e-8 at x = 5,
// below 1e-10 from x = 7 and about 1e-13 at x = 8.
inline AiryValues airy_asymptotic(double x) {
  if (!(x >= 4.0) || !std::isfinite(x)) {
    throw DomainError("airy_asymptotic: requires finite x >= 4");
  }
  const double z = 2.0 / 3.0 * x * std::sqrt(x);
  double u = 1.0;
  double sum_u = 1.0;
  double sum_v = 1.0;
  double last_term = 1.0;
  for (int k = 1; k < 200; ++k) {
    u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
         ((2.0 * k - 1.0) * 216.0 * k);
    const double v = -(6.0 * k + 1.0) / (6.0 * k - 1.0) * u;
    const double scale = std::pow(-z, -k);
    const double term = std::abs(u * scale);
    if (term >= last_term || term < 1e-18) break;
    sum_u += u * scale;
    sum_v += v * scale;
    last_term = term;
  }
  const double prefactor = std::exp(-z) / (2.0 * std::sqrt(std::numbers::pi));
  const double x14 = std::sqrt(std::sqrt(x));
  return {prefactor / x14 * sum_u, -prefactor * x14 * sum_v};
}

}  // namespace ebr
