#pragma once

// Hastings-McLeod solution of Painleve II, q'' = s q + 2 q^3, q ~ Ai(s) as
// s -> +inf, integrated right to left together with the three integrals the
// Tracy-Widom distributions are built from:
//   I(s) = int_s^inf q(x)^2 dx
//   J(s) = int_s^inf (x - s) q(x)^2 dx
//   K(s) = int_s^inf q(x) dx
// so that F2(s) = exp(-J(s)) and F1(s) = exp(-(J(s) + K(s)) / 2).

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/numeric/odeint.hpp>

#include "ebr/airy.hpp"
#include "ebr/errors.hpp"

namespace ebr {

struct PainleveSolution {
  std::vector<double> s_grid;  // descending
  std::vector<double> q_values;
  std::vector<double> q_prime_values;
  std::vector<double> q_squared_integral;  // I(s)
  std::vector<double> q_squared_moment;    // J(s)
  std::vector<double> q_integral;          // K(s)
};

struct PainleveOptions {
  double s_right = 8.0;
  double s_left = -10.0;
  double step = 0.005;
  double tolerance = 1e-12;  // absolute and relative, per adaptive step
};

namespace detail {

// Tails of I, J, K beyond the Airy boundary, where q agrees with Ai to
// O(Ai^3).
inline std::array<double, 3> airy_tail_integrals(double s0) {
  auto ai = [s0](double t) { return airy_asymptotic(s0 + t).ai; };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double k_tail = integrator.integrate(ai);
  const double i_tail = integrator.integrate([&](double t) {
    const double a = ai(t);
    return a * a;
  });
  const double j_tail = integrator.integrate([&](double t) {
    const double a = ai(t);
    return t * a * a;
  });
  return {i_tail, j_tail, k_tail};
}

}  // namespace detail

inline PainleveSolution solve_hastings_mcleod(const PainleveOptions& opt = {}) {
  using State = std::array<double, 5>;  // q, q', I, J, K
  namespace odeint = boost::numeric::odeint;

  if (!(opt.s_right >= 5.0) || !(opt.s_left < opt.s_right) || !(opt.step > 0.0)) {
    throw ConfigError("solve_hastings_mcleod: need s_left < s_right, s_right >= 5, step > 0");
  }
  const auto n_steps = static_cast<std::size_t>(
      std::llround((opt.s_right - opt.s_left) / opt.step));
  std::vector<double> times(n_steps + 1);
  for (std::size_t i = 0; i <= n_steps; ++i) {
    times[i] = opt.s_right - static_cast<double>(i) * opt.step;
  }

  const AiryValues boundary = airy_asymptotic(opt.s_right);
  const auto [i_tail, j_tail, k_tail] = detail::airy_tail_integrals(opt.s_right);
  State y{boundary.ai, boundary.ai_prime, i_tail, j_tail, k_tail};

  auto rhs = [](const State& x, State& dxds, double s) {
    const double q = x[0];
    dxds[0] = x[1];
    dxds[1] = s * q + 2.0 * q * q * q;
    dxds[2] = -q * q;
    dxds[3] = -x[2];
    dxds[4] = -q;
  };

  PainleveSolution sol;
  sol.s_grid.reserve(times.size());
  double last_s = opt.s_right;
  auto observe = [&](const State& x, double s) {
    if (!std::isfinite(x[0]) || x[0] <= 0.0 || std::abs(x[0]) > 1e3) {
      std::ostringstream msg;
      msg << "Painleve II integration diverged at s = " << s << " (q = " << x[0] << ")";
      throw ConstructionError(msg.str());
    }
    last_s = s;
    sol.s_grid.push_back(s);
    sol.q_values.push_back(x[0]);
    sol.q_prime_values.push_back(x[1]);
    sol.q_squared_integral.push_back(x[2]);
    sol.q_squared_moment.push_back(x[3]);
    sol.q_integral.push_back(x[4]);
  };

  auto stepper = odeint::make_controlled(opt.tolerance, opt.tolerance,
                                         odeint::runge_kutta_fehlberg78<State>());
  try {
    odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), -opt.step, observe);
  } catch (const ConstructionError&) {
    throw;
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "Painleve II integration failed after reaching s = " << last_s << ": " << e.what();
    throw ConstructionError(msg.str());
  }
  return sol;
}

}  // namespace ebr
