#pragma once

// Data-generating processes for the Monte Carlo study. All generators fill
// an n_units x m_periods matrix and are pure functions of the stream they
// are handed.

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "ebr/errors.hpp"
#include "ebr/residual.hpp"
#include "ebr/rng.hpp"

namespace ebr {

enum class DgpKind { iid, ar1, linear_csd, nonmono };

inline const char* to_string(DgpKind kind) {
  switch (kind) {
    case DgpKind::iid: return "iid";
    case DgpKind::ar1: return "ar1";
    case DgpKind::linear_csd: return "linear_csd";
    case DgpKind::nonmono: return "nonmono";
  }
  return "?";
}

inline DgpKind parse_dgp_kind(const std::string& text) {
  if (text == "iid") return DgpKind::iid;
  if (text == "ar1") return DgpKind::ar1;
  if (text == "linear_csd" || text == "linear-csd") return DgpKind::linear_csd;
  if (text == "nonmono") return DgpKind::nonmono;
  throw ConfigError("unknown DGP kind '" + text + "' (expected iid, ar1, linear_csd, nonmono)");
}

struct DgpSpec {
  DgpKind kind = DgpKind::iid;
  std::optional<double> phi;  // ar1 only
  std::optional<double> rho;  // linear_csd only
  double affected_fraction = 0.5;  // nonmono; fixed
  Eigen::Index n_units = 2;
  Eigen::Index m_periods = 2;

  static DgpSpec iid(Eigen::Index n, Eigen::Index m) { return {DgpKind::iid, {}, {}, 0.5, n, m}; }
  static DgpSpec ar1(Eigen::Index n, Eigen::Index m, double phi) {
    return {DgpKind::ar1, phi, {}, 0.5, n, m};
  }
  static DgpSpec linear_csd(Eigen::Index n, Eigen::Index m, double rho) {
    return {DgpKind::linear_csd, {}, rho, 0.5, n, m};
  }
  static DgpSpec nonmono(Eigen::Index n, Eigen::Index m) {
    return {DgpKind::nonmono, {}, {}, 0.5, n, m};
  }

  DgpSpec with_shape(Eigen::Index n, Eigen::Index m) const {
    DgpSpec copy = *this;
    copy.n_units = n;
    copy.m_periods = m;
    return copy;
  }

  // Parameter value for plotting (phi or rho), if the kind has one.
  std::optional<double> parameter() const {
    if (kind == DgpKind::ar1) return phi;
    if (kind == DgpKind::linear_csd) return rho;
    return std::nullopt;
  }

  void validate() const {
    if (n_units < 2 || m_periods < 2) throw ConfigError("DGP dimensions must be at least 2x2");
    if (kind == DgpKind::ar1) {
      if (!phi || !(*phi >= 0.0 && *phi < 1.0)) throw ConfigError("ar1 requires phi in [0, 1)");
    } else if (phi) {
      throw ConfigError(std::string("phi is only valid for ar1, not ") + to_string(kind));
    }
    if (kind == DgpKind::linear_csd) {
      if (!rho || !(*rho >= 0.0 && *rho < 1.0)) {
        throw ConfigError("linear_csd requires rho in [0, 1)");
      }
    } else if (rho) {
      throw ConfigError(std::string("rho is only valid for linear_csd, not ") + to_string(kind));
    }
    if (affected_fraction != 0.5) throw ConfigError("nonmono affected_fraction is fixed at 0.5");
  }

  // Model descriptor without dimensions, e.g. "ar1(phi=0.8)".
  std::string model_descriptor() const {
    std::ostringstream out;
    out << to_string(kind);
    if (phi) out << "(phi=" << *phi << ")";
    if (rho) out << "(rho=" << *rho << ")";
    return out.str();
  }

  bool operator==(const DgpSpec&) const = default;
};

inline void to_json(nlohmann::json& j, const DgpSpec& spec) {
  j = nlohmann::json{{"kind", to_string(spec.kind)},
                     {"n_units", spec.n_units},
                     {"m_periods", spec.m_periods}};
  if (spec.phi) j["phi"] = *spec.phi;
  if (spec.rho) j["rho"] = *spec.rho;
  if (spec.kind == DgpKind::nonmono) j["affected_fraction"] = spec.affected_fraction;
}

inline void from_json(const nlohmann::json& j, DgpSpec& spec) {
  spec = DgpSpec{};
  spec.kind = parse_dgp_kind(j.at("kind").get<std::string>());
  if (j.contains("phi")) spec.phi = j.at("phi").get<double>();
  if (j.contains("rho")) spec.rho = j.at("rho").get<double>();
  if (j.contains("affected_fraction")) spec.affected_fraction = j.at("affected_fraction").get<double>();
  spec.n_units = j.value("n_units", Eigen::Index{2});
  spec.m_periods = j.value("m_periods", Eigen::Index{2});
}

// iid N(0, 1), drawn unit by unit (row-major).
inline Eigen::MatrixXd gen_iid(Eigen::Index n, Eigen::Index m, RandomStream& rng) {
  Eigen::MatrixXd x(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index t = 0; t < m; ++t) x(i, t) = rng.normal();
  return x;
}

// x_{i,1} = eps_{i,1};  x_{i,t} = phi x_{i,t-1} + (1 - phi) eps_{i,t}.
// The (1 - phi) innovation weight and the unscaled start-up are intentional.
inline Eigen::MatrixXd ar1_filter(const Eigen::MatrixXd& eps, double phi) {
  Eigen::MatrixXd x = eps;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index t = 1; t < x.cols(); ++t) x(i, t) = phi * x(i, t - 1) + (1.0 - phi) * eps(i, t);
  return x;
}

inline Eigen::MatrixXd gen_ar1(Eigen::Index n, Eigen::Index m, double phi, RandomStream& rng) {
  return ar1_filter(gen_iid(n, m, rng), phi);
}

// Equicorrelated units via the one-factor identity: per period t,
// x_t = sqrt(rho) g_t 1 + sqrt(1 - rho) e_t, so Cov(x_t) has unit diagonal
// and rho off the diagonal. Draw order per period: g_t, then e_t.
inline Eigen::MatrixXd gen_linear_csd(Eigen::Index n, Eigen::Index m, double rho,
                                      RandomStream& rng) {
  const double load = std::sqrt(rho);
  const double idio = std::sqrt(1.0 - rho);
  Eigen::MatrixXd x(n, m);
  for (Eigen::Index t = 0; t < m; ++t) {
    const double common = rng.normal();
    for (Eigen::Index i = 0; i < n; ++i) x(i, t) = load * common + idio * rng.normal();
  }
  return x;
}

// Number of units the non-monotonic recursion is applied to (the first ones).
inline Eigen::Index nonmono_affected_units(Eigen::Index n) { return (n + 1) / 2; }

// Overwrites periods 2..m of unit i (i < unit_noise.size()) with
//   x_{i,t} = sin(x_{i,t-1}) + cos(x_{i,t-1}^2) + 0.5 eps_i
// iterating on the updated values.
inline Eigen::MatrixXd nonmono_transform(Eigen::MatrixXd x, const Eigen::VectorXd& unit_noise) {
  for (Eigen::Index i = 0; i < unit_noise.size(); ++i) {
    for (Eigen::Index t = 1; t < x.cols(); ++t) {
      const double prev = x(i, t - 1);
      x(i, t) = std::sin(prev) + std::cos(prev * prev) + 0.5 * unit_noise(i);
    }
  }
  return x;
}

// iid base matrix, then one eps_i ~ N(0, 1) per affected unit (the first
// ceil(n/2)), drawn after the base matrix, fed to nonmono_transform.
inline Eigen::MatrixXd gen_nonmono(Eigen::Index n, Eigen::Index m, RandomStream& rng) {
  Eigen::MatrixXd base = gen_iid(n, m, rng);
  Eigen::VectorXd noise(nonmono_affected_units(n));
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = rng.normal();
  return nonmono_transform(std::move(base), noise);
}

inline ResidualMatrix generate(const DgpSpec& spec, RandomStream& rng) {
  spec.validate();
  const Eigen::Index n = spec.n_units;
  const Eigen::Index m = spec.m_periods;
  switch (spec.kind) {
    case DgpKind::iid: return ResidualMatrix(gen_iid(n, m, rng), spec.model_descriptor());
    case DgpKind::ar1: return ResidualMatrix(gen_ar1(n, m, *spec.phi, rng), spec.model_descriptor());
    case DgpKind::linear_csd:
      return ResidualMatrix(gen_linear_csd(n, m, *spec.rho, rng), spec.model_descriptor());
    case DgpKind::nonmono: return ResidualMatrix(gen_nonmono(n, m, rng), spec.model_descriptor());
  }
  throw ConfigError("unknown DGP kind");
}

}  // namespace ebr
