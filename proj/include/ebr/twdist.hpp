#pragma once

// Tracy-Widom distribution of order beta = 1 (largest eigenvalue of the
// Gaussian orthogonal ensemble), tabulated from the Hastings-McLeod solution
// of Painleve II and interpolated with shape-preserving cubic Hermite
// polynomials. The right tail (F1 > 0.99) is interpolated in log-survival
// space so that small p-values keep their relative accuracy.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "ebr/errors.hpp"
#include "ebr/painleve.hpp"

namespace ebr {

struct TwTableParams {
  double s_min = -10.0;
  double s_max = 8.0;
  double step = 0.005;

  bool operator==(const TwTableParams&) const = default;
};

class TwTable {
public:
  // An empty table; every query on it raises ConfigError.
  TwTable() = default;

  // Validates the table invariants and throws ConstructionError on failure.
  TwTable(std::vector<double> s_grid, std::vector<double> cdf_values,
          std::vector<double> pdf_values)
      : s_(std::move(s_grid)), cdf_(std::move(cdf_values)), pdf_(std::move(pdf_values)) {
    validate();
    prepare_tail();
  }

  bool empty() const noexcept { return s_.empty(); }
  std::size_t size() const noexcept { return s_.size(); }
  double s_min() const { return require().s_.front(); }
  double s_max() const { return require().s_.back(); }

  std::span<const double> s_grid() const noexcept { return s_; }
  std::span<const double> cdf_values() const noexcept { return cdf_; }
  std::span<const double> pdf_values() const noexcept { return pdf_; }

  double cdf(double s) const {
    require();
    if (std::isnan(s)) throw DomainError("tw1_cdf: NaN argument");
    if (s <= s_.front()) return s == s_.front() ? cdf_.front() : 0.0;
    if (s >= s_.back()) return 1.0;
    const std::size_t i = interval(s);
    if (i >= tail_begin_) return 1.0 - std::exp(log_sf_at(i, s));
    return std::clamp(hermite(i, s, cdf_, pdf_, 1.0), 0.0, 1.0);
  }

  double sf(double s) const {
    require();
    if (std::isnan(s)) throw DomainError("tw1_sf: NaN argument");
    if (s <= s_.front()) return s == s_.front() ? 1.0 - cdf_.front() : 1.0;
    if (s >= s_.back()) return 0.0;
    const std::size_t i = interval(s);
    if (i >= tail_begin_) return std::exp(log_sf_at(i, s));
    return 1.0 - std::clamp(hermite(i, s, cdf_, pdf_, 1.0), 0.0, 1.0);
  }

  double quantile(double p) const {
    require();
    if (!(p > 0.0 && p < 1.0)) throw DomainError("tw1_quantile: p must lie in (0, 1)");
    if (p <= cdf_.front()) return s_.front();
    if (p >= cdf(s_.back())) return s_.back();
    auto objective = [&](double s) { return cdf(s) - p; };
    // Bracket on the grid first so the solver works on a single smooth piece.
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), p);
    const std::size_t hi = static_cast<std::size_t>(it - cdf_.begin());
    const std::size_t lo = hi == 0 ? 0 : hi - 1;
    if (cdf_[hi] == p) return s_[hi];
    std::uintmax_t max_iter = 200;
    const auto bracket = boost::math::tools::toms748_solve(
        objective, s_[lo], s_[hi], cdf_[lo] - p, cdf_[hi] - p,
        boost::math::tools::eps_tolerance<double>(52), max_iter);
    return 0.5 * (bracket.first + bracket.second);
  }

private:
  const TwTable& require() const {
    if (s_.empty()) throw ConfigError("Tracy-Widom table is missing (empty)");
    return *this;
  }

  void validate() const {
    const std::size_t n = s_.size();
    if (n < 3 || cdf_.size() != n || pdf_.size() != n) {
      throw ConstructionError("TwTable: grid and value columns must have equal length >= 3");
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s_[i]) || !std::isfinite(cdf_[i]) || !std::isfinite(pdf_[i])) {
        throw ConstructionError("TwTable: non-finite entry at row " + std::to_string(i));
      }
      if (pdf_[i] < 0.0) throw ConstructionError("TwTable: negative density at row " + std::to_string(i));
      if (i > 0) {
        if (!(s_[i] > s_[i - 1])) throw ConstructionError("TwTable: abscissae not strictly increasing");
        if (cdf_[i] < cdf_[i - 1]) throw ConstructionError("TwTable: CDF decreases at row " + std::to_string(i));
        mass += 0.5 * (s_[i] - s_[i - 1]) * (pdf_[i] + pdf_[i - 1]);
      }
    }
    if (!(cdf_.front() < 1e-8) || !(cdf_.back() > 1.0 - 1e-8)) {
      throw ConstructionError("TwTable: CDF does not reach its tail limits on the grid");
    }
    if (mass < 0.999 || mass > 1.001) {
      throw ConstructionError("TwTable: density integrates to " + std::to_string(mass));
    }
  }

  void prepare_tail() {
    const auto it = std::find_if(cdf_.begin(), cdf_.end(), [](double f) { return f > 0.99; });
    tail_begin_ = static_cast<std::size_t>(it - cdf_.begin());
    log_sf_.assign(s_.size(), 0.0);
    dlog_sf_.assign(s_.size(), 0.0);
    for (std::size_t i = tail_begin_; i < s_.size(); ++i) {
      const double survival = 1.0 - cdf_[i];
      if (!(survival > 0.0)) {
        // Survival underflowed; treat the rest of the grid as cdf == 1.
        s_.resize(i);
        cdf_.resize(i);
        pdf_.resize(i);
        log_sf_.resize(i);
        dlog_sf_.resize(i);
        break;
      }
      log_sf_[i] = std::log(survival);
      dlog_sf_[i] = -pdf_[i] / survival;
    }
  }

  std::size_t interval(double s) const {
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    return static_cast<std::size_t>(it - s_.begin()) - 1;
  }

  double log_sf_at(std::size_t i, double s) const {
    return hermite(i, s, log_sf_, dlog_sf_, -1.0);
  }

  // Cubic Hermite on [s_i, s_{i+1}] with Fritsch-Carlson limiting of the
  // end slopes, which keeps each piece monotone in the direction `sign`.
  double hermite(std::size_t i, double s, const std::vector<double>& y,
                 const std::vector<double>& dy, double sign) const {
    const double h = s_[i + 1] - s_[i];
    const double delta = (y[i + 1] - y[i]) / h;
    double d0 = dy[i];
    double d1 = dy[i + 1];
    if (delta * sign <= 0.0) {
      d0 = 0.0;
      d1 = 0.0;
    } else {
      const double a = d0 / delta;
      const double b = d1 / delta;
      const double r2 = a * a + b * b;
      if (r2 > 9.0) {
        const double tau = 3.0 / std::sqrt(r2);
        d0 = tau * a * delta;
        d1 = tau * b * delta;
      }
      if (a < 0.0) d0 = 0.0;
      if (b < 0.0) d1 = 0.0;
    }
    const double t = (s - s_[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y[i] + (t3 - 2 * t2 + t) * h * d0 +
           (-2 * t3 + 3 * t2) * y[i + 1] + (t3 - t2) * h * d1;
  }

  std::vector<double> s_;
  std::vector<double> cdf_;
  std::vector<double> pdf_;
  std::vector<double> log_sf_;
  std::vector<double> dlog_sf_;
  std::size_t tail_begin_ = 0;
};

inline TwTable build_tw1_table(double s_min, double s_max, double step) {
  if (!(s_min < -8.0) || !(s_max > 6.0) || !(step > 0.0 && step <= 0.01)) {
    throw ConfigError("build_tw1_table: need s_min < -8, s_max > 6, 0 < step <= 0.01");
  }
  PainleveOptions opt;
  opt.s_right = s_max;
  opt.s_left = s_min;
  opt.step = step;
  const PainleveSolution sol = solve_hastings_mcleod(opt);

  const std::size_t n = sol.s_grid.size();
  std::vector<double> s(n), cdf(n), pdf(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = n - 1 - j;  // solution runs right to left
    const double exponent = 0.5 * (sol.q_squared_moment[i] + sol.q_integral[i]);
    const double f1 = std::exp(-exponent);
    s[j] = sol.s_grid[i];
    cdf[j] = f1;
    // d/ds exp(-(J + K)/2) = F1 * (I + q) / 2
    pdf[j] = 0.5 * f1 * (sol.q_squared_integral[i] + sol.q_values[i]);
  }
  return TwTable(std::move(s), std::move(cdf), std::move(pdf));
}

inline TwTable build_tw1_table(const TwTableParams& params = {}) {
  return build_tw1_table(params.s_min, params.s_max, params.step);
}

inline double tw1_cdf(double s, const TwTable& table) { return table.cdf(s); }
inline double tw1_sf(double s, const TwTable& table) { return table.sf(s); }
inline double tw1_quantile(double p, const TwTable& table) { return table.quantile(p); }

struct TableMoments {
  double mass;
  double mean;
  double variance;
};

// Trapezoidal moments of the tabulated density.
inline TableMoments table_moments(const TwTable& table) {
  const auto s = table.s_grid();
  const auto f = table.pdf_values();
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double w = 0.5 * (s[i] - s[i - 1]);
    m0 += w * (f[i] + f[i - 1]);
    m1 += w * (s[i] * f[i] + s[i - 1] * f[i - 1]);
    m2 += w * (s[i] * s[i] * f[i] + s[i - 1] * s[i - 1] * f[i - 1]);
  }
  const double mean = m1 / m0;
  return {m0, mean, m2 / m0 - mean * mean};
}

// ---------------------------------------------------------------------------
// Cache file: one header line, a column line, then `s,cdf,pdf` rows written
// in shortest round-trip decimal form.

inline constexpr int kTwCacheVersion = 1;

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string tw_cache_header(const TwTableParams& p) {
  return "# ebr-tw1-table v" + std::to_string(kTwCacheVersion) +
         " s_min=" + format_double(p.s_min) + " s_max=" + format_double(p.s_max) +
         " step=" + format_double(p.step);
}

}  // namespace detail

inline void save_tw_table(const TwTable& table, const TwTableParams& params,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write Tracy-Widom cache " + path.string());
  out << detail::tw_cache_header(params) << '\n' << "s,cdf,pdf\n";
  const auto s = table.s_grid();
  const auto c = table.cdf_values();
  const auto f = table.pdf_values();
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << detail::format_double(s[i]) << ',' << detail::format_double(c[i]) << ','
        << detail::format_double(f[i]) << '\n';
  }
}

// Returns nullopt when the file is absent, was written for another version
// or grid, or does not parse into a valid table.
inline std::optional<TwTable> load_tw_table(const TwTableParams& params,
                                            const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line) || line != detail::tw_cache_header(params)) return std::nullopt;
  if (!std::getline(in, line) || line != "s,cdf,pdf") return std::nullopt;
  std::vector<double> s, c, f;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double v[3];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int k = 0; k < 3; ++k) {
      const auto res = std::from_chars(p, end, v[k]);
      if (res.ec != std::errc{}) return std::nullopt;
      p = res.ptr;
      if (k < 2) {
        if (p == end || *p != ',') return std::nullopt;
        ++p;
      }
    }
    if (p != end) return std::nullopt;
    s.push_back(v[0]);
    c.push_back(v[1]);
    f.push_back(v[2]);
  }
  try {
    return TwTable(std::move(s), std::move(c), std::move(f));
  } catch (const ConstructionError&) {
    return std::nullopt;
  }
}

inline TwTable load_or_build_tw_table(const TwTableParams& params,
                                      const std::filesystem::path& path) {
  if (auto cached = load_tw_table(params, path)) return std::move(*cached);
  TwTable table = build_tw1_table(params);
  try {
    save_tw_table(table, params, path);
  } catch (const std::exception&) {
    // Unwritable cache location: keep the in-memory table.
  }
  return table;
}

inline constexpr const char* kTwCacheEnvVar = "EBR_TW_CACHE";

// Process-wide table on the default grid, built on first use. When
// EBR_TW_CACHE names a file, the table is loaded from / saved to it.
inline const TwTable& default_tw_table() {
  static const TwTable table = [] {
    const TwTableParams params;
    if (const char* path = std::getenv(kTwCacheEnvVar); path && *path) {
      return load_or_build_tw_table(params, path);
    }
    return build_tw1_table(params);
  }();
  return table;
}

}  // namespace ebr
