#pragma once

// Monte Carlo power study: run the EBR test over a (DGP x n x m) grid and
// tabulate rejection rates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ebr/dgp.hpp"
#include "ebr/ebr.hpp"
#include "ebr/errors.hpp"
#include "ebr/parallel.hpp"
#include "ebr/rng.hpp"
#include "ebr/twdist.hpp"
#include "ebr/version.hpp"

namespace ebr {

class HarnessError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ExperimentGrid {
  std::vector<DgpSpec> dgp_specs;  // shapes are ignored; n/m come from the grid
  std::vector<Eigen::Index> n_values{30, 50, 100};
  std::vector<Eigen::Index> m_values{15, 20, 50};
  int replications = 1000;
  double alpha = 0.05;
  std::uint64_t master_seed = 0;
  int padding_reps = 1;
  bool include_size = false;  // add an iid row for every (n, m)

  std::vector<DgpSpec> cells() const {
    if (replications < 1) throw ConfigError("replications must be at least 1");
    if (n_values.empty() || m_values.empty()) throw ConfigError("empty n or m grid");
    std::vector<DgpSpec> models = dgp_specs;
    const bool has_iid = std::any_of(models.begin(), models.end(),
                                     [](const DgpSpec& s) { return s.kind == DgpKind::iid; });
    if (include_size && !has_iid) models.insert(models.begin(), DgpSpec::iid(2, 2));
    if (models.empty()) throw ConfigError("experiment grid has no DGP specifications");

    std::set<std::string> seen;
    std::vector<DgpSpec> out;
    for (const DgpSpec& model : models) {
      if (!seen.insert(model.model_descriptor()).second) {
        throw ConfigError("duplicate DGP in grid: " + model.model_descriptor());
      }
      for (Eigen::Index n : std::set<Eigen::Index>(n_values.begin(), n_values.end())) {
        for (Eigen::Index m : std::set<Eigen::Index>(m_values.begin(), m_values.end())) {
          DgpSpec cell = model.with_shape(n, m);
          cell.validate();
          out.push_back(cell);
        }
      }
    }
    return out;
  }
};

// Config format: {"dgp_specs": [DgpSpec...], "n_values": [...], "m_values": [...],
// "replications", "alpha", "master_seed", "padding_reps", "include_size"}.
// Missing keys keep their defaults.
inline void to_json(nlohmann::json& j, const ExperimentGrid& g) {
  j = nlohmann::json{{"dgp_specs", nlohmann::json::array()},
                     {"n_values", g.n_values},
                     {"m_values", g.m_values},
                     {"replications", g.replications},
                     {"alpha", g.alpha},
                     {"master_seed", g.master_seed},
                     {"padding_reps", g.padding_reps},
                     {"include_size", g.include_size}};
  for (const DgpSpec& spec : g.dgp_specs) {
    nlohmann::json s = spec;
    s.erase("n_units");
    s.erase("m_periods");
    j["dgp_specs"].push_back(s);
  }
}

inline void from_json(const nlohmann::json& j, ExperimentGrid& g) {
  g = ExperimentGrid{};
  if (!j.is_object()) throw ConfigError("experiment grid must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "dgp_specs") {
      g.dgp_specs = value.get<std::vector<DgpSpec>>();
    } else if (key == "n_values") {
      g.n_values = value.get<std::vector<Eigen::Index>>();
    } else if (key == "m_values") {
      g.m_values = value.get<std::vector<Eigen::Index>>();
    } else if (key == "replications") {
      g.replications = value.get<int>();
    } else if (key == "alpha") {
      g.alpha = value.get<double>();
    } else if (key == "master_seed") {
      g.master_seed = value.get<std::uint64_t>();
    } else if (key == "padding_reps") {
      g.padding_reps = value.get<int>();
    } else if (key == "include_size") {
      g.include_size = value.get<bool>();
    } else {
      throw ConfigError("unknown experiment grid key '" + key + "'");
    }
  }
}

// Stream key of a cell; depends only on the cell itself, so adding or
// reordering cells never changes another cell's draws.
inline std::uint64_t cell_key(const DgpSpec& cell) {
  std::ostringstream key;
  key << cell.model_descriptor() << "|n=" << cell.n_units << "|m=" << cell.m_periods;
  return fnv1a64(key.str());
}

struct PowerRow {
  DgpSpec spec;
  int rejections = 0;
  int replications = 0;
  double power = 0.0;
  double mc_stderr = 0.0;

  bool operator==(const PowerRow&) const = default;
};

struct PowerReport {
  std::vector<PowerRow> rows;
  std::uint64_t master_seed = 0;
  double alpha = 0.05;
  int padding_reps = 1;

  const PowerRow* find(DgpKind kind, std::optional<double> parameter, Eigen::Index n,
                       Eigen::Index m) const {
    for (const PowerRow& row : rows) {
      if (row.spec.kind == kind && row.spec.parameter() == parameter &&
          row.spec.n_units == n && row.spec.m_periods == m) {
        return &row;
      }
    }
    return nullptr;
  }

  bool operator==(const PowerReport&) const = default;
};

inline PowerRow make_power_row(const DgpSpec& cell, int rejections, int replications) {
  PowerRow row{cell, rejections, replications, 0.0, 0.0};
  row.power = static_cast<double>(rejections) / replications;
  row.mc_stderr = std::sqrt(row.power * (1.0 - row.power) / replications);
  return row;
}

// Runs one replication of one cell and returns whether H0 was rejected.
inline bool run_replication(const DgpSpec& cell, std::uint64_t master_seed, int replication,
                            const EbrConfig& base, const TwTable& table) {
  const std::uint64_t key = cell_key(cell);
  const auto r = static_cast<std::uint64_t>(replication);
  RandomStream data_stream = RandomStream::derived({master_seed, key, r, 0});
  EbrConfig cfg = base;
  cfg.seed = derive_seed({master_seed, key, r, 1});
  return ebr_test(generate(cell, data_stream), cfg, table).reject;
}

inline PowerReport run_grid(const ExperimentGrid& grid, const TwTable& table,
                            unsigned workers = default_worker_count()) {
  if (table.empty()) throw ConfigError("run_grid: Tracy-Widom table is missing");
  EbrConfig base;
  base.alpha = grid.alpha;
  base.padding_reps = grid.padding_reps;
  base.validate();

  const std::vector<DgpSpec> cells = grid.cells();
  const auto reps = static_cast<std::size_t>(grid.replications);
  std::vector<unsigned char> rejected(cells.size() * reps, 0);

  parallel_for(rejected.size(), workers, [&](std::size_t task) {
    const std::size_t c = task / reps;
    const int r = static_cast<int>(task % reps);
    try {
      rejected[task] = run_replication(cells[c], grid.master_seed, r, base, table) ? 1 : 0;
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "cell " << cells[c].model_descriptor() << " n=" << cells[c].n_units
          << " m=" << cells[c].m_periods << ", replication " << r << ": " << e.what();
      throw HarnessError(msg.str());
    }
  });

  PowerReport report;
  report.master_seed = grid.master_seed;
  report.alpha = grid.alpha;
  report.padding_reps = grid.padding_reps;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    int count = 0;
    for (std::size_t r = 0; r < reps; ++r) count += rejected[c * reps + r];
    report.rows.push_back(make_power_row(cells[c], count, grid.replications));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialisation

inline nlohmann::json report_metadata(const PowerReport& report) {
  nlohmann::json decisions = nlohmann::json::array();
  for (auto d : kDesignDecisions) decisions.push_back(std::string(d));
  return {{"version", std::string(kVersion)},
          {"seed", report.master_seed},
          {"alpha", report.alpha},
          {"padding_reps", report.padding_reps},
          {"design_fingerprint", design_fingerprint()},
          {"design_decisions", decisions}};
}

inline std::string format_parameter(std::optional<double> p) {
  if (!p) return "NA";
  std::ostringstream out;
  out << *p;
  return out.str();
}

inline std::string metadata_comment(const PowerReport& report) {
  std::ostringstream out;
  out << "# ebr version=" << kVersion << " seed=" << report.master_seed
      << " alpha=" << report.alpha << " padding_reps=" << report.padding_reps
      << " design=" << design_fingerprint() << '\n';
  return out.str();
}

inline std::string report_to_csv(const PowerReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << metadata_comment(report);
  out << "dgp,kind,parameter,n,m,rejections,replications,power,mc_stderr\n";
  for (const PowerRow& row : report.rows) {
    out << row.spec.model_descriptor() << ',' << to_string(row.spec.kind) << ','
        << format_parameter(row.spec.parameter()) << ',' << row.spec.n_units << ','
        << row.spec.m_periods << ',' << row.rejections << ',' << row.replications << ','
        << row.power << ',' << row.mc_stderr << '\n';
  }
  return out.str();
}

inline nlohmann::json report_to_json(const PowerReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const PowerRow& row : report.rows) {
    rows.push_back({{"dgp", row.spec.model_descriptor()},
                    {"spec", row.spec},
                    {"n", row.spec.n_units},
                    {"m", row.spec.m_periods},
                    {"rejections", row.rejections},
                    {"replications", row.replications},
                    {"power", row.power},
                    {"mc_stderr", row.mc_stderr}});
  }
  return {{"metadata", report_metadata(report)}, {"rows", rows}};
}

// ---------------------------------------------------------------------------
// Figure data

struct FigureRow {
  std::optional<double> parameter;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  double power = 0.0;
  double mc_stderr = 0.0;
};

struct FigureData {
  DgpKind kind = DgpKind::ar1;
  std::string parameter_name;  // "phi", "rho" or empty
  std::vector<FigureRow> rows;
};

inline FigureData emit_figure_data(const PowerReport& report, DgpKind kind) {
  if (kind == DgpKind::iid) throw ConfigError("figure cases are ar1, linear_csd and nonmono");
  FigureData fig;
  fig.kind = kind;
  fig.parameter_name = kind == DgpKind::ar1 ? "phi" : kind == DgpKind::linear_csd ? "rho" : "";
  std::set<std::string> available;
  for (const PowerRow& row : report.rows) {
    available.insert(to_string(row.spec.kind));
    if (row.spec.kind != kind) continue;
    fig.rows.push_back({row.spec.parameter(), row.spec.n_units, row.spec.m_periods, row.power,
                        row.mc_stderr});
  }
  if (fig.rows.empty()) {
    std::string list;
    for (const auto& a : available) list += (list.empty() ? "" : ", ") + a;
    throw ConfigError(std::string("report has no ") + to_string(kind) +
                      " cells; available cases: " + (list.empty() ? "none" : list));
  }
  return fig;
}

inline std::string figure_to_csv(const FigureData& fig, const PowerReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << metadata_comment(report);
  out << (fig.parameter_name.empty() ? "parameter" : fig.parameter_name)
      << ",n,m,power,mc_stderr\n";
  for (const FigureRow& row : fig.rows) {
    out << format_parameter(row.parameter) << ',' << row.n << ',' << row.m << ',' << row.power
        << ',' << row.mc_stderr << '\n';
  }
  return out.str();
}

// Minimal line chart: power against phi/rho with one series per (n, m);
// for the parameter-free nonmono case, power against m with one series per n.
inline std::string figure_to_svg(const FigureData& fig) {
  const double width = 640, height = 420, left = 60, right = 170, top = 30, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const bool by_parameter = !fig.parameter_name.empty();

  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double x_min = 1e300, x_max = -1e300;
  for (const FigureRow& row : fig.rows) {
    const double x = by_parameter ? row.parameter.value_or(0.0) : static_cast<double>(row.m);
    std::string name = by_parameter ? "n=" + std::to_string(row.n) + ", m=" + std::to_string(row.m)
                                    : "n=" + std::to_string(row.n);
    series[name].emplace_back(x, row.power);
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
  }
  if (x_max <= x_min) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return top + (1.0 - y) * plot_h; };

  static constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<text x=\"" << left << "\" y=\"18\" font-size=\"13\">EBR power, " << to_string(fig.kind)
      << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = i / 4.0;
    svg << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << py(y)
        << "\" y2=\"" << py(y) << "\" stroke=\"#ddd\"/>"
        << "<text x=\"" << left - 8 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << y
        << "</text>\n";
  }
  std::set<double> ticks;
  for (const auto& [name, pts] : series)
    for (const auto& p : pts) ticks.insert(p.first);
  for (double t : ticks) {
    svg << "<text x=\"" << px(t) << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">"
        << t << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">" << (by_parameter ? fig.parameter_name : "m") << "</text>\n";
  svg << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 16 "
      << top + plot_h / 2 << ")\" text-anchor=\"middle\">power</text>\n";

  std::size_t idx = 0;
  for (auto& [name, pts] : series) {
    std::sort(pts.begin(), pts.end());
    const char* color = kColors[idx % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) svg << px(x) << ',' << py(y) << ' ';
    svg << "\"/>\n";
    const double ly = top + 12 + 14.0 * static_cast<double>(idx);
    svg << "<line x1=\"" << width - right + 10 << "\" x2=\"" << width - right + 28 << "\" y1=\""
        << ly << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>"
        << "<text x=\"" << width - right + 32 << "\" y=\"" << ly + 4 << "\">" << name
        << "</text>\n";
    ++idx;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace ebr
