#pragma once

// Command-line front end. run_cli() is the whole program minus main(), so
// tests can drive it with in-memory streams.
//
// Exit codes: 0 H0 not rejected / success, 1 usage error, 2 data error,
//             3 H0 rejected.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ebr/correlation.hpp"
#include "ebr/dgp.hpp"
#include "ebr/ebr.hpp"
#include "ebr/errors.hpp"
#include "ebr/io.hpp"
#include "ebr/parallel.hpp"
#include "ebr/power.hpp"
#include "ebr/twdist.hpp"
#include "ebr/version.hpp"

namespace ebr::cli {

enum ExitCode : int { kNotRejected = 0, kUsage = 1, kDataError = 2, kRejected = 3 };

class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

inline const TwTable& table_for(const std::string& cache_path) {
  if (cache_path.empty()) return default_tw_table();
  static TwTable cached;
  static std::string cached_path;
  if (cached.empty() || cached_path != cache_path) {
    cached = load_or_build_tw_table(TwTableParams{}, cache_path);
    cached_path = cache_path;
  }
  return cached;
}

inline char parse_delimiter(const std::string& text) {
  if (text == "\\t" || text == "tab") return '\t';
  if (text.size() != 1) throw UsageError("--delimiter must be a single character or 'tab'");
  return text.front();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ebr test

struct TestOptions {
  std::string input;
  double alpha = 0.05;
  std::optional<std::uint64_t> seed;
  int paddings = 1;
  std::string orientation = "units_rows";
  std::string delimiter = ",";
  bool header = false;
  bool row_labels = false;
  std::string format = "text";
  std::string tw_cache;
};

inline int cmd_test(const TestOptions& opt, std::ostream& out, std::ostream& err) {
  IngestSpec ingest_spec;
  ingest_spec.path = opt.input;
  ingest_spec.delimiter = detail::parse_delimiter(opt.delimiter);
  ingest_spec.has_header = opt.header;
  ingest_spec.has_row_labels = opt.row_labels;
  ingest_spec.orientation = parse_orientation(opt.orientation);

  EbrConfig cfg;
  cfg.alpha = opt.alpha;
  cfg.padding_reps = opt.paddings;
  if (opt.seed) {
    cfg.seed = *opt.seed;
  } else {
    cfg.seed = detail::fresh_seed();
    err << "seed: " << cfg.seed << " (generated; pass --seed to reproduce)\n";
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  const ResidualMatrix e = ingest(ingest_spec);
  const EbrResult result = ebr_test(e, cfg, detail::table_for(opt.tw_cache));

  if (opt.format == "json") {
    nlohmann::json j = result;
    j["n_units"] = e.n_units();
    j["m_periods"] = e.m_periods();
    j["orientation"] = opt.orientation;
    j["input"] = opt.input;
    j["version"] = std::string(kVersion);
    j["design_fingerprint"] = design_fingerprint();
    out << j.dump(2) << '\n';
  } else {
    out << std::setprecision(10);
    out << "EBR test: " << opt.input << " (n=" << e.n_units() << " units, m=" << e.m_periods()
        << " periods, k=" << result.k << ")\n"
        << "lambda1  = " << result.lambda1 << '\n'
        << "s_stat   = " << result.s_stat << '\n'
        << "p_value  = " << result.p_value << '\n'
        << "decision = " << (result.reject ? "reject H0" : "do not reject H0")
        << " at alpha = " << result.alpha << '\n'
        << "seed = " << result.seed << ", paddings = " << result.padding_reps
        << ", design = " << design_fingerprint() << '\n';
  }
  return result.reject ? kRejected : kNotRejected;
}

// ---------------------------------------------------------------------------
// ebr power

struct PowerOptions {
  std::string case_name = "all";
  int reps = 1000;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<double> phi;
  std::vector<double> rho;
  std::vector<Eigen::Index> n;
  std::vector<Eigen::Index> m;
  bool include_size = false;
  unsigned workers = 0;  // 0 = default_worker_count()
  int paddings = 1;
  double alpha = 0.05;
  std::string config;       // JSON experiment grid; replaces the grid flags
  bool grid_flags = false;  // set when any of --case/--phi/--rho/--n/--m/... was given
};

inline ExperimentGrid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  try {
    ExperimentGrid grid = nlohmann::json::parse(in).get<ExperimentGrid>();
    (void)grid.cells();
    EbrConfig probe;
    probe.alpha = grid.alpha;
    probe.padding_reps = grid.padding_reps;
    probe.validate();
    return grid;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
}

inline ExperimentGrid make_grid(const PowerOptions& opt) {
  if (!opt.config.empty()) {
    if (opt.grid_flags) throw UsageError("--config cannot be combined with grid flags");
    return load_grid(opt.config);
  }
  const std::string c = opt.case_name == "linear-csd" ? "linear_csd" : opt.case_name;
  const bool all = c == "all";
  if (!all && c != "ar1" && c != "linear_csd" && c != "nonmono" && c != "iid") {
    throw UsageError("--case must be one of ar1, linear-csd, nonmono, iid, all");
  }
  if (!opt.phi.empty() && !(all || c == "ar1")) throw UsageError("--phi only applies to --case ar1 or all");
  if (!opt.rho.empty() && !(all || c == "linear_csd")) {
    throw UsageError("--rho only applies to --case linear-csd or all");
  }
  if (opt.reps < 1) throw UsageError("--reps must be positive");

  const std::vector<double> phis = opt.phi.empty() ? std::vector<double>{0.2, 0.5, 0.8} : opt.phi;
  const std::vector<double> rhos = opt.rho.empty() ? std::vector<double>{0.2, 0.5, 0.8} : opt.rho;

  ExperimentGrid grid;
  if (all || c == "iid") grid.dgp_specs.push_back(DgpSpec::iid(2, 2));
  if (all || c == "ar1")
    for (double p : phis) grid.dgp_specs.push_back(DgpSpec::ar1(2, 2, p));
  if (all || c == "linear_csd")
    for (double r : rhos) grid.dgp_specs.push_back(DgpSpec::linear_csd(2, 2, r));
  if (all || c == "nonmono") grid.dgp_specs.push_back(DgpSpec::nonmono(2, 2));
  if (!opt.n.empty()) grid.n_values = opt.n;
  if (!opt.m.empty()) grid.m_values = opt.m;
  grid.replications = opt.reps;
  grid.alpha = opt.alpha;
  grid.padding_reps = opt.paddings;
  grid.include_size = opt.include_size;
  try {
    for (const DgpSpec& s : grid.dgp_specs) s.validate();
    (void)grid.cells();
    EbrConfig probe;
    probe.alpha = grid.alpha;
    probe.padding_reps = grid.padding_reps;
    probe.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return grid;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

inline int cmd_power(const PowerOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.out_dir.empty()) throw UsageError("--out DIR is required");
  ExperimentGrid grid = make_grid(opt);
  if (opt.seed) {
    grid.master_seed = *opt.seed;
  } else if (!opt.config.empty()) {
    // The config's master_seed stands.
  } else {
    grid.master_seed = detail::fresh_seed();
    err << "seed: " << grid.master_seed << " (generated; pass --seed to reproduce)\n";
  }
  const unsigned workers = opt.workers > 0 ? opt.workers : default_worker_count();
  const PowerReport report = run_grid(grid, default_tw_table(), workers);

  const std::filesystem::path dir(opt.out_dir);
  std::filesystem::create_directories(dir);
  write_text_file(dir / "power_report.csv", report_to_csv(report));
  write_text_file(dir / "power_report.json", report_to_json(report).dump(2) + "\n");
  for (DgpKind kind : {DgpKind::ar1, DgpKind::linear_csd, DgpKind::nonmono}) {
    const bool present = std::any_of(report.rows.begin(), report.rows.end(),
                                     [&](const PowerRow& r) { return r.spec.kind == kind; });
    if (!present) continue;
    const FigureData fig = emit_figure_data(report, kind);
    const std::string stem = std::string("figure_") + to_string(kind);
    write_text_file(dir / (stem + ".csv"), figure_to_csv(fig, report));
    write_text_file(dir / (stem + ".svg"), figure_to_svg(fig));
  }

  out << std::left << std::setw(22) << "dgp" << std::setw(6) << "n" << std::setw(6) << "m"
      << std::setw(10) << "power" << "stderr\n";
  out << std::fixed << std::setprecision(3);
  for (const PowerRow& row : report.rows) {
    out << std::setw(22) << row.spec.model_descriptor() << std::setw(6) << row.spec.n_units
        << std::setw(6) << row.spec.m_periods << std::setw(10) << row.power << row.mc_stderr
        << '\n';
  }
  out << "wrote " << (dir / "power_report.csv").string() << " (seed " << report.master_seed
      << ", " << grid.replications << " replications per cell)\n";
  return kNotRejected;
}

// ---------------------------------------------------------------------------
// ebr tw

struct TwOptions {
  std::optional<double> cdf;
  std::optional<double> sf;
  std::optional<double> quantile;
  std::string tw_cache;
};

inline int cmd_tw(const TwOptions& opt, std::ostream& out, std::ostream&) {
  const int given = (opt.cdf ? 1 : 0) + (opt.sf ? 1 : 0) + (opt.quantile ? 1 : 0);
  if (given != 1) throw UsageError("exactly one of --cdf, --sf, --quantile is required");
  if (opt.quantile && !(*opt.quantile > 0.0 && *opt.quantile < 1.0)) {
    throw UsageError("--quantile must lie in (0, 1)");
  }
  const TwTable& table = detail::table_for(opt.tw_cache);
  double value = 0.0;
  if (opt.cdf) value = tw1_cdf(*opt.cdf, table);
  if (opt.sf) value = tw1_sf(*opt.sf, table);
  if (opt.quantile) value = tw1_quantile(*opt.quantile, table);
  out << std::setprecision(17) << value << '\n';
  return kNotRejected;
}

// ---------------------------------------------------------------------------
// ebr simulate: writes one DGP draw as a fixture file.

struct SimulateOptions {
  std::string case_name = "iid";
  Eigen::Index n = 50;
  Eigen::Index m = 50;
  std::optional<double> phi;
  std::optional<double> rho;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::string out;
};

inline constexpr std::uint64_t kFixtureStreamDomain = 0x66697874ULL;  // "fixt"

inline DgpSpec simulate_spec(const SimulateOptions& opt) {
  DgpSpec spec;
  try {
    spec.kind = parse_dgp_kind(opt.case_name);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  spec.n_units = opt.n;
  spec.m_periods = opt.m;
  spec.phi = opt.phi;
  spec.rho = opt.rho;
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return spec;
}

inline ResidualMatrix simulate_fixture(const SimulateOptions& opt) {
  RandomStream rng = RandomStream::derived({opt.seed, kFixtureStreamDomain, opt.replication});
  return generate(simulate_spec(opt), rng);
}

inline int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream&) {
  const ResidualMatrix e = simulate_fixture(opt);
  if (opt.out.empty() || opt.out == "-") {
    write_matrix(out, e);
  } else {
    write_matrix(std::filesystem::path(opt.out), e);
  }
  return kNotRejected;
}

// ---------------------------------------------------------------------------
// ebr correlations

struct CorrelationOptions {
  std::string case_name = "nonmono";
  Eigen::Index n = 50;
  Eigen::Index m = 50;
  std::optional<double> phi;
  std::optional<double> rho;
  int reps = 100;
  std::uint64_t seed = 0;
};

inline int cmd_correlations(const CorrelationOptions& opt, std::ostream& out, std::ostream&) {
  SimulateOptions sim{opt.case_name, opt.n, opt.m, opt.phi, opt.rho, opt.seed, 0, {}};
  const DgpSpec spec = simulate_spec(sim);
  if (opt.n < 3) throw UsageError("--n must be at least 3");
  if (opt.reps < 1) throw UsageError("--reps must be positive");
  const CorrelationSummary summary = correlation_summary(spec, opt.n, opt.m, opt.reps, opt.seed);
  nlohmann::json j = summary;
  j["dgp"] = spec.model_descriptor();
  j["n"] = opt.n;
  j["m"] = opt.m;
  j["reps"] = opt.reps;
  j["seed"] = opt.seed;
  j["version"] = std::string(kVersion);
  j["design_fingerprint"] = design_fingerprint();
  out << j.dump(2) << '\n';
  return kNotRejected;
}

// ---------------------------------------------------------------------------

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Eigenvalue-based randomness test for panel residual matrices"};
  app.name("ebr");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.footer(std::string("Environment: ") + kWorkersEnvVar +
             " sets the default worker count for 'power'; " + kTwCacheEnvVar +
             " names a Tracy-Widom table cache file.");

  TestOptions test_opt;
  auto* test = app.add_subcommand("test", "Run the EBR test on a residual matrix file");
  test->add_option("--input", test_opt.input, "Delimited residual matrix")->required();
  test->add_option("--alpha", test_opt.alpha, "Significance level")->capture_default_str();
  test->add_option("--seed", test_opt.seed, "Seed for the Gaussian padding (generated if omitted)");
  test->add_option("--paddings", test_opt.paddings, "Odd number of padding draws (median p)")
      ->capture_default_str();
  test->add_option("--orientation", test_opt.orientation, "units_rows or periods_rows")
      ->capture_default_str();
  test->add_option("--delimiter", test_opt.delimiter, "Cell delimiter (or 'tab')")->capture_default_str();
  test->add_flag("--header", test_opt.header, "First non-empty line is a header");
  test->add_flag("--row-labels", test_opt.row_labels, "First column holds unit labels");
  test->add_option("--format", test_opt.format, "Output format")
      ->check(CLI::IsMember({"json", "text"}))
      ->capture_default_str();
  test->add_option("--tw-cache", test_opt.tw_cache, "Tracy-Widom table cache file");

  PowerOptions power_opt;
  auto* power = app.add_subcommand("power", "Monte Carlo power study");
  power->add_option("--case", power_opt.case_name, "ar1, linear-csd, nonmono, iid or all")
      ->capture_default_str();
  power->add_option("--reps", power_opt.reps, "Replications per cell")->capture_default_str();
  power->add_option("--seed", power_opt.seed, "Master seed (generated if omitted)");
  power->add_option("--out", power_opt.out_dir, "Output directory")->required();
  power->add_option("--phi", power_opt.phi, "AR(1) coefficients")->delimiter(',');
  power->add_option("--rho", power_opt.rho, "Equicorrelation strengths")->delimiter(',');
  power->add_option("--n", power_opt.n, "Numbers of units")->delimiter(',');
  power->add_option("--m", power_opt.m, "Numbers of periods")->delimiter(',');
  power->add_flag("--include-size", power_opt.include_size, "Add iid rows for every (n, m)");
  power->add_option("--workers", power_opt.workers, "Worker threads");
  power->add_option("--paddings", power_opt.paddings, "Odd number of padding draws")
      ->capture_default_str();
  power->add_option("--alpha", power_opt.alpha, "Significance level")->capture_default_str();
  power->add_option("--config", power_opt.config, "JSON experiment grid (instead of grid flags)");

  TwOptions tw_opt;
  auto* tw = app.add_subcommand("tw", "Evaluate the Tracy-Widom (beta = 1) distribution");
  tw->add_option("--cdf", tw_opt.cdf, "P(TW1 <= s)");
  tw->add_option("--sf", tw_opt.sf, "P(TW1 > s)");
  tw->add_option("--quantile", tw_opt.quantile, "Quantile for p in (0, 1)");
  tw->add_option("--tw-cache", tw_opt.tw_cache, "Tracy-Widom table cache file");

  SimulateOptions sim_opt;
  auto* sim = app.add_subcommand("simulate", "Write one simulated residual matrix");
  sim->add_option("--case", sim_opt.case_name, "iid, ar1, linear-csd or nonmono")->capture_default_str();
  sim->add_option("--n", sim_opt.n, "Units")->capture_default_str();
  sim->add_option("--m", sim_opt.m, "Periods")->capture_default_str();
  sim->add_option("--phi", sim_opt.phi, "AR(1) coefficient");
  sim->add_option("--rho", sim_opt.rho, "Equicorrelation strength");
  sim->add_option("--seed", sim_opt.seed, "Seed")->capture_default_str();
  sim->add_option("--replication", sim_opt.replication, "Replication index")->capture_default_str();
  sim->add_option("--out", sim_opt.out, "Output file (default stdout)");

  CorrelationOptions corr_opt;
  auto* corr = app.add_subcommand("correlations", "Lower-triangle correlation diagnostics");
  corr->add_option("--case", corr_opt.case_name, "iid, ar1, linear-csd or nonmono")->capture_default_str();
  corr->add_option("--n", corr_opt.n, "Units")->capture_default_str();
  corr->add_option("--m", corr_opt.m, "Periods")->capture_default_str();
  corr->add_option("--phi", corr_opt.phi, "AR(1) coefficient");
  corr->add_option("--rho", corr_opt.rho, "Equicorrelation strength");
  corr->add_option("--reps", corr_opt.reps, "Replications")->capture_default_str();
  corr->add_option("--seed", corr_opt.seed, "Seed")->capture_default_str();

  std::vector<const char*> argv;
  argv.push_back("ebr");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kNotRejected;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kNotRejected;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kNotRejected;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kUsage;
  }

  for (const char* flag : {"--case", "--reps", "--phi", "--rho", "--n", "--m", "--include-size",
                           "--paddings", "--alpha"}) {
    if (power->count(flag) > 0) power_opt.grid_flags = true;
  }

  try {
    if (*test) return cmd_test(test_opt, out, err);
    if (*power) return cmd_power(power_opt, out, err);
    if (*tw) return cmd_tw(tw_opt, out, err);
    if (*sim) return cmd_simulate(sim_opt, out, err);
    if (*corr) return cmd_correlations(corr_opt, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DegenerateInputError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DomainError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace ebr::cli
