#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "boundsci/critical_value.hpp"
#include "boundsci/errors.hpp"
#include "boundsci/intervals.hpp"
#include "boundsci/mc_lab.hpp"
#include "boundsci/problem_io.hpp"
#include "boundsci/table2.hpp"

namespace boundsci::cli {

namespace {

const CLI::Validator kAlpha(
    [](std::string& s) -> std::string {
      double a = 0.0;
      try {
        a = std::stod(s);
      } catch (const std::exception&) {
        return "alpha must be a number";
      }
      return a > 0.0 && a < 0.5 ? "" : "alpha must lie in (0, 0.5)";
    },
    "ALPHA in (0, 0.5)");

const CLI::Range kRho(-1.0, 1.0);

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

// "lo:step:hi" or a comma-separated list.
std::vector<double> parse_delta_spec(const std::string& spec) {
  std::vector<double> grid;
  if (spec.find(':') != std::string::npos) {
    double lo = 0.0;
    double step = 0.0;
    double hi = 0.0;
    char c1 = 0;
    char c2 = 0;
    std::istringstream in(spec);
    if (!(in >> lo >> c1 >> step >> c2 >> hi) || c1 != ':' || c2 != ':' || !(step > 0.0) ||
        hi < lo) {
      throw CLI::ValidationError("--deltas", "expected lo:step:hi with step > 0");
    }
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  } else {
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        grid.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw CLI::ValidationError("--deltas", "bad number '" + item + "'");
      }
    }
  }
  if (grid.empty()) throw CLI::ValidationError("--deltas", "empty grid");
  return grid;
}

std::ostream& open_output(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw InputError("cannot write " + path);
  return file;
}

// Fills options not given on the command line from "key = value" lines,
// where key is the long option name without dashes.
void apply_config_file(CLI::App& cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("line " + std::to_string(line_no), "expected key=value");
    }
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
        s = s.substr(1, s.size() - 2);
      }
      return s;
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    CLI::Option* opt = key == "config" ? nullptr : cmd.get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw CLI::ValidationError("line " + std::to_string(line_no), "unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

struct CritArgs {
  double rho = 0.0;
  double alpha = 0.05;
  bool rho_known_zero = false;
  double tol = 1e-4;
  std::string format = "text";
};

int cmd_crit(const CritArgs& a, std::ostream& out) {
  SolverOptions options;
  options.tol = a.tol;
  const auto r = solve_critical_value(Correlation(a.rho), a.alpha, a.rho_known_zero, options);
  if (a.format == "json") {
    nlohmann::json doc = {{"rho", a.rho},
                          {"alpha", a.alpha},
                          {"rho_known_zero", a.rho_known_zero},
                          {"c_hat", r.c_hat},
                          {"infimal_coverage", r.infimal_coverage},
                          {"method", std::string(to_string(r.method))},
                          {"iterations", r.iterations}};
    doc["argmin_delta"] = r.argmin_delta ? nlohmann::json(*r.argmin_delta) : nlohmann::json("inf");
    out << doc.dump(2) << '\n';
  } else {
    out << "c_hat             " << fmt("%.8f", r.c_hat) << '\n'
        << "infimal_coverage  " << fmt("%.8f", r.infimal_coverage) << '\n'
        << "argmin_delta      "
        << (r.argmin_delta ? fmt("%.4f", *r.argmin_delta) : std::string("inf")) << '\n'
        << "method            " << to_string(r.method) << '\n'
        << "iterations        " << r.iterations << '\n';
  }
  return kExitOk;
}

struct CiArgs {
  std::string input;
  std::string output;
  bool with_ti = false;
  std::string format = "csv";
  std::string mode = "point";
  std::optional<double> c_override;
};

int cmd_ci(const CiArgs& a, std::ostream& out, std::ostream& err) {
  const ProblemFile file = read_problem_file(a.input);
  CiOptions options;
  options.mode = a.mode == "set" ? CoverageMode::set : CoverageMode::point;
  options.c_override = a.c_override;

  std::vector<ReportRow> rows;
  bool failed = !file.errors.empty();
  for (const auto& e : file.errors) err << a.input << ": line " << e.line << ": " << e.message << '\n';
  for (std::size_t i = 0; i < file.problems.size(); ++i) {
    const auto& p = file.problems[i];
    try {
      ReportRow row{p, build_ci_ma(p, options), std::nullopt};
      if (a.with_ti) row.ci_ti = build_ci_ti(p);
      rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      err << a.input << ": line " << file.lines[i] << ": " << e.what() << '\n';
      failed = true;
    }
  }
  std::ofstream file_out;
  std::ostream& sink = open_output(a.output, file_out, out);
  if (a.format == "json") {
    write_report_json(sink, rows);
  } else {
    write_report_csv(sink, rows);
  }
  return failed ? kExitFailure : kExitOk;
}

struct Table1Args {
  std::vector<double> rhos = table1_default_rhos();
  std::vector<double> alphas = table1_default_alphas();
  std::string format = "both";
  std::string output;
};

int cmd_table1(const Table1Args& a, std::ostream& out) {
  for (const double alpha : a.alphas) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw CLI::ValidationError("--alphas", "alpha must lie in (0, 0.5)");
  }
  const auto cells = generate_table1(a.rhos, a.alphas);
  std::ofstream file_out;
  std::ostream& sink = open_output(a.output, file_out, out);
  if (a.format == "csv" || a.format == "both") write_table1_csv(sink, cells);
  if (a.format == "both") sink << '\n';
  if (a.format == "text" || a.format == "both") write_table1_text(sink, cells);
  return kExitOk;
}

struct SimulateArgs {
  std::vector<double> rhos = {0.0};
  std::vector<double> alphas = {0.05};
  std::uint64_t reps = 100'000;
  std::uint64_t seed = 20190901;
  std::string deltas = "-4:0.25:10";
  std::vector<std::string> methods = {"CI_MA", "CI_TI", "CI_TI_union"};
  unsigned workers = 0;
  std::optional<double> c_override;
  std::string output_dir;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  config.delta_grid = parse_delta_spec(a.deltas);
  config.replications = a.reps;
  config.seed = a.seed;
  config.workers = a.workers;
  config.c_override = a.c_override;
  config.methods.clear();
  for (const auto& name : a.methods) {
    const auto m = parse_method(name);
    if (!m) throw CLI::ValidationError("--methods", "unknown method '" + name + "'");
    config.methods.push_back(*m);
  }
  if (a.output_dir.empty() && a.rhos.size() * a.alphas.size() > 1) {
    throw CLI::ValidationError("--output-dir", "required for more than one (rho, alpha) pair");
  }
  for (const double alpha : a.alphas) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw CLI::ValidationError("--alpha", "alpha must lie in (0, 0.5)");
  }
  if (!a.output_dir.empty()) std::filesystem::create_directories(a.output_dir);

  for (const double rho : a.rhos) {
    for (const double alpha : a.alphas) {
      config.rho = Correlation(rho);
      config.alpha = alpha;
      const auto points = run_experiment(config);
      if (a.output_dir.empty()) {
        write_coverage_csv(out, points);
      } else {
        const auto path = std::filesystem::path(a.output_dir) /
                          ("coverage_rho" + fmt("%g", rho) + "_alpha" + fmt("%g", alpha) + ".csv");
        std::ofstream file(path);
        if (!file) throw InputError("cannot write " + path.string());
        write_coverage_csv(file, points);
        err << "wrote " << path.string() << '\n';
      }
    }
  }
  return kExitOk;
}

struct BackoutArgs {
  std::string input;
  std::string output;
  double alpha = 0.05;
};

int cmd_backout(const BackoutArgs& a, std::ostream& out, std::ostream& err) {
  const auto rows = read_table2_file(a.input);
  std::vector<InferenceProblem> problems;
  bool flagged = false;
  for (const auto& row : rows) {
    const BackoutResult b = backout_standard_errors(row, a.alpha);
    if (!b.ok()) {
      err << "flagged: " << row.label << ": " << b.note << '\n';
      flagged = true;
      continue;
    }
    problems.push_back(table2_problem(row, b, a.alpha));
  }
  std::ofstream file_out;
  write_problem_csv(open_output(a.output, file_out, out), problems);
  return flagged ? kExitFailure : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Confidence intervals for a parameter bounded by two estimators"};
  app.name("bounds_ci");
  app.require_subcommand(1);

  // Every subcommand takes --seed so pipelines can pass it uniformly.
  std::uint64_t seed = 20190901;

  CritArgs crit;
  auto* crit_cmd = app.add_subcommand("crit", "Solve for the critical value");
  crit_cmd->add_option("--rho", crit.rho, "Correlation of the bound estimators")
      ->required()
      ->check(kRho);
  crit_cmd->add_option("--alpha", crit.alpha, "Significance level")->check(kAlpha);
  crit_cmd->add_flag("--rho-known-zero", crit.rho_known_zero,
                     "Correlation is known to be zero (enables the one-sided shortcut)");
  crit_cmd->add_option("--tol", crit.tol, "Tolerance on infimal coverage")
      ->check(CLI::PositiveNumber);
  crit_cmd->add_option("--format", crit.format)->check(CLI::IsMember({"text", "json"}));
  crit_cmd->add_option("--seed", seed, "Accepted for uniformity; the solver is deterministic");

  CiArgs ci;
  auto* ci_cmd = app.add_subcommand("ci", "Build intervals for each row of a problem file");
  ci_cmd->add_option("problem-file", ci.input, "CSV: label,theta_L,theta_U,se_L,se_U,rho,alpha,rho_known_zero")
      ->required()
      ->check(CLI::ExistingFile);
  ci_cmd->add_option("-o,--output", ci.output, "Output path (default stdout)");
  ci_cmd->add_flag("--with-ti", ci.with_ti, "Also compute the test-inversion interval");
  ci_cmd->add_option("--format", ci.format)->check(CLI::IsMember({"csv", "json"}));
  ci_cmd->add_option("--mode", ci.mode, "point: cover every point; set: cover the whole set")
      ->check(CLI::IsMember({"point", "set"}));
  ci_cmd->add_option("--c-override", ci.c_override, "Use this critical value (expert use)")
      ->check(CLI::PositiveNumber);
  ci_cmd->add_option("--seed", seed);

  Table1Args table1;
  auto* table1_cmd = app.add_subcommand("table1", "Critical values over a (rho, alpha) grid");
  table1_cmd->add_option("--rhos", table1.rhos)->delimiter(',')->check(kRho);
  table1_cmd->add_option("--alphas", table1.alphas)->delimiter(',');
  table1_cmd->add_option("--format", table1.format)->check(CLI::IsMember({"csv", "text", "both"}));
  table1_cmd->add_option("-o,--output", table1.output);
  table1_cmd->add_option("--seed", seed);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo coverage and length curves");
  std::string sim_config;
  sim_cmd->add_option("--config", sim_config, "key=value file; command-line flags take precedence")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--rho", sim.rhos)->delimiter(',')->check(kRho);
  sim_cmd->add_option("--alpha", sim.alphas)->delimiter(',');
  sim_cmd->add_option("--reps", sim.reps, "Replications per delta")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed);
  sim_cmd->add_option("--deltas", sim.deltas, "lo:step:hi or a comma list (use --deltas=...)");
  sim_cmd->add_option("--methods", sim.methods)->delimiter(',');
  sim_cmd->add_option("--workers", sim.workers, "0: all cores (capped by BOUNDS_CI_THREADS)");
  sim_cmd->add_option("--c-override", sim.c_override)->check(CLI::PositiveNumber);
  sim_cmd->add_option("--output-dir", sim.output_dir, "One CSV per (rho, alpha)");

  BackoutArgs backout;
  auto* backout_cmd =
      app.add_subcommand("backout", "Recover standard errors from published intervals");
  backout_cmd->add_option("table-file", backout.input)->required()->check(CLI::ExistingFile);
  backout_cmd->add_option("-o,--output", backout.output);
  backout_cmd->add_option("--alpha", backout.alpha)->check(kAlpha);
  backout_cmd->add_option("--seed", seed);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sim_cmd && !sim_config.empty()) apply_config_file(*sim_cmd, sim_config);
  } catch (const CLI::Error& e) {
    err << "bounds_ci: " << sim_config << ": " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*crit_cmd) return cmd_crit(crit, out);
    if (*ci_cmd) return cmd_ci(ci, out, err);
    if (*table1_cmd) return cmd_table1(table1, out);
    if (*sim_cmd) return cmd_simulate(sim, out, err);
    if (*backout_cmd) return cmd_backout(backout, out, err);
  } catch (const CLI::ValidationError& e) {
    err << "bounds_ci: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SolverError& e) {
    err << "bounds_ci: " << e.what() << '\n' << e.trace();
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "bounds_ci: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace boundsci::cli
