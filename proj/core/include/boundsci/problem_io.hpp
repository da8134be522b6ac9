#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "boundsci/intervals.hpp"

namespace boundsci {

// Problem files are headered CSV:
//   label,theta_L,theta_U,se_L,se_U,rho,alpha,rho_known_zero
// Blank lines and lines starting with '#' are skipped. Fields may be quoted.

struct RowError {
  std::size_t line;
  std::string message;
};

struct ProblemFile {
  std::vector<InferenceProblem> problems;
  std::vector<std::size_t> lines;  ///< source line of each problem
  std::vector<RowError> errors;
};

/// Splits one CSV record; double quotes group and "" escapes a quote.
std::vector<std::string> split_csv_record(std::string_view line);

/// Throws InputError when the header is missing or wrong. Row-level failures
/// are collected in ProblemFile::errors.
ProblemFile read_problem_csv(std::istream& in);
ProblemFile read_problem_file(const std::filesystem::path& path);

/// Round-trips through read_problem_csv (numbers written with 17 significant digits).
void write_problem_csv(std::ostream& out, std::span<const InferenceProblem> problems);

struct ReportRow {
  InferenceProblem problem;
  IntervalReport report;
  std::optional<Interval> ci_ti;
};

/// Relative excess length of CI_MA over CI_TI, or nullopt when undefined.
std::optional<double> report_relative_length(const ReportRow& row);

/// label, theta_L, theta_U, ci_ma_lo, ci_ma_hi, ci_ti_lo, ci_ti_hi, c_hat, rel_length.
void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);
/// JSON array, one object per row with all component intervals.
void write_report_json(std::ostream& out, std::span<const ReportRow> rows);

}  // namespace boundsci
