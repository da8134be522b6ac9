#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "boundsci/intervals.hpp"

namespace boundsci {

/// One published row: bound estimates and the two reported intervals, rounded.
struct Table2Row {
  std::string label;
  std::string annotation;
  double theta_L_hat = 0.0;
  double theta_U_hat = 0.0;
  Interval ci_ma;
  Interval ci_ti;
  double rel_length = 0.0;
};

/// Columns: label, annotation, theta_L_hat, theta_U_hat, ci_ma_lo, ci_ma_hi,
/// ci_ti_lo, ci_ti_hi, rel_length. Throws InputError with the line number.
std::vector<Table2Row> read_table2_csv(std::istream& in);
std::vector<Table2Row> read_table2_file(const std::filesystem::path& path);

enum class BackoutMethod { closed_form, nonlinear, failed };

struct BackoutResult {
  double se_L = 0.0;
  double se_U = 0.0;
  BackoutMethod method = BackoutMethod::failed;
  double max_endpoint_error = 0.0;  ///< rebuilt CI_MA vs the row, max over both ends
  std::string note;

  bool ok() const noexcept { return method != BackoutMethod::failed; }
};

inline constexpr double kBackoutSeMin = 1e-6;
inline constexpr double kBackoutSeMax = 10.0;
inline constexpr double kBackoutTolerance = 1e-3;

/// Standard errors that make CI_MA (rho = 0 known) reproduce the row's CI_MA.
///
/// When the expanded bounds determine both endpoints, se = (theta_L_hat - lo)/c
/// and (hi - theta_U_hat)/c. Otherwise the pair is found by nested bisection:
/// for a fixed share w = se_L / (se_L + se_U) the lower endpoint is monotone in
/// the total, and w is then bisected on the upper endpoint. Rows without a
/// solution in [1e-6, 10] or reproducing worse than 1e-3 are flagged.
BackoutResult backout_standard_errors(const Table2Row& row, double alpha = 0.05);

/// Problem with rho = 0 known and the backed-out standard errors.
InferenceProblem table2_problem(const Table2Row& row, const BackoutResult& ses,
                                double alpha = 0.05);

}  // namespace boundsci
