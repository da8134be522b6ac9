#include "boundsci/table2.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>

#include "boundsci/critical_value.hpp"
#include "boundsci/errors.hpp"
#include "boundsci/problem_io.hpp"

namespace boundsci {

namespace {

constexpr const char* kColumns[] = {"label",    "annotation", "theta_L_hat",
                                    "theta_U_hat", "ci_ma_lo", "ci_ma_hi",
                                    "ci_ti_lo", "ci_ti_hi",   "rel_length"};
constexpr std::size_t kColumnCount = std::size(kColumns);

double to_real(const std::string& text, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError("line " + std::to_string(line) + ": bad number '" + text + "'");
  }
  return value;
}

bool is_blank_or_comment(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

Interval rebuild(const Table2Row& row, double se_L, double se_U, double alpha, double c) {
  InferenceProblem p;
  p.theta_L_hat = row.theta_L_hat;
  p.theta_U_hat = row.theta_U_hat;
  p.se_L = se_L;
  p.se_U = se_U;
  p.alpha = alpha;
  p.rho_known_zero = true;
  CiOptions options;
  options.c_override = c;
  return build_ci_ma(p, options).ci_ma;
}

double endpoint_error(const Interval& ci, const Table2Row& row) {
  return std::max(std::fabs(ci.lower - row.ci_ma.lower), std::fabs(ci.upper - row.ci_ma.upper));
}

// Total T with rebuilt lower endpoint equal to the target, for share w.
std::optional<double> total_for_lower(const Table2Row& row, double w, double alpha, double c) {
  auto lower_at = [&](double total) {
    return rebuild(row, w * total, (1.0 - w) * total, alpha, c).lower;
  };
  const double t_lo = kBackoutSeMin / std::min(w, 1.0 - w);
  const double t_hi = kBackoutSeMax / std::max(w, 1.0 - w);
  if (!(t_lo < t_hi)) return std::nullopt;
  // The lower endpoint decreases in the total.
  if (lower_at(t_lo) < row.ci_ma.lower || lower_at(t_hi) > row.ci_ma.lower) return std::nullopt;
  double lo = t_lo;
  double hi = t_hi;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (lower_at(mid) > row.ci_ma.lower ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<Table2Row> read_table2_csv(std::istream& in) {
  std::vector<Table2Row> rows;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    const auto fields = split_csv_record(line);
    if (fields.size() != kColumnCount) {
      throw InputError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(kColumnCount) + " fields");
    }
    if (!have_header) {
      for (std::size_t i = 0; i < kColumnCount; ++i) {
        if (fields[i] != kColumns[i]) {
          throw InputError("line " + std::to_string(line_no) + ": unexpected column '" +
                           fields[i] + "'");
        }
      }
      have_header = true;
      continue;
    }
    Table2Row row;
    row.label = fields[0];
    row.annotation = fields[1];
    row.theta_L_hat = to_real(fields[2], line_no);
    row.theta_U_hat = to_real(fields[3], line_no);
    row.ci_ma = {to_real(fields[4], line_no), to_real(fields[5], line_no), false};
    row.ci_ti = {to_real(fields[6], line_no), to_real(fields[7], line_no), false};
    row.rel_length = to_real(fields[8], line_no);
    rows.push_back(std::move(row));
  }
  if (!have_header) throw InputError("table file has no header");
  return rows;
}

std::vector<Table2Row> read_table2_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_table2_csv(in);
}

BackoutResult backout_standard_errors(const Table2Row& row, double alpha) {
  const double c = solve_critical_value(Correlation(0.0), alpha, true).c_hat;
  BackoutResult result;

  auto accept = [&](double se_L, double se_U, BackoutMethod method) {
    if (!(se_L >= kBackoutSeMin && se_L <= kBackoutSeMax && se_U >= kBackoutSeMin &&
          se_U <= kBackoutSeMax)) {
      return false;
    }
    const double error = endpoint_error(rebuild(row, se_L, se_U, alpha, c), row);
    if (error > kBackoutTolerance) return false;
    result = {se_L, se_U, method, error, {}};
    return true;
  };

  const double closed_L = (row.theta_L_hat - row.ci_ma.lower) / c;
  const double closed_U = (row.ci_ma.upper - row.theta_U_hat) / c;
  if (closed_L > 0.0 && closed_U > 0.0 &&
      accept(closed_L, closed_U, BackoutMethod::closed_form) &&
      result.max_endpoint_error <= 1e-12) {
    return result;
  }

  // Upper-endpoint residual along w with the lower endpoint pinned.
  auto residual = [&](double w) -> std::optional<double> {
    const auto total = total_for_lower(row, w, alpha, c);
    if (!total) return std::nullopt;
    return rebuild(row, w * *total, (1.0 - w) * *total, alpha, c).upper - row.ci_ma.upper;
  };

  constexpr int kScan = 2000;
  std::optional<double> best_w;
  double best_error = std::numeric_limits<double>::infinity();
  double prev_w = 0.0;
  std::optional<double> prev_r;
  for (int i = 1; i < kScan; ++i) {
    const double w = static_cast<double>(i) / kScan;
    const auto r = residual(w);
    if (r && prev_r && ((*r <= 0.0) != (*prev_r <= 0.0))) {
      double a = prev_w;
      double b = w;
      double ra = *prev_r;
      for (int k = 0; k < 100 && b - a > 1e-15; ++k) {
        const double mid = 0.5 * (a + b);
        const auto rm = residual(mid);
        if (!rm) break;
        if ((*rm <= 0.0) == (ra <= 0.0)) {
          a = mid;
          ra = *rm;
        } else {
          b = mid;
        }
      }
      const double w_root = 0.5 * (a + b);
      if (const auto rr = residual(w_root); rr && std::fabs(*rr) < best_error) {
        best_error = std::fabs(*rr);
        best_w = w_root;
      }
    }
    prev_w = w;
    prev_r = r;
  }
  if (best_w) {
    const double total = *total_for_lower(row, *best_w, alpha, c);
    if (accept(*best_w * total, (1.0 - *best_w) * total, BackoutMethod::nonlinear)) {
      return result;
    }
  }
  if (closed_L > 0.0 && closed_U > 0.0 &&
      accept(closed_L, closed_U, BackoutMethod::closed_form)) {
    return result;
  }

  BackoutResult failed;
  failed.note = "no standard errors in [1e-6, 10] reproduce the interval";
  return failed;
}

InferenceProblem table2_problem(const Table2Row& row, const BackoutResult& ses, double alpha) {
  InferenceProblem p;
  p.label = row.label;
  p.theta_L_hat = row.theta_L_hat;
  p.theta_U_hat = row.theta_U_hat;
  p.se_L = ses.se_L;
  p.se_U = ses.se_U;
  p.alpha = alpha;
  p.rho_known_zero = true;
  return p;
}

}  // namespace boundsci
