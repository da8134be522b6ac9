#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "boundsci/coverage.hpp"
#include "boundsci/normal.hpp"

namespace boundsci {

enum class CriticalValueMethod { shortcut_one_sided, solved, degenerate_two_sided };

std::string_view to_string(CriticalValueMethod method) noexcept;

struct SolverStep {
  double c_lo;
  double c_hi;
  double c_mid;
  double infimum_at_mid;
};

struct CriticalValueResult {
  double c_hat = 0.0;
  double infimal_coverage = 0.0;
  std::optional<double> argmin_delta;  ///< nullopt: least favorable as delta -> infinity
  CriticalValueMethod method = CriticalValueMethod::solved;
  int iterations = 0;
  std::vector<SolverStep> trace;
};

struct SolverOptions {
  double tol = 1e-4;    ///< on infimal coverage
  double c_tol = 1e-4;  ///< on the bracket width in c
  int max_iterations = 200;
  DeltaGrid grid{};
};

/// Critical value c such that the infimum over delta >= 0 of the coverage
/// objective equals 1 - alpha.
///
/// With rho known to be zero and sqrt2 Phi^{-1}(1 - alpha) >= Phi^{-1}(1 - alpha/2)
/// the one-sided quantile is returned without solving. rho = 1 returns the
/// two-sided quantile. Otherwise c is bisected on [Phi^{-1}(1 - alpha),
/// Phi^{-1}(1 - alpha/2)] and the returned value is the upper end of the final
/// bracket, so its infimal coverage is at least 1 - alpha on the grid.
///
/// Throws UnsupportedLevel for alpha outside (0, 0.5) and SolverError if the
/// bracket does not hold or the iteration budget runs out.
CriticalValueResult solve_critical_value(Correlation rho, double alpha, bool rho_known_zero,
                                         const SolverOptions& options = {});

/// True when the one-sided shortcut is valid for known rho = 0.
bool one_sided_shortcut_applies(double alpha);

/// Phi^{-1}(1 - alpha/2): covers the whole identified set by Bonferroni.
double set_coverage_critical_value(double alpha);

struct Table1Cell {
  double rho;
  double alpha;
  CriticalValueResult result;
};

/// Correlations and levels printed in the reference critical-value table.
std::vector<double> table1_default_rhos();
std::vector<double> table1_default_alphas();

std::vector<Table1Cell> generate_table1(std::span<const double> rhos,
                                        std::span<const double> alphas,
                                        const SolverOptions& options = {});

/// CSV: rho, alpha, c_hat, c_hat_rounded, infimal_coverage, argmin_delta, method.
void write_table1_csv(std::ostream& out, std::span<const Table1Cell> cells);
/// Text table with one row per alpha and one column per rho.
void write_table1_text(std::ostream& out, std::span<const Table1Cell> cells);

/// Memoizes solve_critical_value by (rho, alpha, rho_known_zero). Thread-safe.
class CriticalValueCache {
 public:
  explicit CriticalValueCache(SolverOptions options = {}) : options_(std::move(options)) {}

  double get(Correlation rho, double alpha, bool rho_known_zero);

 private:
  SolverOptions options_;
  std::mutex mutex_;
  std::map<std::tuple<double, double, bool>, double> values_;
};

/// Process-wide cache with default solver options.
CriticalValueCache& default_critical_value_cache();

}  // namespace boundsci
