#pragma once

#include <optional>
#include <string>

#include "boundsci/normal.hpp"

namespace boundsci {

/// One bound-pair inference instance. Standard errors are in outcome units
/// (sampling SD already divided by sqrt n). theta_L_hat > theta_U_hat is allowed.
struct InferenceProblem {
  double theta_L_hat = 0.0;
  double theta_U_hat = 0.0;
  double se_L = 1.0;
  double se_U = 1.0;
  Correlation rho_hat{};
  double alpha = 0.05;
  bool rho_known_zero = false;
  std::string label;

  void validate() const;
};

inline constexpr double kMinStandardError = 1e-12;

/// Closed interval. When empty, lower and upper keep the crossing endpoints.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool empty = false;

  double length() const noexcept { return empty ? 0.0 : upper - lower; }
  bool contains(double x) const noexcept { return !empty && lower <= x && x <= upper; }
  bool contains(const Interval& other, double slack = 0.0) const noexcept;
};

/// Smallest interval containing both; an empty operand is ignored.
Interval hull(const Interval& a, const Interval& b) noexcept;

enum class CoverageMode { point, set };

struct IntervalReport {
  Interval ci_ma;
  Interval ci_theta_set;
  Interval ci_pseudo;
  double theta_star_hat = 0.0;
  double sigma_star_se = 0.0;
  double c_hat = 0.0;
  CoverageMode mode = CoverageMode::point;
};

/// (sigma_U theta_L + sigma_L theta_U) / (sigma_L + sigma_U).
double pseudo_true(double theta_L, double theta_U, double sigma_L, double sigma_U);

/// sigma_L sigma_U sqrt(2 + 2 rho) / (sigma_L + sigma_U): SD of the pseudotrue estimator.
double sigma_star(double sigma_L, double sigma_U, Correlation rho);

struct CiOptions {
  /// Bypasses the solver, e.g. to study a fixed critical value.
  std::optional<double> c_override;
  /// set: c = Phi^{-1}(1 - alpha/2), covering the whole identified set.
  CoverageMode mode = CoverageMode::point;
};

/// Union of the c-expanded bounds interval and the two-sided interval around
/// the pseudotrue estimate. Never empty.
IntervalReport build_ci_ma(const InferenceProblem& problem, const CiOptions& options = {});

// Test inversion baseline. A constraint is kept by the pre-test unless it is
// slack by more than Phi^{-1}(1 - alpha/10) standard errors; the statistic
// max{(theta_L_hat - theta)/se_L, (theta - theta_U_hat)/se_U, 0} is compared to
// a critical value of size 0.9 alpha for the kept constraints.

struct TiCriticalValues {
  double pretest;  ///< Phi^{-1}(1 - 0.1 alpha)
  double one;      ///< Phi^{-1}(1 - 0.9 alpha)
  double two;      ///< 1 - 0.9 alpha quantile of max(Z1, -Z2)
};

TiCriticalValues ti_critical_values(Correlation rho, double alpha);

/// True when theta is accepted by the test inversion.
bool ti_accepts(const InferenceProblem& problem, const TiCriticalValues& cv, double theta);

struct ThetaGrid {
  double lo;
  double hi;
  double step;
};

/// Covers both bound estimates and theta_star_hat +- 10 max(se) with step min(se)/50.
ThetaGrid default_ti_grid(const InferenceProblem& problem);

/// Accepted set on the grid, with endpoints refined by bisection between the
/// last accepted and first rejected grid points. Throws DomainError when the
/// grid violates its precondition and std::logic_error if the accepted set is
/// not contiguous.
Interval build_ci_ti(const InferenceProblem& problem, const ThetaGrid& grid);
Interval build_ci_ti(const InferenceProblem& problem);

/// Exact accepted set from the piecewise structure of the test; used by the
/// simulation where a grid per draw is too slow.
Interval ci_ti_closed_form(const InferenceProblem& problem, const TiCriticalValues& cv);

/// CI_TI together with the pseudotrue component of CI_MA. Never empty.
Interval build_ci_ti_union(const InferenceProblem& problem, const ThetaGrid& grid);
Interval build_ci_ti_union(const InferenceProblem& problem);

/// (length(a) - max(delta_hat, 0)) / (length(b) - max(delta_hat, 0)).
double relative_excess_length(const Interval& a, const Interval& b, double delta_hat);

}  // namespace boundsci
