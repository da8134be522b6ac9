#include "boundsci/intervals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "boundsci/critical_value.hpp"
#include "boundsci/errors.hpp"

namespace boundsci {

namespace {

constexpr std::size_t kMaxGridPoints = 20'000'000;

void require_positive(double sigma, const char* what) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError(std::string(what) + ": standard deviations must be positive and finite");
  }
}

Interval pseudo_interval(const InferenceProblem& p, double* center, double* spread) {
  const double theta_star = pseudo_true(p.theta_L_hat, p.theta_U_hat, p.se_L, p.se_U);
  const Correlation rho = p.rho_known_zero ? Correlation(0.0) : p.rho_hat;
  const double s = sigma_star(p.se_L, p.se_U, rho);
  const double half = s * std_normal_quantile(1.0 - 0.5 * p.alpha);
  if (center) *center = theta_star;
  if (spread) *spread = s;
  return {theta_star - half, theta_star + half, false};
}

// P(Z1 <= c, Z2 >= -c) = level, solved by bisection; the left side increases in c.
double max_statistic_quantile(Correlation rho, double level) {
  double lo = std_normal_quantile(level);
  double hi = std_normal_quantile(0.5 + 0.5 * level);
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (bivariate_rect_prob(mid, -mid, rho) >= level) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

void InferenceProblem::validate() const {
  if (!std::isfinite(theta_L_hat) || !std::isfinite(theta_U_hat)) {
    throw DomainError("problem: bound estimates must be finite");
  }
  if (!(se_L >= kMinStandardError) || !(se_U >= kMinStandardError) || !std::isfinite(se_L) ||
      !std::isfinite(se_U)) {
    throw DomainError("problem: nonpositive standard error");
  }
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw UnsupportedLevel("problem: alpha must lie in (0, 0.5)");
  }
  if (rho_known_zero && rho_hat.value() != 0.0) {
    throw DomainError("problem: rho_known_zero requires rho = 0");
  }
}

bool Interval::contains(const Interval& other, double slack) const noexcept {
  if (other.empty) return true;
  if (empty) return false;
  return lower <= other.lower + slack && other.upper <= upper + slack;
}

Interval hull(const Interval& a, const Interval& b) noexcept {
  if (a.empty) return b;
  if (b.empty) return a;
  return {std::min(a.lower, b.lower), std::max(a.upper, b.upper), false};
}

double pseudo_true(double theta_L, double theta_U, double sigma_L, double sigma_U) {
  require_positive(sigma_L, "pseudo_true");
  require_positive(sigma_U, "pseudo_true");
  return (sigma_U * theta_L + sigma_L * theta_U) / (sigma_L + sigma_U);
}

double sigma_star(double sigma_L, double sigma_U, Correlation rho) {
  require_positive(sigma_L, "sigma_star");
  require_positive(sigma_U, "sigma_star");
  return sigma_L * sigma_U * std::sqrt(2.0 + 2.0 * rho.value()) / (sigma_L + sigma_U);
}

IntervalReport build_ci_ma(const InferenceProblem& problem, const CiOptions& options) {
  problem.validate();
  IntervalReport report;
  report.mode = options.mode;
  if (options.c_override) {
    if (!std::isfinite(*options.c_override)) throw DomainError("build_ci_ma: c must be finite");
    report.c_hat = *options.c_override;
  } else if (options.mode == CoverageMode::set) {
    report.c_hat = set_coverage_critical_value(problem.alpha);
  } else {
    report.c_hat = default_critical_value_cache().get(problem.rho_hat, problem.alpha,
                                                      problem.rho_known_zero);
  }

  report.ci_pseudo = pseudo_interval(problem, &report.theta_star_hat, &report.sigma_star_se);
  const double lower = problem.theta_L_hat - problem.se_L * report.c_hat;
  const double upper = problem.theta_U_hat + problem.se_U * report.c_hat;
  report.ci_theta_set = {lower, upper, lower > upper};

  if (!report.ci_theta_set.empty) {
    // theta_star is a convex combination of the endpoints of the bounds interval.
    const double slack = 1e-12 * (1.0 + std::fabs(lower) + std::fabs(upper));
    if (report.theta_star_hat < lower - slack || report.theta_star_hat > upper + slack) {
      throw std::logic_error("build_ci_ma: pseudotrue estimate outside the bounds interval");
    }
  }
  report.ci_ma = hull(report.ci_theta_set, report.ci_pseudo);
  return report;
}

TiCriticalValues ti_critical_values(Correlation rho, double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw UnsupportedLevel("CI_TI: alpha must lie in (0, 0.5)");
  const double level = 1.0 - 0.9 * alpha;
  return {std_normal_quantile(1.0 - 0.1 * alpha), std_normal_quantile(level),
          max_statistic_quantile(rho, level)};
}

bool ti_accepts(const InferenceProblem& p, const TiCriticalValues& cv, double theta) {
  const double t_L = (p.theta_L_hat - theta) / p.se_L;
  const double t_U = (theta - p.theta_U_hat) / p.se_U;
  const bool keep_L = -t_L <= cv.pretest;
  const bool keep_U = -t_U <= cv.pretest;
  // Both constraints slack beyond the pre-test threshold: theta sits well
  // inside the estimated bounds and is accepted.
  if (!keep_L && !keep_U) return true;
  const double critical = keep_L && keep_U ? cv.two : cv.one;
  return std::max({t_L, t_U, 0.0}) <= critical;
}

ThetaGrid default_ti_grid(const InferenceProblem& p) {
  p.validate();
  const double spread = 10.0 * std::max(p.se_L, p.se_U);
  const double center = pseudo_true(p.theta_L_hat, p.theta_U_hat, p.se_L, p.se_U);
  const double lo = std::min({p.theta_L_hat, p.theta_U_hat, center}) - spread;
  const double hi = std::max({p.theta_L_hat, p.theta_U_hat, center}) + spread;
  return {lo, hi, std::min(p.se_L, p.se_U) / 50.0};
}

Interval build_ci_ti(const InferenceProblem& p, const ThetaGrid& grid) {
  p.validate();
  const double spread = 10.0 * std::max(p.se_L, p.se_U);
  const double center = pseudo_true(p.theta_L_hat, p.theta_U_hat, p.se_L, p.se_U);
  if (!(grid.step > 0.0) || grid.step > std::min(p.se_L, p.se_U) / 50.0 * (1.0 + 1e-12) ||
      grid.lo > center - spread || grid.hi < center + spread) {
    throw DomainError("build_ci_ti: grid must cover theta_star +- 10 max(se) at step <= min(se)/50");
  }
  const auto n = static_cast<std::size_t>(std::floor((grid.hi - grid.lo) / grid.step)) + 1;
  if (n > kMaxGridPoints) throw DomainError("build_ci_ti: grid too large");

  const TiCriticalValues cv = ti_critical_values(p.rho_hat, p.alpha);
  auto accepts = [&](double theta) { return ti_accepts(p, cv, theta); };
  auto at = [&](std::size_t i) { return grid.lo + static_cast<double>(i) * grid.step; };

  std::size_t first = n;
  std::size_t last = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (accepts(at(i))) {
      if (first == n) first = i;
      last = i;
      ++count;
    }
  }
  if (count == 0) {
    return {p.theta_L_hat - cv.two * p.se_L, p.theta_U_hat + cv.two * p.se_U, true};
  }
  if (count != last - first + 1) {
    throw std::logic_error("build_ci_ti: accepted set is not contiguous");
  }

  // Refine each endpoint between an accepted and a rejected point.
  auto refine = [&](double in, double out) {
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (in + out);
      (accepts(mid) ? in : out) = mid;
    }
    return in;
  };
  const double lower = first > 0 ? refine(at(first), at(first - 1)) : at(first);
  const double upper = last + 1 < n ? refine(at(last), at(last + 1)) : at(last);
  return {lower, upper, false};
}

Interval build_ci_ti(const InferenceProblem& problem) {
  return build_ci_ti(problem, default_ti_grid(problem));
}

Interval ci_ti_closed_form(const InferenceProblem& p, const TiCriticalValues& cv) {
  // The pre-test switches at these two points; between switches the accepted
  // set is [theta_L_hat - cv se_L, theta_U_hat + cv se_U] for the active cv.
  const double keep_L_until = p.theta_L_hat + cv.pretest * p.se_L;
  const double keep_U_from = p.theta_U_hat - cv.pretest * p.se_U;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::array<double, 4> cuts = {-inf, std::min(keep_L_until, keep_U_from),
                                std::max(keep_L_until, keep_U_from), inf};

  Interval out{0.0, 0.0, true};
  double gap_end = 0.0;
  bool gap = false;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    if (!(b >= a)) continue;
    const double probe = std::isinf(a) ? (std::isinf(b) ? 0.0 : b - 1.0)
                                       : (std::isinf(b) ? a + 1.0 : 0.5 * (a + b));
    const bool keep_L = probe <= keep_L_until;
    const bool keep_U = probe >= keep_U_from;
    Interval piece;
    if (!keep_L && !keep_U) {
      piece = {a, b, false};
    } else {
      const double critical = keep_L && keep_U ? cv.two : cv.one;
      const double lo = std::max(a, p.theta_L_hat - critical * p.se_L);
      const double hi = std::min(b, p.theta_U_hat + critical * p.se_U);
      piece = {lo, hi, lo > hi};
    }
    if (piece.empty) continue;
    if (!out.empty && piece.lower > gap_end) gap = true;
    out = hull(out, piece);
    gap_end = out.upper;
  }
  if (gap) throw std::logic_error("ci_ti_closed_form: accepted set is not contiguous");
  if (out.empty) {
    return {p.theta_L_hat - cv.two * p.se_L, p.theta_U_hat + cv.two * p.se_U, true};
  }
  return out;
}

Interval build_ci_ti_union(const InferenceProblem& p, const ThetaGrid& grid) {
  return hull(build_ci_ti(p, grid), pseudo_interval(p, nullptr, nullptr));
}

Interval build_ci_ti_union(const InferenceProblem& problem) {
  return build_ci_ti_union(problem, default_ti_grid(problem));
}

double relative_excess_length(const Interval& a, const Interval& b, double delta_hat) {
  if (a.empty || b.empty) throw DomainError("relative_excess_length: empty interval");
  const double known = std::max(delta_hat, 0.0);
  const double denominator = b.length() - known;
  if (!(denominator > 0.0)) {
    throw DomainError("relative_excess_length: nonpositive excess length of the reference");
  }
  return (a.length() - known) / denominator;
}

}  // namespace boundsci
