#include "boundsci/coverage.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "boundsci/errors.hpp"

namespace boundsci {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kTruncation = 8.5;
constexpr double kQuadratureTol = 1e-12;
constexpr unsigned kQuadratureDepth = 18;

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

// P(lo <= Z <= hi) for standard normal Z, evaluated on the tail nearer zero.
double normal_interval(double lo, double hi) noexcept {
  if (!(hi > lo)) return 0.0;
  if (lo > 0.0) return detail::cdf(-lo) - detail::cdf(-hi);
  return detail::cdf(hi) - detail::cdf(lo);
}

// Event A: Z1 <= upper1, Z2 >= lower2. Event B: standardized sum
// (Z1 + Z2) / sqrt(2 + 2 rho) in [sum_lo, sum_hi].
struct UnionEvent {
  double upper1;
  double lower2;
  double sum_lo;
  double sum_hi;
  double rho;
  double alpha;
  bool shift_is_zero;
};

double union_probability(const UnionEvent& e) {
  const double r = e.rho;

  if (r >= 1.0 - kDegenerateRhoBand) {
    // Z1 = Z2 = Z and (Z1 + Z2) / 2 = Z.
    const double a = normal_interval(e.lower2, e.upper1);
    const double b = normal_interval(e.sum_lo, e.sum_hi);
    const double ab =
        normal_interval(std::max(e.lower2, e.sum_lo), std::min(e.upper1, e.sum_hi));
    return std::clamp(a + b - ab, 0.0, 1.0);
  }
  if (r <= -1.0 + kDegenerateRhoBand) {
    // Z2 = -Z1. The sum collapses to zero; in the limit from above the
    // standardized sum is an independent N(0, 1), so B keeps probability
    // 1 - alpha when there is no shift and vanishes otherwise.
    const double a = detail::cdf(std::min(e.upper1, -e.lower2));
    if (!e.shift_is_zero) return a;
    const double b = 1.0 - e.alpha;
    return std::clamp(a + b - a * b, 0.0, 1.0);
  }

  const double p_a = bivariate_rect_prob(e.upper1, e.lower2, Correlation(r));
  const double p_b = normal_interval(e.sum_lo, e.sum_hi);

  // Rotated coordinates X1 = (Z1 + Z2) / sqrt 2 ~ N(0, 1 + rho) and
  // X2 = (Z2 - Z1) / sqrt 2 ~ N(0, 1 - rho) are independent. With t the
  // standardized X1, A given t requires X2 >= max(x - sqrt2 upper1, sqrt2 lower2 - x).
  const double lo = std::max(e.sum_lo, -kTruncation);
  const double hi = std::min(e.sum_hi, kTruncation);
  double p_ab = 0.0;
  if (hi > lo) {
    const double sd1 = std::sqrt(1.0 + r);
    const double sd2 = std::sqrt(1.0 - r);
    const double right = kSqrt2 * e.upper1;
    const double left = kSqrt2 * e.lower2;
    auto integrand = [&](double t) {
      const double x = sd1 * t;
      const double bound = std::max(x - right, left - x);
      return detail::pdf(t) * detail::cdf(-bound / sd2);
    };

    // Kink where the two constraints cross, and the two points where the
    // conditional probability passes 1/2 (steep for rho near 1).
    std::array<double, 5> cuts = {lo, 0.5 * (right + left) / sd1, right / sd1, left / sd1, hi};
    std::sort(cuts.begin() + 1, cuts.end() - 1);
    double prev = lo;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      const double next = std::clamp(cuts[i], lo, hi);
      if (next > prev) {
        p_ab += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            integrand, prev, next, kQuadratureDepth, kQuadratureTol);
        prev = next;
      }
    }
  }
  return std::clamp(p_a + p_b - p_ab, 0.0, 1.0);
}

}  // namespace

double EventParams::gamma_rho() const {
  require_alpha(alpha);
  return std::sqrt(2.0 + 2.0 * rho.value()) * std_normal_quantile(1.0 - 0.5 * alpha);
}

void EventParams::validate() const {
  if (!std::isfinite(delta)) throw DomainError("event: delta must be finite");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("event: lambda must lie in [0, 1]");
  if (!std::isfinite(c)) throw DomainError("event: critical value must be finite");
  if (!(sigma_L > 0.0) || !(sigma_U > 0.0) || !std::isfinite(sigma_L) ||
      !std::isfinite(sigma_U)) {
    throw DomainError("event: standard deviations must be positive and finite");
  }
  require_alpha(alpha);
}

double event_probability(const EventParams& p) {
  p.validate();
  const double q = std_normal_quantile(1.0 - 0.5 * p.alpha);
  const double shift = ((1.0 - p.lambda) / p.sigma_U - p.lambda / p.sigma_L) * p.delta;
  const double r = p.rho.value();

  UnionEvent e{};
  e.upper1 = p.c + p.lambda * p.delta / p.sigma_L;
  e.lower2 = -p.c - (1.0 - p.lambda) * p.delta / p.sigma_U;
  e.rho = r;
  e.alpha = p.alpha;
  e.shift_is_zero = shift == 0.0;
  if (r <= -1.0 + kDegenerateRhoBand) {
    e.sum_lo = -q;
    e.sum_hi = q;
  } else {
    const double m = shift / std::sqrt(2.0 + 2.0 * r);
    e.sum_lo = -q - m;
    e.sum_hi = q - m;
  }
  return union_probability(e);
}

double ci_coverage_objective(double delta, double c, Correlation rho, double alpha) {
  if (!(delta >= 0.0)) throw DomainError("ci_coverage_objective: delta must be >= 0");
  EventParams p;
  p.delta = delta;
  p.lambda = 1.0;
  p.c = c;
  p.rho = rho;
  p.alpha = alpha;
  return event_probability(p);
}

double tail_limit_coverage(double c, Correlation /*rho*/) {
  // The two-sided branch drifts away and the first constraint is slack, leaving
  // {Z2 >= -c} regardless of the correlation.
  if (std::isnan(c)) throw DomainError("tail_limit_coverage: NaN critical value");
  return detail::cdf(c);
}

std::size_t DeltaGrid::size() const {
  validate();
  return static_cast<std::size_t>(std::floor(max / step + 1e-9)) + 1;
}

void DeltaGrid::validate() const {
  if (!(max > 0.0) || !(step > 0.0) || !std::isfinite(max)) {
    throw DomainError("delta grid: max and step must be positive");
  }
}

void DeltaProfile::write_csv(std::ostream& out) const {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "delta,coverage\n" << std::setprecision(12);
  for (const auto& [delta, coverage] : grid) out << delta << ',' << coverage << '\n';
  out.flags(flags);
  out.precision(precision);
}

DeltaProfile event_delta_profile(const EventParams& base, const DeltaGrid& grid) {
  base.validate();
  const std::size_t n = grid.size();
  const double unit = base.delta_per_beta();

  DeltaProfile profile;
  profile.grid.reserve(n);
  const bool endpoint = base.lambda == 0.0 || base.lambda == 1.0;
  profile.tail_limit = endpoint ? tail_limit_coverage(base.c, base.rho) : 1.0;

  EventParams p = base;
  double grid_min = std::numeric_limits<double>::infinity();
  double grid_argmin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p.delta = grid.at(i) * unit;
    const double coverage = event_probability(p);
    profile.grid.emplace_back(p.delta, coverage);
    if (coverage < grid_min) {
      grid_min = coverage;
      grid_argmin = p.delta;
    }
  }
  if (grid_min < profile.tail_limit) {
    profile.infimum = grid_min;
    profile.argmin_delta = grid_argmin;
  } else {
    profile.infimum = profile.tail_limit;
  }
  return profile;
}

DeltaProfile delta_profile(double c, Correlation rho, double alpha, const DeltaGrid& grid) {
  EventParams base;
  base.lambda = 1.0;
  base.c = c;
  base.rho = rho;
  base.alpha = alpha;
  return event_delta_profile(base, grid);
}

DerivativeTerms derivative_terms(double delta, double c, double gamma) {
  if (!(delta >= 0.0)) throw DomainError("derivative_terms: delta must be >= 0");
  // Both integrals of phi(gamma +- delta - z) phi(z) reduce to
  // phi(a / sqrt2) Phi(.) / sqrt2 after completing the square.
  const double a = (detail::pdf((gamma + delta) / kSqrt2) - detail::pdf((delta - gamma) / kSqrt2)) *
                   detail::cdf((gamma - delta - 2.0 * c) / kSqrt2) / kSqrt2;
  const double b = detail::pdf(delta + c) * detail::cdf(c - gamma);
  return {a, b};
}

std::vector<std::pair<double, double>> lambda_profile(double beta, double c, double sigma_L,
                                                      double sigma_U, Correlation rho,
                                                      double alpha,
                                                      std::span<const double> lambda_grid) {
  if (!(beta >= 0.0)) throw DomainError("lambda_profile: beta must be >= 0");
  std::vector<std::pair<double, double>> out;
  out.reserve(lambda_grid.size());
  EventParams p;
  p.c = c;
  p.sigma_L = sigma_L;
  p.sigma_U = sigma_U;
  p.rho = rho;
  p.alpha = alpha;
  for (const double lambda : lambda_grid) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
      throw DomainError("lambda_profile: lambda outside [0, 1]");
    }
    p.lambda = lambda;
    p.delta = beta * p.delta_per_beta();
    out.emplace_back(lambda, event_probability(p));
  }
  return out;
}

}  // namespace boundsci
