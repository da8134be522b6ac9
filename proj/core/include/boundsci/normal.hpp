#pragma once

#include <cmath>
#include <numbers>

namespace boundsci {

/// Correlation coefficient in [-1, 1].
///
/// Values within 1e-12 outside the unit interval are clamped onto it (they
/// arise from rounding in estimated covariance matrices); anything further out
/// or non-finite throws DomainError.
class Correlation {
 public:
  static constexpr double kClampBand = 1e-12;

  constexpr Correlation() noexcept = default;
  explicit Correlation(double rho);

  constexpr double value() const noexcept { return rho_; }

  friend constexpr bool operator==(Correlation a, Correlation b) noexcept {
    return a.rho_ == b.rho_;
  }

 private:
  double rho_ = 0.0;
};

/// |rho| this close to 1 is evaluated with the one-dimensional degenerate formulas.
inline constexpr double kDegenerateRhoBand = 1e-9;

double std_normal_pdf(double x);
double std_normal_cdf(double x);
double std_normal_quantile(double p);

/// P(Z1 <= z1_hi, Z2 >= z2_lo) for standard bivariate normal (Z1, Z2) with
/// correlation rho. Either bound may be infinite.
double bivariate_rect_prob(double z1_hi, double z2_lo, Correlation rho);

/// Unchecked versions for inner loops. Infinite arguments are fine here.
namespace detail {

inline double pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

inline double cdf(double x) noexcept {
  return 0.5 * std::erfc(-x * (0.5 * std::numbers::sqrt2));
}

/// P(X > h, Y > k) for standard bivariate normal with correlation r.
double bvn_upper(double h, double k, double r) noexcept;

}  // namespace detail

}  // namespace boundsci
