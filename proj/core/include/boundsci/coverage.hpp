#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "boundsci/normal.hpp"

namespace boundsci {

/// Parameters of the coverage event for a true value theta = lambda * theta_U
/// + (1 - lambda) * theta_L inside an identified set of length delta.
///
/// The event is the union of
///   A: Z1 - (lambda / sigma_L) delta <= c  and  Z2 + ((1 - lambda) / sigma_U) delta >= -c
///   B: |Z1 + Z2 + ((1 - lambda) / sigma_U - lambda / sigma_L) delta| <= gamma_rho
/// with (Z1, Z2) standard bivariate normal with correlation rho, i.e. the
/// event that theta lies in the expanded bounds interval or in the two-sided
/// interval around the precision-weighted average.
struct EventParams {
  double delta = 0.0;
  double lambda = 1.0;
  double c = 0.0;
  double sigma_L = 1.0;
  double sigma_U = 1.0;
  Correlation rho{};
  double alpha = 0.05;

  /// sqrt(2 + 2 rho) * Phi^{-1}(1 - alpha / 2).
  double gamma_rho() const;
  /// sigma_L / (sigma_L + sigma_U): the weight that defines the pseudotrue value.
  double lambda_star() const noexcept { return sigma_L / (sigma_L + sigma_U); }
  /// Delta per unit of the lambda-reparameterisation constant beta,
  /// sigma_L sigma_U / (lambda sigma_U + (1 - lambda) sigma_L).
  double delta_per_beta() const noexcept {
    return sigma_L * sigma_U / (lambda * sigma_U + (1.0 - lambda) * sigma_L);
  }

  void validate() const;
};

/// Pr(A or B). Negative delta is allowed (misspecified bounds); absolute
/// error below 1e-7 (in practice ~1e-12).
double event_probability(const EventParams& params);

/// Coverage at the upper endpoint with unit standard deviations.
double ci_coverage_objective(double delta, double c, Correlation rho, double alpha);

/// Limit of ci_coverage_objective as delta grows: Phi(c).
double tail_limit_coverage(double c, Correlation rho);

/// Uniform grid 0, step, 2 step, ..., max on which infima over delta are taken.
struct DeltaGrid {
  double max = 20.0;
  double step = 0.005;

  std::size_t size() const;
  double at(std::size_t i) const noexcept { return static_cast<double>(i) * step; }
  void validate() const;
};

struct DeltaProfile {
  std::vector<std::pair<double, double>> grid;  ///< (delta, coverage)
  double tail_limit = 1.0;
  double infimum = 1.0;
  std::optional<double> argmin_delta;  ///< nullopt: infimum attained as delta -> infinity

  void write_csv(std::ostream& out) const;
};

/// Profile of ci_coverage_objective over the delta grid.
DeltaProfile delta_profile(double c, Correlation rho, double alpha,
                           const DeltaGrid& grid = {});

/// Profile of event_probability over delta for fixed (lambda, c, sigmas, rho,
/// alpha). The grid is read in beta units: delta = beta * delta_per_beta(),
/// which is sigma_L for lambda = 1 and sigma_U for lambda = 0.
DeltaProfile event_delta_profile(const EventParams& base, const DeltaGrid& grid = {});

/// Analytic delta-derivative of the objective at rho = 0, split into the
/// term from the two-sided branch (A) and the one-sided branch (B).
struct DerivativeTerms {
  double a;
  double b;
  double total() const noexcept { return a + b; }
};

DerivativeTerms derivative_terms(double delta, double c, double gamma);

/// event_probability along lambda at fixed beta, with delta tied to lambda by
/// delta = sigma_L sigma_U beta / (lambda sigma_U + (1 - lambda) sigma_L).
std::vector<std::pair<double, double>> lambda_profile(double beta, double c, double sigma_L,
                                                      double sigma_U, Correlation rho,
                                                      double alpha,
                                                      std::span<const double> lambda_grid);

}  // namespace boundsci
