#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "boundsci/normal.hpp"

namespace boundsci {

enum class Method { ci_ma, ci_ti, ci_ti_union };

/// "CI_MA", "CI_TI", "CI_TI_union".
std::string_view to_string(Method method) noexcept;
std::optional<Method> parse_method(std::string_view name) noexcept;

/// -4, -3.75, ..., 10.
std::vector<double> default_delta_grid();

/// Simulation of the limiting experiment: theta_L_hat = Z1, theta_U_hat =
/// delta + Z2, unit standard errors, (sigma_L, sigma_U, rho) known.
struct ExperimentConfig {
  Correlation rho{};
  double alpha = 0.05;
  std::vector<double> delta_grid = default_delta_grid();
  std::uint64_t replications = 100'000;
  std::uint64_t seed = 20190901;
  std::vector<Method> methods = {Method::ci_ma, Method::ci_ti, Method::ci_ti_union};
  unsigned workers = 0;  ///< 0: hardware concurrency
  std::optional<double> c_override;

  void validate() const;
};

struct CoveragePoint {
  double delta;
  Method method;
  double coverage;
  double coverage_se;
  double expected_excess_length;  ///< E[length] - max(delta, 0)
  double length_se;
};

/// Coverage for delta >= 0 is the smaller of the rates at theta_L and theta_U;
/// for delta < 0 it is the rate at the pseudotrue value delta / 2.
///
/// Each delta point owns one RNG stream and is cut into fixed-size chunks of
/// replications. Chunk results are merged in chunk order, so the output does
/// not depend on the number of workers. All methods see the same draws.
std::vector<CoveragePoint> run_experiment(const ExperimentConfig& config);

/// Deterministic CI_MA coverage for the same experiment, from the quadrature engine.
std::vector<std::pair<double, double>> quadrature_coverage_curve(
    Correlation rho, double alpha, std::span<const double> delta_grid,
    std::optional<double> c_override = std::nullopt);

/// Worker count after applying the BOUNDS_CI_THREADS cap. At least 1.
unsigned resolve_workers(unsigned requested);

/// Columns: delta, method, coverage, coverage_se, excess_length, length_se.
void write_coverage_csv(std::ostream& out, std::span<const CoveragePoint> points);

}  // namespace boundsci
