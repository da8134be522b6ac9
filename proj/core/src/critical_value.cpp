#include "boundsci/critical_value.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "boundsci/errors.hpp"

namespace boundsci {

namespace {

void require_level(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw UnsupportedLevel("critical value: alpha must lie in (0, 0.5)");
  }
}

std::string format_trace(const std::vector<SolverStep>& trace) {
  std::ostringstream out;
  out.precision(10);
  for (const auto& step : trace) {
    out << "[" << step.c_lo << ", " << step.c_hi << "] mid=" << step.c_mid
        << " inf=" << step.infimum_at_mid << '\n';
  }
  return out.str();
}

std::string format_number(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, value);
  return buf;
}

}  // namespace

std::string_view to_string(CriticalValueMethod method) noexcept {
  switch (method) {
    case CriticalValueMethod::shortcut_one_sided:
      return "shortcut_one_sided";
    case CriticalValueMethod::solved:
      return "solved";
    case CriticalValueMethod::degenerate_two_sided:
      return "degenerate_two_sided";
  }
  return "unknown";
}

bool one_sided_shortcut_applies(double alpha) {
  return std::numbers::sqrt2 * std_normal_quantile(1.0 - alpha) >=
         std_normal_quantile(1.0 - 0.5 * alpha);
}

double set_coverage_critical_value(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  return std_normal_quantile(1.0 - 0.5 * alpha);
}

CriticalValueResult solve_critical_value(Correlation rho, double alpha, bool rho_known_zero,
                                         const SolverOptions& options) {
  require_level(alpha);
  if (!(options.tol > 0.0) || !(options.c_tol > 0.0)) {
    throw DomainError("critical value: tolerances must be positive");
  }
  const double c_one = std_normal_quantile(1.0 - alpha);
  const double c_two = std_normal_quantile(1.0 - 0.5 * alpha);
  const double target = 1.0 - alpha;

  CriticalValueResult result;
  if (rho_known_zero && one_sided_shortcut_applies(alpha)) {
    result.c_hat = c_one;
    result.infimal_coverage = target;
    result.method = CriticalValueMethod::shortcut_one_sided;
    return result;
  }

  const Correlation r = rho_known_zero ? Correlation(0.0) : rho;
  auto finish = [&](double c, const DeltaProfile& profile, CriticalValueMethod method) {
    result.c_hat = c;
    result.infimal_coverage = profile.infimum;
    result.argmin_delta = profile.argmin_delta;
    result.method = method;
    return result;
  };

  if (r.value() == 1.0) {
    return finish(c_two, delta_profile(c_two, r, alpha, options.grid),
                  CriticalValueMethod::degenerate_two_sided);
  }

  DeltaProfile lo_profile = delta_profile(c_one, r, alpha, options.grid);
  result.iterations = 1;
  result.trace.push_back({c_one, c_one, c_one, lo_profile.infimum});
  if (lo_profile.infimum >= target - 1e-12) {
    return finish(c_one, lo_profile, CriticalValueMethod::solved);
  }

  DeltaProfile hi_profile = delta_profile(c_two, r, alpha, options.grid);
  result.iterations = 2;
  result.trace.push_back({c_two, c_two, c_two, hi_profile.infimum});
  if (hi_profile.infimum < target) {
    if (r.value() > 0.99) {
      // Bracket clamped at the two-sided value as rho approaches one.
      return finish(c_two, hi_profile, CriticalValueMethod::solved);
    }
    throw SolverError("critical value: infimal coverage at the two-sided quantile is below "
                      "the target; bracket does not hold",
                      format_trace(result.trace));
  }

  double lo = c_one;
  double hi = c_two;
  while (hi_profile.infimum - target > options.tol || hi - lo > options.c_tol) {
    if (result.iterations >= options.max_iterations) {
      throw SolverError("critical value: bisection did not converge", format_trace(result.trace));
    }
    const double mid = 0.5 * (lo + hi);
    DeltaProfile mid_profile = delta_profile(mid, r, alpha, options.grid);
    ++result.iterations;
    result.trace.push_back({lo, hi, mid, mid_profile.infimum});
    if (mid_profile.infimum >= target) {
      hi = mid;
      hi_profile = std::move(mid_profile);
    } else {
      lo = mid;
    }
  }
  return finish(hi, hi_profile, CriticalValueMethod::solved);
}

std::vector<double> table1_default_rhos() { return {0.8, 0.85, 0.9, 0.95, 0.98, 0.99, 1.0}; }

std::vector<double> table1_default_alphas() { return {0.10, 0.05, 0.01}; }

std::vector<Table1Cell> generate_table1(std::span<const double> rhos,
                                        std::span<const double> alphas,
                                        const SolverOptions& options) {
  std::vector<Table1Cell> cells;
  cells.reserve(rhos.size() * alphas.size());
  for (const double alpha : alphas) {
    for (const double rho : rhos) {
      cells.push_back({rho, alpha, solve_critical_value(Correlation(rho), alpha, false, options)});
    }
  }
  return cells;
}

void write_table1_csv(std::ostream& out, std::span<const Table1Cell> cells) {
  out << "rho,alpha,c_hat,c_hat_rounded,infimal_coverage,argmin_delta,method\n";
  for (const auto& cell : cells) {
    const auto& r = cell.result;
    out << format_number("%.6g", cell.rho) << ',' << format_number("%.6g", cell.alpha) << ','
        << format_number("%.8f", r.c_hat) << ',' << format_number("%.2f", r.c_hat) << ','
        << format_number("%.8f", r.infimal_coverage) << ','
        << (r.argmin_delta ? format_number("%.4f", *r.argmin_delta) : std::string("inf")) << ','
        << to_string(r.method) << '\n';
  }
}

void write_table1_text(std::ostream& out, std::span<const Table1Cell> cells) {
  std::vector<double> rhos;
  std::vector<double> alphas;
  for (const auto& cell : cells) {
    if (std::find(rhos.begin(), rhos.end(), cell.rho) == rhos.end()) rhos.push_back(cell.rho);
    if (std::find(alphas.begin(), alphas.end(), cell.alpha) == alphas.end()) {
      alphas.push_back(cell.alpha);
    }
  }
  out << "rho         ";
  for (const double rho : rhos) out << format_number("%8.2f", rho);
  out << '\n';
  for (const double alpha : alphas) {
    out << "alpha=" << format_number("%-6.3g", alpha);
    for (const double rho : rhos) {
      const auto it = std::find_if(cells.begin(), cells.end(), [&](const Table1Cell& c) {
        return c.rho == rho && c.alpha == alpha;
      });
      out << (it == cells.end() ? std::string("       -")
                                : format_number("%8.2f", it->result.c_hat));
    }
    out << '\n';
  }
}

double CriticalValueCache::get(Correlation rho, double alpha, bool rho_known_zero) {
  const auto key = std::make_tuple(rho.value(), alpha, rho_known_zero);
  {
    std::lock_guard lock(mutex_);
    if (const auto it = values_.find(key); it != values_.end()) return it->second;
  }
  const double c = solve_critical_value(rho, alpha, rho_known_zero, options_).c_hat;
  std::lock_guard lock(mutex_);
  values_.emplace(key, c);
  return c;
}

CriticalValueCache& default_critical_value_cache() {
  static CriticalValueCache cache;
  return cache;
}

}  // namespace boundsci
