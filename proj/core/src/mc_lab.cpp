#include "boundsci/mc_lab.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>

#include "boundsci/coverage.hpp"
#include "boundsci/critical_value.hpp"
#include "boundsci/errors.hpp"
#include "boundsci/intervals.hpp"
#include "boundsci/rng.hpp"

namespace boundsci {

namespace {

constexpr std::uint64_t kChunk = 8192;
constexpr std::size_t kMethods = 3;

struct MethodTally {
  std::uint64_t hit_lower = 0;  // theta_L, or the pseudotrue value when delta < 0
  std::uint64_t hit_upper = 0;
  std::uint64_t n = 0;
  double mean_length = 0.0;
  double m2_length = 0.0;

  void add(const Interval& ci, double theta_lower, double theta_upper) {
    hit_lower += ci.contains(theta_lower);
    hit_upper += ci.contains(theta_upper);
    ++n;
    const double d = ci.length() - mean_length;
    mean_length += d / static_cast<double>(n);
    m2_length += d * (ci.length() - mean_length);
  }

  void merge(const MethodTally& o) {
    if (o.n == 0) return;
    const auto total = static_cast<double>(n + o.n);
    const double d = o.mean_length - mean_length;
    mean_length += d * static_cast<double>(o.n) / total;
    m2_length += o.m2_length + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
    hit_lower += o.hit_lower;
    hit_upper += o.hit_upper;
    n += o.n;
  }
};

using ChunkTally = std::array<MethodTally, kMethods>;

std::size_t index_of(Method m) { return static_cast<std::size_t>(m); }

}  // namespace

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::ci_ma:
      return "CI_MA";
    case Method::ci_ti:
      return "CI_TI";
    case Method::ci_ti_union:
      return "CI_TI_union";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  for (const Method m : {Method::ci_ma, Method::ci_ti, Method::ci_ti_union}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

std::vector<double> default_delta_grid() {
  std::vector<double> grid;
  for (int i = -16; i <= 40; ++i) grid.push_back(0.25 * i);
  return grid;
}

void ExperimentConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 0.5)) throw UnsupportedLevel("experiment: alpha must lie in (0, 0.5)");
  if (replications < 1) throw DomainError("experiment: replications must be >= 1");
  if (delta_grid.empty()) throw DomainError("experiment: empty delta grid");
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    if (!std::isfinite(delta_grid[i])) throw DomainError("experiment: delta grid must be finite");
    if (i > 0 && delta_grid[i] < delta_grid[i - 1]) {
      throw DomainError("experiment: delta grid must be sorted");
    }
  }
  if (methods.empty()) throw DomainError("experiment: no methods selected");
  if (c_override && !(std::isfinite(*c_override) && *c_override > 0.0)) {
    throw DomainError("experiment: c override must be positive");
  }
}

unsigned resolve_workers(unsigned requested) {
  unsigned workers = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (const char* cap = std::getenv("BOUNDS_CI_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(cap, &end, 10);
    if (end != cap && *end == '\0' && value > 0) {
      workers = std::min(workers, static_cast<unsigned>(value));
    }
  }
  return std::max(1u, workers);
}

std::vector<CoveragePoint> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const bool known_zero = config.rho.value() == 0.0;
  const double c = config.c_override
                       ? *config.c_override
                       : default_critical_value_cache().get(config.rho, config.alpha, known_zero);
  const TiCriticalValues ti_cv = ti_critical_values(config.rho, config.alpha);

  bool want[kMethods] = {};
  for (const Method m : config.methods) want[index_of(m)] = true;

  const std::size_t n_delta = config.delta_grid.size();
  const std::uint64_t n_chunks = (config.replications + kChunk - 1) / kChunk;
  const std::vector<RngStream> streams = seeded_streams(config.seed, n_delta);
  std::vector<ChunkTally> tallies(n_delta * n_chunks);

  auto run_task = [&](std::size_t task) {
    const std::size_t d = task / n_chunks;
    const std::uint64_t chunk = task % n_chunks;
    const double delta = config.delta_grid[d];
    const double theta_lower = delta >= 0.0 ? 0.0 : 0.5 * delta;
    const double theta_upper = delta >= 0.0 ? delta : 0.5 * delta;

    RngStream stream = streams[d];
    stream.seek(chunk * kChunk);
    const std::uint64_t end = std::min(config.replications, (chunk + 1) * kChunk);

    InferenceProblem problem;
    problem.rho_hat = config.rho;
    problem.alpha = config.alpha;
    problem.rho_known_zero = known_zero;
    CiOptions options;
    options.c_override = c;

    ChunkTally& tally = tallies[task];
    for (std::uint64_t rep = chunk * kChunk; rep < end; ++rep) {
      const BivariateDraw z = stream.next_bivariate(config.rho);
      problem.theta_L_hat = z.z1;
      problem.theta_U_hat = delta + z.z2;
      const IntervalReport ma = build_ci_ma(problem, options);
      if (want[index_of(Method::ci_ma)]) {
        tally[index_of(Method::ci_ma)].add(ma.ci_ma, theta_lower, theta_upper);
      }
      if (want[index_of(Method::ci_ti)] || want[index_of(Method::ci_ti_union)]) {
        const Interval ti = ci_ti_closed_form(problem, ti_cv);
        if (want[index_of(Method::ci_ti)]) {
          tally[index_of(Method::ci_ti)].add(ti, theta_lower, theta_upper);
        }
        if (want[index_of(Method::ci_ti_union)]) {
          tally[index_of(Method::ci_ti_union)].add(hull(ti, ma.ci_pseudo), theta_lower,
                                                   theta_upper);
        }
      }
    }
  };

  const std::size_t n_tasks = tallies.size();
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_workers(config.workers), n_tasks));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) run_task(task);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::vector<CoveragePoint> points;
  points.reserve(n_delta * config.methods.size());
  for (std::size_t d = 0; d < n_delta; ++d) {
    ChunkTally total;
    for (std::uint64_t k = 0; k < n_chunks; ++k) {
      for (std::size_t m = 0; m < kMethods; ++m) total[m].merge(tallies[d * n_chunks + k][m]);
    }
    const double delta = config.delta_grid[d];
    const auto n = static_cast<double>(config.replications);
    for (const Method method : config.methods) {
      const MethodTally& t = total[index_of(method)];
      const double p = static_cast<double>(std::min(t.hit_lower, t.hit_upper)) / n;
      CoveragePoint point;
      point.delta = delta;
      point.method = method;
      point.coverage = p;
      point.coverage_se = std::sqrt(p * (1.0 - p) / n);
      point.expected_excess_length = t.mean_length - std::max(delta, 0.0);
      point.length_se = n > 1.0 ? std::sqrt(t.m2_length / (n - 1.0) / n) : 0.0;
      points.push_back(point);
    }
  }
  return points;
}

std::vector<std::pair<double, double>> quadrature_coverage_curve(
    Correlation rho, double alpha, std::span<const double> delta_grid,
    std::optional<double> c_override) {
  const double c = c_override ? *c_override
                              : default_critical_value_cache().get(rho, alpha, rho.value() == 0.0);
  EventParams p;
  p.c = c;
  p.rho = rho;
  p.alpha = alpha;
  std::vector<std::pair<double, double>> curve;
  curve.reserve(delta_grid.size());
  for (const double delta : delta_grid) {
    p.delta = delta;
    double coverage;
    if (delta >= 0.0) {
      p.lambda = 1.0;
      const double at_upper = event_probability(p);
      p.lambda = 0.0;
      coverage = std::min(at_upper, event_probability(p));
    } else {
      p.lambda = 0.5;
      coverage = event_probability(p);
    }
    curve.emplace_back(delta, coverage);
  }
  return curve;
}

void write_coverage_csv(std::ostream& out, std::span<const CoveragePoint> points) {
  out << "delta,method,coverage,coverage_se,excess_length,length_se\n";
  char buf[256];
  for (const auto& pt : points) {
    std::snprintf(buf, sizeof buf, "%.6g,%s,%.8f,%.8f,%.8f,%.8f\n", pt.delta,
                  std::string(to_string(pt.method)).c_str(), pt.coverage, pt.coverage_se,
                  pt.expected_excess_length, pt.length_se);
    out << buf;
  }
}

}  // namespace boundsci
