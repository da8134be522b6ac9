#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "boundsci/errors.hpp"
#include "boundsci/intervals.hpp"
#include "oracles.hpp"

using namespace boundsci;

namespace {

InferenceProblem problem(double tl, double tu, double sl = 1.0, double su = 1.0, double rho = 0.0,
                         double alpha = 0.05, bool known_zero = false) {
  InferenceProblem p;
  p.theta_L_hat = tl;
  p.theta_U_hat = tu;
  p.se_L = sl;
  p.se_U = su;
  p.rho_hat = Correlation(rho);
  p.alpha = alpha;
  p.rho_known_zero = known_zero;
  return p;
}

// 1 - 0.9 alpha quantile of max(Z1, -Z2) from sorted simulated draws.
double mc_two_sided_quantile(double rho, double alpha, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  const double tail = std::sqrt(1.0 - rho * rho);
  std::vector<double> m(draws);
  for (auto& v : m) {
    const double z1 = normal(gen);
    const double z2 = rho * z1 + tail * normal(gen);
    v = std::max(z1, -z2);
  }
  const auto k = static_cast<std::size_t>((1.0 - 0.9 * alpha) * static_cast<double>(draws));
  std::nth_element(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(k), m.end());
  return m[k];
}

}  // namespace

TEST(PseudoTrue, WeightsByOppositeStandardError) {
  EXPECT_DOUBLE_EQ(pseudo_true(0.0, 1.0, 1.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(pseudo_true(0.0, 1.0, 1.0, 3.0), 0.25);
  EXPECT_DOUBLE_EQ(pseudo_true(2.0, 2.0, 0.3, 5.0), 2.0);
  EXPECT_DOUBLE_EQ(pseudo_true(0.0, 3.0, 1.0, 2.0), 1.0);
  EXPECT_THROW(pseudo_true(0.0, 1.0, 0.0, 1.0), DomainError);
}

TEST(SigmaStar, KnownValues) {
  EXPECT_NEAR(sigma_star(1.0, 1.0, Correlation(0.0)), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(sigma_star(1.0, 1.0, Correlation(1.0)), 1.0, 1e-15);
  EXPECT_EQ(sigma_star(1.0, 1.0, Correlation(-1.0)), 0.0);
  EXPECT_NEAR(sigma_star(2.0, 0.5, Correlation(0.5)), 2.0 * 0.5 * std::sqrt(3.0) / 2.5, 1e-15);
  EXPECT_NEAR(sigma_star(1.0, 2.0, Correlation(1.0)), 4.0 / 3.0, 1e-15);
  EXPECT_THROW(sigma_star(-1.0, 1.0, Correlation(0.0)), DomainError);
}

TEST(BuildCiMa, PointIdentifiedStandardProblem) {
  const auto r = build_ci_ma(problem(0.0, 0.0, 1.0, 1.0, 0.0, 0.05, true));
  EXPECT_NEAR(r.c_hat, 1.6448536269514722, 1e-12);
  EXPECT_NEAR(r.ci_ma.lower, -1.6449, 1e-4);
  EXPECT_NEAR(r.ci_ma.upper, 1.6449, 1e-4);
  EXPECT_NEAR(r.ci_pseudo.lower, -1.3859, 1e-4);
  EXPECT_NEAR(r.ci_pseudo.upper, 1.3859, 1e-4);
  EXPECT_EQ(r.theta_star_hat, 0.0);
  EXPECT_FALSE(r.ci_ma.empty);
}

TEST(BuildCiMa, InvertedEstimatesFallBackOnPseudoInterval) {
  CiOptions opt;
  opt.c_override = 1.6449;
  const auto r = build_ci_ma(problem(5.0, 0.0), opt);
  EXPECT_TRUE(r.ci_theta_set.empty);
  EXPECT_FALSE(r.ci_ma.empty);
  EXPECT_EQ(r.ci_ma.lower, r.ci_pseudo.lower);
  EXPECT_EQ(r.ci_ma.upper, r.ci_pseudo.upper);
  EXPECT_NEAR(r.theta_star_hat, 2.5, 1e-15);
}

TEST(BuildCiMa, SetModeUsesTwoSidedQuantile) {
  CiOptions opt;
  opt.mode = CoverageMode::set;
  const auto r = build_ci_ma(problem(0.0, 1.0, 1.0, 1.0, 0.4), opt);
  EXPECT_NEAR(r.c_hat, 1.959963984540054, 1e-12);
  EXPECT_EQ(r.mode, CoverageMode::set);
}

TEST(BuildCiMa, UnionContainsBothComponents) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> ut(-5.0, 5.0), us(0.1, 3.0), uc(1.0, 2.6);
  for (int i = 0; i < 2000; ++i) {
    CiOptions opt;
    opt.c_override = uc(gen);
    const auto r = build_ci_ma(problem(ut(gen), ut(gen), us(gen), us(gen), 0.3), opt);
    EXPECT_TRUE(r.ci_ma.contains(r.ci_pseudo));
    EXPECT_TRUE(r.ci_ma.contains(r.ci_theta_set));
    EXPECT_TRUE(r.ci_ma.contains(r.theta_star_hat));
    EXPECT_GT(r.ci_ma.length(), 0.0);
    // The hull adds nothing beyond the components.
    EXPECT_TRUE(r.ci_ma.lower == r.ci_pseudo.lower ||
                (!r.ci_theta_set.empty && r.ci_ma.lower == r.ci_theta_set.lower));
  }
}

TEST(BuildCiMa, LocationScaleEquivariance) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> ut(-3.0, 3.0), us(0.2, 2.0), ua(-10.0, 10.0),
      ub(0.1, 10.0);
  for (int i = 0; i < 500; ++i) {
    CiOptions opt;
    opt.c_override = 1.7;
    const auto p = problem(ut(gen), ut(gen), us(gen), us(gen), 0.6);
    const double a = ua(gen);
    const double b = ub(gen);
    auto q = p;
    q.theta_L_hat = a + b * p.theta_L_hat;
    q.theta_U_hat = a + b * p.theta_U_hat;
    q.se_L = b * p.se_L;
    q.se_U = b * p.se_U;
    const auto r = build_ci_ma(p, opt).ci_ma;
    const auto s = build_ci_ma(q, opt).ci_ma;
    const double scale = 1e-12 * (1.0 + std::fabs(a) + b * 10.0);
    EXPECT_NEAR(s.lower, a + b * r.lower, scale);
    EXPECT_NEAR(s.upper, a + b * r.upper, scale);
  }
}

TEST(BuildCiMa, NestedAcrossLevels) {
  for (const auto& p0 : {problem(0.0, 1.0), problem(0.0, 0.1, 0.5, 2.0), problem(1.0, 0.0)}) {
    Interval prev{0.0, 0.0, true};
    for (const double alpha : {0.2, 0.1, 0.05, 0.01, 0.001}) {
      auto p = p0;
      p.alpha = alpha;
      p.rho_known_zero = true;
      const auto ci = build_ci_ma(p).ci_ma;
      EXPECT_TRUE(ci.contains(prev));
      EXPECT_GT(ci.length(), prev.length());
      prev = ci;
    }
  }
}

TEST(BuildCiMa, LengthFloorAndContiguity) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> ut(-5.0, 5.0), us(0.05, 4.0), ur(-1.0, 1.0),
      uc(1.0, 2.6);
  for (int i = 0; i < 5000; ++i) {
    CiOptions opt;
    opt.c_override = uc(gen);
    const auto p = problem(ut(gen), ut(gen), us(gen), us(gen), ur(gen));
    const auto r = build_ci_ma(p, opt);
    EXPECT_FALSE(r.ci_ma.empty);
    EXPECT_GE(r.ci_ma.length(), 2.0 * r.sigma_star_se * 1.959963984540054 * (1.0 - 1e-12));
    if (!r.ci_theta_set.empty) {
      EXPECT_GE(r.theta_star_hat, r.ci_theta_set.lower - 1e-12);
      EXPECT_LE(r.theta_star_hat, r.ci_theta_set.upper + 1e-12);
    }
  }
}

TEST(InferenceProblem, Validation) {
  EXPECT_THROW(problem(0.0, 1.0, 0.0).validate(), DomainError);
  EXPECT_THROW(problem(0.0, 1.0, 1.0, 1e-13).validate(), DomainError);
  EXPECT_THROW(problem(NAN, 1.0).validate(), DomainError);
  EXPECT_THROW(problem(0.0, INFINITY).validate(), DomainError);
  EXPECT_THROW(problem(0.0, 1.0, 1.0, 1.0, 0.0, 0.5).validate(), UnsupportedLevel);
  EXPECT_THROW(problem(0.0, 1.0, 1.0, 1.0, 0.3, 0.05, true).validate(), DomainError);
  EXPECT_NO_THROW(problem(1.0, 0.0, 1.0, 1.0, 0.0, 0.05, true).validate());
}

TEST(TiCriticalValues, MatchIndependentQuantiles) {
  const auto cv0 = ti_critical_values(Correlation(0.0), 0.05);
  EXPECT_NEAR(cv0.pretest, 2.5758293035489, 1e-10);
  EXPECT_NEAR(cv0.one, 1.6953977102721, 1e-10);
  // With independence P(max(Z1, -Z2) <= c) = Phi(c)^2.
  EXPECT_NEAR(cv0.two, std_normal_quantile(std::sqrt(1.0 - 0.9 * 0.05)), 1e-7);
  for (const double rho : {0.0, 0.5, -0.5, 0.9}) {
    const double mc = mc_two_sided_quantile(rho, 0.05, 4'000'000, 77);
    EXPECT_NEAR(ti_critical_values(Correlation(rho), 0.05).two, mc, 0.01) << rho;
  }
  EXPECT_THROW(ti_critical_values(Correlation(0.0), 0.6), UnsupportedLevel);
}

TEST(BuildCiTi, PointIdentifiedUsesTwoConstraintCriticalValue) {
  const auto p = problem(0.0, 0.0);
  const auto ci = build_ci_ti(p);
  const double two = ti_critical_values(Correlation(0.0), 0.05).two;
  EXPECT_NEAR(ci.lower, -two, 1e-9);
  EXPECT_NEAR(ci.upper, two, 1e-9);
  EXPECT_NEAR(two, 1.9998, 1e-3);
}

TEST(BuildCiTi, WideIdentifiedSetUsesOneSidedValues) {
  const auto ci = build_ci_ti(problem(0.0, 10.0));
  EXPECT_FALSE(ci.empty);
  EXPECT_NEAR(ci.lower, -1.6954, 1e-4);
  EXPECT_NEAR(ci.upper, 11.6954, 1e-4);
}

TEST(BuildCiTi, StronglyInvertedEstimatesGiveEmptySet) {
  const auto ci = build_ci_ti(problem(10.0, 0.0));
  EXPECT_TRUE(ci.empty);
  EXPECT_EQ(ci.length(), 0.0);
  EXPECT_FALSE(ci.contains(5.0));
  // The union with the pseudotrue interval is never empty.
  const auto u = build_ci_ti_union(problem(10.0, 0.0));
  EXPECT_FALSE(u.empty);
  EXPECT_NEAR(u.lower, 5.0 - 1.959963984540054 * std::sqrt(0.5), 1e-9);
}

TEST(BuildCiTiUnion, EqualsWiderComponentWhenPointIdentified) {
  const auto p = problem(0.0, 0.0);
  const auto u = build_ci_ti_union(p);
  const auto ti = build_ci_ti(p);
  EXPECT_EQ(u.lower, ti.lower);
  EXPECT_EQ(u.upper, ti.upper);
}

TEST(BuildCiTiUnion, ContainsBothComponents) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> ut(-3.0, 3.0), us(0.3, 2.0), ur(-0.8, 0.9);
  for (int i = 0; i < 40; ++i) {
    const auto p = problem(ut(gen), ut(gen), us(gen), us(gen), ur(gen));
    const auto u = build_ci_ti_union(p);
    CiOptions opt;
    opt.c_override = 1.7;
    EXPECT_TRUE(u.contains(build_ci_ti(p)));
    EXPECT_TRUE(u.contains(build_ci_ma(p, opt).ci_pseudo));
  }
}

TEST(BuildCiTi, ClosedFormMatchesGrid) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> ut(-3.0, 3.0), us(0.3, 2.0), ur(-0.8, 0.9);
  for (int i = 0; i < 60; ++i) {
    const auto p = problem(ut(gen), ut(gen), us(gen), us(gen), ur(gen));
    const auto cv = ti_critical_values(p.rho_hat, p.alpha);
    const auto grid = build_ci_ti(p);
    const auto exact = ci_ti_closed_form(p, cv);
    ASSERT_EQ(grid.empty, exact.empty);
    EXPECT_NEAR(grid.lower, exact.lower, 1e-9);
    EXPECT_NEAR(grid.upper, exact.upper, 1e-9);
    // Accepted points inside, rejected points just outside.
    if (!exact.empty) {
      EXPECT_TRUE(ti_accepts(p, cv, 0.5 * (exact.lower + exact.upper)));
      EXPECT_FALSE(ti_accepts(p, cv, exact.lower - 1e-6));
      EXPECT_FALSE(ti_accepts(p, cv, exact.upper + 1e-6));
    }
  }
}

TEST(BuildCiTi, RejectsCoarseGrid) {
  const auto p = problem(0.0, 1.0);
  EXPECT_THROW(build_ci_ti(p, ThetaGrid{-20.0, 20.0, 0.1}), DomainError);
  EXPECT_THROW(build_ci_ti(p, ThetaGrid{-1.0, 20.0, 0.01}), DomainError);
}

TEST(IntervalHull, IgnoresEmptyOperands) {
  const Interval a{0.0, 1.0, false};
  const Interval e{5.0, 2.0, true};
  const auto h = hull(a, e);
  EXPECT_EQ(h.lower, 0.0);
  EXPECT_EQ(h.upper, 1.0);
  EXPECT_TRUE(hull(e, e).empty);
  EXPECT_TRUE(a.contains(e));
  EXPECT_FALSE(e.contains(a));
}

TEST(RelativeExcessLength, DefinitionAndErrors) {
  const Interval a{-1.0, 3.0, false};
  const Interval b{-2.0, 4.0, false};
  EXPECT_DOUBLE_EQ(relative_excess_length(a, b, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(relative_excess_length(b, b, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(relative_excess_length(a, b, -1.0), 4.0 / 6.0);
  EXPECT_THROW(relative_excess_length(a, Interval{0.0, 1.0, true}, 0.0), DomainError);
  EXPECT_THROW(relative_excess_length(a, Interval{0.0, 1.0, false}, 1.0), DomainError);
}

TEST(BuildCiMa, PseudoIntervalInsideBoundsIntervalForModerateCorrelation) {
  // With equal standard errors and rho <= 0.4, q sqrt((1 + rho) / 2) <= Phi^{-1}(1 - alpha)
  // for the levels used, so the bounds interval already holds the pseudotrue interval.
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> ut(-3.0, 3.0), ugap(0.0, 6.0), us(0.1, 3.0),
      ur(-0.95, 0.4);
  for (int i = 0; i < 5000; ++i) {
    const double tl = ut(gen);
    const double se = us(gen);
    auto p = problem(tl, tl + ugap(gen), se, se, ur(gen));
    CiOptions opt;
    opt.c_override = std_normal_quantile(1.0 - p.alpha);
    const auto r = build_ci_ma(p, opt);
    EXPECT_TRUE(r.ci_theta_set.contains(r.ci_pseudo, 1e-12));
  }
}
