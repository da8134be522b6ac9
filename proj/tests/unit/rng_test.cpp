#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "boundsci/errors.hpp"
#include "boundsci/rng.hpp"

using namespace boundsci;

namespace {

struct Moments {
  double m1 = 0, m2 = 0, v1 = 0, v2 = 0, cov = 0;
};

Moments moments(const std::vector<BivariateDraw>& draws) {
  Moments m;
  const double n = static_cast<double>(draws.size());
  for (const auto& d : draws) {
    m.m1 += d.z1;
    m.m2 += d.z2;
  }
  m.m1 /= n;
  m.m2 /= n;
  for (const auto& d : draws) {
    m.v1 += (d.z1 - m.m1) * (d.z1 - m.m1);
    m.v2 += (d.z2 - m.m2) * (d.z2 - m.m2);
    m.cov += (d.z1 - m.m1) * (d.z2 - m.m2);
  }
  m.v1 /= n;
  m.v2 /= n;
  m.cov /= n;
  return m;
}

}  // namespace

// Known-answer vectors from the Random123 distribution (kat_vectors, philox4x32 10 rounds).
TEST(Philox, KnownAnswerVectors) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}),
            (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStream, SameSeedSameSequence) {
  RngStream a(42, 3);
  RngStream b(42, 3);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_bivariate(Correlation(0.4));
    const auto y = b.next_bivariate(Correlation(0.4));
    ASSERT_EQ(x.z1, y.z1);
    ASSERT_EQ(x.z2, y.z2);
  }
}

TEST(RngStream, SeekReproducesLaterDraws) {
  RngStream a(7, 0);
  std::vector<BivariateDraw> first;
  for (int i = 0; i < 100; ++i) first.push_back(a.next_independent_pair());
  EXPECT_EQ(a.position(), 100u);
  RngStream b(7, 0);
  b.seek(57);
  for (int i = 57; i < 100; ++i) {
    const auto d = b.next_independent_pair();
    EXPECT_EQ(d.z1, first[i].z1);
    EXPECT_EQ(d.z2, first[i].z2);
  }
}

TEST(RngStream, DifferentStreamsAndSeedsDiffer) {
  RngStream a(1, 0);
  RngStream b(1, 1);
  RngStream c(2, 0);
  const auto da = a.next_independent_pair();
  const auto db = b.next_independent_pair();
  const auto dc = c.next_independent_pair();
  EXPECT_NE(da.z1, db.z1);
  EXPECT_NE(da.z1, dc.z1);
}

TEST(RngStream, PerfectCorrelationGivesEqualComponents) {
  RngStream s(99, 0);
  for (const auto& d : sample_bivariate(Correlation(1.0), s, 1000)) EXPECT_EQ(d.z1, d.z2);
  for (const auto& d : sample_bivariate(Correlation(-1.0), s, 1000)) EXPECT_EQ(d.z1, -d.z2);
}

TEST(RngStream, CorrelatedDrawFollowsConstruction) {
  const double r = 0.7;
  RngStream s(5, 9);
  RngStream t(5, 9);
  for (int i = 0; i < 100; ++i) {
    const auto [z1, e] = s.next_independent_pair();
    const auto d = t.next_bivariate(Correlation(r));
    EXPECT_EQ(d.z1, z1);
    EXPECT_NEAR(d.z2, r * z1 + std::sqrt(1.0 - r * r) * e, 1e-15);
  }
}

TEST(RngStream, IndependentDrawsAreUncorrelated) {
  RngStream s(20190901, 0);
  const auto m = moments(sample_bivariate(Correlation(0.0), s, 1'000'000));
  EXPECT_LT(std::fabs(m.cov / std::sqrt(m.v1 * m.v2)), 0.004);
  EXPECT_NEAR(m.m1, 0.0, 0.004);
  EXPECT_NEAR(m.v1, 1.0, 0.005);
  EXPECT_NEAR(m.v2, 1.0, 0.005);
}

TEST(RngStream, CovarianceMatchesWithinThreeStandardErrors) {
  for (const double r : {0.7, -0.7, 0.95}) {
    RngStream s(31337, 2);
    const std::size_t n = 1'000'000;
    const auto m = moments(sample_bivariate(Correlation(r), s, n));
    const double se = std::sqrt((1.0 + r * r) / static_cast<double>(n));
    EXPECT_NEAR(m.cov, r, 3.0 * se) << r;
  }
}

TEST(RngStream, TailProbabilityMatchesNormal) {
  RngStream s(8, 0);
  const std::size_t n = 1'000'000;
  std::size_t above = 0;
  for (std::size_t i = 0; i < n / 2; ++i) {
    const auto d = s.next_independent_pair();
    above += (d.z1 > 1.6448536269514722) + (d.z2 > 1.6448536269514722);
  }
  const double p = static_cast<double>(above) / static_cast<double>(n);
  EXPECT_NEAR(p, 0.05, 3.0 * std::sqrt(0.05 * 0.95 / static_cast<double>(n)));
}

TEST(SeededStreams, DistinctIdsAndSharedSeed) {
  const auto streams = seeded_streams(123, 57);
  ASSERT_EQ(streams.size(), 57u);
  std::set<std::uint64_t> ids;
  for (const auto& s : streams) {
    EXPECT_EQ(s.seed(), 123u);
    EXPECT_EQ(s.position(), 0u);
    ids.insert(s.stream_id());
  }
  EXPECT_EQ(ids.size(), 57u);
}

TEST(SeededStreams, ZeroCountThrows) {
  EXPECT_THROW(seeded_streams(1, 0), DomainError);
  RngStream s(1, 0);
  EXPECT_THROW(sample_bivariate(Correlation(0.2), s, 0), DomainError);
}
