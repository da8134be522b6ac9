#include "boundsci/rng.hpp"

#include <cmath>
#include <numbers>

#include "boundsci/errors.hpp"

namespace boundsci {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// Uniform on the open interval (0, 1) from the top 53 bits of (hi, lo).
inline double open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

BivariateDraw RngStream::next_independent_pair() noexcept {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
      static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                            static_cast<std::uint32_t>(seed_ >> 32)};
  ++counter_;
  const auto out = philox4x32(ctr, key);
  const double u1 = open_unit(out[0], out[1]);
  const double u2 = open_unit(out[2], out[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

BivariateDraw RngStream::next_bivariate(Correlation rho) noexcept {
  const auto [z1, e] = next_independent_pair();
  const double r = rho.value();
  return {z1, r * z1 + std::sqrt((1.0 - r) * (1.0 + r)) * e};
}

std::vector<BivariateDraw> sample_bivariate(Correlation rho, RngStream& stream,
                                            std::size_t count) {
  if (count == 0) throw DomainError("sample_bivariate: count must be >= 1");
  std::vector<BivariateDraw> draws;
  draws.reserve(count);
  for (std::size_t i = 0; i < count; ++i) draws.push_back(stream.next_bivariate(rho));
  return draws;
}

std::vector<RngStream> seeded_streams(std::uint64_t seed, std::size_t count) {
  if (count == 0) throw DomainError("seeded_streams: need at least one stream");
  std::vector<RngStream> streams;
  streams.reserve(count);
  for (std::size_t i = 0; i < count; ++i) streams.emplace_back(seed, i);
  return streams;
}

}  // namespace boundsci
