#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "boundsci/normal.hpp"

namespace boundsci {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

struct BivariateDraw {
  double z1;
  double z2;
};

/// Counter-based normal stream.
///
/// Draw i of stream (seed, stream_id) is a fixed function of
/// (seed, stream_id, i): the Philox key is the seed, the 128-bit counter is
/// (i, stream_id). Each block yields two 53-bit uniforms which Box-Muller
/// turns into two independent standard normals. Streams can be positioned
/// anywhere with seek(), so work can be split across threads without
/// changing the sequence.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t position() const noexcept { return counter_; }
  void seek(std::uint64_t position) noexcept { counter_ = position; }

  /// Two independent standard normals; advances the stream by one.
  BivariateDraw next_independent_pair() noexcept;

  /// (z1, rho * z1 + sqrt(1 - rho^2) * e) from one independent pair.
  BivariateDraw next_bivariate(Correlation rho) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t counter_ = 0;
};

std::vector<BivariateDraw> sample_bivariate(Correlation rho, RngStream& stream,
                                            std::size_t count);

/// `count` streams sharing `seed` with pairwise distinct stream ids.
std::vector<RngStream> seeded_streams(std::uint64_t seed, std::size_t count);

}  // namespace boundsci
