#pragma once

#include <cstdint>

namespace randcollect {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Stateless counter-based generator. Every draw is a pure function of
// (seed, stream, a, b), so the streams for different purposes are
// independent: adding or removing draws of one purpose never shifts the
// sequence seen by another. That is what makes runs bit-reproducible even
// when measurement toggles change.
struct CounterRng {
  std::uint64_t seed = 0;

  std::uint64_t raw(std::uint64_t stream, std::uint64_t a, std::uint64_t b = 0) const {
    std::uint64_t h = mix64(seed ^ (stream * 0x9e3779b97f4a7c15ull));
    h = mix64(h ^ (a * 0xbf58476d1ce4e5b9ull));
    h = mix64(h ^ (b * 0x94d049bb133111ebull));
    return h;
  }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform01(std::uint64_t stream, std::uint64_t a, std::uint64_t b = 0) const {
    return static_cast<double>(raw(stream, a, b) >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, m). Fixed-point multiply; bias is negligible for m << 2^64
  // and the result is identical on every platform.
  std::uint64_t below(std::uint64_t m, std::uint64_t stream, std::uint64_t a,
                      std::uint64_t b = 0) const {
    using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(raw(stream, a, b)) * m) >> 64);
  }
};

// Stream ids. Keep these stable: changing them changes every trajectory.
namespace rng_stream {
constexpr std::uint64_t kArrival = 1;
constexpr std::uint64_t kPacketPick = 2;
constexpr std::uint64_t kDestPick = 3;
constexpr std::uint64_t kRggPoint = 4;
constexpr std::uint64_t kSweepSeed = 5;
}  // namespace rng_stream

}  // namespace randcollect
