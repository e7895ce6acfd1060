#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al. 2011).
// Every draw is a pure function of (seed, stream, counter), so results do
// not depend on evaluation order or on how work is split across threads.

#include <array>
#include <cstdint>

namespace ktraffic::random {

using Block = std::array<std::uint32_t, 4>;

/// Named substreams spawned from one master seed.
enum class Stream : std::uint64_t {
  init = 0x696e6974ULL,         // initial ensemble
  interaction = 0x636f6c6cULL,  // per-step interaction flag and partner choice
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr Block philox4x32_10(Block ctr, std::uint32_t k0, std::uint32_t k1) noexcept {
  constexpr std::uint64_t kMul0 = 0xD2511F53ULL;
  constexpr std::uint64_t kMul1 = 0xCD9E8D57ULL;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9U;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85U;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = kMul0 * ctr[0];
    const std::uint64_t p1 = kMul1 * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0, static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1, static_cast<std::uint32_t>(p0)};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return ctr;
}

/// Uniform double in [0,1) from the top 53 bits.
inline constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by multiply-shift.
inline constexpr std::uint64_t to_index(std::uint64_t bits, std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * n) >> 64);
}

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, Stream stream) noexcept
      : key_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)))) {}

  /// Two independent 64-bit words for counter (a, b).
  constexpr std::array<std::uint64_t, 2> words(std::uint64_t a, std::uint64_t b) const noexcept {
    const Block out = philox4x32_10(
        {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
         static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)},
        static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32));
    return {(static_cast<std::uint64_t>(out[0]) << 32) | out[1],
            (static_cast<std::uint64_t>(out[2]) << 32) | out[3]};
  }

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace ktraffic::random
