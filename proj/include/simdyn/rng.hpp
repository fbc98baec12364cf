// Counter-based random streams.
//
// Algorithm "simdyn-splitmix-ctr-v1": the 64-bit key of stream (seed, s) is
//   key = mix(seed ^ mix(s + 0x9E3779B97F4A7C15))
// and draw number c of that stream is
//   mix(key + (c + 1) * 0x9E3779B97F4A7C15)
// where mix is the SplitMix64 finalizer
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z =  z ^ (z >> 31).
// Any draw is a pure function of (seed, stream, counter), so results do not
// depend on how work is split across threads.
#pragma once

#include <cstdint>

namespace simdyn {

inline constexpr const char* kCounterStreamAlgorithm = "simdyn-splitmix-ctr-v1";
inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterStream {
 public:
  constexpr CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(splitmix_finalize(seed ^ splitmix_finalize(stream + kGoldenGamma))) {}

  constexpr std::uint64_t at(std::uint64_t counter) const noexcept {
    return splitmix_finalize(key_ + (counter + 1) * kGoldenGamma);
  }

  // Uniform in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, k) by 128-bit multiply-shift.
  std::uint64_t below(std::uint64_t counter, std::uint64_t k) const noexcept {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(at(counter)) * k) >> 64);
  }

 private:
  std::uint64_t key_;
};

}  // namespace simdyn
