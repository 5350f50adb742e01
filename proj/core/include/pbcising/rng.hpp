#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace pbcising {

// SplitMix64: a Weyl counter passed through a 64-bit finalizer. Streams are
// split by hashing (seed, stream index) into a fresh starting counter, so
// independent chains never share state.
__extension__ using uint128_t = unsigned __int128;

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  static constexpr std::string_view kName = "splitmix64";
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  result_type operator()() noexcept { return mix(state_ += kGamma); }

  // Starting counter of stream `index` derived from `seed`.
  static constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix(seed ^ mix(index + kGamma));
  }

  static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) noexcept {
    return SplitMix64(derive_seed(seed, index));
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) noexcept {
    auto product = static_cast<uint128_t>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<uint128_t>((*this)()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace pbcising
