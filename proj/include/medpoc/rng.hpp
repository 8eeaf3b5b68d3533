#pragma once

#include <cstdint>
#include <random>

namespace medpoc {

/// SplitMix64 finalizer; used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for substream `index` of `master`.  Streams for different indices
/// are statistically independent and do not depend on scheduling.
inline std::uint64_t substream_seed(std::uint64_t master,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Engine with portable output mapping (std distributions are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(g_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = -n % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = g_();
      if (r >= limit) return r % n;
    }
  }

 private:
  std::mt19937_64 g_;
};

}  // namespace medpoc
