#pragma once

#include <cstdint>
#include <random>

namespace invp {

/// SplitMix64 finalizer. Used to derive independent substream seeds.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of substream `stream` under master `seed`: a counter-based mix, so
/// streams can be created in any order on any thread.
[[nodiscard]] constexpr std::uint64_t substream_seed(std::uint64_t seed,
                                                     std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Deterministic generator for one substream.
///
/// Engine: std::mt19937_64 (bit-exact by the standard). Uniforms take the top
/// 53 bits. Normals use the Marsaglia polar method with the spare variate
/// cached; this is fixed so that seeded output is stable across platforms and
/// standard-library versions (std::normal_distribution is not).
class StreamRng {
 public:
  explicit StreamRng(std::uint64_t seed) : engine_(seed) {}
  StreamRng(std::uint64_t seed, std::uint64_t stream) : engine_(substream_seed(seed, stream)) {}

  /// Uniform on [0, 1).
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() noexcept;

  std::uint64_t bits() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace invp
