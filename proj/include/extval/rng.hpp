#pragma once

#include <cstdint>

namespace extval {

/// Counter-based random stream: output i is mix64(key + i * golden), the
/// SplitMix64 construction. Streams are plain values; fork() derives a new
/// key from the parent key and a tag, independent of how much the parent
/// has been consumed, so the substream tree is reproducible regardless of
/// evaluation order or thread scheduling.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(mix64(seed ^ kSeedSalt)) {}

  /// Derived substream for (this stream, tag). Same tag, same substream.
  [[nodiscard]] RandomStream fork(std::uint64_t tag) const {
    return RandomStream(RawKey{}, mix64(key_ ^ mix64(tag ^ kForkSalt)));
  }

  std::uint64_t next_u64() { return mix64(key_ + ++counter_ * kGolden); }

  /// Uniform draw on the open interval (0,1): (i + 1/2) / 2^53.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal draw via the inverse CDF (see normal_quantile); exact
  /// same value for a given stream state on every platform with IEEE doubles.
  double normal();

 private:
  struct RawKey {};
  RandomStream(RawKey, std::uint64_t key) : key_(key) {}

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x8BADF00D5EEDF00DULL;
  static constexpr std::uint64_t kForkSalt = 0xD2B74407B1CE6E93ULL;

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Fixed purpose tags for substream derivation. Keeping them in one place
// guarantees the harness and the path generators agree on the layout.
namespace stream_tag {
inline constexpr std::uint64_t kMultiplier = 0;
inline constexpr std::uint64_t kDriver = 1;
inline constexpr std::uint64_t kReplication = 2;
inline constexpr std::uint64_t kSweepAxis = 3;
inline constexpr std::uint64_t kDirectSample = 4;
inline constexpr std::uint64_t kQuantileReference = 5;
}  // namespace stream_tag

}  // namespace extval
