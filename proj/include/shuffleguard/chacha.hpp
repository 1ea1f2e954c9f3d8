#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace shuffleguard {

// ChaCha20 keystream generator (RFC 8439 block function). Every random draw
// in the project flows through this class so results reproduce bit-for-bit
// across runs and platforms: permutation derivation, weight init,
// augmentation draws and attack random starts each get their own
// (purpose, stream) nonce and therefore independent streams.
class ChaChaRng {
 public:
  // Stream labels. Stable on purpose: a key or seed plus a (purpose, stream)
  // pair always yields the same draws, and derived artifacts (permutations,
  // initial weights) depend on them.
  enum Purpose : uint32_t {
    kPermutation = 1,
    kWeightInit = 2,
    kAugment = 3,
    kEpochShuffle = 4,
    kAttackInit = 5,
    kSynthData = 6,
    kKeyGuess = 7,
  };

  ChaChaRng(const std::array<uint8_t, 32>& key,
            const std::array<uint8_t, 12>& nonce);

  // Stream scoped to a 32-byte secret key.
  static ChaChaRng keyed(const std::array<uint8_t, 32>& key, uint32_t purpose,
                         uint64_t stream);
  // Stream scoped to a public experiment seed.
  static ChaChaRng from_seed(uint64_t seed, uint32_t purpose, uint64_t stream);

  uint64_t next_u64();
  // Unbiased draw in [0, bound) by rejection sampling; bound must be nonzero.
  uint64_t uniform_below(uint64_t bound);
  // [0, 1) with 53-bit resolution.
  double uniform_real();
  // Standard normal via Box-Muller.
  double normal();

  using result_type = uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~uint64_t{0}; }
  result_type operator()() { return next_u64(); }

 private:
  void refill();

  std::array<uint32_t, 16> input_;
  std::array<uint8_t, 64> block_{};
  size_t pos_ = 64;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace shuffleguard
