#pragma once

#include <cstdint>

#include "shuffleguard/chacha.hpp"
#include "shuffleguard/cifar10.hpp"

namespace shuffleguard {

// Zero-pad 4 on every side, crop the 32x32 window at (dy, dx) in [0,8], then
// optionally mirror horizontally. (4,4) with no flip is the identity.
inline void augment_with(const uint8_t* src, uint8_t* dst, int dy, int dx, bool flip) {
  constexpr int kSide = kCifarSide;
  constexpr int kC = kCifarChannels;
  for (int r = 0; r < kSide; ++r) {
    const int sr = r + dy - 4;
    for (int c = 0; c < kSide; ++c) {
      const int cc = flip ? kSide - 1 - c : c;
      const int sc = cc + dx - 4;
      uint8_t* out = dst + (r * kSide + c) * kC;
      if (sr >= 0 && sr < kSide && sc >= 0 && sc < kSide) {
        const uint8_t* in = src + (sr * kSide + sc) * kC;
        for (int ch = 0; ch < kC; ++ch) out[ch] = in[ch];
      } else {
        for (int ch = 0; ch < kC; ++ch) out[ch] = 0;
      }
    }
  }
}

inline void augment(const uint8_t* src, uint8_t* dst, ChaChaRng& rng) {
  const int dy = static_cast<int>(rng.uniform_below(9));
  const int dx = static_cast<int>(rng.uniform_below(9));
  const bool flip = rng.uniform_below(2) == 1;
  augment_with(src, dst, dy, dx, flip);
}

}  // namespace shuffleguard
