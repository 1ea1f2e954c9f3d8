#include "shuffleguard/chacha.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace shuffleguard {

namespace {

inline uint32_t rotl(uint32_t v, int c) { return (v << c) | (v >> (32 - c)); }

inline uint32_t load_le32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}

inline void quarter_round(uint32_t& a, uint32_t& b, uint32_t& c, uint32_t& d) {
  a += b; d ^= a; d = rotl(d, 16);
  c += d; b ^= c; b = rotl(b, 12);
  a += b; d ^= a; d = rotl(d, 8);
  c += d; b ^= c; b = rotl(b, 7);
}

}  // namespace

ChaChaRng::ChaChaRng(const std::array<uint8_t, 32>& key,
                     const std::array<uint8_t, 12>& nonce) {
  static constexpr uint32_t kSigma[4] = {0x61707865, 0x3320646e, 0x79622d32,
                                         0x6b206574};
  for (int i = 0; i < 4; ++i) input_[i] = kSigma[i];
  for (int i = 0; i < 8; ++i) input_[4 + i] = load_le32(key.data() + 4 * i);
  input_[12] = 0;  // block counter
  for (int i = 0; i < 3; ++i) input_[13 + i] = load_le32(nonce.data() + 4 * i);
}

ChaChaRng ChaChaRng::keyed(const std::array<uint8_t, 32>& key, uint32_t purpose,
                           uint64_t stream) {
  std::array<uint8_t, 12> nonce{};
  for (int i = 0; i < 4; ++i) nonce[i] = uint8_t(purpose >> (8 * i));
  for (int i = 0; i < 8; ++i) nonce[4 + i] = uint8_t(stream >> (8 * i));
  return ChaChaRng(key, nonce);
}

ChaChaRng ChaChaRng::from_seed(uint64_t seed, uint32_t purpose,
                               uint64_t stream) {
  std::array<uint8_t, 32> key{};
  static constexpr char kTag[] = "shuffleguard-rng-v1";
  std::memcpy(key.data(), kTag, sizeof(kTag) - 1);
  for (int i = 0; i < 8; ++i) key[24 + i] = uint8_t(seed >> (8 * i));
  return keyed(key, purpose, stream);
}

void ChaChaRng::refill() {
  std::array<uint32_t, 16> x = input_;
  for (int round = 0; round < 10; ++round) {
    quarter_round(x[0], x[4], x[8], x[12]);
    quarter_round(x[1], x[5], x[9], x[13]);
    quarter_round(x[2], x[6], x[10], x[14]);
    quarter_round(x[3], x[7], x[11], x[15]);
    quarter_round(x[0], x[5], x[10], x[15]);
    quarter_round(x[1], x[6], x[11], x[12]);
    quarter_round(x[2], x[7], x[8], x[13]);
    quarter_round(x[3], x[4], x[9], x[14]);
  }
  for (int i = 0; i < 16; ++i) {
    const uint32_t v = x[i] + input_[i];
    block_[4 * i + 0] = uint8_t(v);
    block_[4 * i + 1] = uint8_t(v >> 8);
    block_[4 * i + 2] = uint8_t(v >> 16);
    block_[4 * i + 3] = uint8_t(v >> 24);
  }
  input_[12] += 1;
  pos_ = 0;
}

uint64_t ChaChaRng::next_u64() {
  if (pos_ + 8 > block_.size()) refill();
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(block_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

uint64_t ChaChaRng::uniform_below(uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: bound must be nonzero");
  const uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
  for (;;) {
    const uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

double ChaChaRng::uniform_real() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double ChaChaRng::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  // u1 in (0,1] so the log is finite
  const double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = double(next_u64() >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_normal_ = true;
  return r * std::cos(theta);
}

}  // namespace shuffleguard
