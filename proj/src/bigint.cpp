#include "shuffleguard/bigint.hpp"

#include <algorithm>
#include <stdexcept>

namespace shuffleguard {

BigUint::BigUint(uint64_t value) {
  limbs_.push_back(uint32_t(value));
  if (value >> 32) limbs_.push_back(uint32_t(value >> 32));
}

BigUint& BigUint::operator*=(uint32_t m) {
  uint64_t carry = 0;
  for (auto& limb : limbs_) {
    const uint64_t prod = uint64_t(limb) * m + carry;
    limb = uint32_t(prod);
    carry = prod >> 32;
  }
  while (carry) {
    limbs_.push_back(uint32_t(carry));
    carry >>= 32;
  }
  while (limbs_.size() > 1 && limbs_.back() == 0) limbs_.pop_back();
  return *this;
}

std::string BigUint::to_string() const {
  // Repeated division by 1e9 yields the decimal expansion in 9-digit chunks.
  std::vector<uint32_t> work(limbs_);
  std::string out;
  if (work.size() == 1 && work[0] == 0) return "0";
  std::vector<uint32_t> chunks;
  while (!(work.size() == 1 && work[0] == 0)) {
    uint64_t rem = 0;
    for (size_t i = work.size(); i-- > 0;) {
      const uint64_t cur = (rem << 32) | work[i];
      work[i] = uint32_t(cur / 1000000000u);
      rem = cur % 1000000000u;
    }
    while (work.size() > 1 && work.back() == 0) work.pop_back();
    chunks.push_back(uint32_t(rem));
  }
  out = std::to_string(chunks.back());
  for (size_t i = chunks.size() - 1; i-- > 0;) {
    std::string part = std::to_string(chunks[i]);
    out.append(9 - part.size(), '0');
    out += part;
  }
  return out;
}

size_t BigUint::decimal_digits() const { return to_string().size(); }

BigUint factorial(uint64_t n) {
  if (n > 0xffffffffull) throw std::invalid_argument("factorial: n too large");
  BigUint result(1);
  for (uint64_t k = 2; k <= n; ++k) result *= uint32_t(k);
  return result;
}

}  // namespace shuffleguard
