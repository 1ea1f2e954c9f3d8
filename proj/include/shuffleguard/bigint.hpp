#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace shuffleguard {

// Unsigned big integer, base 2^32. Just enough arithmetic for exact
// factorials: key-space sizes outgrow 64 bits already at n = 21.
class BigUint {
 public:
  BigUint() : limbs_{0} {}
  explicit BigUint(uint64_t value);

  BigUint& operator*=(uint32_t m);

  std::string to_string() const;  // decimal
  size_t decimal_digits() const;

  bool operator==(const BigUint&) const = default;

 private:
  std::vector<uint32_t> limbs_;  // little-endian, normalized
};

BigUint factorial(uint64_t n);

}  // namespace shuffleguard
