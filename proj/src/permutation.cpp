#include "shuffleguard/permutation.hpp"

#include <numeric>
#include <stdexcept>
#include <utility>

#include "shuffleguard/chacha.hpp"

namespace shuffleguard {

PermutationVector derive_permutation(const SecretKey& key, uint32_t n) {
  if (n == 0) throw std::invalid_argument("derive_permutation: n must be >= 1");
  auto rng = ChaChaRng::keyed(key.seed_bytes, ChaChaRng::kPermutation, n);
  PermutationVector perm = identity_permutation(n);
  for (uint32_t i = n - 1; i > 0; --i) {
    const auto j = uint32_t(rng.uniform_below(uint64_t(i) + 1));
    std::swap(perm.mapping[i], perm.mapping[j]);
  }
  return perm;
}

PermutationVector identity_permutation(uint32_t n) {
  if (n == 0) throw std::invalid_argument("identity_permutation: n must be >= 1");
  PermutationVector perm;
  perm.mapping.resize(n);
  std::iota(perm.mapping.begin(), perm.mapping.end(), 0u);
  return perm;
}

PermutationVector inverse(const PermutationVector& perm) {
  PermutationVector inv;
  inv.mapping.assign(perm.mapping.size(), 0u);
  for (uint32_t i = 0; i < perm.n(); ++i) inv.mapping[perm.mapping[i]] = i;
  return inv;
}

bool is_bijection(const PermutationVector& perm) {
  std::vector<bool> seen(perm.mapping.size(), false);
  for (const uint32_t v : perm.mapping) {
    if (v >= perm.mapping.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

BigUint key_space(uint64_t n) {
  if (n == 0) throw std::invalid_argument("key_space: n must be >= 1");
  return factorial(n);
}

}  // namespace shuffleguard
