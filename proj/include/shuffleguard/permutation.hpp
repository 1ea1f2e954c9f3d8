#pragma once

#include <cstdint>
#include <vector>

#include "shuffleguard/bigint.hpp"
#include "shuffleguard/key.hpp"

namespace shuffleguard {

// A bijection on {0..n-1}. mapping[i] is the source index read when filling
// output slot i, so applying a permutation is out[i] = in[mapping[i]].
struct PermutationVector {
  std::vector<uint32_t> mapping;

  uint32_t n() const { return uint32_t(mapping.size()); }
};

// Key-scheduled Fisher-Yates. Deterministic in (key, n): the generator is
// ChaCha20 keyed by the 32 seed bytes with n in the nonce, so every n gets
// an independent stream and equal keys always give equal permutations.
PermutationVector derive_permutation(const SecretKey& key, uint32_t n);

PermutationVector identity_permutation(uint32_t n);
PermutationVector inverse(const PermutationVector& perm);
bool is_bijection(const PermutationVector& perm);

// Number of distinct permutations of an n-pixel block: n!, exact.
BigUint key_space(uint64_t n);

}  // namespace shuffleguard
