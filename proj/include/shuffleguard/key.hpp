#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "shuffleguard/errors.hpp"

namespace shuffleguard {

// Key file format, version 1:
//   line 1: "shuffleguard-key-v1"
//   line 2: 64 lowercase hex characters (the 32 seed bytes)
// Both lines newline-terminated. Writing then reading a key reproduces the
// file bit-exactly.
inline constexpr std::string_view kKeyFileMagic = "shuffleguard-key-v1";

struct SecretKey {
  std::array<uint8_t, 32> seed_bytes{};
  std::string label;  // human-readable name; not serialized

  bool operator==(const SecretKey& other) const {
    return seed_bytes == other.seed_bytes;
  }
};

// Fresh key from OS entropy.
SecretKey random_key(std::string label = "");

// Deterministic key expanded from a 64-bit seed (tests, guessed keys).
SecretKey key_from_seed(uint64_t seed, std::string label = "");

SecretKey key_from_hex(std::string_view hex64, std::string label = "");
std::string key_to_hex(const SecretKey& key);

void save_key(const SecretKey& key, const std::filesystem::path& path);
SecretKey load_key(const std::filesystem::path& path);

// SHA-256 of the seed bytes; safe to store in checkpoints and reports.
std::string key_fingerprint(const SecretKey& key);

}  // namespace shuffleguard
