#include "shuffleguard/key.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "shuffleguard/chacha.hpp"
#include "shuffleguard/errors.hpp"
#include "shuffleguard/sha256.hpp"

namespace shuffleguard {

namespace {

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

}  // namespace

SecretKey random_key(std::string label) {
  std::random_device rd;
  SecretKey key;
  key.label = std::move(label);
  for (size_t i = 0; i < key.seed_bytes.size(); i += 4) {
    const uint32_t word = rd();
    key.seed_bytes[i + 0] = uint8_t(word);
    key.seed_bytes[i + 1] = uint8_t(word >> 8);
    key.seed_bytes[i + 2] = uint8_t(word >> 16);
    key.seed_bytes[i + 3] = uint8_t(word >> 24);
  }
  return key;
}

SecretKey key_from_seed(uint64_t seed, std::string label) {
  auto rng = ChaChaRng::from_seed(seed, ChaChaRng::kKeyGuess, 0);
  SecretKey key;
  key.label = std::move(label);
  for (size_t i = 0; i < key.seed_bytes.size(); i += 8) {
    const uint64_t word = rng.next_u64();
    for (int b = 0; b < 8; ++b) key.seed_bytes[i + b] = uint8_t(word >> (8 * b));
  }
  return key;
}

SecretKey key_from_hex(std::string_view hex64, std::string label) {
  if (hex64.size() != 64) {
    throw config_error("key hex must be exactly 64 characters, got " +
                       std::to_string(hex64.size()));
  }
  SecretKey key;
  key.label = std::move(label);
  for (size_t i = 0; i < 32; ++i) {
    const int hi = hex_nibble(hex64[2 * i]);
    const int lo = hex_nibble(hex64[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw config_error("key hex must be lowercase hex digits");
    }
    key.seed_bytes[i] = uint8_t(hi << 4 | lo);
  }
  return key;
}

std::string key_to_hex(const SecretKey& key) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(64, '0');
  for (size_t i = 0; i < key.seed_bytes.size(); ++i) {
    out[2 * i] = kHex[key.seed_bytes[i] >> 4];
    out[2 * i + 1] = kHex[key.seed_bytes[i] & 0xf];
  }
  return out;
}

void save_key(const SecretKey& key, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open key file for writing: " + path.string());
  out << kKeyFileMagic << '\n' << key_to_hex(key) << '\n';
  if (!out) throw config_error("failed writing key file: " + path.string());
}

SecretKey load_key(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open key file: " + path.string());
  std::string magic, hex;
  std::getline(in, magic);
  std::getline(in, hex);
  if (magic != kKeyFileMagic) {
    throw config_error("bad key file magic in " + path.string() +
                       " (expected " + std::string(kKeyFileMagic) + ")");
  }
  try {
    return key_from_hex(hex, path.stem().string());
  } catch (const config_error& e) {
    throw config_error(path.string() + ": " + e.what());
  }
}

std::string key_fingerprint(const SecretKey& key) {
  return sha256_hex(key.seed_bytes.data(), key.seed_bytes.size());
}

}  // namespace shuffleguard
