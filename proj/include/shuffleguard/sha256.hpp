#pragma once

#include <cstddef>
#include <string>

namespace shuffleguard {

// SHA-256, used for provenance hashes (manifests, key fingerprints).
std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& s);

}  // namespace shuffleguard
