#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "shuffleguard/bigint.hpp"
#include "shuffleguard/chacha.hpp"
#include "shuffleguard/key.hpp"
#include "shuffleguard/permutation.hpp"
#include "shuffleguard/shuffle.hpp"
#include "support.hpp"

using namespace shuffleguard;
using sgtest::naive_shuffle;
using sgtest::random_byte_image;

namespace {

// Iterative factorial oracle over decimal strings: multiplies digit-by-digit
// in base 10, a completely different representation from BigUint's base-2^32
// limbs.
std::string decimal_factorial(unsigned n) {
  std::vector<int> digits{1};  // little-endian decimal
  for (unsigned k = 2; k <= n; ++k) {
    int carry = 0;
    for (auto& d : digits) {
      const int prod = d * int(k) + carry;
      d = prod % 10;
      carry = prod / 10;
    }
    while (carry) {
      digits.push_back(carry % 10);
      carry /= 10;
    }
  }
  std::string out;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    out += char('0' + *it);
  }
  return out;
}

SecretKey test_key(uint64_t seed) { return key_from_seed(seed, "test"); }

}  // namespace

TEST_CASE("chacha matches an independent RFC 8439 implementation") {
  // Keystream frozen from OpenSSL's ChaCha20 with key 00..1f and the nonce
  // layout used by ChaChaRng::keyed(purpose=1, stream=12).
  std::array<uint8_t, 32> key{};
  for (int i = 0; i < 32; ++i) key[i] = uint8_t(i);
  auto rng = ChaChaRng::keyed(key, ChaChaRng::kPermutation, 12);
  CHECK(rng.next_u64() == 0xf35a94ddbb8ef50full);
  CHECK(rng.next_u64() == 0x62e7f01bd1982a5eull);
  CHECK(rng.next_u64() == 0x375da0440dc847d0ull);
  CHECK(rng.next_u64() == 0x6397e3382ee7f7feull);
}

TEST_CASE("chacha uniform_below is in range and rejects zero bound") {
  auto rng = ChaChaRng::from_seed(7, ChaChaRng::kPermutation, 0);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.uniform_below(17) < 17);
  }
  CHECK_THROWS_AS(rng.uniform_below(0), std::invalid_argument);
}

TEST_CASE("derive_permutation n=1 only has one permutation") {
  const auto perm = derive_permutation(test_key(1), 1);
  REQUIRE(perm.mapping.size() == 1);
  CHECK(perm.mapping[0] == 0);
}

TEST_CASE("derive_permutation is deterministic in (key, n)") {
  const auto a = derive_permutation(test_key(2), 12);
  const auto b = derive_permutation(test_key(2), 12);
  CHECK(a.mapping == b.mapping);

  // same seed bytes via a different SecretKey instance
  SecretKey copy;
  copy.seed_bytes = test_key(2).seed_bytes;
  copy.label = "other-name";
  CHECK(derive_permutation(copy, 12).mapping == a.mapping);

  const auto c = derive_permutation(test_key(3), 12);
  CHECK(c.mapping != a.mapping);
}

TEST_CASE("derive_permutation output is a bijection") {
  const auto perm = derive_permutation(test_key(4), 12);
  auto sorted = perm.mapping;
  std::sort(sorted.begin(), sorted.end());
  for (uint32_t i = 0; i < 12; ++i) CHECK(sorted[i] == i);

  for (uint64_t seed = 0; seed < 40; ++seed) {
    const uint32_t n = 1 + uint32_t((seed * 257) % 10000);
    CHECK(is_bijection(derive_permutation(test_key(seed), n)));
  }
}

TEST_CASE("derive_permutation rejects n=0") {
  CHECK_THROWS_AS(derive_permutation(test_key(5), 0), std::invalid_argument);
}

TEST_CASE("inverse composes to identity") {
  const auto perm = derive_permutation(test_key(6), 48);
  const auto inv = inverse(perm);
  for (uint32_t i = 0; i < 48; ++i) {
    CHECK(perm.mapping[inv.mapping[i]] == i);
    CHECK(inv.mapping[perm.mapping[i]] == i);
  }
}

TEST_CASE("key_space matches the decimal factorial oracle") {
  CHECK(key_space(1).to_string() == "1");
  CHECK(key_space(12).to_string() == decimal_factorial(12));
  CHECK(key_space(12).to_string() == "479001600");

  const auto ks48 = key_space(48);
  CHECK(ks48.to_string() == decimal_factorial(48));
  CHECK(ks48.decimal_digits() == 62);
  CHECK(ks48.to_string() ==
        "12413915592536072670862289047373375038521486354677760000000000");

  CHECK_THROWS_AS(key_space(0), std::invalid_argument);
}

TEST_CASE("key file round-trips bit-exactly") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sg_key_test";
  fs::create_directories(dir);
  const fs::path path = dir / "k1.key";

  const SecretKey key = random_key("k1");
  save_key(key, path);
  const SecretKey loaded = load_key(path);
  CHECK(loaded == key);
  CHECK(loaded.label == "k1");

  const fs::path path2 = dir / "k2.key";
  save_key(loaded, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(a)), {});
  const std::string bytes_b((std::istreambuf_iterator<char>(b)), {});
  CHECK(bytes_a == bytes_b);
  CHECK(bytes_a == std::string(kKeyFileMagic) + "\n" + key_to_hex(key) + "\n");
  fs::remove_all(dir);
}

TEST_CASE("key file parsing rejects malformed input") {
  CHECK_THROWS_AS(key_from_hex("abc"), config_error);
  CHECK_THROWS_AS(key_from_hex(std::string(64, 'G')), config_error);
  // uppercase is rejected: the on-disk format is lowercase only
  std::string upper(64, 'A');
  CHECK_THROWS_AS(key_from_hex(upper), config_error);
  CHECK_NOTHROW(key_from_hex(std::string(64, 'a')));

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sg_key_bad";
  fs::create_directories(dir);
  const fs::path path = dir / "bad.key";
  std::ofstream(path) << "not-the-magic\n" << std::string(64, 'a') << "\n";
  CHECK_THROWS_AS(load_key(path), config_error);
  CHECK_THROWS_AS(load_key(dir / "missing.key"), config_error);
  fs::remove_all(dir);
}

TEST_CASE("key fingerprint is stable and distinct") {
  const auto k1 = test_key(10);
  const auto k2 = test_key(11);
  CHECK(key_fingerprint(k1) == key_fingerprint(k1));
  CHECK(key_fingerprint(k1) != key_fingerprint(k2));
  CHECK(key_fingerprint(k1).size() == 64);
}

TEST_CASE("shuffle with identity permutation is the identity") {
  const BlockGrid grid{.block = 4, .width = 8, .height = 8, .channels = 3};
  const auto img = random_byte_image(8, 8, 3, 20);
  const auto out =
      shuffle_with_permutation(img, identity_permutation(48), grid);
  CHECK(out.data == img.data);
}

TEST_CASE("reversal permutation on one 2x2x3 block") {
  // alpha(i) = 11 - i, so flat output slot i receives flat input value 11-i.
  const BlockGrid grid{.block = 2, .width = 2, .height = 2, .channels = 3};
  PermutationVector rev;
  for (int i = 0; i < 12; ++i) rev.mapping.push_back(uint32_t(11 - i));
  auto img = sgtest::counting_image(2, 2, 3);
  const auto out = shuffle_with_permutation(img, rev, grid);
  for (int i = 0; i < 12; ++i) {
    CHECK(out.data[size_t(i)] == uint32_t(11 - i));
  }
}

TEST_CASE("shuffle matches the naive per-index oracle") {
  for (const int m : {2, 4, 8, 16}) {
    const BlockGrid grid{.block = m, .width = 32, .height = 32, .channels = 3};
    const auto key = test_key(30 + uint64_t(m));
    const auto img = random_byte_image(32, 32, 3, 40 + uint64_t(m));
    const auto perm = derive_permutation(key, uint32_t(grid.pixels_per_block()));
    const auto fast = shuffle_image(img, key, grid);
    const auto slow = naive_shuffle(img, perm, m);
    CHECK(fast.data == slow.data);
  }
}

TEST_CASE("deshuffle inverts shuffle bit-exactly") {
  for (const int m : {2, 4, 8, 16}) {
    const BlockGrid grid{.block = m, .width = 32, .height = 32, .channels = 3};
    const auto key = test_key(50 + uint64_t(m));
    const auto img = random_byte_image(32, 32, 3, 60 + uint64_t(m));
    const auto round = deshuffle_image(shuffle_image(img, key, grid), key, grid);
    CHECK(round.data == img.data);
    // the other composition order is also the identity
    const auto round2 = shuffle_image(deshuffle_image(img, key, grid), key, grid);
    CHECK(round2.data == img.data);
  }
}

TEST_CASE("wrong key fails to invert") {
  const BlockGrid grid{.block = 4, .width = 4, .height = 4, .channels = 3};
  const auto k1 = test_key(70);
  const auto k2 = test_key(71);
  // all-distinct pixel values: any non-identity composed permutation moves one
  auto img = sgtest::counting_image(4, 4, 3);
  const auto wrong = deshuffle_with_permutation(
      shuffle_with_permutation(img, derive_permutation(k1, 48), grid),
      derive_permutation(k2, 48), grid);
  CHECK(wrong.data != img.data);
}

TEST_CASE("per-block value multisets are preserved") {
  const BlockGrid grid{.block = 4, .width = 8, .height = 8, .channels = 3};
  const auto key = test_key(80);
  const auto img = random_byte_image(8, 8, 3, 81);
  const auto out = shuffle_image(img, key, grid);
  for (int by = 0; by < 8; by += 4) {
    for (int bx = 0; bx < 8; bx += 4) {
      std::vector<uint8_t> before, after;
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          for (int ch = 0; ch < 3; ++ch) {
            before.push_back(img.at(by + r, bx + c, ch));
            after.push_back(out.at(by + r, bx + c, ch));
          }
        }
      }
      CHECK(sgtest::sorted(before) == sgtest::sorted(after));
    }
  }
}

TEST_CASE("pixels never cross block boundaries") {
  // blocks with disjoint value ranges: block (i,j) holds values in
  // [100*(2i+j), 100*(2i+j)+47]
  const BlockGrid grid{.block = 4, .width = 8, .height = 8, .channels = 3};
  ImageTensor<uint32_t> img(8, 8, 3);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        const int block_id = 2 * (r / 4) + (c / 4);
        img.at(r, c, ch) = uint32_t(100 * block_id) +
                           uint32_t(((r % 4) * 4 + (c % 4)) * 3 + ch);
      }
    }
  }
  const auto perm = derive_permutation(test_key(90), 48);
  const auto out = shuffle_with_permutation(img, perm, grid);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      const int block_id = 2 * (r / 4) + (c / 4);
      for (int ch = 0; ch < 3; ++ch) {
        CHECK(out.at(r, c, ch) / 100 == uint32_t(block_id));
      }
    }
  }
}

TEST_CASE("max-abs difference is invariant under a common shuffle") {
  const BlockGrid grid{.block = 4, .width = 32, .height = 32, .channels = 3};
  const auto key = test_key(100);
  FloatImage a(32, 32, 3), b(32, 32, 3);
  auto rng = ChaChaRng::from_seed(101, ChaChaRng::kSynthData, 0);
  for (size_t i = 0; i < a.data.size(); ++i) {
    a.data[i] = float(rng.uniform_real());
    b.data[i] = float(rng.uniform_real());
  }
  const auto sa = shuffle_image(a, key, grid);
  const auto sb = shuffle_image(b, key, grid);
  float before = 0, after = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    before = std::max(before, std::abs(a.data[i] - b.data[i]));
    after = std::max(after, std::abs(sa.data[i] - sb.data[i]));
  }
  CHECK(before == after);
}

TEST_CASE("shape or grid mismatch raises invalid_argument") {
  const BlockGrid grid{.block = 4, .width = 8, .height = 8, .channels = 3};
  const auto img = random_byte_image(4, 4, 3, 110);
  CHECK_THROWS_AS(shuffle_image(img, test_key(111), grid),
                  std::invalid_argument);
  // permutation length must match the block pixel count
  const auto good = random_byte_image(8, 8, 3, 112);
  CHECK_THROWS_AS(
      shuffle_with_permutation(good, identity_permutation(12), grid),
      std::invalid_argument);
}

TEST_CASE("padding policy keeps shape and stays deterministic") {
  // 10x7 does not divide by 4: reflect-pad to 12x8, shuffle, crop back.
  const BlockGrid grid{.block = 4, .width = 7, .height = 10, .channels = 3};
  const auto key = test_key(120);
  const auto img = random_byte_image(10, 7, 3, 121);
  const auto out = shuffle_image(img, key, grid);
  CHECK(out.height == 10);
  CHECK(out.width == 7);
  CHECK(out.channels == 3);
  const auto out2 = shuffle_image(img, key, grid);
  CHECK(out.data == out2.data);
  // every output value must come from the padded input's value set
  const auto padded = shuffleguard::detail::reflect_pad(img, grid);
  const auto allowed = sgtest::sorted(padded.data);
  for (const auto v : out.data) {
    CHECK(std::binary_search(allowed.begin(), allowed.end(), v));
  }
}
