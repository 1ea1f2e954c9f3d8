#pragma once

// Shared test oracles and fixtures. Everything here is deliberately written
// as a second, independent route: naive loops and textbook formulas rather
// than calls into the code paths under test.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shuffleguard/chacha.hpp"
#include "shuffleguard/image.hpp"
#include "shuffleguard/permutation.hpp"
#include "shuffleguard/synth.hpp"

namespace sgtest {

using shuffleguard::BlockGrid;
using shuffleguard::ByteImage;
using shuffleguard::ChaChaRng;
using shuffleguard::ImageTensor;
using shuffleguard::PermutationVector;

// Brute-force per-index block shuffle: decodes every flat index back into
// (row, col, channel) arithmetic instead of using precomputed offsets.
// Only valid for block-divisible shapes.
template <typename T>
ImageTensor<T> naive_shuffle(const ImageTensor<T>& img,
                             const PermutationVector& perm, int block) {
  ImageTensor<T> out = img;
  const int channels = img.channels;
  const int n = block * block * channels;
  for (int by = 0; by + block <= img.height; by += block) {
    for (int bx = 0; bx + block <= img.width; bx += block) {
      for (int i = 0; i < n; ++i) {
        const int a = int(perm.mapping[i]);
        const int ch_o = i % channels;
        const int c_o = (i / channels) % block;
        const int r_o = i / (channels * block);
        const int ch_a = a % channels;
        const int c_a = (a / channels) % block;
        const int r_a = a / (channels * block);
        out.at(by + r_o, bx + c_o, ch_o) = img.at(by + r_a, bx + c_a, ch_a);
      }
    }
  }
  return out;
}

inline ByteImage random_byte_image(int h, int w, int c, uint64_t seed) {
  ByteImage img(h, w, c);
  auto rng = ChaChaRng::from_seed(seed, ChaChaRng::kSynthData, 999);
  for (auto& v : img.data) v = uint8_t(rng.uniform_below(256));
  return img;
}

// Image whose pixel values are all distinct (value = flat index), so any
// non-identity permutation visibly moves something.
inline ImageTensor<uint32_t> counting_image(int h, int w, int c) {
  ImageTensor<uint32_t> img(h, w, c);
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = uint32_t(i);
  return img;
}

// Sorted copy, for multiset comparisons.
template <typename T>
std::vector<T> sorted(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Synthetic dataset shared by data-pipeline tests and the acceptance gate.
// Generated once per machine into the temp directory and reused. The "g2"
// marks the generator revision: the size check below cannot tell revisions
// apart, so the cache path must.
inline std::filesystem::path ensure_synth_dataset(uint64_t seed = 20260822) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("sg_synth_g6_" + std::to_string(seed));
  const char* names[6] = {"data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin",
                          "data_batch_4.bin", "data_batch_5.bin", "test_batch.bin"};
  bool complete = true;
  for (const char* name : names) {
    std::error_code ec;
    if (fs::file_size(dir / name, ec) != uint64_t(shuffleguard::kCifarFileBytes) || ec) {
      complete = false;
      break;
    }
  }
  if (!complete) shuffleguard::write_synthetic_cifar(dir, seed);
  return dir;
}

}  // namespace sgtest
