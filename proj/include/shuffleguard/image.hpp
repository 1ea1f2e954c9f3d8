#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace shuffleguard {

// Value domain an image declares: 8-bit [0,255] or unit-interval [0,1].
enum class Domain { kByte, kUnit };

// Dense H x W x C pixel array, row-major with channels fastest.
template <typename T>
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  Domain domain = std::is_integral_v<T> ? Domain::kByte : Domain::kUnit;
  std::vector<T> data;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c,
              Domain d = std::is_integral_v<T> ? Domain::kByte : Domain::kUnit)
      : height(h), width(w), channels(c), domain(d),
        data(size_t(h) * size_t(w) * size_t(c)) {}

  size_t size() const { return data.size(); }

  T& at(int r, int c, int ch) {
    return data[(size_t(r) * width + c) * channels + ch];
  }
  const T& at(int r, int c, int ch) const {
    return data[(size_t(r) * width + c) * channels + ch];
  }

  bool shape_consistent() const {
    return data.size() == size_t(height) * size_t(width) * size_t(channels);
  }

  bool domain_valid() const {
    for (const T v : data) {
      if (domain == Domain::kByte) {
        if (double(v) < 0.0 || double(v) > 255.0) return false;
      } else {
        if (double(v) < 0.0 || double(v) > 1.0) return false;
      }
    }
    return true;
  }
};

using ByteImage = ImageTensor<uint8_t>;
using FloatImage = ImageTensor<float>;

// Block geometry for the transform: M x M x C blocks tiling an X x Y image.
// Sizes that do not divide evenly are handled by the padding policy in
// shuffle.hpp.
struct BlockGrid {
  int block = 4;     // M, block side in pixels
  int width = 32;    // X
  int height = 32;   // Y
  int channels = 3;  // C

  int pixels_per_block() const { return block * block * channels; }
  int padded_width() const { return ((width + block - 1) / block) * block; }
  int padded_height() const { return ((height + block - 1) / block) * block; }
  bool needs_padding() const {
    return padded_width() != width || padded_height() != height;
  }

  void validate() const {
    if (block < 1 || width < 1 || height < 1 || channels < 1) {
      throw std::invalid_argument(
          "BlockGrid: all dimensions must be positive (block=" +
          std::to_string(block) + ", " + std::to_string(width) + "x" +
          std::to_string(height) + "x" + std::to_string(channels) + ")");
    }
  }
};

}  // namespace shuffleguard
