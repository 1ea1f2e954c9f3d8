#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shuffleguard/image.hpp"
#include "shuffleguard/permutation.hpp"

namespace shuffleguard {

namespace detail {

// Image-buffer offset of each within-block flat index, relative to the
// block's top-left element. The flat order is row-major over (row, col)
// with channels fastest: i = (r*M + c)*C + ch.
inline std::vector<int64_t> block_offsets(int row_stride_elems, int block, int channels) {
  std::vector<int64_t> delta(size_t(block) * block * channels);
  size_t i = 0;
  for (int r = 0; r < block; ++r) {
    for (int c = 0; c < block; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        delta[i++] = int64_t(r) * row_stride_elems + int64_t(c) * channels + ch;
      }
    }
  }
  return delta;
}

// Mirror an out-of-range coordinate back into [0, size). Right/bottom
// reflect padding without repeating the edge sample (period 2*size - 2).
inline int reflect_index(int x, int size) {
  if (size == 1) return 0;
  const int period = 2 * size - 2;
  int m = x % period;
  if (m < 0) m += period;
  return m < size ? m : period - m;
}

}  // namespace detail

// Applies `perm` to every M x M x C block of a contiguous [H, W, C] buffer.
// Requires H and W divisible by M and dst != src.
// forward: dst[i] = src[perm(i)]   (per block)
// inverse: dst[perm(i)] = src[i]
template <typename T>
void transform_blocks_raw(T* dst, const T* src, int height, int width,
                          int channels, int block,
                          const PermutationVector& perm, bool forward) {
  const int row_stride = width * channels;
  const auto delta = detail::block_offsets(row_stride, block, channels);
  const int n = block * block * channels;
  for (int by = 0; by < height; by += block) {
    for (int bx = 0; bx < width; bx += block) {
      const int64_t origin = int64_t(by) * row_stride + int64_t(bx) * channels;
      if (forward) {
        for (int i = 0; i < n; ++i) {
          dst[origin + delta[i]] = src[origin + delta[perm.mapping[i]]];
        }
      } else {
        for (int i = 0; i < n; ++i) {
          dst[origin + delta[perm.mapping[i]]] = src[origin + delta[i]];
        }
      }
    }
  }
}

namespace detail {

template <typename T>
void check_shuffle_args(const ImageTensor<T>& img, const PermutationVector& perm,
                        const BlockGrid& grid) {
  grid.validate();
  if (img.height != grid.height || img.width != grid.width ||
      img.channels != grid.channels) {
    throw std::invalid_argument(
        "image shape " + std::to_string(img.height) + "x" +
        std::to_string(img.width) + "x" + std::to_string(img.channels) +
        " does not match grid " + std::to_string(grid.height) + "x" +
        std::to_string(grid.width) + "x" + std::to_string(grid.channels));
  }
  if (!img.shape_consistent()) {
    throw std::invalid_argument("image buffer length does not match its shape");
  }
  if (perm.n() != uint32_t(grid.pixels_per_block())) {
    throw std::invalid_argument(
        "permutation length " + std::to_string(perm.n()) +
        " does not match block pixel count " +
        std::to_string(grid.pixels_per_block()));
  }
}

// Reflect-pad on the right/bottom to the next block multiple.
template <typename T>
ImageTensor<T> reflect_pad(const ImageTensor<T>& img, const BlockGrid& grid) {
  ImageTensor<T> padded(grid.padded_height(), grid.padded_width(), img.channels,
                        img.domain);
  for (int r = 0; r < padded.height; ++r) {
    const int sr = reflect_index(r, img.height);
    for (int c = 0; c < padded.width; ++c) {
      const int sc = reflect_index(c, img.width);
      for (int ch = 0; ch < img.channels; ++ch) {
        padded.at(r, c, ch) = img.at(sr, sc, ch);
      }
    }
  }
  return padded;
}

template <typename T>
ImageTensor<T> crop_to(const ImageTensor<T>& img, int height, int width) {
  ImageTensor<T> out(height, width, img.channels, img.domain);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (int ch = 0; ch < img.channels; ++ch) {
        out.at(r, c, ch) = img.at(r, c, ch);
      }
    }
  }
  return out;
}

template <typename T>
ImageTensor<T> transform_image(const ImageTensor<T>& img,
                               const PermutationVector& perm,
                               const BlockGrid& grid, bool forward) {
  check_shuffle_args(img, perm, grid);
  if (!grid.needs_padding()) {
    ImageTensor<T> out(img.height, img.width, img.channels, img.domain);
    transform_blocks_raw(out.data.data(), img.data.data(), img.height,
                         img.width, img.channels, grid.block, perm, forward);
    return out;
  }
  // Pad, transform, crop back. Shape-preserving and deterministic; note that
  // pixels swapped into the cropped margin are not recoverable, so the
  // inverse is exact only for block-divisible shapes.
  const ImageTensor<T> padded = reflect_pad(img, grid);
  ImageTensor<T> out(padded.height, padded.width, padded.channels, img.domain);
  transform_blocks_raw(out.data.data(), padded.data.data(), padded.height,
                       padded.width, padded.channels, grid.block, perm, forward);
  return crop_to(out, img.height, img.width);
}

}  // namespace detail

// Permutation-level entry points; tests force specific permutations here.
template <typename T>
ImageTensor<T> shuffle_with_permutation(const ImageTensor<T>& img,
                                        const PermutationVector& perm,
                                        const BlockGrid& grid) {
  return detail::transform_image(img, perm, grid, /*forward=*/true);
}

template <typename T>
ImageTensor<T> deshuffle_with_permutation(const ImageTensor<T>& img,
                                          const PermutationVector& perm,
                                          const BlockGrid& grid) {
  return detail::transform_image(img, perm, grid, /*forward=*/false);
}

// Block-wise pixel shuffling with a secret key. One permutation is derived
// per (key, block pixel count) and shared by every block of every image.
template <typename T>
ImageTensor<T> shuffle_image(const ImageTensor<T>& img, const SecretKey& key,
                             const BlockGrid& grid) {
  const auto perm = derive_permutation(key, uint32_t(grid.pixels_per_block()));
  return shuffle_with_permutation(img, perm, grid);
}

template <typename T>
ImageTensor<T> deshuffle_image(const ImageTensor<T>& img, const SecretKey& key,
                               const BlockGrid& grid) {
  const auto perm = derive_permutation(key, uint32_t(grid.pixels_per_block()));
  return deshuffle_with_permutation(img, perm, grid);
}

}  // namespace shuffleguard
