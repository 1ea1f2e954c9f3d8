#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "shuffleguard/augment.hpp"
#include "shuffleguard/cifar10.hpp"
#include "shuffleguard/image.hpp"
#include "shuffleguard/permutation.hpp"
#include "shuffleguard/shuffle.hpp"
#include "shuffleguard/tensor.hpp"

namespace shuffleguard {

// Whether the keyed shuffle runs before augmentation or after scaling (the
// default, matching the training pipeline: augment, then /255, then shuffle).
enum class TransformStage { kPre, kPost };

struct BatchOptions {
  bool augment = false;                      // train split only
  TransformStage stage = TransformStage::kPost;
  const PermutationVector* perm = nullptr;   // null disables the defense stage
  int block = 4;                             // block side M for perm
  uint64_t seed = 0;                         // experiment seed for augment draws
  uint64_t epoch = 0;
};

// Returns ([B,32,32,3] float batch in [0,1], labels). Augmentation draws are
// seeded per (seed, epoch, dataset index), so batch composition and order do
// not change a sample's augmentation.
inline std::pair<Tensor<float>, std::vector<int>> prepare_batch(
    const DatasetSplit& split, const std::vector<int64_t>& indices, const BatchOptions& opt) {
  if (opt.perm != nullptr) {
    const int64_t need = static_cast<int64_t>(opt.block) * opt.block * kCifarChannels;
    if (opt.block <= 0 || kCifarSide % opt.block != 0 ||
        static_cast<int64_t>(opt.perm->mapping.size()) != need) {
      throw std::invalid_argument("prepare_batch: permutation of length " +
                                  std::to_string(opt.perm->mapping.size()) +
                                  " does not fit block " + std::to_string(opt.block));
    }
  }
  const int64_t b = static_cast<int64_t>(indices.size());
  Tensor<float> batch({b, kCifarSide, kCifarSide, kCifarChannels});
  std::vector<int> labels(static_cast<std::size_t>(b));

  std::vector<uint8_t> bytes(kCifarPixelBytes);
  std::vector<uint8_t> scratch(kCifarPixelBytes);
  std::vector<float> shuffled(kCifarPixelBytes);
  for (int64_t i = 0; i < b; ++i) {
    const int64_t idx = indices[static_cast<std::size_t>(i)];
    if (idx < 0 || idx >= split.size()) {
      throw std::out_of_range("prepare_batch: index " + std::to_string(idx) +
                              " outside split of " + std::to_string(split.size()));
    }
    labels[static_cast<std::size_t>(i)] = split.labels[static_cast<std::size_t>(idx)];
    const uint8_t* src = split.image(idx);

    if (opt.perm != nullptr && opt.stage == TransformStage::kPre) {
      transform_blocks_raw(scratch.data(), src, kCifarSide, kCifarSide, kCifarChannels,
                           opt.block, *opt.perm, true);
      src = scratch.data();
    }
    if (opt.augment) {
      ChaChaRng rng = ChaChaRng::from_seed(
          opt.seed, ChaChaRng::kAugment,
          (opt.epoch << 32) | static_cast<uint64_t>(idx));
      augment(src, bytes.data(), rng);
      src = bytes.data();
    }

    float* dst = batch.data.data() + i * kCifarPixelBytes;
    if (opt.perm != nullptr && opt.stage == TransformStage::kPost) {
      for (int p = 0; p < kCifarPixelBytes; ++p) shuffled[static_cast<std::size_t>(p)] = static_cast<float>(src[p]) / 255.0f;
      transform_blocks_raw(dst, shuffled.data(), kCifarSide, kCifarSide, kCifarChannels,
                           opt.block, *opt.perm, true);
    } else {
      for (int p = 0; p < kCifarPixelBytes; ++p) dst[p] = static_cast<float>(src[p]) / 255.0f;
    }
  }
  return {std::move(batch), std::move(labels)};
}

}  // namespace shuffleguard
