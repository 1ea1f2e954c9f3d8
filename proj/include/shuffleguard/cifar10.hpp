#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "shuffleguard/errors.hpp"

namespace shuffleguard {

inline constexpr int kCifarSide = 32;
inline constexpr int kCifarChannels = 3;
inline constexpr int kCifarClasses = 10;
inline constexpr int kCifarPixelBytes = kCifarSide * kCifarSide * kCifarChannels;  // 3072
inline constexpr int kCifarRecordBytes = kCifarPixelBytes + 1;                     // label first
inline constexpr int kCifarRecordsPerFile = 10000;
inline constexpr int64_t kCifarFileBytes =
    static_cast<int64_t>(kCifarRecordBytes) * kCifarRecordsPerFile;  // 30,730,000

struct DatasetSplit {
  std::vector<uint8_t> images;  // N * 3072, H x W x C per record
  std::vector<uint8_t> labels;  // N, each in [0,9]
  std::string split;            // "train" or "test"

  int64_t size() const { return static_cast<int64_t>(labels.size()); }
  const uint8_t* image(int64_t i) const { return images.data() + i * kCifarPixelBytes; }
};

// Converts one channel-planar record body (R plane, G plane, B plane) to HWC.
void decode_record_pixels(const uint8_t* planar, uint8_t* hwc);
// Inverse of decode_record_pixels.
void encode_record_pixels(const uint8_t* hwc, uint8_t* planar);

// Reads the standard binary distribution: data_batch_1..5.bin plus
// test_batch.bin, each exactly 10,000 records of 3073 bytes.
std::pair<DatasetSplit, DatasetSplit> load_cifar10(const std::filesystem::path& dir);

}  // namespace shuffleguard
