#include "shuffleguard/cifar10.hpp"

#include <fstream>

namespace shuffleguard {

namespace {

constexpr int kPlane = kCifarSide * kCifarSide;

void load_file(const std::filesystem::path& path, DatasetSplit& out) {
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path, ec);
  if (ec) throw dataset_error("dataset file missing: " + path.string());
  if (static_cast<int64_t>(bytes) != kCifarFileBytes) {
    throw dataset_error("dataset file " + path.string() + " has " + std::to_string(bytes) +
                        " bytes, expected " + std::to_string(kCifarFileBytes));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dataset_error("dataset file unreadable: " + path.string());

  std::vector<uint8_t> record(kCifarRecordBytes);
  const int64_t base = out.size();
  out.labels.resize(static_cast<std::size_t>(base + kCifarRecordsPerFile));
  out.images.resize(static_cast<std::size_t>((base + kCifarRecordsPerFile) * kCifarPixelBytes));
  for (int r = 0; r < kCifarRecordsPerFile; ++r) {
    if (!in.read(reinterpret_cast<char*>(record.data()), kCifarRecordBytes)) {
      throw dataset_error("dataset file " + path.string() + " truncated at record " +
                          std::to_string(r));
    }
    const uint8_t label = record[0];
    if (label >= kCifarClasses) {
      throw dataset_error("dataset file " + path.string() + " record " + std::to_string(r) +
                          " has label " + std::to_string(label) + ", expected 0..9");
    }
    out.labels[static_cast<std::size_t>(base + r)] = label;
    decode_record_pixels(record.data() + 1,
                         out.images.data() + (base + r) * kCifarPixelBytes);
  }
}

}  // namespace

void decode_record_pixels(const uint8_t* planar, uint8_t* hwc) {
  for (int c = 0; c < kCifarChannels; ++c) {
    const uint8_t* plane = planar + c * kPlane;
    for (int p = 0; p < kPlane; ++p) hwc[p * kCifarChannels + c] = plane[p];
  }
}

void encode_record_pixels(const uint8_t* hwc, uint8_t* planar) {
  for (int c = 0; c < kCifarChannels; ++c) {
    uint8_t* plane = planar + c * kPlane;
    for (int p = 0; p < kPlane; ++p) plane[p] = hwc[p * kCifarChannels + c];
  }
}

std::pair<DatasetSplit, DatasetSplit> load_cifar10(const std::filesystem::path& dir) {
  DatasetSplit train;
  train.split = "train";
  for (int f = 1; f <= 5; ++f) {
    load_file(dir / ("data_batch_" + std::to_string(f) + ".bin"), train);
  }
  DatasetSplit test;
  test.split = "test";
  load_file(dir / "test_batch.bin", test);
  return {std::move(train), std::move(test)};
}

}  // namespace shuffleguard
