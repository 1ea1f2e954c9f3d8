#include "shuffleguard/synth.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include "shuffleguard/chacha.hpp"

namespace shuffleguard {

namespace {

constexpr int kTileSide = 4;
constexpr int kTileValues = kTileSide * kTileSide * kCifarChannels;

// One signed 4x4x3 micro-pattern per class, tiled across the image. Each
// tile holds exactly half +1 and half -1, so every 4x4 block of every class
// carries the same balanced value multiset: statistics that survive an
// unknown within-block permutation (means, sorted values, moments) carry no
// class evidence, only the arrangement does. Crops shift the tiling
// cyclically and flips mirror it, both label-preserving.
std::array<std::array<int8_t, kTileValues>, kCifarClasses> make_class_tiles() {
  std::array<std::array<int8_t, kTileValues>, kCifarClasses> tiles{};
  for (int cls = 0; cls < kCifarClasses; ++cls) {
    auto& tile = tiles[static_cast<std::size_t>(cls)];
    for (int i = 0; i < kTileValues; ++i) tile[static_cast<std::size_t>(i)] = i < kTileValues / 2 ? 1 : -1;
    ChaChaRng rng = ChaChaRng::from_seed(0x5717e5u, ChaChaRng::kSynthData,
                                         static_cast<uint64_t>(1000 + cls));
    for (int i = kTileValues - 1; i > 0; --i) {
      const uint32_t j = rng.uniform_below(static_cast<uint32_t>(i + 1));
      std::swap(tile[static_cast<std::size_t>(i)], tile[j]);
    }
  }
  return tiles;
}

}  // namespace

void synth_record(uint64_t seed, int64_t index, uint8_t* record) {
  static const auto tiles = make_class_tiles();
  ChaChaRng rng = ChaChaRng::from_seed(seed, ChaChaRng::kSynthData,
                                       static_cast<uint64_t>(index));
  const int label = static_cast<int>(index % kCifarClasses);
  record[0] = static_cast<uint8_t>(label);
  const auto& tile = tiles[static_cast<std::size_t>(label)];

  // The pattern amplitude stays weaker than an 8/255 perturbation per pixel,
  // so a bounded white-box attack can overwrite the signal outright; clean
  // training still sees it clearly because it integrates over all 3072
  // values against a much smaller noise floor. The contrast sign is random
  // per image: the class is the pattern up to sign, so attacks that invert
  // per-pixel contrast (which transfer through any unknown permutation)
  // do not flip the class evidence.
  const double amp = 0.018 + 0.008 * rng.uniform_real();
  const double dc = 0.02 * (rng.uniform_real() - 0.5);
  const double sign = rng.uniform_real() < 0.5 ? -1.0 : 1.0;

  // Class-independent per-block brightness jitter, wider than the attack
  // budget: block-level aggregate statistics become a nuisance dimension the
  // model must ignore, so perturbing them within a smaller budget is inert.
  constexpr int kBlocksPerSide = kCifarSide / kTileSide;
  std::array<double, kBlocksPerSide * kBlocksPerSide> block_dc;
  for (auto& b : block_dc) b = 0.10 * (rng.uniform_real() - 0.5);

  uint8_t hwc[kCifarPixelBytes];
  for (int r = 0; r < kCifarSide; ++r) {
    for (int c = 0; c < kCifarSide; ++c) {
      const int base = ((r % kTileSide) * kTileSide + (c % kTileSide)) * kCifarChannels;
      const double bdc =
          block_dc[static_cast<std::size_t>((r / kTileSide) * kBlocksPerSide + c / kTileSide)];
      for (int ch = 0; ch < kCifarChannels; ++ch) {
        const double noise = 0.04 * (rng.uniform_real() - 0.5);
        double v = 0.5 + dc + bdc + sign * amp * tile[static_cast<std::size_t>(base + ch)] + noise;
        v = std::min(1.0, std::max(0.0, v));
        hwc[(r * kCifarSide + c) * kCifarChannels + ch] =
            static_cast<uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  encode_record_pixels(hwc, record + 1);
}

void write_synthetic_cifar(const std::filesystem::path& dir, uint64_t seed) {
  std::filesystem::create_directories(dir);
  const auto write_file = [&](const std::filesystem::path& path, int64_t first_index) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write dataset file " + path.string());
    std::vector<uint8_t> record(kCifarRecordBytes);
    for (int r = 0; r < kCifarRecordsPerFile; ++r) {
      synth_record(seed, first_index + r, record.data());
      out.write(reinterpret_cast<const char*>(record.data()), kCifarRecordBytes);
    }
    if (!out) throw std::runtime_error("short write on dataset file " + path.string());
  };
  for (int f = 0; f < 5; ++f) {
    write_file(dir / ("data_batch_" + std::to_string(f + 1) + ".bin"),
               static_cast<int64_t>(f) * kCifarRecordsPerFile);
  }
  write_file(dir / "test_batch.bin", static_cast<int64_t>(5) * kCifarRecordsPerFile);
}

}  // namespace shuffleguard
