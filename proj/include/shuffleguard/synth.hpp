#pragma once

#include <cstdint>
#include <filesystem>

#include "shuffleguard/cifar10.hpp"

namespace shuffleguard {

// Synthetic stand-in dataset in the exact CIFAR-10 binary layout, for
// environments where the real archive is unavailable. Ten classes of
// low-frequency striped color fields: five stripe directions, each at two
// opposing phases, with per-sample amplitude/phase/frequency jitter and pixel
// noise. Stripes are smooth at the 4-pixel scale, so block-mean structure
// survives small-block shuffling while large blocks destroy it, the same
// qualitative regime the defense is studied in.
//
// Deterministic in (seed, record index); labels cycle 0..9 so any prefix
// subset stays class-balanced.
void synth_record(uint64_t seed, int64_t index, uint8_t* record /* 3073 bytes */);

// Writes data_batch_1..5.bin and test_batch.bin (10,000 records each) into
// dir, creating it if needed.
void write_synthetic_cifar(const std::filesystem::path& dir, uint64_t seed);

}  // namespace shuffleguard
