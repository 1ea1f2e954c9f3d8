#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shuffleguard/attack.hpp"
#include "shuffleguard/batch.hpp"
#include "shuffleguard/errors.hpp"
#include "shuffleguard/optimizer.hpp"

namespace shuffleguard {

// One evaluation condition from a manifest's attack matrix.
struct AttackSpec {
  std::string kind = "pgd";  // none | fgsm | pgd | bpda
  double epsilon = 8.0 / 255.0;
  int iterations = 20;
  double step_size = 2.0 / 255.0;
  bool random_init = false;
  bool key_match = false;  // bpda only: attacker holds the true key
  BpdaBackward backward = BpdaBackward::kIdentity;

  // Compact condition label for reports, e.g. "pgd20", "bpda40r_wrongkey".
  std::string name() const;

  bool operator==(const AttackSpec& other) const = default;
};

// Everything a training or evaluation run depends on. Parsed from a
// key=value file ('#' starts a comment, 'attack' lines may repeat to form
// the attack matrix); the canonical serialization below is what gets
// hashed into reports for provenance.
struct ExperimentManifest {
  std::string variant = "desk_small";
  int64_t epochs = 30;
  int64_t batch_size = 128;
  uint64_t seed = 1;
  std::string data_dir;
  std::string key_file;  // required when defended
  bool defended = false;
  int block = 4;
  TransformStage stage = TransformStage::kPost;
  bool augment = true;
  int64_t train_subset = 5000;
  int64_t test_subset = 1000;
  SgdConfig<float> sgd;  // lr 0.1, momentum 0.9, wd 5e-4, step 40, gamma 0.1
  std::vector<AttackSpec> attacks;
};

// Prints epsilon the way manifests write it: "k/255" when exact, else a
// full-precision decimal.
std::string pixel_fraction_text(double value);

ExperimentManifest parse_manifest(const std::string& text);
ExperimentManifest load_manifest(const std::filesystem::path& path);

// Field validation plus, when check_files is set, existence of the key file
// and data directory. Throws config_error.
void validate_manifest(const ExperimentManifest& m, bool check_files);

// Canonical key=value form: fixed key order, full-precision numbers.
// parse_manifest(canonical_manifest(m)) == m for any valid manifest.
std::string canonical_manifest(const ExperimentManifest& m);

// SHA-256 of the canonical form; identical manifests hash identically
// regardless of comments or key order in the source file.
std::string manifest_hash(const ExperimentManifest& m);

}  // namespace shuffleguard
