#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shuffleguard/checkpoint.hpp"
#include "shuffleguard/cifar10.hpp"
#include "shuffleguard/key.hpp"
#include "shuffleguard/manifest.hpp"
#include "shuffleguard/model.hpp"
#include "shuffleguard/permutation.hpp"
#include "shuffleguard/report.hpp"

namespace shuffleguard {

struct EpochLog {
  int64_t epoch = 0;
  float lr = 0.0f;
  double train_acc = 0.0;
  double test_acc = 0.0;
};

struct TrainOutput {
  Checkpoint<float> checkpoint;
  std::vector<EpochLog> log;
};

// Fraction of matching entries; sizes must agree.
double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

// Deterministic "wrong" key for adaptive attacks without the real key:
// derived from the seed, guaranteed to differ from the true key.
SecretKey wrong_guess_key(const SecretKey& true_key, uint64_t seed);

// Accuracy of the inference pipeline predict(model, shuffle(x, perm)) over
// the first `subset` images of a split; perm == nullptr skips the defense.
double clean_accuracy(Model<float>& model, const DatasetSplit& split, int64_t subset,
                      const PermutationVector* perm, int block, int64_t batch_size);

// Full training run driven by a manifest. The key is required exactly when
// the manifest is defended; `progress`, when given, receives one line per
// epoch. Deterministic: a manifest and seed fix the whole trajectory.
TrainOutput train_model(const ExperimentManifest& m, const SecretKey* key,
                        const DatasetSplit& train_split, const DatasetSplit& test_split,
                        std::ostream* progress);

// A loaded checkpoint ready to evaluate: rebuilt model plus the true-key
// permutation when the checkpoint was trained defended.
struct EvalContext {
  Model<float> model;
  CheckpointMeta meta;
  std::optional<SecretKey> true_key;
  PermutationVector perm;  // empty when undefended
};

// Verifies the key against the checkpoint metadata (fingerprint and block
// grid are part of the checkpoint); mismatches are config errors.
EvalContext make_eval_context(const Checkpoint<float>& ck, const SecretKey* key);

// One report row: clean accuracy and accuracy under the given attack on the
// first `subset` test images, both measured through the true-key pipeline.
// When `explicit_guess` is given it is the attacker's key: bpda attacks
// through it, and spec.key_match is ignored in favor of comparing it against
// the true key. fgsm/pgd accept it only when it IS the true key.
EvalRow evaluate_condition(EvalContext& ctx, const DatasetSplit& test, int64_t subset,
                           const AttackSpec& spec, uint64_t seed,
                           const SecretKey* explicit_guess = nullptr);

// One evaluate_condition row per epsilon, sorted ascending by epsilon.
AccuracyReport sweep(EvalContext& ctx, const DatasetSplit& test, int64_t subset,
                     const std::vector<double>& epsilons, AttackSpec condition, uint64_t seed);

// Trains one model per block size and evaluates it clean and attacked;
// emits two rows per M, named like "M4_clean" and "M4_pgd20".
AccuracyReport ablate_block_size(const ExperimentManifest& base, const std::vector<int>& blocks,
                                 const SecretKey& key, const DatasetSplit& train_split,
                                 const DatasetSplit& test_split, const AttackSpec& attack,
                                 std::ostream* progress);

}  // namespace shuffleguard
