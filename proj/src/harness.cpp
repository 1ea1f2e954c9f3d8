#include "shuffleguard/harness.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "shuffleguard/attack.hpp"
#include "shuffleguard/batch.hpp"
#include "shuffleguard/graph.hpp"
#include "shuffleguard/ops.hpp"
#include "shuffleguard/optimizer.hpp"

namespace shuffleguard {

namespace {

constexpr int64_t kEvalBatch = 100;

std::vector<int64_t> iota_indices(int64_t from, int64_t to) {
  std::vector<int64_t> idx(static_cast<std::size_t>(to - from));
  for (int64_t i = from; i < to; ++i) idx[static_cast<std::size_t>(i - from)] = i;
  return idx;
}

// In-place Fisher-Yates on the index vector; written out so the shuffle does
// not depend on any standard-library distribution implementation.
void shuffle_indices(std::vector<int64_t>& idx, ChaChaRng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const uint64_t j = rng.uniform_below(i);
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(j)]);
  }
}

void require_subset(const DatasetSplit& split, int64_t subset, const char* what) {
  if (subset < 1 || subset > split.size()) {
    throw config_error(std::string(what) + " subset of " + std::to_string(subset) +
                       " does not fit split of " + std::to_string(split.size()));
  }
}

}  // namespace

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) {
    throw std::logic_error("accuracy: " + std::to_string(predictions.size()) +
                           " predictions for " + std::to_string(labels.size()) + " labels");
  }
  if (predictions.empty()) return 0.0;
  int64_t hit = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == labels[i]) ++hit;
  return static_cast<double>(hit) / static_cast<double>(predictions.size());
}

SecretKey wrong_guess_key(const SecretKey& true_key, uint64_t seed) {
  uint64_t s = seed ^ 0x77726f6e676b6579ull;
  SecretKey k = key_from_seed(s, "wrong-guess");
  while (k == true_key) k = key_from_seed(++s, "wrong-guess");
  return k;
}

double clean_accuracy(Model<float>& model, const DatasetSplit& split, int64_t subset,
                      const PermutationVector* perm, int block, int64_t batch_size) {
  require_subset(split, subset, "evaluation");
  BatchOptions opt;
  opt.perm = perm;
  opt.block = block;
  int64_t hit = 0;
  for (int64_t start = 0; start < subset; start += batch_size) {
    const int64_t stop = std::min(subset, start + batch_size);
    auto [x, y] = prepare_batch(split, iota_indices(start, stop), opt);
    const std::vector<int> pred = predict(model, x);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (pred[i] == y[i]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(subset);
}

TrainOutput train_model(const ExperimentManifest& m, const SecretKey* key,
                        const DatasetSplit& train_split, const DatasetSplit& test_split,
                        std::ostream* progress) {
  validate_manifest(m, false);
  if (m.defended && key == nullptr) throw config_error("defended training needs the secret key");
  require_subset(train_split, m.train_subset, "training");
  require_subset(test_split, m.test_subset, "evaluation");

  PermutationVector perm;
  if (m.defended) {
    perm = derive_permutation(*key, static_cast<uint32_t>(m.block * m.block * kCifarChannels));
  }
  const PermutationVector* permp = m.defended ? &perm : nullptr;

  Model<float> model = build_model<float>(ArchitectureConfig::named(m.variant), m.seed);
  SgdOptimizer<float> opt(m.sgd);

  TrainOutput out;
  std::vector<int64_t> order = iota_indices(0, m.train_subset);
  for (int64_t epoch = 0; epoch < m.epochs; ++epoch) {
    ChaChaRng rng =
        ChaChaRng::from_seed(m.seed, ChaChaRng::kEpochShuffle, static_cast<uint64_t>(epoch));
    shuffle_indices(order, rng);
    const float lr = opt.learning_rate(epoch);

    int64_t hit = 0, seen = 0;
    for (int64_t start = 0; start < m.train_subset; start += m.batch_size) {
      const int64_t stop = std::min(m.train_subset, start + m.batch_size);
      if (stop - start < 2) break;  // batch norm needs more than one row
      const std::vector<int64_t> idx(order.begin() + start, order.begin() + stop);

      BatchOptions bo;
      bo.augment = m.augment;
      bo.stage = m.stage;
      bo.perm = permp;
      bo.block = m.block;
      bo.seed = m.seed;
      bo.epoch = static_cast<uint64_t>(epoch);
      auto [x, y] = prepare_batch(train_split, idx, bo);

      Graph<float> g;
      ModelForward<float> fwd = forward_model(model, g, g.input(x), true);
      g.backward(softmax_cross_entropy(fwd.logits, y, Reduction::kMean));

      std::vector<Tensor<float>> grads;
      grads.reserve(fwd.param_vars.size());
      for (const auto& pv : fwd.param_vars) grads.push_back(pv.grad());
      opt.step(model.params, grads, lr);

      const Tensor<float>& logits = fwd.logits.value();
      const int64_t classes = logits.dim(1);
      for (int64_t i = 0; i < stop - start; ++i) {
        if (argmax_row(logits.data.data() + i * classes, classes) ==
            y[static_cast<std::size_t>(i)])
          ++hit;
      }
      seen += stop - start;
    }

    EpochLog log;
    log.epoch = epoch + 1;  // 1-based, matching the progress lines
    log.lr = lr;
    log.train_acc = seen > 0 ? static_cast<double>(hit) / static_cast<double>(seen) : 0.0;
    log.test_acc =
        clean_accuracy(model, test_split, m.test_subset, permp, m.block, m.batch_size);
    out.log.push_back(log);
    if (progress != nullptr) {
      (*progress) << "epoch " << (epoch + 1) << "/" << m.epochs << "  lr " << lr << "  train "
                  << log.train_acc << "  test " << log.test_acc << "\n";
    }
  }

  CheckpointMeta meta;
  meta.variant = m.variant;
  meta.seed = m.seed;
  meta.epoch = m.epochs;
  meta.defended = m.defended;
  meta.block = m.block;
  meta.stage = m.stage;
  if (m.defended) meta.key_fingerprint = key_fingerprint(*key);
  out.checkpoint = make_checkpoint(model, &opt, meta);
  return out;
}

EvalContext make_eval_context(const Checkpoint<float>& ck, const SecretKey* key) {
  EvalContext ctx{model_from_checkpoint(ck), ck.meta, std::nullopt, {}};
  if (ck.meta.defended) {
    if (key == nullptr) throw config_error("checkpoint was trained defended; the key is required");
    if (key_fingerprint(*key) != ck.meta.key_fingerprint) {
      throw config_error("key fingerprint does not match the checkpoint's training key");
    }
    ctx.true_key = *key;
    ctx.perm = derive_permutation(
        *key, static_cast<uint32_t>(ck.meta.block * ck.meta.block * kCifarChannels));
  }
  return ctx;
}

EvalRow evaluate_condition(EvalContext& ctx, const DatasetSplit& test, int64_t subset,
                           const AttackSpec& spec, uint64_t seed,
                           const SecretKey* explicit_guess) {
  require_subset(test, subset, "evaluation");
  const bool defended = ctx.meta.defended;
  const PermutationVector* permp = defended ? &ctx.perm : nullptr;
  const int block = static_cast<int>(ctx.meta.block);

  std::optional<SecretKey> guess;
  bool key_match = spec.key_match;
  if (explicit_guess != nullptr && spec.kind != "none") {
    key_match = ctx.true_key.has_value() && *explicit_guess == *ctx.true_key;
    if (spec.kind == "bpda") {
      guess = *explicit_guess;
    } else if (!key_match) {
      throw config_error(
          "fgsm/pgd attack through the deployed transform and need the true key; "
          "use the bpda attack for a guessed key");
    }
  } else if (spec.kind == "bpda") {
    if (spec.key_match) {
      if (!ctx.true_key)
        throw config_error("bpda with key_match needs a defended checkpoint and its key");
      guess = *ctx.true_key;
    } else {
      guess = ctx.true_key ? wrong_guess_key(*ctx.true_key, seed)
                           : key_from_seed(seed ^ 0x77726f6e676b6579ull, "wrong-guess");
    }
  }

  int64_t clean_hit = 0, adv_hit = 0;
  for (int64_t start = 0; start < subset; start += kEvalBatch) {
    const int64_t stop = std::min(subset, start + kEvalBatch);
    BatchOptions plain;  // attacker-side view: no defense applied
    auto [x, y] = prepare_batch(test, iota_indices(start, stop), plain);

    const std::vector<int> clean_pred = detail::predict_through(ctx.model, x, permp, block);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (clean_pred[i] == y[i]) ++clean_hit;

    Tensor<float> adv = x;
    if (spec.kind != "none") {
      AttackConfig cfg;
      cfg.epsilon = spec.epsilon;
      cfg.step_size = spec.step_size;
      cfg.iterations = spec.iterations;
      cfg.random_init = spec.random_init;
      cfg.bpda_backward = spec.backward;
      cfg.block = block;
      cfg.seed = seed;
      cfg.sample_index_base = start;

      if (spec.kind == "fgsm") {
        // white-box through the true transform when the attacker holds the key
        const PermutationVector* tr = (defended && key_match) ? permp : nullptr;
        adv = fgsm(ctx.model, x, y, spec.epsilon, tr).adv_images;
      } else if (spec.kind == "pgd") {
        const PermutationVector* tr = (defended && key_match) ? permp : nullptr;
        adv = pgd(ctx.model, x, y, cfg, tr).adv_images;
      } else if (spec.kind == "bpda") {
        cfg.guessed_key = &*guess;
        adv = bpda_attack(ctx.model, x, y, cfg).adv_images;
      } else {
        throw config_error("unknown attack kind '" + spec.kind + "'");
      }
    }

    const std::vector<int> adv_pred = detail::predict_through(ctx.model, adv, permp, block);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (adv_pred[i] == y[i]) ++adv_hit;
  }

  EvalRow row;
  AttackSpec named = spec;  // name reflects the resolved attacker knowledge
  named.key_match = key_match;
  row.condition = named.name();
  row.epsilon = spec.kind == "none" ? 0.0 : spec.epsilon;
  row.iterations = spec.kind == "none" ? 0 : spec.iterations;
  row.random_init = spec.kind == "none" ? false : spec.random_init;
  // none: vacuous. bpda: attacker knowledge as resolved. fgsm/pgd: white-box
  // unless a defended model was attacked without the key.
  row.key_match = spec.kind == "bpda"   ? key_match
                  : spec.kind == "none" ? true
                                        : (!defended || key_match);
  row.sample_count = subset;
  row.clean_acc = static_cast<double>(clean_hit) / static_cast<double>(subset);
  row.attacked_acc = static_cast<double>(adv_hit) / static_cast<double>(subset);
  return row;
}

AccuracyReport sweep(EvalContext& ctx, const DatasetSplit& test, int64_t subset,
                     const std::vector<double>& epsilons, AttackSpec condition, uint64_t seed) {
  if (epsilons.empty()) throw config_error("sweep needs at least one epsilon");
  std::vector<double> eps = epsilons;
  std::sort(eps.begin(), eps.end());
  AccuracyReport report;
  report.seed = seed;
  for (const double e : eps) {
    condition.epsilon = e;
    report.rows.push_back(evaluate_condition(ctx, test, subset, condition, seed));
    report.rows.back().epsilon = e;  // keep the row at its sweep position even for ε=0
  }
  return report;
}

AccuracyReport ablate_block_size(const ExperimentManifest& base, const std::vector<int>& blocks,
                                 const SecretKey& key, const DatasetSplit& train_split,
                                 const DatasetSplit& test_split, const AttackSpec& attack,
                                 std::ostream* progress) {
  if (blocks.empty()) throw config_error("ablation needs at least one block size");
  AccuracyReport report;
  report.seed = base.seed;
  for (const int m_block : blocks) {
    ExperimentManifest m = base;
    m.defended = true;
    m.block = m_block;
    if (m.key_file.empty()) m.key_file = "<in-memory>";
    validate_manifest(m, false);
    if (progress != nullptr)
      (*progress) << "ablation: training block size " << m_block << "\n";
    TrainOutput trained = train_model(m, &key, train_split, test_split, progress);
    EvalContext ctx = make_eval_context(trained.checkpoint, &key);

    const std::string tag = "M" + std::to_string(m_block) + "_";
    EvalRow clean = evaluate_condition(ctx, test_split, m.test_subset, AttackSpec{"none"}, m.seed);
    clean.condition = tag + "clean";
    report.rows.push_back(clean);

    EvalRow attacked = evaluate_condition(ctx, test_split, m.test_subset, attack, m.seed);
    attacked.condition = tag + attacked.condition;
    report.rows.push_back(attacked);
  }
  return report;
}

}  // namespace shuffleguard
