#include <sstream>

#include "doctest.h"
#include "shuffleguard/harness.hpp"
#include "support.hpp"

using namespace shuffleguard;

namespace {

const std::pair<DatasetSplit, DatasetSplit>& data() {
  static const auto splits = load_cifar10(sgtest::ensure_synth_dataset());
  return splits;
}

ExperimentManifest tiny_manifest() {
  ExperimentManifest m;
  m.epochs = 3;
  m.batch_size = 64;
  m.seed = 404;
  m.augment = false;
  m.train_subset = 512;
  m.test_subset = 100;
  return m;
}

// One short undefended training shared by the evaluation tests.
const TrainOutput& trained() {
  static const TrainOutput out =
      train_model(tiny_manifest(), nullptr, data().first, data().second, nullptr);
  return out;
}

}  // namespace

TEST_CASE("accuracy matches a constant-predictor stub") {
  // 4 of 10 labels are class 3; always answering 3 scores 0.40
  const std::vector<int> labels = {3, 1, 3, 0, 7, 3, 2, 3, 9, 5};
  const std::vector<int> preds(10, 3);
  CHECK(accuracy(preds, labels) == 0.40);
  CHECK(accuracy({}, {}) == 0.0);
  CHECK_THROWS_AS(accuracy({1, 2}, {1}), std::logic_error);
}

TEST_CASE("wrong-key guesses are deterministic and never the true key") {
  const SecretKey truth = key_from_seed(9);
  const SecretKey a = wrong_guess_key(truth, 7);
  const SecretKey b = wrong_guess_key(truth, 7);
  const SecretKey c = wrong_guess_key(truth, 8);
  CHECK(a == b);
  CHECK_FALSE(a == truth);
  CHECK_FALSE(a == c);
}

TEST_CASE("fifty-image run overfits to perfect training accuracy") {
  ExperimentManifest m = tiny_manifest();
  m.train_subset = 50;
  m.test_subset = 50;
  m.epochs = 50;
  m.batch_size = 128;  // single batch of 50
  const TrainOutput out = train_model(m, nullptr, data().first, data().second, nullptr);
  REQUIRE(out.log.size() == 50);
  CHECK(out.log.back().train_acc == 1.0);
  CHECK(out.log[40].lr < out.log[0].lr);  // scheduler stepped at epoch 40
  CHECK(out.checkpoint.meta.epoch == 50);
  CHECK_FALSE(out.checkpoint.meta.defended);
  CHECK(out.checkpoint.velocity.size() == out.checkpoint.params.size());
}

TEST_CASE("training is deterministic in the manifest and seed") {
  const ExperimentManifest m = tiny_manifest();
  const TrainOutput a = train_model(m, nullptr, data().first, data().second, nullptr);
  const TrainOutput b = train_model(m, nullptr, data().first, data().second, nullptr);
  CHECK(serialize_checkpoint(a.checkpoint) == serialize_checkpoint(b.checkpoint));
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].train_acc == b.log[i].train_acc);
    CHECK(a.log[i].test_acc == b.log[i].test_acc);
  }

  ExperimentManifest other = m;
  other.seed = 405;
  const TrainOutput c = train_model(other, nullptr, data().first, data().second, nullptr);
  CHECK(serialize_checkpoint(a.checkpoint) != serialize_checkpoint(c.checkpoint));
}

TEST_CASE("defended training stamps the defense into the checkpoint") {
  ExperimentManifest m = tiny_manifest();
  m.epochs = 2;
  m.train_subset = 128;
  m.defended = true;
  m.key_file = "<in-memory>";
  const SecretKey key = key_from_seed(31);

  std::ostringstream progress;
  const TrainOutput out = train_model(m, &key, data().first, data().second, &progress);
  CHECK(out.checkpoint.meta.defended);
  CHECK(out.checkpoint.meta.block == 4);
  CHECK(out.checkpoint.meta.key_fingerprint == key_fingerprint(key));
  CHECK(progress.str().find("epoch 1/2") != std::string::npos);

  CHECK_THROWS_AS(train_model(m, nullptr, data().first, data().second, nullptr), config_error);
}

TEST_CASE("eval context checks the key against checkpoint metadata") {
  ExperimentManifest m = tiny_manifest();
  m.epochs = 1;
  m.train_subset = 128;
  m.defended = true;
  m.key_file = "<in-memory>";
  const SecretKey key = key_from_seed(31);
  const TrainOutput out = train_model(m, &key, data().first, data().second, nullptr);

  EvalContext ctx = make_eval_context(out.checkpoint, &key);
  CHECK(ctx.perm.n() == 48);
  REQUIRE(ctx.true_key.has_value());

  CHECK_THROWS_AS(make_eval_context(out.checkpoint, nullptr), config_error);
  const SecretKey wrong = key_from_seed(32);
  CHECK_THROWS_WITH_AS(make_eval_context(out.checkpoint, &wrong),
                       doctest::Contains("fingerprint"), config_error);
}

TEST_CASE("evaluation rows are consistent with clean accuracy") {
  EvalContext ctx = make_eval_context(trained().checkpoint, nullptr);

  const EvalRow none = evaluate_condition(ctx, data().second, 100, AttackSpec{"none"}, 404);
  CHECK(none.condition == "clean");
  CHECK(none.clean_acc == none.attacked_acc);
  CHECK(none.sample_count == 100);
  const double direct = clean_accuracy(ctx.model, data().second, 100, nullptr, 4, 64);
  CHECK(none.clean_acc == direct);
  CHECK(none.clean_acc >= 0.35);  // three epochs on the stripes are plenty

  SUBCASE("a zero-budget attack is exactly the no-attack row") {
    AttackSpec zero{"pgd", 0.0, 5, 2.0 / 255.0};
    const EvalRow row = evaluate_condition(ctx, data().second, 100, zero, 404);
    CHECK(row.attacked_acc == none.clean_acc);
  }
  SUBCASE("a short true-gradient attack does not help the model") {
    AttackSpec pgd5{"pgd", 8.0 / 255.0, 5, 2.0 / 255.0};
    const EvalRow row = evaluate_condition(ctx, data().second, 100, pgd5, 404);
    CHECK(row.attacked_acc <= row.clean_acc + 0.02);
    const EvalRow again = evaluate_condition(ctx, data().second, 100, pgd5, 404);
    CHECK(row.attacked_acc == again.attacked_acc);  // deterministic
  }
  SUBCASE("bpda on an undefended model still runs") {
    AttackSpec bpda{"bpda", 8.0 / 255.0, 3, 2.0 / 255.0, false, false};
    const EvalRow row = evaluate_condition(ctx, data().second, 50, bpda, 404);
    CHECK(row.key_match == false);
    CHECK(row.attacked_acc >= 0.0);
    CHECK(row.attacked_acc <= 1.0);
    AttackSpec with_true{"bpda", 8.0 / 255.0, 3, 2.0 / 255.0, false, true};
    CHECK_THROWS_AS(evaluate_condition(ctx, data().second, 50, with_true, 404), config_error);
  }
}

TEST_CASE("sweep sorts rows by epsilon and anchors zero at clean accuracy") {
  EvalContext ctx = make_eval_context(trained().checkpoint, nullptr);
  const std::vector<double> eps = {8.0 / 255.0, 0.0, 2.0 / 255.0};
  const AccuracyReport report =
      sweep(ctx, data().second, 100, eps, AttackSpec{"pgd", 0.0, 3, 2.0 / 255.0}, 404);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].epsilon == 0.0);
  CHECK(report.rows[1].epsilon == 2.0 / 255.0);
  CHECK(report.rows[2].epsilon == 8.0 / 255.0);
  CHECK(report.rows[0].attacked_acc == report.rows[0].clean_acc);
  CHECK_THROWS_AS(sweep(ctx, data().second, 100, {}, AttackSpec{"pgd"}, 404), config_error);
}

TEST_CASE("block-size ablation trains and reports two rows per block") {
  ExperimentManifest m = tiny_manifest();
  m.epochs = 2;
  m.train_subset = 200;
  const SecretKey key = key_from_seed(77);
  const AccuracyReport report =
      ablate_block_size(m, {4}, key, data().first, data().second,
                        AttackSpec{"pgd", 8.0 / 255.0, 3, 2.0 / 255.0}, nullptr);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].condition == "M4_clean");
  CHECK(report.rows[1].condition == "M4_pgd3");
  for (const auto& r : report.rows) {
    CHECK(r.clean_acc >= 0.0);
    CHECK(r.clean_acc <= 1.0);
    CHECK(r.sample_count == 100);
  }
}
