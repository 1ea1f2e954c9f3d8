// shuffleguard: command-line workbench for the keyed block-shuffle defense.
//
// Subcommands: keygen, transform, train, attack, eval, sweep, ablate,
// synth-data. Exit codes: 0 success, 2 invalid configuration, 3 dataset
// problem, 4 checkpoint problem.

#include "CLI11.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "shuffleguard/attack.hpp"
#include "shuffleguard/checkpoint.hpp"
#include "shuffleguard/cifar10.hpp"
#include "shuffleguard/errors.hpp"
#include "shuffleguard/harness.hpp"
#include "shuffleguard/key.hpp"
#include "shuffleguard/manifest.hpp"
#include "shuffleguard/permutation.hpp"
#include "shuffleguard/png_io.hpp"
#include "shuffleguard/report.hpp"
#include "shuffleguard/shuffle.hpp"
#include "shuffleguard/synth.hpp"

namespace fs = std::filesystem;
using namespace shuffleguard;

namespace {

// ---------------------------------------------------------------- helpers

fs::path resolve_data_dir(const std::string& flag_value, const std::string& manifest_value) {
  if (!flag_value.empty()) return flag_value;
  if (!manifest_value.empty()) return manifest_value;
  if (const char* env = std::getenv("SHUFFLEGUARD_DATA_DIR"); env != nullptr && *env != '\0')
    return env;
  throw config_error(
      "no dataset directory: pass --data-dir, set data_dir in the manifest, "
      "or export SHUFFLEGUARD_DATA_DIR");
}

uint64_t parse_hex_u64(const std::string& text) {
  if (text.empty() || text.size() > 16)
    throw std::invalid_argument("hex seed must be 1..16 hex digits (or 64 for full key material)");
  uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("not a hex number: '" + text + "'");
  return value;
}

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_eps_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token = trimmed(token);
    if (!token.empty()) out.push_back(parse_pixel_fraction(token));
  }
  if (out.empty()) throw config_error("--eps: no epsilon values given");
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token = trimmed(token);
    if (token.empty()) continue;
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
      throw config_error(flag + ": not an integer: '" + token + "'");
    out.push_back(value);
  }
  if (out.empty()) throw config_error(flag + ": no values given");
  return out;
}

bool looks_like_png(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dataset_error("cannot open input image: " + path.string());
  static constexpr unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  unsigned char head[8] = {};
  in.read(reinterpret_cast<char*>(head), sizeof head);
  return in.gcount() == sizeof head && std::equal(std::begin(sig), std::end(sig), head);
}

std::vector<uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dataset_error("cannot open input file: " + path.string());
  std::vector<uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw dataset_error("failed to read: " + path.string());
  return bytes;
}

void write_file_bytes(const fs::path& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw std::runtime_error("failed to write: " + path.string());
}

// ------------------------------------------------ shared option bundles

// One evaluation condition assembled from flags; defaults vary per command.
struct ConditionOptions {
  std::string kind = "pgd";
  std::string eps = "8/255";
  int steps = 20;
  std::string step = "2/255";
  bool rand_init = false;
  bool key_match = false;
  std::string backward = "identity";
};

void add_condition_options(CLI::App* cmd, ConditionOptions& c, bool with_key_match) {
  cmd->add_option("--kind", c.kind, "Attack kind")
      ->check(CLI::IsMember({"none", "fgsm", "pgd", "bpda"}))
      ->capture_default_str();
  cmd->add_option("--eps", c.eps, "Perturbation budget, e.g. 8/255 or 0.03")
      ->capture_default_str();
  cmd->add_option("--steps", c.steps, "Attack iterations")->capture_default_str();
  cmd->add_option("--step", c.step, "Per-iteration step size")->capture_default_str();
  cmd->add_flag("--rand-init", c.rand_init, "Random start inside the epsilon ball");
  if (with_key_match)
    cmd->add_flag("--key-match", c.key_match, "Attacker holds the true key");
  cmd->add_option("--bpda-backward", c.backward,
                  "Backward model for the unknown defense stage")
      ->check(CLI::IsMember({"identity", "exact-guessed"}))
      ->capture_default_str();
}

AttackSpec to_spec(const ConditionOptions& c) {
  AttackSpec spec;
  spec.kind = c.kind;
  spec.epsilon = parse_pixel_fraction(c.eps);
  spec.iterations = c.steps;
  spec.step_size = parse_pixel_fraction(c.step);
  spec.random_init = c.rand_init;
  spec.key_match = c.key_match;
  spec.backward = c.backward == "exact-guessed" ? BpdaBackward::kExactGuessed
                                                : BpdaBackward::kIdentity;
  if (spec.iterations < 0) throw config_error("--steps must be non-negative");
  return spec;
}

void warn_if_unreachable(const AttackSpec& spec) {
  if (spec.kind != "pgd" && spec.kind != "bpda") return;
  AttackConfig cfg;
  cfg.epsilon = spec.epsilon;
  cfg.step_size = spec.step_size;
  cfg.iterations = spec.iterations;
  if (!cfg.reachable()) {
    std::cerr << "warning: " << spec.iterations << " steps of "
              << pixel_fraction_text(spec.step_size) << " cannot span the "
              << pixel_fraction_text(spec.epsilon) << " ball\n";
  }
}

struct ReportOptions {
  std::string csv;
  std::string json;
  std::string svg;
  std::string title = "accuracy vs epsilon";
};

void add_report_options(CLI::App* cmd, ReportOptions& r) {
  cmd->add_option("--out-csv", r.csv, "Write the report table as CSV");
  cmd->add_option("--out-json", r.json, "Write the report with provenance as JSON");
  cmd->add_option("--out-svg", r.svg, "Plot attacked accuracy vs epsilon as SVG");
  cmd->add_option("--title", r.title, "Plot title for --out-svg")->capture_default_str();
}

// Prints the CSV to stdout when no output file was requested.
void emit_report(const AccuracyReport& report, const ReportOptions& r) {
  bool wrote = false;
  if (!r.csv.empty()) {
    write_report_csv(r.csv, report);
    std::cout << "wrote " << r.csv << "\n";
    wrote = true;
  }
  if (!r.json.empty()) {
    write_report_json(r.json, report);
    std::cout << "wrote " << r.json << "\n";
    wrote = true;
  }
  if (!r.svg.empty()) {
    write_report_svg(r.svg, report, r.title);
    std::cout << "wrote " << r.svg << "\n";
    wrote = true;
  }
  if (!wrote) std::cout << report_csv(report);
}

// Checkpoint-driven commands have no manifest file; reports still need a
// provenance hash, so the effective configuration is reconstructed and
// hashed the same way a manifest would be.
ExperimentManifest provenance_manifest(const CheckpointMeta& meta, const fs::path& data_dir,
                                       const std::string& key_file, int64_t subset,
                                       uint64_t seed, std::vector<AttackSpec> attacks) {
  ExperimentManifest m;
  m.variant = meta.variant;
  m.epochs = meta.epoch;
  m.seed = seed;
  m.data_dir = data_dir.string();
  m.key_file = key_file;
  m.defended = meta.defended;
  m.block = static_cast<int>(meta.block);
  m.stage = meta.stage;
  m.test_subset = subset;
  m.attacks = std::move(attacks);
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ------------------------------------------------------------ subcommands

struct KeygenOptions {
  std::string out;
  std::string seed_hex;
  std::string label;
};

void run_keygen(const KeygenOptions& o) {
  SecretKey key;
  if (o.seed_hex.empty()) {
    key = random_key(o.label);
  } else if (o.seed_hex.size() == 64) {
    key = key_from_hex(o.seed_hex, o.label);
  } else {
    key = key_from_seed(parse_hex_u64(o.seed_hex), o.label);
  }
  save_key(key, o.out);
  std::cout << "wrote " << o.out << "  fingerprint " << key_fingerprint(key).substr(0, 16)
            << "\n";
}

struct TransformOptions {
  std::string key_path;
  std::string in_path;
  std::string out_path;
  int block = 4;
  bool inverse = false;
};

void run_transform(const TransformOptions& o) {
  if (o.block < 1) throw config_error("--block must be positive");
  const SecretKey key = load_key(o.key_path);

  if (looks_like_png(o.in_path)) {
    ByteImage img = read_png_rgb8(o.in_path);
    BlockGrid grid{o.block, img.width, img.height, img.channels};
    img = o.inverse ? deshuffle_image(img, key, grid) : shuffle_image(img, key, grid);
    write_png_rgb8(o.out_path, img);
  } else {
    // Raw CIFAR-10 records: 3073 bytes each, label byte then planar pixels.
    std::vector<uint8_t> bytes = read_file_bytes(o.in_path);
    if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0) {
      throw dataset_error("raw input must be CIFAR-10 records of " +
                          std::to_string(kCifarRecordBytes) + " bytes: " + o.in_path);
    }
    BlockGrid grid{o.block, kCifarSide, kCifarSide, kCifarChannels};
    const PermutationVector perm =
        derive_permutation(key, static_cast<uint32_t>(grid.pixels_per_block()));
    ByteImage img(kCifarSide, kCifarSide, kCifarChannels);
    for (size_t off = 0; off < bytes.size(); off += kCifarRecordBytes) {
      decode_record_pixels(bytes.data() + off + 1, img.data.data());
      const ByteImage moved = o.inverse ? deshuffle_with_permutation(img, perm, grid)
                                        : shuffle_with_permutation(img, perm, grid);
      encode_record_pixels(moved.data.data(), bytes.data() + off + 1);
    }
    write_file_bytes(o.out_path, bytes);
  }
  std::cout << (o.inverse ? "deshuffled " : "shuffled ") << o.in_path << " -> " << o.out_path
            << "\n";
}

struct TrainOptions {
  std::string manifest_path;
  std::string data_dir;
  std::string out_ckpt;
  std::string log_path;
  bool full_paper_scale = false;
  bool quiet = false;
};

void run_train(const TrainOptions& o) {
  ExperimentManifest m = load_manifest(o.manifest_path);
  if (o.full_paper_scale) {
    m.variant = "resnet18";
    m.epochs = 160;
    m.train_subset = 50000;
    m.test_subset = 10000;
    m.defended = true;
    m.block = 4;
    std::cout << "full paper scale: resnet18, M=4, 160 epochs on the full training set; "
                 "expect a multi-hour CPU run\n";
  }
  const fs::path dir = resolve_data_dir(o.data_dir, m.data_dir);
  m.data_dir = dir.string();
  validate_manifest(m, /*check_files=*/true);

  std::optional<SecretKey> key;
  if (m.defended) key = load_key(m.key_file);

  const auto [train_split, test_split] = load_cifar10(dir);
  const auto t0 = std::chrono::steady_clock::now();
  std::ostream* progress = o.quiet ? nullptr : &std::cout;
  TrainOutput out = train_model(m, key ? &*key : nullptr, train_split, test_split, progress);
  save_checkpoint(o.out_ckpt, out.checkpoint);

  if (!o.log_path.empty()) {
    std::ofstream log(o.log_path, std::ios::trunc);
    if (!log) throw config_error("cannot open log file: " + o.log_path);
    log << "epoch,lr,train_acc,test_acc\n";
    char line[96];
    for (const EpochLog& e : out.log) {
      std::snprintf(line, sizeof line, "%lld,%.9g,%.6f,%.6f\n",
                    static_cast<long long>(e.epoch), static_cast<double>(e.lr), e.train_acc,
                    e.test_acc);
      log << line;
    }
  }

  const double final_acc = out.log.empty() ? 0.0 : out.log.back().test_acc;
  char acc[32];
  std::snprintf(acc, sizeof acc, "%.4f", final_acc);
  std::cout << "wrote " << o.out_ckpt << "  clean test acc " << acc << "  ("
            << static_cast<int>(seconds_since(t0)) << " s)\n";
}

struct EvalOptions {
  std::string model_path;
  std::string key_path;
  std::string manifest_path;
  std::string data_dir;
  int64_t subset = 1000;
  uint64_t seed = 1;
  ConditionOptions cond;
  ReportOptions report;
  bool subset_given = false;
  bool seed_given = false;
  bool kind_given = false;
};

void run_eval(const EvalOptions& o) {
  const Checkpoint<float> ck = load_checkpoint<float>(o.model_path);
  std::optional<SecretKey> key;
  if (!o.key_path.empty()) key = load_key(o.key_path);
  EvalContext ctx = make_eval_context(ck, key ? &*key : nullptr);

  int64_t subset = o.subset;
  uint64_t seed = o.seed;
  std::vector<AttackSpec> conditions;
  std::optional<ExperimentManifest> manifest;
  if (!o.manifest_path.empty()) {
    if (o.kind_given)
      throw config_error("give either --manifest (runs its attack matrix) or --kind, not both");
    manifest = load_manifest(o.manifest_path);
    conditions.emplace_back();
    conditions.back().kind = "none";  // clean row anchors the table
    for (const AttackSpec& a : manifest->attacks) conditions.push_back(a);
    if (!o.subset_given) subset = manifest->test_subset;
    if (!o.seed_given) seed = manifest->seed;
  } else {
    conditions.push_back(to_spec(o.cond));
  }

  const fs::path dir = resolve_data_dir(o.data_dir, manifest ? manifest->data_dir : "");
  const auto splits = load_cifar10(dir);
  const DatasetSplit& test_split = splits.second;

  const auto t0 = std::chrono::steady_clock::now();
  AccuracyReport report;
  report.seed = seed;
  for (const AttackSpec& spec : conditions) {
    warn_if_unreachable(spec);
    report.rows.push_back(evaluate_condition(ctx, test_split, subset, spec, seed));
  }
  report.wall_seconds = seconds_since(t0);
  report.manifest_hash =
      manifest ? manifest_hash(*manifest)
               : manifest_hash(provenance_manifest(ck.meta, dir, o.key_path, subset, seed,
                                                   conditions));
  emit_report(report, o.report);
}

struct AttackOptions {
  std::string model_path;
  std::string key_path;
  std::string guessed_key = "random";
  std::string data_dir;
  std::string out_json;
  int64_t subset = 1000;
  uint64_t seed = 1;
  ConditionOptions cond;
  ReportOptions report;
};

void run_attack(const AttackOptions& o) {
  const Checkpoint<float> ck = load_checkpoint<float>(o.model_path);
  std::optional<SecretKey> key;
  if (!o.key_path.empty()) key = load_key(o.key_path);
  EvalContext ctx = make_eval_context(ck, key ? &*key : nullptr);

  AttackSpec spec = to_spec(o.cond);
  if (spec.kind == "none") throw config_error("attack needs --kind fgsm, pgd, or bpda");

  // The attacker's key: a file, or a deterministic wrong guess drawn from
  // --seed. key_match is resolved by comparing against the true key.
  std::optional<SecretKey> guess;
  if (o.guessed_key != "random") {
    guess = load_key(o.guessed_key);
  } else {
    spec.key_match = false;
  }
  warn_if_unreachable(spec);

  const fs::path dir = resolve_data_dir(o.data_dir, "");
  const auto splits = load_cifar10(dir);
  const DatasetSplit& test_split = splits.second;

  const auto t0 = std::chrono::steady_clock::now();
  AccuracyReport report;
  report.seed = o.seed;
  report.rows.push_back(evaluate_condition(ctx, test_split, o.subset, spec, o.seed,
                                           guess ? &*guess : nullptr));
  report.wall_seconds = seconds_since(t0);
  report.manifest_hash = manifest_hash(
      provenance_manifest(ck.meta, dir, o.key_path, o.subset, o.seed, {spec}));

  ReportOptions out = o.report;
  if (!o.out_json.empty()) out.json = o.out_json;
  emit_report(report, out);

  const EvalRow& row = report.rows.front();
  char clean[32], attacked[32];
  std::snprintf(clean, sizeof clean, "%.4f", row.clean_acc);
  std::snprintf(attacked, sizeof attacked, "%.4f", row.attacked_acc);
  std::cout << row.condition << ": clean " << clean << ", attacked " << attacked << " (eps "
            << pixel_fraction_text(row.epsilon) << ", n=" << row.sample_count << ")\n";
}

struct SweepOptions {
  std::string model_path;
  std::string key_path;
  std::string data_dir;
  std::string eps_list = "2/255,4/255,8/255,16/255,32/255";
  int64_t subset = 1000;
  uint64_t seed = 1;
  ConditionOptions cond;
  ReportOptions report;
};

void run_sweep(const SweepOptions& o) {
  const Checkpoint<float> ck = load_checkpoint<float>(o.model_path);
  std::optional<SecretKey> key;
  if (!o.key_path.empty()) key = load_key(o.key_path);
  EvalContext ctx = make_eval_context(ck, key ? &*key : nullptr);

  AttackSpec spec = to_spec(o.cond);
  if (spec.kind == "none") throw config_error("sweep needs --kind fgsm, pgd, or bpda");
  const std::vector<double> epsilons = parse_eps_list(o.eps_list);
  for (const double e : epsilons) {
    AttackSpec at = spec;
    at.epsilon = e;
    warn_if_unreachable(at);
  }

  const fs::path dir = resolve_data_dir(o.data_dir, "");
  const auto splits = load_cifar10(dir);
  const DatasetSplit& test_split = splits.second;

  const auto t0 = std::chrono::steady_clock::now();
  AccuracyReport report = sweep(ctx, test_split, o.subset, epsilons, spec, o.seed);
  report.wall_seconds = seconds_since(t0);

  std::vector<AttackSpec> attacks;
  for (const double e : epsilons) {
    attacks.push_back(spec);
    attacks.back().epsilon = e;
  }
  report.manifest_hash = manifest_hash(
      provenance_manifest(ck.meta, dir, o.key_path, o.subset, o.seed, std::move(attacks)));
  emit_report(report, o.report);
}

struct AblateOptions {
  std::string manifest_path;
  std::string data_dir;
  std::string blocks_list = "2,4";
  ReportOptions report;
  bool quiet = false;
};

void run_ablate(const AblateOptions& o) {
  ExperimentManifest m = load_manifest(o.manifest_path);
  const fs::path dir = resolve_data_dir(o.data_dir, m.data_dir);
  m.data_dir = dir.string();
  const std::vector<int> blocks = parse_int_list(o.blocks_list, "--blocks");

  const SecretKey key =
      m.key_file.empty() ? key_from_seed(m.seed, "ablation") : load_key(m.key_file);

  // Attacked column: the manifest's first real attack, or PGD-20 at 8/255.
  AttackSpec attack;
  const auto it = std::find_if(m.attacks.begin(), m.attacks.end(),
                               [](const AttackSpec& a) { return a.kind != "none"; });
  if (it != m.attacks.end()) attack = *it;
  warn_if_unreachable(attack);

  const auto [train_split, test_split] = load_cifar10(dir);
  const auto t0 = std::chrono::steady_clock::now();
  std::ostream* progress = o.quiet ? nullptr : &std::cout;
  AccuracyReport report =
      ablate_block_size(m, blocks, key, train_split, test_split, attack, progress);
  report.wall_seconds = seconds_since(t0);
  report.manifest_hash = manifest_hash(m);
  emit_report(report, o.report);
}

struct SynthOptions {
  std::string out_dir;
  uint64_t seed = 1;
};

void run_synth(const SynthOptions& o) {
  write_synthetic_cifar(o.out_dir, o.seed);
  std::cout << "wrote synthetic stand-in dataset (CIFAR-10 binary layout, 50k train + 10k test) "
               "to "
            << o.out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shuffleguard: workbench for a keyed block-wise pixel-shuffling defense"};
  app.require_subcommand(1);

  KeygenOptions keygen_opts;
  auto* keygen_cmd = app.add_subcommand("keygen", "Generate a secret key file");
  keygen_cmd->add_option("--out", keygen_opts.out, "Key file to write")->required();
  keygen_cmd->add_option("--seed", keygen_opts.seed_hex,
                         "Deterministic key: 64 hex chars (full material) or up to 16 hex "
                         "chars (expanded 64-bit seed); omit for OS entropy");
  keygen_cmd->add_option("--label", keygen_opts.label, "Human-readable label (not serialized)");
  keygen_cmd->callback([&] { run_keygen(keygen_opts); });

  TransformOptions transform_opts;
  auto* transform_cmd =
      app.add_subcommand("transform", "Shuffle an image (PNG or raw CIFAR-10 records)");
  transform_cmd->add_option("--key", transform_opts.key_path, "Key file")->required();
  transform_cmd->add_option("--block", transform_opts.block, "Block side M")
      ->capture_default_str();
  transform_cmd->add_option("--in", transform_opts.in_path, "Input image or record file")
      ->required();
  transform_cmd->add_option("--out", transform_opts.out_path, "Output path (same format)")
      ->required();
  transform_cmd->add_flag("--inverse", transform_opts.inverse, "Deshuffle instead");
  transform_cmd->callback([&] { run_transform(transform_opts); });

  TrainOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a manifest");
  train_cmd->add_option("--manifest", train_opts.manifest_path, "Experiment manifest")
      ->required();
  train_cmd->add_option("--data-dir", train_opts.data_dir,
                        "CIFAR-10 binary directory (overrides manifest and env)");
  train_cmd->add_option("--out", train_opts.out_ckpt, "Checkpoint file to write")->required();
  train_cmd->add_option("--log", train_opts.log_path, "Per-epoch CSV log");
  train_cmd->add_flag("--full-paper-scale", train_opts.full_paper_scale,
                      "Override to resnet18, M=4, 160 epochs, full dataset (multi-hour CPU "
                      "run; needs a defended manifest with a key file)");
  train_cmd->add_flag("--quiet", train_opts.quiet, "Suppress per-epoch progress");
  train_cmd->callback([&] { run_train(train_opts); });

  EvalOptions eval_opts;
  eval_opts.cond.kind = "none";
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint, optionally under attack");
  eval_cmd->add_option("--model", eval_opts.model_path, "Checkpoint file")->required();
  eval_cmd->add_option("--key", eval_opts.key_path, "True key (required for defended models)");
  eval_cmd->add_option("--manifest", eval_opts.manifest_path,
                       "Run the manifest's whole attack matrix plus a clean row");
  eval_cmd->add_option("--data-dir", eval_opts.data_dir, "CIFAR-10 binary directory");
  eval_cmd->add_option("--subset", eval_opts.subset, "Test images to evaluate")
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval_opts.seed, "Evaluation seed")->capture_default_str();
  add_condition_options(eval_cmd, eval_opts.cond, /*with_key_match=*/true);
  add_report_options(eval_cmd, eval_opts.report);
  eval_cmd->callback([&] {
    eval_opts.subset_given = eval_cmd->count("--subset") > 0;
    eval_opts.seed_given = eval_cmd->count("--seed") > 0;
    eval_opts.kind_given = eval_cmd->count("--kind") > 0;
    run_eval(eval_opts);
  });

  AttackOptions attack_opts;
  attack_opts.cond.kind = "bpda";
  attack_opts.cond.steps = 40;
  auto* attack_cmd =
      app.add_subcommand("attack", "Attack a checkpoint and report clean vs attacked accuracy");
  attack_cmd->add_option("--model", attack_opts.model_path, "Checkpoint file")->required();
  attack_cmd->add_option("--key", attack_opts.key_path,
                         "True key (required for defended models)");
  attack_cmd->add_option("--guessed-key", attack_opts.guessed_key,
                         "Attacker's key: a key file, or 'random' for a deterministic wrong "
                         "guess drawn from --seed")
      ->capture_default_str();
  attack_cmd->add_option("--data-dir", attack_opts.data_dir, "CIFAR-10 binary directory");
  attack_cmd->add_option("--subset", attack_opts.subset, "Test images to attack")
      ->capture_default_str();
  attack_cmd->add_option("--seed", attack_opts.seed, "Attack seed")->capture_default_str();
  attack_cmd->add_option("--out", attack_opts.out_json, "Write the JSON report here");
  add_condition_options(attack_cmd, attack_opts.cond, /*with_key_match=*/false);
  add_report_options(attack_cmd, attack_opts.report);
  attack_cmd->callback([&] { run_attack(attack_opts); });

  SweepOptions sweep_opts;
  sweep_opts.cond.kind = "pgd";
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate one attack across epsilon budgets");
  sweep_cmd->add_option("--model", sweep_opts.model_path, "Checkpoint file")->required();
  sweep_cmd->add_option("--key", sweep_opts.key_path, "True key (required for defended models)");
  sweep_cmd->add_option("--eps", sweep_opts.eps_list, "Comma-separated epsilon list")
      ->capture_default_str();
  sweep_cmd->add_option("--data-dir", sweep_opts.data_dir, "CIFAR-10 binary directory");
  sweep_cmd->add_option("--subset", sweep_opts.subset, "Test images per epsilon")
      ->capture_default_str();
  sweep_cmd->add_option("--seed", sweep_opts.seed, "Evaluation seed")->capture_default_str();
  sweep_cmd->add_option("--kind", sweep_opts.cond.kind, "Attack kind")
      ->check(CLI::IsMember({"fgsm", "pgd", "bpda"}))
      ->capture_default_str();
  sweep_cmd->add_option("--steps", sweep_opts.cond.steps, "Attack iterations")
      ->capture_default_str();
  sweep_cmd->add_option("--step", sweep_opts.cond.step, "Per-iteration step size")
      ->capture_default_str();
  sweep_cmd->add_flag("--rand-init", sweep_opts.cond.rand_init,
                      "Random start inside the epsilon ball");
  sweep_cmd->add_flag("--key-match", sweep_opts.cond.key_match, "Attacker holds the true key");
  sweep_cmd->add_option("--bpda-backward", sweep_opts.cond.backward,
                        "Backward model for the unknown defense stage")
      ->check(CLI::IsMember({"identity", "exact-guessed"}))
      ->capture_default_str();
  add_report_options(sweep_cmd, sweep_opts.report);
  sweep_cmd->callback([&] { run_sweep(sweep_opts); });

  AblateOptions ablate_opts;
  auto* ablate_cmd =
      app.add_subcommand("ablate", "Train and evaluate one defended model per block size");
  ablate_cmd->add_option("--manifest", ablate_opts.manifest_path, "Base manifest")->required();
  ablate_cmd->add_option("--blocks", ablate_opts.blocks_list, "Comma-separated block sides")
      ->capture_default_str();
  ablate_cmd->add_option("--data-dir", ablate_opts.data_dir, "CIFAR-10 binary directory");
  ablate_cmd->add_flag("--quiet", ablate_opts.quiet, "Suppress training progress");
  add_report_options(ablate_cmd, ablate_opts.report);
  ablate_cmd->callback([&] { run_ablate(ablate_opts); });

  SynthOptions synth_opts;
  auto* synth_cmd = app.add_subcommand(
      "synth-data", "Write a synthetic stand-in dataset in the CIFAR-10 binary layout");
  synth_cmd->add_option("--out", synth_opts.out_dir, "Directory to create")->required();
  synth_cmd->add_option("--seed", synth_opts.seed, "Generator seed")->capture_default_str();
  synth_cmd->callback([&] { run_synth(synth_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const dataset_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const checkpoint_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
