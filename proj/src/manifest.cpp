#include "shuffleguard/manifest.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "shuffleguard/model.hpp"
#include "shuffleguard/sha256.hpp"

namespace shuffleguard {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw config_error("manifest: bad value '" + value + "' for key '" + key + "'");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  bad_value(key, value);
}

int64_t parse_i64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int64_t v = std::stoll(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const config_error&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value);
  }
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const uint64_t v = std::stoull(value, &used);
    if (used != value.size() || value.find('-') != std::string::npos) bad_value(key, value);
    return v;
  } catch (const config_error&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value);
  }
}

float parse_f32(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value);
    return static_cast<float>(v);
  } catch (const config_error&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value);
  }
}

double parse_fraction(const std::string& key, const std::string& value) {
  try {
    return parse_pixel_fraction(value);
  } catch (const std::invalid_argument&) {
    bad_value(key, value);
  }
}

std::string float_text(float v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
  return buf;
}

AttackSpec parse_attack_line(const std::string& value) {
  AttackSpec spec;
  std::istringstream in(value);
  std::string token;
  bool saw_kind = false;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
      throw config_error("manifest: attack token '" + token + "' is not key=value");
    const std::string k = token.substr(0, eq);
    const std::string v = token.substr(eq + 1);
    if (k == "kind") {
      spec.kind = v;
      saw_kind = true;
    } else if (k == "eps") {
      spec.epsilon = parse_fraction("attack eps", v);
    } else if (k == "steps") {
      spec.iterations = static_cast<int>(parse_i64("attack steps", v));
    } else if (k == "step") {
      spec.step_size = parse_fraction("attack step", v);
    } else if (k == "rand_init") {
      spec.random_init = parse_bool("attack rand_init", v);
    } else if (k == "key_match") {
      spec.key_match = parse_bool("attack key_match", v);
    } else if (k == "backward") {
      if (v == "identity")
        spec.backward = BpdaBackward::kIdentity;
      else if (v == "exact-guessed")
        spec.backward = BpdaBackward::kExactGuessed;
      else
        bad_value("attack backward", v);
    } else {
      throw config_error("manifest: unknown attack key '" + k + "'");
    }
  }
  if (!saw_kind) throw config_error("manifest: attack line needs kind=");
  return spec;
}

std::string attack_line(const AttackSpec& a) {
  std::string out = "kind=" + a.kind;
  out += " eps=" + pixel_fraction_text(a.epsilon);
  out += " steps=" + std::to_string(a.iterations);
  out += " step=" + pixel_fraction_text(a.step_size);
  out += std::string(" rand_init=") + (a.random_init ? "true" : "false");
  out += std::string(" key_match=") + (a.key_match ? "true" : "false");
  out += std::string(" backward=") +
         (a.backward == BpdaBackward::kIdentity ? "identity" : "exact-guessed");
  return out;
}

}  // namespace

std::string AttackSpec::name() const {
  if (kind == "none") return "clean";
  std::string n = kind;
  if (kind != "fgsm") n += std::to_string(iterations);
  if (random_init) n += "r";
  if (kind == "bpda") n += key_match ? "_truekey" : "_wrongkey";
  return n;
}

std::string pixel_fraction_text(double value) {
  const double k = value * 255.0;
  const double r = std::round(k);
  if (std::abs(k - r) < 1e-9 && r >= 0 && r <= 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld/255", static_cast<long long>(r));
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

ExperimentManifest parse_manifest(const std::string& text) {
  ExperimentManifest m;
  std::unordered_set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("manifest line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw config_error("manifest line " + std::to_string(line_no) + ": empty key");
    if (key != "attack" && !seen.insert(key).second)
      throw config_error("manifest: duplicate key '" + key + "'");

    if (key == "variant") {
      m.variant = value;
    } else if (key == "epochs") {
      m.epochs = parse_i64(key, value);
    } else if (key == "batch_size") {
      m.batch_size = parse_i64(key, value);
    } else if (key == "seed") {
      m.seed = parse_u64(key, value);
    } else if (key == "data_dir") {
      m.data_dir = value;
    } else if (key == "key_file") {
      m.key_file = value;
    } else if (key == "defended") {
      m.defended = parse_bool(key, value);
    } else if (key == "block") {
      m.block = static_cast<int>(parse_i64(key, value));
    } else if (key == "transform_stage") {
      if (value == "pre")
        m.stage = TransformStage::kPre;
      else if (value == "post")
        m.stage = TransformStage::kPost;
      else
        bad_value(key, value);
    } else if (key == "augment") {
      m.augment = parse_bool(key, value);
    } else if (key == "train_subset") {
      m.train_subset = parse_i64(key, value);
    } else if (key == "test_subset") {
      m.test_subset = parse_i64(key, value);
    } else if (key == "lr") {
      m.sgd.lr = parse_f32(key, value);
    } else if (key == "momentum") {
      m.sgd.momentum = parse_f32(key, value);
    } else if (key == "weight_decay") {
      m.sgd.weight_decay = parse_f32(key, value);
    } else if (key == "lr_step_epochs") {
      m.sgd.lr_step_epochs = parse_i64(key, value);
    } else if (key == "lr_gamma") {
      m.sgd.lr_gamma = parse_f32(key, value);
    } else if (key == "attack") {
      m.attacks.push_back(parse_attack_line(value));
    } else {
      throw config_error("manifest: unknown key '" + key + "'");
    }
  }
  return m;
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open manifest: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_manifest(text);
}

void validate_manifest(const ExperimentManifest& m, bool check_files) {
  try {
    (void)ArchitectureConfig::named(m.variant);
  } catch (const std::invalid_argument&) {
    throw config_error("manifest: unknown variant '" + m.variant + "'");
  }
  if (m.epochs < 0) throw config_error("manifest: epochs must be >= 0");
  if (m.batch_size < 1) throw config_error("manifest: batch_size must be >= 1");
  if (m.train_subset < 1 || m.train_subset > 50000)
    throw config_error("manifest: train_subset must be in 1..50000");
  if (m.test_subset < 1 || m.test_subset > 10000)
    throw config_error("manifest: test_subset must be in 1..10000");
  if (m.block < 1 || 32 % m.block != 0)
    throw config_error("manifest: block must divide the 32-pixel image side");
  if (m.defended && m.key_file.empty())
    throw config_error("manifest: defended runs need key_file");
  if (!(m.sgd.lr > 0) || !(m.sgd.lr_gamma > 0) || m.sgd.lr_step_epochs < 1 ||
      m.sgd.momentum < 0 || m.sgd.weight_decay < 0)
    throw config_error("manifest: bad optimizer settings");
  for (const auto& a : m.attacks) {
    if (a.kind != "none" && a.kind != "fgsm" && a.kind != "pgd" && a.kind != "bpda")
      throw config_error("manifest: unknown attack kind '" + a.kind + "'");
    if (a.epsilon < 0 || a.epsilon > 1)
      throw config_error("manifest: attack eps must be in [0,1]");
    if (a.iterations < 0) throw config_error("manifest: attack steps must be >= 0");
    if (a.step_size < 0) throw config_error("manifest: attack step must be >= 0");
  }
  if (check_files) {
    namespace fs = std::filesystem;
    if (m.data_dir.empty()) throw config_error("manifest: data_dir is required");
    if (!fs::is_directory(m.data_dir))
      throw config_error("manifest: data_dir does not exist: " + m.data_dir);
    if (m.defended && !fs::is_regular_file(m.key_file))
      throw config_error("manifest: key_file does not exist: " + m.key_file);
  }
}

std::string canonical_manifest(const ExperimentManifest& m) {
  std::string out;
  out += "variant = " + m.variant + "\n";
  out += "epochs = " + std::to_string(m.epochs) + "\n";
  out += "batch_size = " + std::to_string(m.batch_size) + "\n";
  out += "seed = " + std::to_string(m.seed) + "\n";
  out += "data_dir = " + m.data_dir + "\n";
  out += "key_file = " + m.key_file + "\n";
  out += std::string("defended = ") + (m.defended ? "true" : "false") + "\n";
  out += "block = " + std::to_string(m.block) + "\n";
  out += std::string("transform_stage = ") +
         (m.stage == TransformStage::kPre ? "pre" : "post") + "\n";
  out += std::string("augment = ") + (m.augment ? "true" : "false") + "\n";
  out += "train_subset = " + std::to_string(m.train_subset) + "\n";
  out += "test_subset = " + std::to_string(m.test_subset) + "\n";
  out += "lr = " + float_text(m.sgd.lr) + "\n";
  out += "momentum = " + float_text(m.sgd.momentum) + "\n";
  out += "weight_decay = " + float_text(m.sgd.weight_decay) + "\n";
  out += "lr_step_epochs = " + std::to_string(m.sgd.lr_step_epochs) + "\n";
  out += "lr_gamma = " + float_text(m.sgd.lr_gamma) + "\n";
  for (const auto& a : m.attacks) out += "attack = " + attack_line(a) + "\n";
  return out;
}

std::string manifest_hash(const ExperimentManifest& m) {
  return sha256_hex(canonical_manifest(m));
}

}  // namespace shuffleguard
