#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include "shuffleguard/batch.hpp"
#include "shuffleguard/errors.hpp"
#include "shuffleguard/model.hpp"
#include "shuffleguard/optimizer.hpp"
#include "shuffleguard/sha256.hpp"
#include "shuffleguard/tensor.hpp"

namespace shuffleguard {

// Checkpoint container, version 1. Binary little-endian layout:
//   magic "SGCKPT\0\0", u32 version, u8 scalar tag (1=f32, 2=f64),
//   metadata, named parameter tensors, named running statistics,
//   optimizer velocity tensors, then a 64-char hex SHA-256 of everything
//   before it. Raw scalar bytes are stored verbatim, so save/load is
//   bit-exact and save(load(f)) reproduces f byte for byte.
inline constexpr char kCheckpointMagic[8] = {'S', 'G', 'C', 'K', 'P', 'T', '\0', '\0'};
inline constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::string variant = "desk_small";
  uint64_t seed = 0;
  int64_t epoch = 0;  // completed training epochs
  bool defended = false;
  int64_t block = 4;
  TransformStage stage = TransformStage::kPost;
  std::string key_fingerprint;  // empty when undefended
};

template <typename S>
struct Checkpoint {
  CheckpointMeta meta;
  std::vector<NamedTensor<S>> params;
  std::vector<std::string> stat_names;
  std::vector<BatchNormStats<S>> stats;  // parallel to stat_names
  std::vector<Tensor<S>> velocity;       // empty, or one tensor per parameter
};

namespace detail {

template <typename S>
constexpr uint8_t scalar_tag() {
  static_assert(std::is_same_v<S, float> || std::is_same_v<S, double>,
                "checkpoints hold float32 or float64 tensors");
  return std::is_same_v<S, float> ? uint8_t{1} : uint8_t{2};
}

inline void put_bytes(std::string& out, const void* p, size_t len) {
  out.append(static_cast<const char*>(p), len);
}

template <typename T>
void put_int(std::string& out, T v) {
  static_assert(std::is_integral_v<T>);
  auto u = static_cast<std::make_unsigned_t<T>>(v);
  for (size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

inline void put_str(std::string& out, const std::string& s) {
  put_int<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.append(s);
}

template <typename S>
void put_tensor(std::string& out, const Tensor<S>& t) {
  put_int<uint32_t>(out, static_cast<uint32_t>(t.rank()));
  for (int64_t d : t.shape) put_int<int64_t>(out, d);
  put_bytes(out, t.data.data(), t.data.size() * sizeof(S));
}

// Cursor over a loaded checkpoint image; every read is bounds-checked.
struct CheckpointReader {
  const std::string& buf;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > buf.size()) throw checkpoint_error("checkpoint truncated");
  }

  void get_bytes(void* p, size_t len) {
    need(len);
    std::memcpy(p, buf.data() + pos, len);
    pos += len;
  }

  template <typename T>
  T get_int() {
    static_assert(std::is_integral_v<T>);
    need(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
    pos += sizeof(T);
    return static_cast<T>(u);
  }

  std::string get_str() {
    const auto len = get_int<uint32_t>();
    need(len);
    std::string s(buf.data() + pos, len);
    pos += len;
    return s;
  }

  template <typename S>
  Tensor<S> get_tensor() {
    const auto rank = get_int<uint32_t>();
    if (rank > 8) throw checkpoint_error("checkpoint tensor rank " + std::to_string(rank));
    std::vector<int64_t> dims(rank);
    for (auto& d : dims) {
      d = get_int<int64_t>();
      if (d < 0) throw checkpoint_error("checkpoint tensor has negative dimension");
    }
    Tensor<S> t(dims);
    get_bytes(t.data.data(), t.data.size() * sizeof(S));
    return t;
  }
};

}  // namespace detail

template <typename S>
std::string serialize_checkpoint(const Checkpoint<S>& ck) {
  using namespace detail;
  std::string out;
  put_bytes(out, kCheckpointMagic, sizeof(kCheckpointMagic));
  put_int<uint32_t>(out, kCheckpointVersion);
  out.push_back(static_cast<char>(scalar_tag<S>()));

  put_str(out, ck.meta.variant);
  put_int<uint64_t>(out, ck.meta.seed);
  put_int<int64_t>(out, ck.meta.epoch);
  out.push_back(ck.meta.defended ? 1 : 0);
  put_int<int64_t>(out, ck.meta.block);
  out.push_back(ck.meta.stage == TransformStage::kPre ? 0 : 1);
  put_str(out, ck.meta.key_fingerprint);

  put_int<uint64_t>(out, ck.params.size());
  for (const auto& p : ck.params) {
    put_str(out, p.name);
    put_tensor(out, p.value);
  }

  if (ck.stat_names.size() != ck.stats.size())
    throw checkpoint_error("checkpoint has " + std::to_string(ck.stats.size()) + " stats for " +
                           std::to_string(ck.stat_names.size()) + " names");
  put_int<uint64_t>(out, ck.stats.size());
  for (size_t i = 0; i < ck.stats.size(); ++i) {
    put_str(out, ck.stat_names[i]);
    put_tensor(out, ck.stats[i].running_mean);
    put_tensor(out, ck.stats[i].running_var);
  }

  if (!ck.velocity.empty() && ck.velocity.size() != ck.params.size())
    throw checkpoint_error("checkpoint has " + std::to_string(ck.velocity.size()) +
                           " velocity tensors for " + std::to_string(ck.params.size()) +
                           " parameters");
  put_int<uint64_t>(out, ck.velocity.size());
  for (const auto& v : ck.velocity) put_tensor(out, v);

  out += sha256_hex(out);
  return out;
}

template <typename S>
Checkpoint<S> deserialize_checkpoint(const std::string& image) {
  using namespace detail;
  constexpr size_t kDigestChars = 64;
  if (image.size() < sizeof(kCheckpointMagic) + kDigestChars)
    throw checkpoint_error("checkpoint truncated");
  const std::string digest = image.substr(image.size() - kDigestChars);
  const std::string payload = image.substr(0, image.size() - kDigestChars);
  if (sha256_hex(payload) != digest)
    throw checkpoint_error("checkpoint integrity hash mismatch");

  CheckpointReader r{payload};
  char magic[sizeof(kCheckpointMagic)];
  r.get_bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw checkpoint_error("not a checkpoint file (bad magic)");
  const auto version = r.get_int<uint32_t>();
  if (version != kCheckpointVersion)
    throw checkpoint_error("unsupported checkpoint version " + std::to_string(version));
  const auto tag = r.get_int<uint8_t>();
  if (tag != scalar_tag<S>())
    throw checkpoint_error("checkpoint scalar type tag " + std::to_string(tag) +
                           " does not match the requested precision");

  Checkpoint<S> ck;
  ck.meta.variant = r.get_str();
  ck.meta.seed = r.get_int<uint64_t>();
  ck.meta.epoch = r.get_int<int64_t>();
  ck.meta.defended = r.get_int<uint8_t>() != 0;
  ck.meta.block = r.get_int<int64_t>();
  ck.meta.stage = r.get_int<uint8_t>() == 0 ? TransformStage::kPre : TransformStage::kPost;
  ck.meta.key_fingerprint = r.get_str();

  const auto n_params = r.get_int<uint64_t>();
  ck.params.reserve(n_params);
  for (uint64_t i = 0; i < n_params; ++i) {
    std::string name = r.get_str();
    ck.params.push_back({std::move(name), r.get_tensor<S>()});
  }

  const auto n_stats = r.get_int<uint64_t>();
  ck.stat_names.reserve(n_stats);
  ck.stats.reserve(n_stats);
  for (uint64_t i = 0; i < n_stats; ++i) {
    ck.stat_names.push_back(r.get_str());
    BatchNormStats<S> s;
    s.running_mean = r.get_tensor<S>();
    s.running_var = r.get_tensor<S>();
    ck.stats.push_back(std::move(s));
  }

  const auto n_vel = r.get_int<uint64_t>();
  if (n_vel != 0 && n_vel != n_params)
    throw checkpoint_error("checkpoint has " + std::to_string(n_vel) + " velocity tensors for " +
                           std::to_string(n_params) + " parameters");
  ck.velocity.reserve(n_vel);
  for (uint64_t i = 0; i < n_vel; ++i) ck.velocity.push_back(r.get_tensor<S>());

  if (r.pos != payload.size()) throw checkpoint_error("checkpoint has trailing bytes");
  return ck;
}

template <typename S>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<S>& ck) {
  const std::string image = serialize_checkpoint(ck);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw checkpoint_error("cannot open checkpoint for writing: " + path.string());
  out.write(image.data(), static_cast<std::streamsize>(image.size()));
  out.flush();
  if (!out) throw checkpoint_error("failed to write checkpoint: " + path.string());
}

template <typename S>
Checkpoint<S> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw checkpoint_error("cannot open checkpoint: " + path.string());
  std::string image((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw checkpoint_error("failed to read checkpoint: " + path.string());
  return deserialize_checkpoint<S>(image);
}

template <typename S>
Checkpoint<S> make_checkpoint(const Model<S>& model, const SgdOptimizer<S>* optimizer,
                              CheckpointMeta meta) {
  Checkpoint<S> ck;
  ck.meta = std::move(meta);
  ck.params = model.params;
  ck.stat_names = model.stat_names;
  ck.stats = model.stats;
  if (optimizer != nullptr) ck.velocity = optimizer->velocity();
  return ck;
}

// Rebuilds the architecture named in the metadata and overwrites its tensors
// with the checkpoint's. Any drift between the stored tensors and what the
// architecture expects is a checkpoint error, not a crash downstream.
template <typename S>
Model<S> model_from_checkpoint(const Checkpoint<S>& ck) {
  ArchitectureConfig cfg;
  try {
    cfg = ArchitectureConfig::named(ck.meta.variant);
  } catch (const std::invalid_argument&) {
    throw checkpoint_error("checkpoint names unknown architecture '" + ck.meta.variant + "'");
  }
  Model<S> model = build_model<S>(cfg, ck.meta.seed);
  if (ck.params.size() != model.params.size() || ck.stats.size() != model.stats.size())
    throw checkpoint_error("checkpoint tensor counts do not match architecture '" +
                           ck.meta.variant + "'");
  for (size_t i = 0; i < model.params.size(); ++i) {
    if (ck.params[i].name != model.params[i].name ||
        ck.params[i].value.shape != model.params[i].value.shape)
      throw checkpoint_error("checkpoint parameter '" + ck.params[i].name +
                             "' does not match architecture slot '" + model.params[i].name + "'");
    model.params[i].value = ck.params[i].value;
  }
  for (size_t i = 0; i < model.stats.size(); ++i) {
    if (ck.stat_names[i] != model.stat_names[i] ||
        ck.stats[i].running_mean.shape != model.stats[i].running_mean.shape)
      throw checkpoint_error("checkpoint statistics '" + ck.stat_names[i] +
                             "' do not match architecture slot '" + model.stat_names[i] + "'");
    model.stats[i] = ck.stats[i];
  }
  return model;
}

}  // namespace shuffleguard
