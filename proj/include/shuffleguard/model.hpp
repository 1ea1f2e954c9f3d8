#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "shuffleguard/chacha.hpp"
#include "shuffleguard/graph.hpp"
#include "shuffleguard/ops.hpp"
#include "shuffleguard/tensor.hpp"

namespace shuffleguard {

struct ArchitectureConfig {
  std::string variant;
  int stem_channels = 0;
  std::vector<int> stage_widths;
  std::vector<int> stage_blocks;
  std::vector<int> stage_strides;
  int num_classes = 10;
  int input_size = 32;
  int input_channels = 3;

  static ArchitectureConfig named(std::string_view variant) {
    ArchitectureConfig cfg;
    cfg.variant = std::string(variant);
    if (variant == "desk_small") {
      cfg.stem_channels = 16;
      cfg.stage_widths = {16, 32, 64};
      cfg.stage_blocks = {1, 1, 1};
      cfg.stage_strides = {1, 2, 2};
    } else if (variant == "resnet18") {
      cfg.stem_channels = 64;
      cfg.stage_widths = {64, 128, 256, 512};
      cfg.stage_blocks = {2, 2, 2, 2};
      cfg.stage_strides = {1, 2, 2, 2};
    } else {
      throw std::invalid_argument("unknown model variant '" + std::string(variant) +
                                  "' (expected desk_small or resnet18)");
    }
    return cfg;
  }
};

namespace detail {

struct ConvSpec {
  std::string name;
  int kh, kw, cin, cout, stride, pad;
};

struct BnSpec {
  std::string name;
  int channels;
};

// Basic residual block; the projection shortcut appears whenever shape changes.
struct BlockSpec {
  ConvSpec conv1;
  BnSpec bn1;
  ConvSpec conv2;
  BnSpec bn2;
  bool has_down = false;
  ConvSpec down_conv;
  BnSpec down_bn;
};

struct NetSpec {
  ConvSpec stem;
  BnSpec stem_bn;
  std::vector<BlockSpec> blocks;
  int fc_in = 0;
  int fc_out = 0;
};

inline NetSpec plan_network(const ArchitectureConfig& cfg) {
  if (cfg.stage_widths.size() != cfg.stage_blocks.size() ||
      cfg.stage_widths.size() != cfg.stage_strides.size() || cfg.stage_widths.empty()) {
    throw std::invalid_argument("architecture '" + cfg.variant + "' has inconsistent stage lists");
  }
  NetSpec net;
  net.stem = {"stem.conv", 3, 3, cfg.input_channels, cfg.stem_channels, 1, 1};
  net.stem_bn = {"stem.bn", cfg.stem_channels};
  int cin = cfg.stem_channels;
  for (std::size_t s = 0; s < cfg.stage_widths.size(); ++s) {
    const int cout = cfg.stage_widths[s];
    for (int b = 0; b < cfg.stage_blocks[s]; ++b) {
      const int stride = b == 0 ? cfg.stage_strides[s] : 1;
      const std::string prefix =
          "stage" + std::to_string(s + 1) + ".block" + std::to_string(b) + ".";
      BlockSpec block;
      block.conv1 = {prefix + "conv1", 3, 3, cin, cout, stride, 1};
      block.bn1 = {prefix + "bn1", cout};
      block.conv2 = {prefix + "conv2", 3, 3, cout, cout, 1, 1};
      block.bn2 = {prefix + "bn2", cout};
      if (stride != 1 || cin != cout) {
        block.has_down = true;
        block.down_conv = {prefix + "down.conv", 1, 1, cin, cout, stride, 0};
        block.down_bn = {prefix + "down.bn", cout};
      }
      net.blocks.push_back(std::move(block));
      cin = cout;
    }
  }
  net.fc_in = cin;
  net.fc_out = cfg.num_classes;
  return net;
}

}  // namespace detail

template <typename S>
struct Model {
  ArchitectureConfig arch;
  std::vector<NamedTensor<S>> params;                // creation order is the forward order
  std::vector<BatchNormStats<S>> stats;              // one per batch_norm, same order
  std::vector<std::string> stat_names;               // parallel to stats

  int64_t param_count() const {
    int64_t n = 0;
    for (const auto& p : params) n += p.value.numel();
    return n;
  }
};

// Kaiming fan-in initialization for conv and dense weights; BN starts at the
// identity affine with unit running variance. Draw order is creation order, so
// a seed pins every parameter bit-exactly.
template <typename S>
Model<S> build_model(const ArchitectureConfig& cfg, uint64_t seed) {
  const detail::NetSpec net = detail::plan_network(cfg);
  Model<S> model;
  model.arch = cfg;
  ChaChaRng rng = ChaChaRng::from_seed(seed, ChaChaRng::kWeightInit, 0);

  auto conv_init = [&rng, &model](const detail::ConvSpec& c) {
    Tensor<S> w({c.kh, c.kw, c.cin, c.cout});
    const double std_dev = std::sqrt(2.0 / (static_cast<double>(c.kh) * c.kw * c.cin));
    for (auto& v : w.data) v = static_cast<S>(rng.normal() * std_dev);
    model.params.push_back({c.name + ".w", std::move(w)});
  };
  auto bn_init = [&model](const detail::BnSpec& b) {
    model.params.push_back({b.name + ".gamma", Tensor<S>::full({b.channels}, S(1))});
    model.params.push_back({b.name + ".beta", Tensor<S>({b.channels})});
    model.stats.emplace_back(b.channels);
    model.stat_names.push_back(b.name);
  };

  conv_init(net.stem);
  bn_init(net.stem_bn);
  for (const auto& block : net.blocks) {
    conv_init(block.conv1);
    bn_init(block.bn1);
    conv_init(block.conv2);
    bn_init(block.bn2);
    if (block.has_down) {
      conv_init(block.down_conv);
      bn_init(block.down_bn);
    }
  }
  Tensor<S> fc_w({net.fc_in, net.fc_out});
  const double fc_std = std::sqrt(2.0 / static_cast<double>(net.fc_in));
  for (auto& v : fc_w.data) v = static_cast<S>(rng.normal() * fc_std);
  model.params.push_back({"fc.w", std::move(fc_w)});
  model.params.push_back({"fc.b", Tensor<S>({net.fc_out})});
  return model;
}

template <typename S>
struct ModelForward {
  std::vector<Var<S>> param_vars;  // parallel to Model::params
  Var<S> logits;
};

// Builds the forward graph for one batch. Training mode updates the model's
// running statistics in place.
template <typename S>
ModelForward<S> forward_model(Model<S>& model, Graph<S>& g, Var<S> images, bool training) {
  const detail::NetSpec net = detail::plan_network(model.arch);
  ModelForward<S> fwd;
  fwd.param_vars.reserve(model.params.size());
  std::size_t param_cursor = 0;
  std::size_t stat_cursor = 0;
  auto next_param = [&]() -> Var<S> {
    Var<S> v = g.input(model.params[param_cursor].value, true);
    ++param_cursor;
    fwd.param_vars.push_back(v);
    return v;
  };

  auto apply_conv = [&](Var<S> h, const detail::ConvSpec& c) {
    Var<S> w = next_param();
    return conv2d(h, w, c.stride, c.pad);
  };
  auto apply_bn = [&](Var<S> h) {
    Var<S> gamma = next_param();
    Var<S> beta = next_param();
    return batch_norm(h, gamma, beta, model.stats[stat_cursor++], training);
  };

  Var<S> h = relu(apply_bn(apply_conv(images, net.stem)));
  for (const auto& block : net.blocks) {
    Var<S> y = apply_bn(apply_conv(h, block.conv1));
    y = apply_bn(apply_conv(relu(y), block.conv2));
    Var<S> shortcut = block.has_down ? apply_bn(apply_conv(h, block.down_conv)) : h;
    h = relu(add(y, shortcut));
  }
  Var<S> pooled = global_avg_pool(h);
  Var<S> fw = next_param();
  Var<S> fb = next_param();
  fwd.logits = dense(pooled, fw, fb);
  return fwd;
}

// Lowest index wins ties so results do not depend on float scan order.
template <typename S>
int argmax_row(const S* row, int64_t k) {
  int best = 0;
  for (int64_t j = 1; j < k; ++j)
    if (row[j] > row[best]) best = static_cast<int>(j);
  return best;
}

template <typename S>
std::vector<int> predict(Model<S>& model, const Tensor<S>& images) {
  if (images.rank() != 4 || images.dim(1) != model.arch.input_size ||
      images.dim(2) != model.arch.input_size || images.dim(3) != model.arch.input_channels) {
    throw std::invalid_argument("predict expects [N," + std::to_string(model.arch.input_size) +
                                "," + std::to_string(model.arch.input_size) + "," +
                                std::to_string(model.arch.input_channels) + "] images, got " +
                                shape_string(images.shape));
  }
  Graph<S> g;
  Var<S> x = g.input(images, false);
  ModelForward<S> fwd = forward_model(model, g, x, false);
  const Tensor<S>& logits = fwd.logits.value();
  const int64_t n = logits.dim(0);
  const int64_t k = logits.dim(1);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    labels[static_cast<std::size_t>(i)] = argmax_row(logits.data.data() + i * k, k);
  return labels;
}

}  // namespace shuffleguard
