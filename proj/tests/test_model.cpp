#include <doctest.h>

#include <cstdint>
#include <vector>

#include "shuffleguard/model.hpp"
#include "shuffleguard/optimizer.hpp"

using namespace shuffleguard;

namespace {

// Independent parameter-count oracle: walks the config arithmetic directly
// (bias-free 3x3 convs, affine BN, 1x1 projection on shape change, final fc).
int64_t closed_form_param_count(const ArchitectureConfig& cfg) {
  auto conv = [](int64_t k, int64_t cin, int64_t cout) { return k * k * cin * cout; };
  auto bn = [](int64_t c) { return 2 * c; };
  int64_t total = conv(3, cfg.input_channels, cfg.stem_channels) + bn(cfg.stem_channels);
  int64_t cin = cfg.stem_channels;
  for (std::size_t s = 0; s < cfg.stage_widths.size(); ++s) {
    const int64_t cout = cfg.stage_widths[s];
    for (int b = 0; b < cfg.stage_blocks[s]; ++b) {
      const int stride = b == 0 ? cfg.stage_strides[s] : 1;
      total += conv(3, cin, cout) + bn(cout) + conv(3, cout, cout) + bn(cout);
      if (stride != 1 || cin != cout) total += conv(1, cin, cout) + bn(cout);
      cin = cout;
    }
  }
  total += cin * cfg.num_classes + cfg.num_classes;
  return total;
}

Tensor<float> random_images(int64_t n, uint64_t seed) {
  ChaChaRng rng = ChaChaRng::from_seed(seed, ChaChaRng::kSynthData, 5);
  Tensor<float> x({n, 32, 32, 3});
  for (auto& v : x.data) v = static_cast<float>(rng.uniform_real());
  return x;
}

}  // namespace

TEST_CASE("desk_small forward produces a [batch,10] logit matrix") {
  Model<float> model = build_model<float>(ArchitectureConfig::named("desk_small"), 1);
  Graph<float> g;
  ModelForward<float> fwd = forward_model(model, g, g.input(random_images(4, 2), false), false);
  CHECK(fwd.logits.value().shape == std::vector<int64_t>{4, 10});
  CHECK(fwd.param_vars.size() == model.params.size());
}

TEST_CASE("parameter counts match the closed-form oracle") {
  const ArchitectureConfig small = ArchitectureConfig::named("desk_small");
  const ArchitectureConfig big = ArchitectureConfig::named("resnet18");
  CHECK(build_model<float>(small, 0).param_count() == closed_form_param_count(small));
  const int64_t resnet_count = build_model<float>(big, 0).param_count();
  CHECK(resnet_count == closed_form_param_count(big));
  // The CIFAR-style ResNet18 figure, frozen: ~11.17M.
  CHECK(resnet_count == 11173962);
  CHECK_THROWS_AS(ArchitectureConfig::named("resnet50"), std::invalid_argument);
}

TEST_CASE("equal seeds build bit-identical models, different seeds do not") {
  const ArchitectureConfig cfg = ArchitectureConfig::named("desk_small");
  Model<float> a = build_model<float>(cfg, 42);
  Model<float> b = build_model<float>(cfg, 42);
  Model<float> c = build_model<float>(cfg, 43);
  REQUIRE(a.params.size() == b.params.size());
  bool all_equal = true;
  bool any_diff_from_c = false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    CHECK(a.params[i].name == b.params[i].name);
    all_equal = all_equal && a.params[i].value.data == b.params[i].value.data;
    any_diff_from_c = any_diff_from_c || a.params[i].value.data != c.params[i].value.data;
  }
  CHECK(all_equal);
  CHECK(any_diff_from_c);
}

TEST_CASE("argmax breaks ties toward the lowest class index") {
  const float peaked[] = {0.1f, 0.9f, 0.2f};
  CHECK(argmax_row(peaked, 3) == 1);
  const float flat[] = {0.5f, 0.5f, 0.5f};
  CHECK(argmax_row(flat, 3) == 0);
  const float shifted[] = {1.5f, 1.9f, 1.2f};  // constant shift leaves the winner alone
  CHECK(argmax_row(shifted, 3) == argmax_row(peaked, 3));
}

TEST_CASE("predict returns one label per row and validates the input shape") {
  Model<float> model = build_model<float>(ArchitectureConfig::named("desk_small"), 9);
  std::vector<int> labels = predict(model, random_images(5, 4));
  CHECK(labels.size() == 5);
  for (int l : labels) {
    CHECK(l >= 0);
    CHECK(l < 10);
  }
  CHECK(predict(model, random_images(5, 4)) == labels);
  CHECK_THROWS_AS(predict(model, Tensor<float>({2, 16, 16, 3})), std::invalid_argument);
}

TEST_CASE("desk_small memorizes 50 images in 50 epochs") {
  const int64_t n = 50;
  Model<float> model = build_model<float>(ArchitectureConfig::named("desk_small"), 123);
  Tensor<float> images = random_images(n, 77);
  ChaChaRng label_rng = ChaChaRng::from_seed(77, ChaChaRng::kSynthData, 6);
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(label_rng.uniform_below(10));

  SgdOptimizer<float> opt(SgdConfig<float>{0.1f, 0.9f, 0.0f, 40, 0.1f});
  const int64_t batch = 10;
  for (int epoch = 0; epoch < 50; ++epoch) {
    for (int64_t start = 0; start < n; start += batch) {
      Tensor<float> xb({batch, 32, 32, 3});
      std::vector<int> yb(batch);
      for (int64_t i = 0; i < batch; ++i) {
        const int64_t src = start + i;
        std::copy_n(images.data.begin() + src * 32 * 32 * 3, 32 * 32 * 3,
                    xb.data.begin() + i * 32 * 32 * 3);
        yb[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(src)];
      }
      Graph<float> g;
      ModelForward<float> fwd = forward_model(model, g, g.input(xb, false), true);
      g.backward(softmax_cross_entropy(fwd.logits, yb));
      std::vector<Tensor<float>> grads;
      grads.reserve(fwd.param_vars.size());
      for (const auto& pv : fwd.param_vars) grads.push_back(pv.grad());
      opt.step(model.params, grads, opt.learning_rate(epoch));
    }
  }

  std::vector<int> predicted = predict(model, images);
  int correct = 0;
  for (int64_t i = 0; i < n; ++i)
    if (predicted[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(i)]) ++correct;
  CHECK(correct == n);
}
