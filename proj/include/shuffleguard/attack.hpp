#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "shuffleguard/batch.hpp"
#include "shuffleguard/chacha.hpp"
#include "shuffleguard/key.hpp"
#include "shuffleguard/model.hpp"
#include "shuffleguard/ops.hpp"
#include "shuffleguard/permutation.hpp"
#include "shuffleguard/shuffle.hpp"
#include "shuffleguard/tensor.hpp"

namespace shuffleguard {

// Backward model for the defense stage the adversary cannot differentiate:
// straight-through identity, or the exact gradient of the guessed permutation.
// For permutation transforms the two produce identical iterates when the
// random start is disabled, because sign and the box projection commute with
// coordinate permutations.
enum class BpdaBackward { kIdentity, kExactGuessed };

struct AttackConfig {
  double epsilon = 0.0;           // pixel units, in [0,1]
  double step_size = 2.0 / 255.0;
  int iterations = 20;
  bool random_init = false;
  BpdaBackward bpda_backward = BpdaBackward::kIdentity;
  const SecretKey* guessed_key = nullptr;  // required by bpda_attack
  int block = 4;
  uint64_t seed = 0;              // attack random-start seed
  int64_t sample_index_base = 0;  // offsets per-sample init streams across batches

  // The iterates can span the ε ball: iterations·step_size ≥ ε.
  bool reachable() const {
    return static_cast<double>(iterations) * step_size >= epsilon;
  }
};

template <typename S>
struct AdversarialResult {
  Tensor<S> adv_images;
  std::vector<uint8_t> success_mask;  // prediction through the attacked pipeline != label
  std::vector<S> linf_achieved;
};

// Containment bound for ‖x'−x‖∞ checks: ε plus one rounding unit at pixel
// scale (pixels live in [0,1], so x±ε rounds with ulp(1) granularity).
template <typename S>
S containment_bound(double epsilon) {
  return static_cast<S>(epsilon) + std::numeric_limits<S>::epsilon();
}

// Accepts "k/255" (exact CIFAR pixel counts) or a plain decimal.
inline double parse_pixel_fraction(const std::string& text) {
  try {
    const auto slash = text.find('/');
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    }
    const double num = std::stod(text.substr(0, slash), &used);
    if (used != slash) throw std::invalid_argument(text);
    const double den = std::stod(text.substr(slash + 1), &used);
    if (used != text.size() - slash - 1 || den == 0.0) throw std::invalid_argument(text);
    return num / den;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse pixel fraction '" + text + "'");
  }
}

// Elementwise clamp to the ε-ball around x, then to the valid pixel range.
template <typename S>
Tensor<S> project(const Tensor<S>& x_adv, const Tensor<S>& x, double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("project: negative epsilon");
  if (x_adv.shape != x.shape) {
    throw std::invalid_argument("project: shape mismatch " + shape_string(x_adv.shape) + " vs " +
                                shape_string(x.shape));
  }
  Tensor<S> out(x.shape);
  const S eps = static_cast<S>(epsilon);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    S v = x_adv.data[i];
    const S lo = x.data[i] - eps;
    const S hi = x.data[i] + eps;
    v = v < lo ? lo : (v > hi ? hi : v);
    v = v < S(0) ? S(0) : (v > S(1) ? S(1) : v);
    out.data[i] = v;
  }
  return out;
}

namespace detail {

template <typename S>
S sign_of(S v) {
  return v > S(0) ? S(1) : (v < S(0) ? S(-1) : S(0));  // sign(0) = 0 by convention
}

// Applies the block transform to every image of an [N,32,32,3] batch.
template <typename S>
Tensor<S> transform_batch(const Tensor<S>& batch, const PermutationVector& perm, int block,
                          bool forward) {
  Tensor<S> out(batch.shape);
  const int64_t n = batch.dim(0);
  const int64_t per = batch.dim(1) * batch.dim(2) * batch.dim(3);
  for (int64_t i = 0; i < n; ++i) {
    transform_blocks_raw(out.data.data() + i * per, batch.data.data() + i * per,
                         static_cast<int>(batch.dim(1)), static_cast<int>(batch.dim(2)),
                         static_cast<int>(batch.dim(3)), block, perm, forward);
  }
  return out;
}

// Gradient of the summed per-sample cross entropy w.r.t. the model input, in
// eval mode: batch norm is then a per-sample affine map, so each row's
// gradient is independent of its batch mates.
template <typename S>
Tensor<S> input_gradient(Model<S>& model, const Tensor<S>& x, const std::vector<int>& y) {
  Graph<S> g;
  Var<S> xv = g.input(x, true);
  ModelForward<S> fwd = forward_model(model, g, xv, false);
  g.backward(softmax_cross_entropy(fwd.logits, y, Reduction::kSum));
  return xv.grad();
}

template <typename S>
std::vector<int> predict_through(Model<S>& model, const Tensor<S>& x,
                                 const PermutationVector* perm, int block) {
  if (perm == nullptr) return predict(model, x);
  Tensor<S> t = transform_batch(x, *perm, block, true);
  return predict(model, t);
}

template <typename S>
AdversarialResult<S> finish_result(Model<S>& model, Tensor<S> adv, const Tensor<S>& x,
                                   const std::vector<int>& y, const PermutationVector* perm,
                                   int block) {
  AdversarialResult<S> result;
  result.adv_images = std::move(adv);
  const std::vector<int> preds = predict_through(model, result.adv_images, perm, block);
  const int64_t n = x.dim(0);
  const int64_t per = x.numel() / n;
  result.success_mask.resize(static_cast<std::size_t>(n));
  result.linf_achieved.resize(static_cast<std::size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    S worst = S(0);
    for (int64_t p = 0; p < per; ++p) {
      const S d = std::abs(result.adv_images.data[static_cast<std::size_t>(i * per + p)] -
                           x.data[static_cast<std::size_t>(i * per + p)]);
      if (d > worst) worst = d;
    }
    result.linf_achieved[static_cast<std::size_t>(i)] = worst;
    result.success_mask[static_cast<std::size_t>(i)] =
        preds[static_cast<std::size_t>(i)] != y[static_cast<std::size_t>(i)] ? 1 : 0;
  }
  return result;
}

}  // namespace detail

// Projected gradient descent in the ℓ∞ ball. When `transform` is given the
// model consumes transform(x) and the gradient is carried back through it
// (the backward of a permutation is its inverse permutation).
template <typename S>
AdversarialResult<S> pgd(Model<S>& model, const Tensor<S>& x, const std::vector<int>& y,
                         const AttackConfig& cfg, const PermutationVector* transform = nullptr) {
  if (cfg.epsilon < 0.0) throw std::invalid_argument("pgd: negative epsilon");
  if (cfg.iterations < 0) throw std::invalid_argument("pgd: negative iteration count");
  if (x.rank() != 4 || static_cast<int64_t>(y.size()) != x.dim(0)) {
    throw std::invalid_argument("pgd: " + std::to_string(y.size()) + " labels for batch " +
                                shape_string(x.shape));
  }
  const int64_t n = x.dim(0);
  const int64_t per = x.numel() / std::max<int64_t>(n, 1);

  Tensor<S> adv = x;
  if (cfg.random_init && cfg.epsilon > 0.0) {
    for (int64_t i = 0; i < n; ++i) {
      ChaChaRng rng = ChaChaRng::from_seed(
          cfg.seed, ChaChaRng::kAttackInit,
          static_cast<uint64_t>(cfg.sample_index_base + i));
      for (int64_t p = 0; p < per; ++p) {
        const double u = rng.uniform_real();
        adv.data[static_cast<std::size_t>(i * per + p)] +=
            static_cast<S>((2.0 * u - 1.0) * cfg.epsilon);
      }
    }
    adv = project(adv, x, cfg.epsilon);
  }
  const S step = static_cast<S>(cfg.step_size);
  for (int it = 0; it < cfg.iterations; ++it) {
    Tensor<S> model_in =
        transform ? detail::transform_batch(adv, *transform, cfg.block, true) : adv;
    Tensor<S> grad = detail::input_gradient(model, model_in, y);
    if (transform) grad = detail::transform_batch(grad, *transform, cfg.block, false);
    for (std::size_t p = 0; p < adv.data.size(); ++p)
      adv.data[p] += step * detail::sign_of(grad.data[p]);
    adv = project(adv, x, cfg.epsilon);
  }
  return detail::finish_result(model, std::move(adv), x, y, transform, cfg.block);
}

// Single signed-gradient step of size ε: PGD(iterations=1, step=ε, no start).
template <typename S>
AdversarialResult<S> fgsm(Model<S>& model, const Tensor<S>& x, const std::vector<int>& y,
                          double epsilon, const PermutationVector* transform = nullptr) {
  AttackConfig cfg;
  cfg.epsilon = epsilon;
  cfg.step_size = epsilon;
  cfg.iterations = 1;
  cfg.random_init = false;
  return pgd(model, x, y, cfg, transform);
}

// Adaptive attack with a guessed key: shuffle with the guess, run PGD in the
// shuffled domain treating the defense's own stage as identity in the
// backward pass (or as the guessed permutation's exact gradient), then
// de-shuffle and re-project onto the ε-ball around the original input.
template <typename S>
AdversarialResult<S> bpda_attack(Model<S>& model, const Tensor<S>& x, const std::vector<int>& y,
                                 const AttackConfig& cfg) {
  if (cfg.guessed_key == nullptr) {
    throw std::invalid_argument("bpda_attack: a guessed key is required");
  }
  const int64_t n_perm = static_cast<int64_t>(cfg.block) * cfg.block * kCifarChannels;
  const PermutationVector perm = derive_permutation(*cfg.guessed_key, static_cast<uint32_t>(n_perm));

  if (cfg.bpda_backward == BpdaBackward::kExactGuessed) {
    return pgd(model, x, y, cfg, &perm);
  }

  Tensor<S> xs = detail::transform_batch(x, perm, cfg.block, true);
  AttackConfig inner = cfg;
  AdversarialResult<S> shuffled = pgd(model, xs, y, inner, nullptr);
  Tensor<S> adv = detail::transform_batch(shuffled.adv_images, perm, cfg.block, false);
  // Permutations preserve ℓ∞ distance, so this projection is a no-op
  // structurally; it re-asserts the bound against float quirks.
  adv = project(adv, x, cfg.epsilon);
  return detail::finish_result(model, std::move(adv), x, y, &perm, cfg.block);
}

}  // namespace shuffleguard
