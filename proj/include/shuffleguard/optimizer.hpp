#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "shuffleguard/tensor.hpp"

namespace shuffleguard {

template <typename S>
struct SgdConfig {
  S lr = S(0.1);
  S momentum = S(0.9);
  S weight_decay = S(5e-4);
  int64_t lr_step_epochs = 40;
  S lr_gamma = S(0.1);
};

// SGD with momentum and decoupled-from-nothing weight decay (decay folded into
// the gradient, the classic formulation):
//   v <- momentum * v + (grad + weight_decay * param)
//   param <- param - lr * v
template <typename S>
class SgdOptimizer {
 public:
  explicit SgdOptimizer(SgdConfig<S> cfg) : cfg_(cfg) {
    if (cfg.lr <= S(0)) throw std::invalid_argument("sgd: learning rate must be positive");
    if (cfg.lr_step_epochs <= 0) throw std::invalid_argument("sgd: lr_step_epochs must be positive");
    if (cfg.momentum < S(0) || cfg.weight_decay < S(0) || cfg.lr_gamma <= S(0))
      throw std::invalid_argument("sgd: momentum and weight_decay must be >= 0, gamma > 0");
  }

  const SgdConfig<S>& config() const { return cfg_; }

  // Step scheduler: lr * gamma^floor(epoch / step_epochs), by repeated
  // multiplication so every build computes the identical float sequence.
  S learning_rate(int64_t epoch) const {
    S lr = cfg_.lr;
    for (int64_t i = 0; i < epoch / cfg_.lr_step_epochs; ++i) lr *= cfg_.lr_gamma;
    return lr;
  }

  void step(std::vector<NamedTensor<S>>& params, const std::vector<Tensor<S>>& grads, S lr) {
    if (grads.size() != params.size()) {
      throw std::logic_error("sgd step: " + std::to_string(grads.size()) + " gradients for " +
                             std::to_string(params.size()) + " parameters");
    }
    if (velocity_.empty()) {
      velocity_.reserve(params.size());
      for (const auto& p : params) velocity_.emplace_back(p.value.shape);
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor<S>& p = params[i].value;
      const Tensor<S>& g = grads[i];
      if (g.shape != p.shape) {
        throw std::logic_error("sgd step: gradient missing or misshapen for parameter '" +
                               params[i].name + "' (" + shape_string(g.shape) + " vs " +
                               shape_string(p.shape) + ")");
      }
      Tensor<S>& v = velocity_[i];
      v.flat() = cfg_.momentum * v.flat() + (g.flat() + cfg_.weight_decay * p.flat());
      p.flat() -= lr * v.flat();
    }
  }

  std::vector<Tensor<S>>& velocity() { return velocity_; }
  const std::vector<Tensor<S>>& velocity() const { return velocity_; }

 private:
  SgdConfig<S> cfg_;
  std::vector<Tensor<S>> velocity_;
};

}  // namespace shuffleguard
