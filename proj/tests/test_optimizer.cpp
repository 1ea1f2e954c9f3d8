#include <doctest.h>

#include "shuffleguard/optimizer.hpp"

using namespace shuffleguard;

namespace {

std::vector<NamedTensor<double>> one_param(double v) {
  return {{"p", Tensor<double>({1}, {v})}};
}

}  // namespace

TEST_CASE("plain gradient step moves against the gradient") {
  SgdConfig<double> cfg{0.1, 0.0, 0.0, 40, 0.1};
  SgdOptimizer<double> opt(cfg);
  auto params = one_param(0.0);
  opt.step(params, {Tensor<double>({1}, {1.0})}, 0.1);
  CHECK(params[0].value.data[0] == doctest::Approx(-0.1));
}

TEST_CASE("momentum accumulates the two-step hand recurrence") {
  const double g = 0.7;
  SgdConfig<double> cfg{0.1, 0.9, 0.0, 40, 0.1};
  SgdOptimizer<double> opt(cfg);
  auto params = one_param(0.0);
  Tensor<double> grad({1}, {g});
  opt.step(params, {grad}, 0.1);
  CHECK(opt.velocity()[0].data[0] == doctest::Approx(g));
  opt.step(params, {grad}, 0.1);
  CHECK(opt.velocity()[0].data[0] == doctest::Approx(1.9 * g));
  CHECK(params[0].value.data[0] == doctest::Approx(-0.1 * g - 0.1 * 1.9 * g));
}

TEST_CASE("weight decay contributes even with a zero gradient") {
  SgdConfig<double> cfg{0.1, 0.0, 0.5, 40, 0.1};
  SgdOptimizer<double> opt(cfg);
  auto params = one_param(2.0);
  opt.step(params, {Tensor<double>({1}, {0.0})}, 0.1);
  // v = 0.5 * 2.0 = 1.0; p = 2.0 - 0.1 * 1.0
  CHECK(params[0].value.data[0] == doctest::Approx(1.9));
}

TEST_CASE("step scheduler decays by gamma at every step boundary") {
  SgdOptimizer<double> opt(SgdConfig<double>{});
  CHECK(opt.learning_rate(0) == doctest::Approx(0.1));
  CHECK(opt.learning_rate(39) == doctest::Approx(0.1));
  CHECK(opt.learning_rate(40) == doctest::Approx(0.01));
  CHECK(opt.learning_rate(79) == doctest::Approx(0.01));
  CHECK(opt.learning_rate(80) == doctest::Approx(0.001));
  // lr after k boundary crossings equals lr * gamma^k.
  SgdOptimizer<double> fast(SgdConfig<double>{0.5, 0.9, 0.0, 3, 0.25});
  double expect = 0.5;
  for (int k = 0; k < 5; ++k) {
    CHECK(fast.learning_rate(3 * k) == doctest::Approx(expect).epsilon(1e-12));
    expect *= 0.25;
  }
}

TEST_CASE("missing or misshapen gradients are an invalid state") {
  SgdOptimizer<double> opt(SgdConfig<double>{});
  auto params = one_param(0.0);
  CHECK_THROWS_AS(opt.step(params, {}, 0.1), std::logic_error);
  CHECK_THROWS_AS(opt.step(params, {Tensor<double>({2})}, 0.1), std::logic_error);
}

TEST_CASE("nonsense hyperparameters are rejected up front") {
  CHECK_THROWS_AS(SgdOptimizer<double>(SgdConfig<double>{0.0, 0.9, 0.0, 40, 0.1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SgdOptimizer<double>(SgdConfig<double>{0.1, 0.9, 0.0, 0, 0.1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SgdOptimizer<double>(SgdConfig<double>{0.1, -0.1, 0.0, 40, 0.1}),
                  std::invalid_argument);
}
