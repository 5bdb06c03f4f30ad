#include <doctest.h>

#include <cmath>

#include "pinr/adam.hpp"
#include "pinr/errors.hpp"

using namespace pinr::diff;

TEST_CASE("adam leaves parameters alone under zero gradients") {
  Tensor p = Tensor::matrix(1, 3, {0.5, -1.0, 2.0});
  const Tensor before = p;
  AdamState state(AdamConfig{.learning_rate = 0.1});
  ParameterList params = {{ParamId{0}, &p}};
  for (int i = 0; i < 5; ++i) adam_step(params, {{ParamId{0}, Tensor({1, 3}, 0.0)}}, state);
  CHECK(p.bitwise_equal(before));
  CHECK(state.step_count == 5);
  for (double v : state.first_moment.at(ParamId{0}).data()) CHECK(v == 0.0);
  for (double v : state.second_moment.at(ParamId{0}).data()) CHECK(v == 0.0);
}

TEST_CASE("adam single step from the hand-executed update") {
  Tensor p = Tensor::scalar(1.0);
  AdamState state(AdamConfig{.learning_rate = 0.1, .beta1 = 0.9, .beta2 = 0.999, .epsilon = 1e-8});
  adam_step({{ParamId{0}, &p}}, {{ParamId{0}, Tensor::scalar(1.0)}}, state);
  // m = 0.1, v = 0.001; m_hat = 1, v_hat = 1
  const double m_hat = (0.1 * 1.0) / (1.0 - 0.9);
  const double v_hat = (0.001 * 1.0) / (1.0 - 0.999);
  CHECK(p[0] == doctest::Approx(1.0 - 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8)).epsilon(1e-15));
  CHECK(p[0] == doctest::Approx(1.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-15));
}

TEST_CASE("adam two steps match a scalar reference") {
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8, g = 0.7;
  double ref = 0.3, m = 0, v = 0;
  for (int t = 1; t <= 2; ++t) {
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    ref -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
  }
  Tensor p = Tensor::scalar(0.3);
  AdamState state(AdamConfig{lr, b1, b2, eps});
  for (int t = 0; t < 2; ++t) adam_step({{ParamId{4}, &p}}, {{ParamId{4}, Tensor::scalar(g)}}, state);
  CHECK(std::abs(p[0] - ref) <= 1e-15);
}

TEST_CASE("adam contract errors") {
  Tensor p({2, 2}, 0.0);
  AdamState state;
  CHECK_THROWS_AS(adam_step({{ParamId{0}, &p}}, {{ParamId{0}, Tensor({4}, 0.0)}}, state), pinr::ShapeError);
  CHECK_THROWS_AS(adam_step({{ParamId{0}, &p}}, {{ParamId{1}, Tensor({2, 2}, 0.0)}}, state),
                  pinr::ContractError);
  CHECK_THROWS_AS(AdamState(AdamConfig{.beta1 = 1.0}), pinr::ConfigError);
}
