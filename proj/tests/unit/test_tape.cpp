#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pinr/adam.hpp"
#include "pinr/errors.hpp"
#include "pinr/tape.hpp"

using namespace pinr::diff;
using pinr::testing::central_difference;
using pinr::testing::gradient_error;
using pinr::testing::random_tensor;

TEST_CASE("matmul") {
  Tape tape;
  SUBCASE("identity") {
    auto i2 = tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
    auto b = tape.constant(Tensor::matrix(2, 1, {1, 2}));
    auto c = matmul(i2, b);
    CHECK(c.value().bitwise_equal(Tensor::matrix(2, 1, {1, 2})));
  }
  SUBCASE("zero") {
    std::mt19937_64 rng(1);
    auto z = tape.constant(Tensor({2, 2}, 0.0));
    auto b = tape.constant(random_tensor({2, 3}, rng));
    auto c = matmul(z, b);
    CHECK(c.shape() == Shape{2, 3});
    for (double v : c.value().data()) CHECK(v == 0.0);
  }
  SUBCASE("random 3x4 by 4x2 against a triple loop") {
    std::mt19937_64 rng(2);
    Tensor a = random_tensor({3, 4}, rng), b = random_tensor({4, 2}, rng);
    auto c = matmul(tape.constant(a), tape.constant(b));
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        double s = 0;
        for (std::size_t p = 0; p < 4; ++p) s = std::fma(a.at(i, p), b.at(p, j), s);
        CHECK(c.value().at(i, j) == s);
      }
    }
  }
  SUBCASE("shape errors name both shapes") {
    auto a = tape.constant(Tensor({2, 3}));
    auto b = tape.constant(Tensor({2, 3}));
    try {
      matmul(a, b);
      FAIL("expected a shape error");
    } catch (const pinr::ShapeError& e) {
      CHECK(std::string(e.what()).find("[2x3] * [2x3]") != std::string::npos);
    }
    CHECK_NOTHROW(matmul_bt(a, b));
  }
}

TEST_CASE("elementwise") {
  Tape tape;
  auto zero = tape.constant(Tensor({2, 3}, 0.0));
  for (double v : sin(zero).value().data()) CHECK(v == 0.0);

  auto x = tape.constant(Tensor::matrix(1, 3, {-0.5, 0.3, 1.7}));
  auto c = clamp01(x);
  CHECK(c.value()[0] == 0.0);
  CHECK(c.value()[1] == 0.3);
  CHECK(c.value()[2] == 1.0);

  std::mt19937_64 rng(4);
  Tensor a = random_tensor({5, 7}, rng), b = random_tensor({5, 7}, rng);
  auto m = mul(tape.constant(a), tape.constant(b));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(m.value()[i] == a[i] * b[i]);

  CHECK_THROWS_AS(add(tape.constant(Tensor({2, 3})), tape.constant(Tensor({3, 2}))), pinr::ShapeError);
  CHECK_THROWS_AS(mul(tape.constant(Tensor({1, 3})), tape.constant(Tensor({3}))), pinr::ShapeError);
}

TEST_CASE("backward on closed-form cases") {
  Tape tape;
  SUBCASE("sum is linear") {
    auto x = tape.parameter(ParamId{0}, Tensor({3}, 0.25));
    auto g = tape.backward(sum(x));
    for (double v : g.at(ParamId{0}).data()) CHECK(v == 1.0);
  }
  SUBCASE("sum of sin gives cos") {
    auto x = tape.parameter(ParamId{0}, Tensor::matrix(1, 2, {0.0, std::numbers::pi / 2}));
    auto g = tape.backward(sum(sin(x))).at(ParamId{0});
    CHECK(g[0] == 1.0);
    CHECK(std::abs(g[1]) < 1e-16);
  }
  SUBCASE("non-scalar loss is rejected") {
    auto x = tape.parameter(ParamId{0}, Tensor({3}, 1.0));
    CHECK_THROWS_AS(tape.backward(sin(x)), pinr::ContractError);
  }
  SUBCASE("unreachable parameters map to zeros") {
    auto x = tape.parameter(ParamId{0}, Tensor({2, 2}, 1.0));
    auto y = tape.parameter(ParamId{1}, Tensor({1, 4}, 1.0));
    auto g = tape.backward(sum(x));
    REQUIRE(g.contains(ParamId{1}));
    for (double v : g.at(ParamId{1}).data()) CHECK(v == 0.0);
    (void)y;
  }
  SUBCASE("a parameter used twice accumulates") {
    auto x = tape.parameter(ParamId{0}, Tensor::matrix(1, 2, {2.0, -3.0}));
    auto g = tape.backward(sum(mul(x, x))).at(ParamId{0});
    CHECK(g[0] == 4.0);
    CHECK(g[1] == -6.0);
  }
}

namespace {

// Two hidden sine layers on a batch of 2D points, written directly with the
// primitives. Bias rows are broadcast with a ones column through matmul.
struct TinyNet {
  Tensor w0, b0, w1, b1, w2, b2, c, c0;
  Tensor x;

  explicit TinyNet(std::mt19937_64& rng) {
    x = random_tensor({6, 2}, rng);
    w0 = random_tensor({5, 2}, rng, -3, 3);
    b0 = random_tensor({1, 5}, rng);
    w1 = random_tensor({4, 5}, rng);
    b1 = random_tensor({1, 4}, rng);
    w2 = random_tensor({3, 4}, rng);
    b2 = random_tensor({1, 3}, rng);
    c = random_tensor({2, 3}, rng);
    c0 = random_tensor({1, 2}, rng);
  }

  std::vector<Tensor*> params() { return {&w0, &b0, &w1, &b1, &w2, &b2, &c, &c0}; }

  Var loss(Tape& tape) {
    auto ps = params();
    std::vector<Var> v;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      v.push_back(tape.parameter(ParamId{static_cast<std::uint32_t>(i)}, *ps[i]));
    }
    auto ones = tape.constant(Tensor({x.rows(), 1}, 1.0));
    auto in = tape.constant(x);
    auto h = sin(add(matmul_bt(in, v[0]), matmul(ones, v[1])));
    h = sin(add(matmul_bt(h, v[2]), matmul(ones, v[3])));
    h = sin(add(matmul_bt(h, v[4]), matmul(ones, v[5])));
    auto out = add(matmul_bt(h, v[6]), matmul(ones, v[7]));
    auto target = tape.constant(Tensor({x.rows(), 2}, 0.3));
    auto d = sub(out, target);
    return scale(sum(mul(d, d)), 1.0 / static_cast<double>(x.rows()));
  }
};

}  // namespace

TEST_CASE("two-hidden-layer sine net gradients match central differences") {
  std::mt19937_64 rng(9);
  TinyNet net(rng);
  Tape tape;
  auto grads = tape.backward(net.loss(tape));

  auto ps = net.params();
  double worst = 0;
  for (std::size_t pi = 0; pi < ps.size(); ++pi) {
    auto& storage = ps[pi]->storage();
    for (std::size_t i = 0; i < storage.size(); ++i) {
      const double numeric = central_difference(storage, i, [&] {
        Tape t;
        return net.loss(t).value().item();
      });
      const double analytic = grads.at(ParamId{static_cast<std::uint32_t>(pi)})[i];
      worst = std::max(worst, gradient_error(analytic, numeric) /
                                  (std::abs(analytic) < 1e-3 ? 1e-3 : 1.0));
    }
  }
  // relative 1e-6, or absolute 1e-9 below 1e-3 (scaled above to share one bound)
  CHECK(worst <= 1e-6);
}

TEST_CASE("random composite expressions: reverse mode agrees with finite differences") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> pick(0, 6);
  for (int trial = 0; trial < 40; ++trial) {
    Tensor a = random_tensor({3, 4}, rng), b = random_tensor({3, 4}, rng),
           w = random_tensor({4, 4}, rng);
    std::vector<int> program(6);
    for (int& p : program) p = pick(rng);

    auto build = [&](Tape& tape) {
      auto va = tape.parameter(ParamId{0}, a);
      auto vb = tape.parameter(ParamId{1}, b);
      auto vw = tape.parameter(ParamId{2}, w);
      Var cur = va;
      for (int p : program) {
        switch (p) {
          case 0: cur = sin(cur); break;
          case 1: cur = cos(cur); break;
          case 2: cur = add(cur, vb); break;
          case 3: cur = sub(vb, cur); break;
          case 4: cur = mul(cur, vb); break;
          case 5: cur = scale(cur, -0.8); break;
          case 6: cur = matmul(cur, vw); break;
        }
      }
      return scale(sum(mul(cur, cur)), 1.0 / 12.0);
    };

    Tape tape;
    auto grads = tape.backward(build(tape));
    Tensor* ts[] = {&a, &b, &w};
    for (std::uint32_t pid = 0; pid < 3; ++pid) {
      auto& storage = ts[pid]->storage();
      for (std::size_t i = 0; i < storage.size(); ++i) {
        const double numeric = central_difference(storage, i, [&] {
          Tape t;
          return build(t).value().item();
        });
        const double analytic = grads.at(ParamId{pid})[i];
        if (std::abs(numeric) < 1e-3 && std::abs(analytic) < 1e-3) {
          CHECK(std::abs(analytic - numeric) <= 1e-9);
        } else {
          CHECK(gradient_error(analytic, numeric) <= 1e-6);
        }
      }
    }
  }
}

TEST_CASE("determinism and tape replay") {
  std::mt19937_64 rng(13);
  TinyNet net(rng);
  Tape t1, t2;
  auto l1 = net.loss(t1);
  auto g1 = t1.backward(l1);
  auto l2 = net.loss(t2);
  auto g2 = t2.backward(l2);
  CHECK(l1.value().bitwise_equal(l2.value()));
  for (auto& [id, g] : g1) CHECK(g.bitwise_equal(g2.at(id)));

  // A second forward on the same tape occupies a fresh node range and leaves
  // the first untouched.
  const std::size_t first_range = t1.size();
  auto l3 = net.loss(t1);
  CHECK(t1.size() == 2 * first_range);
  CHECK(l3.index >= first_range);
  CHECK(l1.value().bitwise_equal(l3.value()));
  auto g3 = t1.backward(l3);
  for (auto& [id, g] : g3) CHECK(g.bitwise_equal(g1.at(id)));
}

TEST_CASE("clamp01 passes gradient only strictly inside the unit interval") {
  Tape tape;
  auto x = tape.parameter(ParamId{0}, Tensor::matrix(1, 3, {-0.5, 0.3, 1.7}));
  auto g = tape.backward(sum(clamp01(x))).at(ParamId{0});
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 1.0);
  CHECK(g[2] == 0.0);
}
