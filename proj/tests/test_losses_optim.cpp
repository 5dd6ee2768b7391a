#include <doctest.h>

#include <cmath>
#include <vector>

#include "binpack/errors.hpp"
#include "binpack/losses.hpp"
#include "binpack/optimizer.hpp"
#include "binpack/rng.hpp"
#include "oracles.hpp"

using namespace binpack;

TEST_SUITE("losses") {

TEST_CASE("mse value and gradient") {
  const TensorND pred({2, 2}, {1.0, 2.0, 3.0, 4.0});
  const TensorND target({2, 2}, {0.0, 2.0, 5.0, 2.0});
  const LossResult r = mse(pred, target);
  CHECK(r.value == doctest::Approx((1.0 + 0.0 + 4.0 + 4.0) / 4.0));
  CHECK(r.grad[0] == doctest::Approx(2.0 * 1.0 / 4.0));
  CHECK(r.grad[2] == doctest::Approx(2.0 * -2.0 / 4.0));
  CHECK_THROWS_AS(mse(pred, TensorND({3}, 0.0)), ShapeMismatch);
}

TEST_CASE("mse gradient matches finite differences") {
  RandomEngine rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    TensorND pred({4, 3}, 0.0);
    TensorND target({4, 3}, 0.0);
    for (double& v : pred.values()) v = rng.normal();
    for (double& v : target.values()) v = rng.normal();
    const LossResult r = mse(pred, target);
    for (int probe = 0; probe < 6; ++probe) {
      const std::size_t i = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(pred.size()) - 1));
      auto f = [&]() { return mse(pred, target).value; };
      const double fd = oracle::central_diff(f, pred.values()[i], 1e-6);
      CHECK(oracle::rel_err(fd, r.grad[i]) < 1e-4);
    }
  }
}

TEST_CASE("masked cross entropy zeroes masked classes exactly") {
  const TensorND logits({1, 4}, {2.0, 1.0, 100.0, 0.5});
  const std::vector<std::vector<std::uint8_t>> mask = {{1, 1, 0, 1}};
  const LossResult r = masked_cross_entropy(logits, {0}, mask);
  // Softmax over the three admissible logits only.
  const double z = std::exp(2.0) + std::exp(1.0) + std::exp(0.5);
  CHECK(r.value == doctest::Approx(-std::log(std::exp(2.0) / z)));
  CHECK(r.grad[2] == 0.0);  // exactly, not approximately
  CHECK(r.grad[0] == doctest::Approx(std::exp(2.0) / z - 1.0));
  CHECK(r.grad[1] == doctest::Approx(std::exp(1.0) / z));
}

TEST_CASE("masked cross entropy raises on bad rows") {
  const TensorND logits({1, 3}, {0.0, 0.0, 0.0});
  CHECK_THROWS_AS(masked_cross_entropy(logits, {1}, {{1, 0, 1}}), MaskedTarget);
  // A fully masked row always masks its target, so the target check fires.
  CHECK_THROWS_AS(masked_cross_entropy(logits, {0}, {{0, 0, 0}}), MaskedTarget);
  CHECK_THROWS_AS(masked_cross_entropy(logits, {3}, {{1, 1, 1}}), ShapeMismatch);
}

TEST_CASE("masked cross entropy is stable under huge logits") {
  const TensorND logits({1, 3}, {1000.0, 999.0, -1000.0});
  const LossResult r = masked_cross_entropy(logits, {0}, {{1, 1, 1}});
  CHECK(std::isfinite(r.value));
  CHECK(r.value == doctest::Approx(-std::log(1.0 / (1.0 + std::exp(-1.0)))));
}

TEST_CASE("masked cross entropy gradient matches finite differences") {
  RandomEngine rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    TensorND logits({3, 6}, 0.0);
    for (double& v : logits.values()) v = 2.0 * rng.normal();
    std::vector<std::vector<std::uint8_t>> mask(3,
                                                std::vector<std::uint8_t>(6, 0));
    std::vector<int> target(3, 0);
    for (int r2 = 0; r2 < 3; ++r2) {
      int on = 0;
      for (int k = 0; k < 6; ++k) {
        mask[static_cast<std::size_t>(r2)][static_cast<std::size_t>(k)] =
            rng.uniform() < 0.6 ? 1 : 0;
        if (mask[static_cast<std::size_t>(r2)][static_cast<std::size_t>(k)]) ++on;
      }
      if (on == 0) {
        mask[static_cast<std::size_t>(r2)][0] = 1;
      }
      int pick;
      do {
        pick = rng.uniform_int(0, 5);
      } while (!mask[static_cast<std::size_t>(r2)][static_cast<std::size_t>(pick)]);
      target[static_cast<std::size_t>(r2)] = pick;
    }
    const LossResult r = masked_cross_entropy(logits, target, mask);
    for (int probe = 0; probe < 8; ++probe) {
      const std::size_t i = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(logits.size()) - 1));
      auto f = [&]() { return masked_cross_entropy(logits, target, mask).value; };
      const double fd = oracle::central_diff(f, logits.values()[i], 1e-6);
      CHECK(oracle::rel_err(fd, r.grad[i]) < 1e-4);
    }
  }
}

TEST_CASE("binary cross entropy value, clipping, and gradient") {
  const TensorND probs({1, 2}, {0.8, 0.3});
  const TensorND labels({1, 2}, {1.0, 0.0});
  const LossResult r = binary_cross_entropy(probs, labels);
  CHECK(r.value ==
        doctest::Approx(-(std::log(0.8) + std::log(0.7)) / 2.0));
  // Saturated predictions stay finite thanks to clipping.
  const LossResult sat = binary_cross_entropy(TensorND({1, 2}, {0.0, 1.0}),
                                              TensorND({1, 2}, {1.0, 0.0}));
  CHECK(std::isfinite(sat.value));
  CHECK(std::isfinite(sat.grad[0]));

  RandomEngine rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    TensorND p({2, 4}, 0.0);
    TensorND y({2, 4}, 0.0);
    for (double& v : p.values()) v = 0.05 + 0.9 * rng.uniform();
    for (double& v : y.values()) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
    const LossResult rr = binary_cross_entropy(p, y);
    for (int probe = 0; probe < 6; ++probe) {
      const std::size_t i = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(p.size()) - 1));
      auto f = [&]() { return binary_cross_entropy(p, y).value; };
      const double fd = oracle::central_diff(f, p.values()[i], 1e-7);
      CHECK(oracle::rel_err(fd, rr.grad[i]) < 1e-4);
    }
  }
}

}  // TEST_SUITE

TEST_SUITE("optimizer") {

TEST_CASE("one adam step matches the hand formula") {
  TensorND p({3}, {1.0, -2.0, 0.5});
  TensorND g({3}, {0.1, -0.2, 0.0});
  AdamConfig cfg;
  cfg.lr = 0.01;
  Adam opt({&p}, cfg);
  opt.step({&g});
  for (int i = 0; i < 3; ++i) {
    const double gi = g[static_cast<std::size_t>(i)];
    const double m = (1 - cfg.beta1) * gi;
    const double v = (1 - cfg.beta2) * gi * gi;
    const double mhat = m / (1 - cfg.beta1);
    const double vhat = v / (1 - cfg.beta2);
    const double want = (i == 0 ? 1.0 : (i == 1 ? -2.0 : 0.5)) -
                        cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    CHECK(p[static_cast<std::size_t>(i)] == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK(opt.step_count() == 1);
}

TEST_CASE("many adam steps match an independent reference") {
  RandomEngine rng(5);
  TensorND p({4}, 0.0);
  for (double& v : p.values()) v = rng.normal();
  std::vector<double> ref = p.values();
  AdamConfig cfg;
  cfg.lr = 3e-3;
  Adam opt({&p}, cfg);
  std::vector<double> m(4, 0.0), v(4, 0.0);
  for (int t = 1; t <= 50; ++t) {
    TensorND g({4}, 0.0);
    for (double& x : g.values()) x = rng.normal();
    for (int i = 0; i < 4; ++i) {
      const double gi = g[static_cast<std::size_t>(i)];
      m[static_cast<std::size_t>(i)] =
          cfg.beta1 * m[static_cast<std::size_t>(i)] + (1 - cfg.beta1) * gi;
      v[static_cast<std::size_t>(i)] =
          cfg.beta2 * v[static_cast<std::size_t>(i)] + (1 - cfg.beta2) * gi * gi;
      const double mhat =
          m[static_cast<std::size_t>(i)] / (1 - std::pow(cfg.beta1, t));
      const double vhat =
          v[static_cast<std::size_t>(i)] / (1 - std::pow(cfg.beta2, t));
      ref[static_cast<std::size_t>(i)] -=
          cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    opt.step({&g});
    for (int i = 0; i < 4; ++i) {
      REQUIRE(p[static_cast<std::size_t>(i)] ==
              doctest::Approx(ref[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("adam rejects shape drift and non-finite gradients") {
  TensorND p({2}, 0.0);
  Adam opt({&p}, AdamConfig{});
  TensorND bad_shape({3}, 0.0);
  CHECK_THROWS_AS(opt.step({&bad_shape}), ShapeMismatch);
  TensorND bad_val({2}, {1.0, std::nan("")});
  CHECK_THROWS_AS(opt.step({&bad_val}), NonFiniteValue);
}

TEST_CASE("moment buffers are exposed for checkpointing") {
  TensorND p({2}, {1.0, 1.0});
  Adam opt({&p}, AdamConfig{});
  TensorND g({2}, {0.5, -0.5});
  opt.step({&g});
  CHECK(opt.first_moments().size() == 1);
  CHECK(opt.first_moments()[0][0] == doctest::Approx(0.05));
  CHECK(opt.second_moments()[0][0] == doctest::Approx(0.00025));
  opt.set_step_count(7);
  CHECK(opt.step_count() == 7);
}

}  // TEST_SUITE
