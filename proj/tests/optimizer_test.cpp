#include <doctest.h>

#include <cmath>
#include <limits>

#include "ske/optimizer.hpp"

using ske::AdamW;
using ske::AdamWConfig;
using ske::Parameter;
using ske::Tensor;

TEST_CASE("warmup/linear-decay schedule hits its landmarks") {
  // 100 steps, 10% warmup
  CHECK(ske::warmup_linear_scale(1, 100, 0.1) == doctest::Approx(0.1));
  CHECK(ske::warmup_linear_scale(5, 100, 0.1) == doctest::Approx(0.5));
  CHECK(ske::warmup_linear_scale(10, 100, 0.1) == 1.0);  // exactly at the boundary
  CHECK(ske::warmup_linear_scale(55, 100, 0.1) == doctest::Approx(0.5));
  CHECK(ske::warmup_linear_scale(100, 100, 0.1) == 0.0);
  // no warmup
  CHECK(ske::warmup_linear_scale(1, 10, 0.0) == doctest::Approx(0.9));
  CHECK(ske::warmup_linear_scale(10, 10, 0.0) == 0.0);
  // monotone up then down
  double prev = 0.0;
  for (std::size_t t = 1; t <= 10; ++t) {
    const double s = ske::warmup_linear_scale(t, 100, 0.1);
    CHECK(s >= prev);
    prev = s;
  }
  for (std::size_t t = 10; t <= 100; ++t) {
    const double s = ske::warmup_linear_scale(t, 100, 0.1);
    CHECK(s <= prev);
    prev = s;
  }
}

TEST_CASE("zero gradient and zero weight decay leave parameters unchanged") {
  Parameter p("p", Tensor::of({1.5, -2.5, 0.25}));
  AdamWConfig config;
  config.weight_decay = 0.0;
  AdamW opt({&p}, config, 10);
  const Tensor before = p.value;
  for (int i = 0; i < 5; ++i) {
    p.zero_grad();
    opt.step();
  }
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(p.value[i] == before[i]);
}

TEST_CASE("zero learning rate leaves parameters bitwise unchanged") {
  Parameter p("p", Tensor::of({0.75, -0.125}));
  AdamWConfig config;
  config.lr = 0.0;
  AdamW opt({&p}, config, 4);
  const Tensor before = p.value;
  for (int i = 0; i < 4; ++i) {
    p.grad[0] = 0.3;
    p.grad[1] = -0.9;
    opt.step();
  }
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(p.value[i] == before[i]);
}

TEST_CASE("ten scripted scalar steps match an independent reference trace") {
  // reference AdamW written straight from the published update rule,
  // structured nothing like the production class
  const double lr = 0.01, beta1 = 0.9, beta2 = 0.999, eps = 1e-8, wd = 0.05;
  const std::size_t total = 10;
  const double warmup_prop = 0.2;
  const double grads[10] = {0.5, -0.3, 0.8, 0.1, -0.9, 0.2, 0.7, -0.4, 0.05, 0.6};

  double theta_ref = 1.25, m = 0.0, v = 0.0;
  std::vector<double> trace;
  for (std::size_t t = 1; t <= total; ++t) {
    const double warmup_steps = warmup_prop * static_cast<double>(total);
    double scale;
    if (static_cast<double>(t) < warmup_steps) {
      scale = static_cast<double>(t) / warmup_steps;
    } else {
      scale = (static_cast<double>(total) - static_cast<double>(t)) /
              (static_cast<double>(total) - warmup_steps);
    }
    const double g = grads[t - 1];
    m = beta1 * m + (1 - beta1) * g;
    v = beta2 * v + (1 - beta2) * g * g;
    const double mhat = m / (1 - std::pow(beta1, static_cast<double>(t)));
    const double vhat = v / (1 - std::pow(beta2, static_cast<double>(t)));
    theta_ref -= lr * scale * (mhat / (std::sqrt(vhat) + eps) + wd * theta_ref);
    trace.push_back(theta_ref);
  }

  Parameter p("theta", Tensor::of({1.25}));
  AdamW opt({&p}, {lr, beta1, beta2, eps, wd, warmup_prop}, total);
  for (std::size_t t = 0; t < total; ++t) {
    p.zero_grad();
    p.grad[0] = grads[t];
    opt.step();
    CHECK(std::abs(p.value[0] - trace[t]) < 1e-10);
  }
}

TEST_CASE("nonfinite gradients abort the step") {
  Parameter p("p", Tensor::of({1.0}));
  AdamW opt({&p}, {}, 3);
  p.grad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(opt.step(), ske::NumericError);
  p.grad[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(opt.step(), ske::NumericError);
}
