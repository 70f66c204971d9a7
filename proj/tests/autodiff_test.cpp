#include <doctest.h>

#include <cmath>

#include "ske/autodiff.hpp"
#include "ske/gradcheck.hpp"

using ske::Parameter;
using ske::Tape;
using ske::Tensor;
using ske::Var;

namespace {

Parameter random_param(const std::string& name, std::vector<std::size_t> shape, ske::Rng& rng,
                       double lo = -1.0, double hi = 1.0) {
  Parameter p(name, Tensor(std::move(shape)));
  for (double& v : p.value.data()) v = rng.next_uniform(lo, hi);
  return p;
}

double check_loss(const std::function<double(bool)>& loss, std::vector<Parameter*> params) {
  auto report = ske::grad_check(loss, params);
  return report.max_rel_error;
}

}  // namespace

TEST_CASE("quadratic loss recovers the analytic gradient") {
  ske::Rng rng(3);
  Parameter x = random_param("x", {6}, rng, 0.25, 1.0);
  auto loss = [&](bool grads) {
    Tape tape;
    Var v = tape.param(x);
    Var out = tape.sum(tape.mul(v, v));
    if (grads) tape.backward(out);
    return out->value[0];
  };
  x.zero_grad();
  loss(true);
  for (std::size_t i = 0; i < x.value.size(); ++i) {
    CHECK(x.grad[i] == doctest::Approx(2.0 * x.value[i]).epsilon(1e-12));
  }
  CHECK(check_loss(loss, {&x}) < 1e-8);
}

TEST_CASE("every primitive passes central finite differences") {
  ske::Rng rng(11);
  Parameter a = random_param("a", {5}, rng);
  Parameter b = random_param("b", {5}, rng);
  Parameter w = random_param("w", {4, 5}, rng);
  Parameter bias = random_param("bias", {4}, rng);
  Parameter wh = random_param("wh", {4, 3}, rng);
  Parameter h = random_param("h", {3}, rng);

  auto composite = [&](bool grads) {
    Tape tape;
    Var va = tape.param(a);
    Var vb = tape.param(b);
    Var sum = tape.add(va, vb);
    Var diff = tape.sub(va, vb);
    Var prod = tape.mul(sum, diff);
    Var act = tape.tanh(tape.sigmoid(prod));
    Var affine = tape.affine(w, bias, act);
    Var gate = tape.gate_preact(w, act, wh, tape.param(h), bias);
    const Var parts[] = {tape.softmax(affine), tape.sigmoid(gate)};
    Var merged = tape.concat(parts);
    Var out = tape.sum(tape.mul(merged, merged));
    if (grads) tape.backward(out);
    return out->value[0];
  };
  CHECK(check_loss(composite, {&a, &b, &w, &bias, &wh, &h}) < 1e-4);
}

TEST_CASE("softmax rows are a probability distribution") {
  ske::Rng rng(5);
  for (int round = 0; round < 50; ++round) {
    Tape tape;
    Tensor logits({4});
    for (double& v : logits.data()) v = rng.next_uniform(-30.0, 30.0);
    Var out = tape.softmax(tape.constant(logits));
    double total = 0.0;
    for (double v : out->value.data()) {
      CHECK(v > 0.0);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    Var sig = tape.sigmoid(tape.constant(logits));
    for (double v : sig->value.data()) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("weighted cross entropy matches its closed forms") {
  // perfect predictions -> loss 0 (up to the log clamp)
  {
    Tape tape;
    Tensor probs({3, 2});
    probs.at(0, 0) = 0.0; probs.at(0, 1) = 1.0;  // positive scored 1
    probs.at(1, 0) = 1.0; probs.at(1, 1) = 0.0;  // negative scored 0
    probs.at(2, 0) = 1.0; probs.at(2, 1) = 0.0;
    Var loss = tape.weighted_cross_entropy(tape.constant(probs), {true, false, false}, 10.0);
    CHECK(std::abs(loss->value[0]) < 1e-9);
  }
  // single positive at h = 0.5 with unit weight -> ln 2
  {
    Tape tape;
    Tensor probs({1, 2});
    probs.at(0, 0) = 0.5;
    probs.at(0, 1) = 0.5;
    Var loss = tape.weighted_cross_entropy(tape.constant(probs), {true}, 1.0);
    CHECK(loss->value[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("weighted cross entropy equals a naive summation oracle") {
  ske::Rng rng(17);
  for (int round = 0; round < 20; ++round) {
    const std::size_t m = 1 + rng.next_index(12);
    Tensor probs({m, 2});
    std::vector<bool> positive;
    for (std::size_t i = 0; i < m; ++i) {
      const double h = rng.next_uniform(0.01, 0.99);
      probs.at(i, 0) = 1.0 - h;
      probs.at(i, 1) = h;
      positive.push_back(rng.next_double() < 0.3);
    }
    const double pos_weight = 1.0 + rng.next_index(20);

    double expected = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      expected -= positive[i] ? pos_weight * std::log(probs.at(i, 1))
                              : std::log(1.0 - probs.at(i, 1));
    }

    Tape tape;
    Var loss = tape.weighted_cross_entropy(tape.constant(probs), positive, pos_weight);
    CHECK(loss->value[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(loss->value[0] >= 0.0);
  }
}

TEST_CASE("pos_weight of one reduces to unweighted cross entropy") {
  Tensor probs({2, 2});
  probs.at(0, 0) = 0.3; probs.at(0, 1) = 0.7;
  probs.at(1, 0) = 0.8; probs.at(1, 1) = 0.2;
  Tape tape;
  Var weighted = tape.weighted_cross_entropy(tape.constant(probs), {true, false}, 1.0);
  const double unweighted = -(std::log(0.7) + std::log(0.8));
  CHECK(weighted->value[0] == doctest::Approx(unweighted).epsilon(1e-12));
}

TEST_CASE("hinge loss closed forms and oracle") {
  // margin satisfied everywhere -> 0
  {
    Tape tape;
    Var loss =
        tape.hinge_loss(tape.constant(Tensor::of({0.9, 0.85, 0.2})), {true, true, false}, 0.5);
    CHECK(loss->value[0] == 0.0);
  }
  // one active pair: 0.5 - (0.2 - 0.9) = 1.2
  {
    Tape tape;
    Var loss = tape.hinge_loss(tape.constant(Tensor::of({0.2, 0.9})), {true, false}, 0.5);
    CHECK(loss->value[0] == doctest::Approx(1.2).epsilon(1e-12));
  }
  // random scores vs an independent pair enumeration
  ske::Rng rng(23);
  for (int round = 0; round < 20; ++round) {
    const std::size_t m = 2 + rng.next_index(10);
    Tensor scores({m});
    std::vector<bool> positive;
    for (std::size_t i = 0; i < m; ++i) {
      scores[i] = rng.next_uniform(0.0, 1.0);
      positive.push_back(rng.next_double() < 0.4);
    }
    const double margin = rng.next_double();
    double expected = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t n = 0; n < m; ++n) {
        if (positive[p] && !positive[n]) {
          expected += std::max(0.0, margin - (scores[p] - scores[n]));
        }
      }
    }
    Tape tape;
    Var loss = tape.hinge_loss(tape.constant(scores), positive, margin);
    CHECK(loss->value[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(loss->value[0] >= 0.0);
  }
}

TEST_CASE("hinge loss is zero exactly when every pair clears the margin") {
  const double margin = 0.25;
  Tensor scores = Tensor::of({0.9, 0.64, 0.3, 0.2});
  std::vector<bool> positive = {true, true, false, false};
  Tape tape;
  Var loss = tape.hinge_loss(tape.constant(scores), positive, margin);
  // min positive (0.64) >= max negative (0.3) + margin
  CHECK(loss->value[0] == 0.0);

  Tensor tight = Tensor::of({0.9, 0.54, 0.3, 0.2});
  Tape tape2;
  Var loss2 = tape2.hinge_loss(tape2.constant(tight), positive, margin);
  CHECK(loss2->value[0] > 0.0);  // 0.54 < 0.3 + 0.25
}

TEST_CASE("losses are differentiable end to end") {
  ske::Rng rng(31);
  Parameter w = random_param("w", {2, 6}, rng, -0.5, 0.5);
  Parameter b = random_param("b", {2}, rng, -0.5, 0.5);
  Parameter x = random_param("x", {6}, rng);
  std::vector<bool> positive = {true, false, false};

  auto cls_loss = [&](bool grads) {
    Tape tape;
    Var input = tape.param(x);
    std::vector<Var> rows;
    for (int i = 0; i < 3; ++i) {
      rows.push_back(tape.softmax(tape.affine(w, b, tape.sigmoid(input))));
    }
    Var probs = tape.stack_rows(rows);
    Var loss = tape.weighted_cross_entropy(probs, positive, 7.0);
    if (grads) tape.backward(loss);
    return loss->value[0];
  };
  CHECK(check_loss(cls_loss, {&w, &b, &x}) < 1e-4);

  Parameter w1 = random_param("w1", {1, 6}, rng, -0.5, 0.5);
  Parameter b1 = random_param("b1", {1}, rng, -0.5, 0.5);
  auto rank_loss = [&](bool grads) {
    Tape tape;
    Var input = tape.param(x);
    std::vector<Var> rows;
    for (int i = 0; i < 3; ++i) {
      Var shifted = i == 0 ? input : tape.sigmoid(input);
      rows.push_back(tape.sigmoid(tape.affine(w1, b1, shifted)));
    }
    Var scores = tape.concat(rows);
    Var loss = tape.hinge_loss(scores, positive, 0.4);
    if (grads) tape.backward(loss);
    return loss->value[0];
  };
  CHECK(check_loss(rank_loss, {&w1, &b1, &x}) < 1e-4);
}

TEST_CASE("grad_check flags a corrupted backward rule") {
  ske::Rng rng(41);
  Parameter x = random_param("x", {4}, rng, 0.3, 1.0);
  // analytic gradient deliberately scaled by 3
  auto corrupted = [&](bool grads) {
    double value = 0.0;
    for (std::size_t i = 0; i < x.value.size(); ++i) value += x.value[i] * x.value[i];
    if (grads) {
      for (std::size_t i = 0; i < x.value.size(); ++i) x.grad[i] += 6.0 * x.value[i];
    }
    return value;
  };
  auto report = ske::grad_check(corrupted, {&x});
  CHECK(report.max_rel_error > 1e-2);
}

TEST_CASE("grad_check rejects a nondeterministic loss") {
  ske::Rng noise(7);
  Parameter x("x", Tensor::of({1.0}));
  auto flaky = [&](bool) { return noise.next_double(); };
  CHECK_THROWS_AS(ske::grad_check(flaky, {&x}), ske::NumericError);
}

TEST_CASE("tape guards against shape and reuse mistakes") {
  Tape tape;
  Var a = tape.constant(Tensor::of({1.0, 2.0}));
  Var b = tape.constant(Tensor::of({1.0, 2.0, 3.0}));
  CHECK_THROWS_AS(tape.add(a, b), ske::NumericError);
  CHECK_THROWS_AS(tape.backward(a), ske::NumericError);  // non-scalar output

  Var c = tape.sum(a);
  tape.backward(c);
  CHECK_THROWS_AS(tape.backward(c), ske::NumericError);  // backward runs once
}
