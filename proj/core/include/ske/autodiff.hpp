#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ske/tensor.hpp"

namespace ske {

// Named leaf with a persistent gradient accumulator. Parameters live
// outside the tape; ops that consume them capture a pointer and push
// gradients straight into `grad` during the backward pass.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string name_, Tensor value_)
      : name(std::move(name_)), value(std::move(value_)), grad(value.shape()) {}

  void zero_grad() { grad.fill(0.0); }
};

// One entry in the computation graph. Nodes are appended in evaluation
// order, which is a valid topological order, so the backward pass walks
// the tape once in reverse.
struct Node {
  Tensor value;
  Tensor grad;

  virtual ~Node() = default;
  virtual void backward() {}

 protected:
  Node() = default;
  explicit Node(Tensor v) : value(std::move(v)), grad(value.shape()) {}
  friend class Tape;
};

using Var = Node*;

// Owns one forward/backward episode. Build ops eagerly (values are
// computed at construction), then call backward(loss) to accumulate
// gradients into intermediate nodes and captured Parameters.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t size() const { return nodes_.size(); }

  // Leaf holding a constant value; gradients stop here.
  Var constant(Tensor value);

  // Leaf reading a whole parameter; backward adds into its grad.
  Var param(Parameter& p);

  // Row `row` of a parameter matrix (embedding lookup). Backward
  // scatter-adds into the parameter's grad.
  Var param_row(Parameter& table, std::size_t row);

  // W x + b with W: [m,n], x: [n], b: [m].
  Var affine(Parameter& w, Parameter& b, Var x);

  // Wx x + Wh h + b — the fused preactivation of one recurrent gate.
  Var gate_preact(Parameter& wx, Var x, Parameter& wh, Var h, Parameter& b);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var sigmoid(Var x);
  Var tanh(Var x);
  Var sum(Var x);  // scalar [1]
  Var concat(std::span<const Var> parts);        // vectors -> one vector
  Var stack_rows(std::span<const Var> rows);     // equal-width vectors -> matrix
  Var softmax(Var x);                            // vector -> vector

  // -[ pos_weight * sum_p log P(p,1) + sum_n log P(n,0) ] over a [M,2]
  // row-stochastic matrix; log arguments clamped to [1e-12, 1-1e-12].
  Var weighted_cross_entropy(Var probs, const std::vector<bool>& positive, double pos_weight);

  // sum over positive/negative pairs of max(0, margin - (h_p - h_n)) for a
  // scalar score vector h: [M].
  Var hinge_loss(Var scores, const std::vector<bool>& positive, double margin);

  // Seeds d(output)/d(output) = seed and propagates through every node
  // recorded so far. May be called once per tape.
  void backward(Var output, double seed = 1.0);

 private:
  template <typename T, typename... Args>
  Var emplace(Args&&... args);

  std::vector<std::unique_ptr<Node>> nodes_;
  bool backward_done_ = false;
};

}  // namespace ske
