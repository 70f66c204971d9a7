#include "ske/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "ske/common.hpp"

namespace ske {
namespace {

constexpr double kLogClamp = 1e-12;

void check_vector(const Var v, const char* who) {
  if (v->value.rank() != 1) throw NumericError(std::string(who) + ": expected a rank-1 operand");
}

// y += W x for row-major W [m,n].
void matvec_into(const Tensor& w, std::span<const double> x, std::span<double> y) {
  const std::size_t m = w.rows(), n = w.cols();
  for (std::size_t r = 0; r < m; ++r) {
    const double* wr = w.data().data() + r * n;
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += wr[c] * x[c];
    y[r] += acc;
  }
}

// grad_w += g x^T ; grad_x += W^T g.
void matvec_backward(const Tensor& w, Tensor& grad_w, std::span<const double> x,
                     std::span<double> grad_x, std::span<const double> g) {
  const std::size_t m = w.rows(), n = w.cols();
  for (std::size_t r = 0; r < m; ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    double* gwr = grad_w.data().data() + r * n;
    const double* wr = w.data().data() + r * n;
    for (std::size_t c = 0; c < n; ++c) {
      gwr[c] += gr * x[c];
      grad_x[c] += wr[c] * gr;
    }
  }
}

struct ConstantNode final : Node {
  explicit ConstantNode(Tensor v) : Node(std::move(v)) {}
};

struct ParamNode final : Node {
  Parameter* p;

  explicit ParamNode(Parameter& p_) : Node(p_.value), p(&p_) {}

  void backward() override {
    for (std::size_t i = 0; i < grad.size(); ++i) p->grad[i] += grad[i];
  }
};

struct ParamRowNode final : Node {
  Parameter* table;
  std::size_t row;

  ParamRowNode(Parameter& t, std::size_t r)
      : Node(Tensor({t.value.cols()},
                    std::vector<double>(t.value.row(r).begin(), t.value.row(r).end()))),
        table(&t),
        row(r) {}

  void backward() override {
    auto dst = table->grad.row(row);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += grad[i];
  }
};

struct AffineNode final : Node {
  Parameter* w;
  Parameter* b;
  Var x;

  AffineNode(Parameter& w_, Parameter& b_, Var x_) : w(&w_), b(&b_), x(x_) {
    value = b->value;
    matvec_into(w->value, x->value.data(), value.data());
    grad = Tensor(value.shape());
  }

  void backward() override {
    matvec_backward(w->value, w->grad, x->value.data(), x->grad.data(), grad.data());
    for (std::size_t i = 0; i < grad.size(); ++i) b->grad[i] += grad[i];
  }
};

struct GatePreactNode final : Node {
  Parameter* wx;
  Parameter* wh;
  Parameter* b;
  Var x;
  Var h;

  GatePreactNode(Parameter& wx_, Var x_, Parameter& wh_, Var h_, Parameter& b_)
      : wx(&wx_), wh(&wh_), b(&b_), x(x_), h(h_) {
    value = b->value;
    matvec_into(wx->value, x->value.data(), value.data());
    matvec_into(wh->value, h->value.data(), value.data());
    grad = Tensor(value.shape());
  }

  void backward() override {
    matvec_backward(wx->value, wx->grad, x->value.data(), x->grad.data(), grad.data());
    matvec_backward(wh->value, wh->grad, h->value.data(), h->grad.data(), grad.data());
    for (std::size_t i = 0; i < grad.size(); ++i) b->grad[i] += grad[i];
  }
};

struct AddNode final : Node {
  Var a, b;
  AddNode(Var a_, Var b_) : a(a_), b(b_) {
    value = a->value;
    value.add_in_place(b->value);
    grad = Tensor(value.shape());
  }
  void backward() override {
    for (std::size_t i = 0; i < grad.size(); ++i) {
      a->grad[i] += grad[i];
      b->grad[i] += grad[i];
    }
  }
};

struct SubNode final : Node {
  Var a, b;
  SubNode(Var a_, Var b_) : a(a_), b(b_) {
    value = a->value;
    for (std::size_t i = 0; i < value.size(); ++i) value[i] -= b->value[i];
    grad = Tensor(value.shape());
  }
  void backward() override {
    for (std::size_t i = 0; i < grad.size(); ++i) {
      a->grad[i] += grad[i];
      b->grad[i] -= grad[i];
    }
  }
};

struct MulNode final : Node {
  Var a, b;
  MulNode(Var a_, Var b_) : a(a_), b(b_) {
    value = a->value;
    for (std::size_t i = 0; i < value.size(); ++i) value[i] *= b->value[i];
    grad = Tensor(value.shape());
  }
  void backward() override {
    for (std::size_t i = 0; i < grad.size(); ++i) {
      a->grad[i] += grad[i] * b->value[i];
      b->grad[i] += grad[i] * a->value[i];
    }
  }
};

struct SigmoidNode final : Node {
  Var x;
  explicit SigmoidNode(Var x_) : x(x_) {
    value = x->value;
    for (double& v : value.data()) v = 1.0 / (1.0 + std::exp(-v));
    grad = Tensor(value.shape());
  }
  void backward() override {
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double s = value[i];
      x->grad[i] += grad[i] * s * (1.0 - s);
    }
  }
};

struct TanhNode final : Node {
  Var x;
  explicit TanhNode(Var x_) : x(x_) {
    value = x->value;
    for (double& v : value.data()) v = std::tanh(v);
    grad = Tensor(value.shape());
  }
  void backward() override {
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double t = value[i];
      x->grad[i] += grad[i] * (1.0 - t * t);
    }
  }
};

struct SumNode final : Node {
  Var x;
  explicit SumNode(Var x_) : x(x_) {
    double acc = 0.0;
    for (double v : x->value.data()) acc += v;
    value = Tensor::of({acc});
    grad = Tensor(value.shape());
  }
  void backward() override {
    for (std::size_t i = 0; i < x->grad.size(); ++i) x->grad[i] += grad[0];
  }
};

struct ConcatNode final : Node {
  std::vector<Var> parts;
  explicit ConcatNode(std::span<const Var> parts_) : parts(parts_.begin(), parts_.end()) {
    std::size_t total = 0;
    for (Var p : parts) total += p->value.size();
    value = Tensor::vector(total);
    std::size_t offset = 0;
    for (Var p : parts) {
      std::copy(p->value.data().begin(), p->value.data().end(), value.data().begin() + offset);
      offset += p->value.size();
    }
    grad = Tensor(value.shape());
  }
  void backward() override {
    std::size_t offset = 0;
    for (Var p : parts) {
      for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] += grad[offset + i];
      offset += p->grad.size();
    }
  }
};

struct StackRowsNode final : Node {
  std::vector<Var> rows;
  explicit StackRowsNode(std::span<const Var> rows_) : rows(rows_.begin(), rows_.end()) {
    const std::size_t width = rows.empty() ? 0 : rows.front()->value.size();
    value = Tensor::matrix(rows.size(), width);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::copy(rows[r]->value.data().begin(), rows[r]->value.data().end(),
                value.row(r).begin());
    }
    grad = Tensor(value.shape());
  }
  void backward() override {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto g = grad.row(r);
      for (std::size_t i = 0; i < g.size(); ++i) rows[r]->grad[i] += g[i];
    }
  }
};

struct SoftmaxNode final : Node {
  Var x;
  explicit SoftmaxNode(Var x_) : x(x_) {
    value = x->value;
    auto v = value.data();
    double max = *std::max_element(v.begin(), v.end());
    double total = 0.0;
    for (double& e : v) {
      e = std::exp(e - max);
      total += e;
    }
    for (double& e : v) e /= total;
    grad = Tensor(value.shape());
  }
  void backward() override {
    double dot = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) dot += grad[i] * value[i];
    for (std::size_t i = 0; i < grad.size(); ++i) {
      x->grad[i] += value[i] * (grad[i] - dot);
    }
  }
};

struct WeightedCrossEntropyNode final : Node {
  Var probs;
  std::vector<bool> positive;
  double pos_weight;

  WeightedCrossEntropyNode(Var probs_, const std::vector<bool>& positive_, double w)
      : probs(probs_), positive(positive_.begin(), positive_.end()), pos_weight(w) {
    double loss = 0.0;
    for (std::size_t i = 0; i < positive.size(); ++i) {
      const double p = clamped(probs->value.at(i, positive[i] ? 1 : 0));
      loss -= (positive[i] ? pos_weight : 1.0) * std::log(p);
    }
    value = Tensor::of({loss});
    grad = Tensor(value.shape());
  }

  static double clamped(double p) { return std::clamp(p, kLogClamp, 1.0 - kLogClamp); }

  void backward() override {
    const double g = grad[0];
    for (std::size_t i = 0; i < positive.size(); ++i) {
      const std::size_t col = positive[i] ? 1 : 0;
      const double raw = probs->value.at(i, col);
      if (raw <= kLogClamp || raw >= 1.0 - kLogClamp) continue;  // clamped: flat
      const double w = positive[i] ? pos_weight : 1.0;
      probs->grad.at(i, col) += g * (-w / raw);
    }
  }
};

struct HingeLossNode final : Node {
  Var scores;
  std::vector<bool> positive;
  double margin;

  HingeLossNode(Var scores_, const std::vector<bool>& positive_, double m)
      : scores(scores_), positive(positive_.begin(), positive_.end()), margin(m) {
    double loss = 0.0;
    for (std::size_t p = 0; p < positive.size(); ++p) {
      if (!positive[p]) continue;
      for (std::size_t n = 0; n < positive.size(); ++n) {
        if (positive[n]) continue;
        loss += std::max(0.0, margin - (scores->value[p] - scores->value[n]));
      }
    }
    value = Tensor::of({loss});
    grad = Tensor(value.shape());
  }

  void backward() override {
    const double g = grad[0];
    for (std::size_t p = 0; p < positive.size(); ++p) {
      if (!positive[p]) continue;
      for (std::size_t n = 0; n < positive.size(); ++n) {
        if (positive[n]) continue;
        if (margin - (scores->value[p] - scores->value[n]) > 0.0) {
          scores->grad[p] -= g;
          scores->grad[n] += g;
        }
      }
    }
  }
};

}  // namespace

template <typename T, typename... Args>
Var Tape::emplace(Args&&... args) {
  nodes_.push_back(std::make_unique<T>(std::forward<Args>(args)...));
  return nodes_.back().get();
}

Var Tape::constant(Tensor value) { return emplace<ConstantNode>(std::move(value)); }

Var Tape::param(Parameter& p) { return emplace<ParamNode>(p); }

Var Tape::param_row(Parameter& table, std::size_t row) {
  if (table.value.rank() != 2 || row >= table.value.rows()) {
    throw NumericError("param_row: bad row " + std::to_string(row) + " for " + table.name);
  }
  return emplace<ParamRowNode>(table, row);
}

Var Tape::affine(Parameter& w, Parameter& b, Var x) {
  check_vector(x, "affine");
  if (w.value.cols() != x->value.size() || w.value.rows() != b.value.size()) {
    throw NumericError("affine: dimension mismatch for " + w.name);
  }
  return emplace<AffineNode>(w, b, x);
}

Var Tape::gate_preact(Parameter& wx, Var x, Parameter& wh, Var h, Parameter& b) {
  check_vector(x, "gate_preact");
  check_vector(h, "gate_preact");
  if (wx.value.cols() != x->value.size() || wh.value.cols() != h->value.size() ||
      wx.value.rows() != b.value.size() || wh.value.rows() != b.value.size()) {
    throw NumericError("gate_preact: dimension mismatch for " + wx.name);
  }
  return emplace<GatePreactNode>(wx, x, wh, h, b);
}

Var Tape::add(Var a, Var b) {
  if (!a->value.same_shape(b->value)) throw NumericError("add: shape mismatch");
  return emplace<AddNode>(a, b);
}

Var Tape::sub(Var a, Var b) {
  if (!a->value.same_shape(b->value)) throw NumericError("sub: shape mismatch");
  return emplace<SubNode>(a, b);
}

Var Tape::mul(Var a, Var b) {
  if (!a->value.same_shape(b->value)) throw NumericError("mul: shape mismatch");
  return emplace<MulNode>(a, b);
}

Var Tape::sigmoid(Var x) { return emplace<SigmoidNode>(x); }
Var Tape::tanh(Var x) { return emplace<TanhNode>(x); }
Var Tape::sum(Var x) { return emplace<SumNode>(x); }

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw NumericError("concat: no operands");
  for (Var p : parts) check_vector(p, "concat");
  return emplace<ConcatNode>(parts);
}

Var Tape::stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw NumericError("stack_rows: no operands");
  for (Var r : rows) {
    check_vector(r, "stack_rows");
    if (r->value.size() != rows.front()->value.size()) {
      throw NumericError("stack_rows: ragged rows");
    }
  }
  return emplace<StackRowsNode>(rows);
}

Var Tape::softmax(Var x) {
  check_vector(x, "softmax");
  return emplace<SoftmaxNode>(x);
}

Var Tape::weighted_cross_entropy(Var probs, const std::vector<bool>& positive, double pos_weight) {
  if (probs->value.rank() != 2 || probs->value.cols() != 2 ||
      probs->value.rows() != positive.size()) {
    throw NumericError("weighted_cross_entropy: expected [M,2] probabilities");
  }
  return emplace<WeightedCrossEntropyNode>(probs, positive, pos_weight);
}

Var Tape::hinge_loss(Var scores, const std::vector<bool>& positive, double margin) {
  check_vector(scores, "hinge_loss");
  if (scores->value.size() != positive.size()) {
    throw NumericError("hinge_loss: scores/labels length mismatch");
  }
  return emplace<HingeLossNode>(scores, positive, margin);
}

void Tape::backward(Var output, double seed) {
  if (backward_done_) throw NumericError("backward already ran on this tape");
  backward_done_ = true;
  if (output->value.size() != 1) throw NumericError("backward: output must be scalar");
  output->grad[0] = seed;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)->backward();
}

}  // namespace ske
