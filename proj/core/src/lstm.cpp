#include "ske/lstm.hpp"

namespace ske {

namespace {
LstmGate make_gate(const std::string& name, std::size_t input_dim, std::size_t hidden_dim) {
  return LstmGate{Parameter(name + ".wx", Tensor::matrix(hidden_dim, input_dim)),
                  Parameter(name + ".wh", Tensor::matrix(hidden_dim, hidden_dim)),
                  Parameter(name + ".b", Tensor::vector(hidden_dim))};
}

void init_gate(LstmGate& gate, Rng& rng, double scale) {
  for (double& v : gate.wx.value.data()) v = rng.next_uniform(-scale, scale);
  for (double& v : gate.wh.value.data()) v = rng.next_uniform(-scale, scale);
  gate.b.value.fill(0.0);
}
}  // namespace

LstmParams::LstmParams(const std::string& name, std::size_t input_dim_, std::size_t hidden_dim_)
    : input_dim(input_dim_),
      hidden_dim(hidden_dim_),
      input_gate(make_gate(name + ".input", input_dim_, hidden_dim_)),
      forget_gate(make_gate(name + ".forget", input_dim_, hidden_dim_)),
      output_gate(make_gate(name + ".output", input_dim_, hidden_dim_)),
      cell_gate(make_gate(name + ".cell", input_dim_, hidden_dim_)) {}

void LstmParams::init(Rng& rng, double scale, double forget_bias) {
  init_gate(input_gate, rng, scale);
  init_gate(forget_gate, rng, scale);
  init_gate(output_gate, rng, scale);
  init_gate(cell_gate, rng, scale);
  for (double& v : forget_gate.b.value.data()) v += forget_bias;
}

std::vector<Parameter*> LstmParams::parameters() {
  std::vector<Parameter*> out;
  for (LstmGate* gate : {&input_gate, &forget_gate, &output_gate, &cell_gate}) {
    out.push_back(&gate->wx);
    out.push_back(&gate->wh);
    out.push_back(&gate->b);
  }
  return out;
}

LstmState lstm_step(Tape& tape, LstmParams& params, Var x, const LstmState& prev) {
  if (x->value.size() != params.input_dim) {
    throw NumericError("lstm_step: input width " + std::to_string(x->value.size()) +
                       " does not match input_dim " + std::to_string(params.input_dim));
  }
  Var i = tape.sigmoid(tape.gate_preact(params.input_gate.wx, x, params.input_gate.wh, prev.h,
                                        params.input_gate.b));
  Var f = tape.sigmoid(tape.gate_preact(params.forget_gate.wx, x, params.forget_gate.wh, prev.h,
                                        params.forget_gate.b));
  Var o = tape.sigmoid(tape.gate_preact(params.output_gate.wx, x, params.output_gate.wh, prev.h,
                                        params.output_gate.b));
  Var g = tape.tanh(tape.gate_preact(params.cell_gate.wx, x, params.cell_gate.wh, prev.h,
                                     params.cell_gate.b));
  Var c = tape.add(tape.mul(f, prev.c), tape.mul(i, g));
  Var h = tape.mul(o, tape.tanh(c));
  return {h, c};
}

std::vector<Var> run_lstm(Tape& tape, LstmParams& params, std::span<const Var> inputs,
                          bool reversed) {
  std::vector<Var> states(inputs.size());
  LstmState state{tape.constant(Tensor::vector(params.hidden_dim)),
                  tape.constant(Tensor::vector(params.hidden_dim))};
  for (std::size_t step = 0; step < inputs.size(); ++step) {
    const std::size_t pos = reversed ? inputs.size() - 1 - step : step;
    state = lstm_step(tape, params, inputs[pos], state);
    states[pos] = state.h;
  }
  return states;
}

}  // namespace ske
