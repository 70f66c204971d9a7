#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ske/autodiff.hpp"
#include "ske/common.hpp"

namespace ske {

// Parameters of one LSTM direction: four gates, each with an input
// projection [hidden, input], a recurrent projection [hidden, hidden] and
// a bias [hidden].
struct LstmGate {
  Parameter wx;
  Parameter wh;
  Parameter b;
};

struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  LstmGate input_gate;
  LstmGate forget_gate;
  LstmGate output_gate;
  LstmGate cell_gate;

  LstmParams() = default;
  LstmParams(const std::string& name, std::size_t input_dim, std::size_t hidden_dim);

  // Uniform(-scale, scale) weights, zero biases, then forget_bias added to
  // the forget-gate bias.
  void init(Rng& rng, double scale, double forget_bias);

  std::vector<Parameter*> parameters();
};

struct LstmState {
  Var h = nullptr;
  Var c = nullptr;
};

// One recurrence step: sigmoid input/forget/output gates, tanh cell
// candidate and output squashing.
LstmState lstm_step(Tape& tape, LstmParams& params, Var x, const LstmState& prev);

// Runs the cell over a sequence from zero initial state. When `reversed`,
// the recurrence consumes inputs right-to-left but the returned states are
// re-aligned to input positions.
std::vector<Var> run_lstm(Tape& tape, LstmParams& params, std::span<const Var> inputs,
                          bool reversed);

}  // namespace ske
