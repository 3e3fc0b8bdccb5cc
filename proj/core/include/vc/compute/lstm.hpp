#pragma once

#include <string>

#include "vc/compute/graph.hpp"

namespace vc::compute {

// One LSTM cell. Gate rows are stacked [input, forget, output, candidate].
struct LstmCell {
  Parameter* w_input = nullptr;   // [4H, D]
  Parameter* w_hidden = nullptr;  // [4H, H]
  Parameter* bias = nullptr;      // [4H]
  std::size_t input_dim = 0;
  std::size_t hidden = 0;

  static LstmCell create(ParameterSet& params, const std::string& prefix, std::size_t input_dim,
                         std::size_t hidden, Rng& rng);
  // Binds to parameters that already exist in `params` (e.g. after loading).
  static LstmCell bind(ParameterSet& params, const std::string& prefix, std::size_t input_dim, std::size_t hidden);
};

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_zero_state(Graph& g, std::size_t hidden);

// c' = f*c + i*g,  h' = o*tanh(c').
LstmState lstm_step(Graph& g, const LstmCell& cell, Var input, const LstmState& prev);

}  // namespace vc::compute
