#include "vc/compute/lstm.hpp"

namespace vc::compute {

LstmCell LstmCell::create(ParameterSet& params, const std::string& prefix, std::size_t input_dim,
                          std::size_t hidden, Rng& rng) {
  params.add(prefix + "/w_input", {4 * hidden, input_dim}, Init::kXavier, rng);
  params.add(prefix + "/w_hidden", {4 * hidden, hidden}, Init::kXavier, rng);
  params.add(prefix + "/bias", {4 * hidden}, Init::kZero, rng, /*is_bias=*/true);
  return bind(params, prefix, input_dim, hidden);
}

LstmCell LstmCell::bind(ParameterSet& params, const std::string& prefix, std::size_t input_dim,
                        std::size_t hidden) {
  LstmCell cell;
  cell.w_input = &params.at(prefix + "/w_input");
  cell.w_hidden = &params.at(prefix + "/w_hidden");
  cell.bias = &params.at(prefix + "/bias");
  cell.input_dim = input_dim;
  cell.hidden = hidden;
  return cell;
}

LstmState lstm_zero_state(Graph& g, std::size_t hidden) {
  const auto n = static_cast<Eigen::Index>(hidden);
  return {g.constant(Vector::Zero(n)), g.constant(Vector::Zero(n))};
}

LstmState lstm_step(Graph& g, const LstmCell& cell, Var input, const LstmState& prev) {
  if (g.dim(input) != cell.input_dim || g.dim(prev.h) != cell.hidden || g.dim(prev.c) != cell.hidden)
    throw DimensionError("lstm_step: input " + std::to_string(g.dim(input)) + " / state " +
                         std::to_string(g.dim(prev.h)) + " do not match cell " + std::to_string(cell.input_dim) +
                         "->" + std::to_string(cell.hidden));
  const std::size_t h = cell.hidden;
  Var gates = g.add(g.affine(*cell.w_input, *cell.bias, input), g.linear(*cell.w_hidden, prev.h));
  Var in_gate = g.sigmoid(g.slice(gates, 0, h));
  Var forget_gate = g.sigmoid(g.slice(gates, h, h));
  Var out_gate = g.sigmoid(g.slice(gates, 2 * h, h));
  Var candidate = g.tanh(g.slice(gates, 3 * h, h));
  Var c = g.add(g.mul(forget_gate, prev.c), g.mul(in_gate, candidate));
  Var hidden = g.mul(out_gate, g.tanh(c));
  return {hidden, c};
}

}  // namespace vc::compute
