#include "chgh/nn/lstm.hpp"

#include <cmath>

namespace chgh::nn {

LstmStack make_lstm_stack(ParamStore& store, const std::string& prefix, int in_dim, int hidden,
                          int n_layers, Rng& rng) {
  LstmStack stack;
  for (int l = 0; l < n_layers; ++l) {
    LstmLayer layer;
    layer.in_dim = l == 0 ? in_dim : hidden;
    layer.hidden = hidden;
    const std::string base = prefix + "/lstm" + std::to_string(l);
    const double sw = 1.0 / std::sqrt(static_cast<double>(layer.in_dim));
    const double sh = 1.0 / std::sqrt(static_cast<double>(hidden));
    layer.w_input = store.create(base + "/w_input", layer.in_dim, 4 * hidden, sw, rng);
    layer.w_hidden = store.create(base + "/w_hidden", hidden, 4 * hidden, sh, rng);
    layer.bias = store.create(base + "/bias", 1, 4 * hidden, 0.0, rng);
    // Forget-gate bias starts at 1 so early state survives the sequence.
    layer.bias->value.middleCols(hidden, hidden).setConstant(1.0);
    stack.layers.push_back(layer);
  }
  return stack;
}

std::vector<Var> lstm_forward(Graph& g, const LstmStack& stack, const std::vector<Var>& inputs,
                              Var h0_first) {
  if (inputs.empty()) throw InternalError("lstm_forward: empty input sequence");
  const long rows = inputs[0].value().rows();

  std::vector<Var> current = inputs;
  for (size_t l = 0; l < stack.layers.size(); ++l) {
    const LstmLayer& layer = stack.layers[l];
    const int h = layer.hidden;
    Var w_in = g.param(layer.w_input);
    Var w_hid = g.param(layer.w_hidden);
    Var bias = g.param(layer.bias);

    Var hidden = l == 0 ? h0_first : g.constant(Mat::Zero(rows, h));
    Var cell = g.constant(Mat::Zero(rows, h));

    std::vector<Var> outputs;
    outputs.reserve(current.size());
    for (const Var& x : current) {
      Var z = g.add_rowvec(g.add(g.matmul(x, w_in), g.matmul(hidden, w_hid)), bias);
      Var gate_i = g.sigmoid(g.cols(z, 0, h));
      Var gate_f = g.sigmoid(g.cols(z, h, h));
      Var gate_c = g.tanh_(g.cols(z, 2 * h, h));
      Var gate_o = g.sigmoid(g.cols(z, 3 * h, h));
      cell = g.add(g.hadamard(gate_f, cell), g.hadamard(gate_i, gate_c));
      hidden = g.hadamard(gate_o, g.tanh_(cell));
      outputs.push_back(hidden);
    }
    current = std::move(outputs);
  }
  return current;
}

Var linear(Graph& g, Var x, Param* weight, Param* bias) {
  Var out = g.matmul(x, g.param(weight));
  if (bias) out = g.add_rowvec(out, g.param(bias));
  return out;
}

}  // namespace chgh::nn
