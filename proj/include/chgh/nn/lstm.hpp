#pragma once

// Batched LSTM stack. Rows are independent sequences (one per skill); the
// recurrence is shared, so each step is a pair of dense products.

#include <vector>

#include "chgh/nn/graph.hpp"

namespace chgh::nn {

struct LstmLayer {
  Param* w_input = nullptr;   // in_dim x 4*hidden
  Param* w_hidden = nullptr;  // hidden x 4*hidden
  Param* bias = nullptr;      // 1 x 4*hidden
  int in_dim = 0;
  int hidden = 0;
};

struct LstmStack {
  std::vector<LstmLayer> layers;
};

// Gate order inside the packed 4*hidden block: input, forget, cell, output.
LstmStack make_lstm_stack(ParamStore& store, const std::string& prefix, int in_dim, int hidden,
                          int n_layers, Rng& rng);

// inputs: one (rows x in_dim) Var per timestep. The first layer's hidden
// state at step 0 is `h0_first` (deeper layers and all cell states start at
// zero). Returns the top layer's hidden state per timestep.
std::vector<Var> lstm_forward(Graph& g, const LstmStack& stack, const std::vector<Var>& inputs,
                              Var h0_first);

// Dense layer: x * W + bias (bias broadcast over rows).
Var linear(Graph& g, Var x, Param* weight, Param* bias);

}  // namespace chgh::nn
