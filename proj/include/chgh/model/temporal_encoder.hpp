#pragma once

// Per-skill sequence encoder: scalar share values are lifted to d dims,
// run through a stacked LSTM whose first hidden state is the skill
// embedding, aggregated over time with sliced multi-head attention, and
// fused with the embedding.

#include <vector>

#include "chgh/model/config.hpp"
#include "chgh/nn/graph.hpp"
#include "chgh/nn/lstm.hpp"

namespace chgh {

struct TemporalEncoderParams {
  nn::Param* lift_w1 = nullptr;  // 1 x d
  nn::Param* lift_b1 = nullptr;
  nn::Param* lift_w2 = nullptr;  // d x d
  nn::Param* lift_b2 = nullptr;
  nn::LstmStack lstm;
  nn::Param* fuse_proj = nullptr;   // 2d x d concat projection
  nn::Param* fuse_w = nullptr;      // d x d perceptron layer
  nn::Param* fuse_b = nullptr;
  int d = 0;
  int heads = 1;
};

TemporalEncoderParams make_temporal_encoder(nn::ParamStore& store, const std::string& prefix,
                                            int d, int heads, int recurrent_layers, Rng& rng);

// Two-layer lift applied rowwise: (rows x 1) -> (rows x d). Used both per
// timestep (rows = skills) and per skill (rows = timesteps).
nn::Var lift_rows(nn::Graph& g, nn::Var column, const TemporalEncoderParams& p, bool training,
                  double dropout_rate, Rng* dropout_rng);

// Stacked recurrence over per-timestep lifted inputs; initial hidden state of
// the first layer is the embedding row(s).
std::vector<nn::Var> encode_temporal(nn::Graph& g, const TemporalEncoderParams& p,
                                     const std::vector<nn::Var>& lifted, nn::Var embedding);

// Sliced multi-head attention over timesteps, query = embedding slice,
// scaled by 1/sqrt(head_dim); single head recovers the plain formula.
nn::Var attention_aggregate(nn::Graph& g, const std::vector<nn::Var>& hidden_states,
                            nn::Var embedding, int heads);

nn::Var fuse(nn::Graph& g, nn::Var embedding, nn::Var summary, const TemporalEncoderParams& p);

// Full chain for one view: series window (skills x steps) -> (skills x d).
nn::Var encode_view(nn::Graph& g, const Mat& series_window, nn::Var embedding,
                    const TemporalEncoderParams& p, int min_seq_len, bool training,
                    double dropout_rate, Rng* dropout_rng);

}  // namespace chgh
