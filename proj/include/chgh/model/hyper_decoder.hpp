#pragma once

// Gap-conditioned decoding: the historical demand-supply gap sequence is
// encoded into a per-skill condition, a hypernetwork turns the condition
// into per-skill decoder weights, and the generated decoder's logits are
// added to a shared supportive decoder before the softmax.

#include "chgh/model/config.hpp"
#include "chgh/nn/graph.hpp"
#include "chgh/nn/lstm.hpp"

namespace chgh {

inline long generated_decoder_size(int d, int m) {
  return static_cast<long>(d) * d + d + static_cast<long>(d) * m + m;
}

struct HyperDecoderParams {
  nn::LstmStack gap_encoder;     // input width 1, hidden d, single layer
  nn::Param* hyper_w1 = nullptr; // d x d
  nn::Param* hyper_b1 = nullptr;
  nn::Param* hyper_w2 = nullptr; // d x theta_len
  nn::Param* hyper_b2 = nullptr;
  int d = 0;
  int m = 0;
};

struct SupportiveDecoderParams {
  nn::Param* w1 = nullptr;  // d x d
  nn::Param* b1 = nullptr;
  nn::Param* w2 = nullptr;  // d x d
  nn::Param* b2 = nullptr;
  nn::Param* w3 = nullptr;  // d x m
  nn::Param* b3 = nullptr;
};

HyperDecoderParams make_hyper_decoder(nn::ParamStore& store, const std::string& prefix, int d,
                                      int m, double phi_lr_multiplier, Rng& rng);
SupportiveDecoderParams make_supportive_decoder(nn::ParamStore& store, const std::string& prefix,
                                                int d, int m, Rng& rng);

// Elementwise sum of the two encoder outputs, split back into views.
std::pair<nn::Var, nn::Var> aggregate_representations(nn::Graph& g, nn::Var e_tilde,
                                                      nn::Var e_hat, int n_skills);

// Gap window (skills x steps) -> standardized condition (skills x d).
// The recurrence starts from the skill embedding; the final state is
// standardized per row (all-equal rows map to zero).
nn::Var encode_gap_condition(nn::Graph& g, const HyperDecoderParams& p, const Mat& gap_window,
                             nn::Var embedding, int min_seq_len);

// condition (skills x d) -> packed per-skill decoder weights.
nn::Var generate_decoder_weights(nn::Graph& g, const HyperDecoderParams& p, nn::Var condition,
                                 bool training, double dropout_rate, Rng* dropout_rng);

// Three dense layers with rectifiers between; logits out.
nn::Var supportive_logits(nn::Graph& g, const SupportiveDecoderParams& p, nn::Var x,
                          bool training, double dropout_rate, Rng* dropout_rng);

// Softmax(generated(x; theta) + supportive(x)); theta is shared across views
// by the caller passing the same Var.
nn::Var decode_view(nn::Graph& g, const HyperDecoderParams& p, const SupportiveDecoderParams& sup,
                    nn::Var x, nn::Var theta, bool training, double dropout_rate,
                    Rng* dropout_rng);

}  // namespace chgh
