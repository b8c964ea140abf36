#include "chgh/model/hyper_decoder.hpp"

#include <cmath>

namespace chgh {

using nn::Var;

HyperDecoderParams make_hyper_decoder(nn::ParamStore& store, const std::string& prefix, int d,
                                      int m, double phi_lr_multiplier, Rng& rng) {
  HyperDecoderParams p;
  p.d = d;
  p.m = m;
  p.gap_encoder = nn::make_lstm_stack(store, prefix + "/gap", 1, d, 1, rng);
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  const long theta_len = generated_decoder_size(d, m);
  p.hyper_w1 = store.create(prefix + "/hyper_w1", d, d, sd, rng);
  p.hyper_b1 = store.create(prefix + "/hyper_b1", 1, d, 0.0, rng);
  p.hyper_b1->value.setConstant(0.01);
  // Small output scale: generated decoders start near zero so the
  // supportive decoder carries the early training signal.
  p.hyper_w2 = store.create(prefix + "/hyper_w2", d, static_cast<int>(theta_len), sd * 0.1, rng);
  p.hyper_b2 = store.create(prefix + "/hyper_b2", 1, static_cast<int>(theta_len), 0.0, rng);
  for (nn::Param* q : {p.hyper_w1, p.hyper_b1, p.hyper_w2, p.hyper_b2})
    q->lr_scale = phi_lr_multiplier;
  return p;
}

SupportiveDecoderParams make_supportive_decoder(nn::ParamStore& store, const std::string& prefix,
                                                int d, int m, Rng& rng) {
  SupportiveDecoderParams p;
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  p.w1 = store.create(prefix + "/w1", d, d, sd, rng);
  p.b1 = store.create(prefix + "/b1", 1, d, 0.0, rng);
  p.b1->value.setConstant(0.01);
  p.w2 = store.create(prefix + "/w2", d, d, sd, rng);
  p.b2 = store.create(prefix + "/b2", 1, d, 0.0, rng);
  p.b2->value.setConstant(0.01);
  p.w3 = store.create(prefix + "/w3", d, m, sd, rng);
  p.b3 = store.create(prefix + "/b3", 1, m, 0.0, rng);
  return p;
}

std::pair<Var, Var> aggregate_representations(nn::Graph& g, Var e_tilde, Var e_hat,
                                              int n_skills) {
  if (e_tilde.value().rows() != 2 * n_skills)
    throw InternalError("aggregate_representations: expected stacked views");
  Var combined = e_hat.valid() ? g.add(e_tilde, e_hat) : e_tilde;
  return {g.rows(combined, 0, n_skills), g.rows(combined, n_skills, n_skills)};
}

Var encode_gap_condition(nn::Graph& g, const HyperDecoderParams& p, const Mat& gap_window,
                         Var embedding, int min_seq_len) {
  const int n_steps = static_cast<int>(gap_window.cols());
  if (n_steps < min_seq_len)
    throw UserError("gap sequence of length " + std::to_string(n_steps) +
                    " is shorter than the minimum " + std::to_string(min_seq_len));
  std::vector<Var> inputs;
  inputs.reserve(n_steps);
  for (int t = 0; t < n_steps; ++t) inputs.push_back(g.constant(gap_window.col(t)));
  std::vector<Var> states = nn::lstm_forward(g, p.gap_encoder, inputs, embedding);
  return g.row_standardize(states.back());
}

Var generate_decoder_weights(nn::Graph& g, const HyperDecoderParams& p, Var condition,
                             bool training, double dropout_rate, Rng* dropout_rng) {
  Var hidden = g.relu(nn::linear(g, condition, p.hyper_w1, p.hyper_b1));
  if (training && dropout_rng) hidden = g.dropout(hidden, dropout_rate, *dropout_rng);
  return nn::linear(g, hidden, p.hyper_w2, p.hyper_b2);
}

Var supportive_logits(nn::Graph& g, const SupportiveDecoderParams& p, Var x, bool training,
                      double dropout_rate, Rng* dropout_rng) {
  Var h1 = g.relu(nn::linear(g, x, p.w1, p.b1));
  if (training && dropout_rng) h1 = g.dropout(h1, dropout_rate, *dropout_rng);
  Var h2 = g.relu(nn::linear(g, h1, p.w2, p.b2));
  if (training && dropout_rng) h2 = g.dropout(h2, dropout_rate, *dropout_rng);
  return nn::linear(g, h2, p.w3, p.b3);
}

Var decode_view(nn::Graph& g, const HyperDecoderParams& p, const SupportiveDecoderParams& sup,
                Var x, Var theta, bool training, double dropout_rate, Rng* dropout_rng) {
  Var logits = supportive_logits(g, sup, x, training, dropout_rate, dropout_rng);
  if (theta.valid()) logits = g.add(g.hyper_apply(theta, x, p.d, p.m), logits);
  Var probs = g.row_softmax(logits);
  if (!probs.value().allFinite()) throw InternalError("decoder produced non-finite output");
  return probs;
}

}  // namespace chgh
