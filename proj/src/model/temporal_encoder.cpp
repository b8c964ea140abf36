#include "chgh/model/temporal_encoder.hpp"

#include <cmath>

namespace chgh {

using nn::Var;

TemporalEncoderParams make_temporal_encoder(nn::ParamStore& store, const std::string& prefix,
                                            int d, int heads, int recurrent_layers, Rng& rng) {
  TemporalEncoderParams p;
  p.d = d;
  p.heads = heads;
  const double s1 = 1.0;  // fan-in 1
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  p.lift_w1 = store.create(prefix + "/lift_w1", 1, d, s1, rng);
  p.lift_b1 = store.create(prefix + "/lift_b1", 1, d, 0.0, rng);
  p.lift_b1->value.setConstant(0.01);  // pre-rectifier biases start slightly alive
  p.lift_w2 = store.create(prefix + "/lift_w2", d, d, sd, rng);
  p.lift_b2 = store.create(prefix + "/lift_b2", 1, d, 0.0, rng);
  p.lstm = nn::make_lstm_stack(store, prefix, d, d, recurrent_layers, rng);
  p.fuse_proj = store.create(prefix + "/fuse_proj", 2 * d, d,
                             1.0 / std::sqrt(static_cast<double>(2 * d)), rng);
  p.fuse_w = store.create(prefix + "/fuse_w", d, d, sd, rng);
  p.fuse_b = store.create(prefix + "/fuse_b", 1, d, 0.0, rng);
  p.fuse_b->value.setConstant(0.01);
  return p;
}

Var lift_rows(nn::Graph& g, Var column, const TemporalEncoderParams& p, bool training,
              double dropout_rate, Rng* dropout_rng) {
  if (column.value().cols() != 1) throw InternalError("lift_rows: expected a single column");
  Var hidden = g.relu(nn::linear(g, column, p.lift_w1, p.lift_b1));
  if (training && dropout_rng) hidden = g.dropout(hidden, dropout_rate, *dropout_rng);
  return nn::linear(g, hidden, p.lift_w2, p.lift_b2);
}

std::vector<Var> encode_temporal(nn::Graph& g, const TemporalEncoderParams& p,
                                 const std::vector<Var>& lifted, nn::Var embedding) {
  return nn::lstm_forward(g, p.lstm, lifted, embedding);
}

Var attention_aggregate(nn::Graph& g, const std::vector<Var>& hidden_states, Var embedding,
                        int heads) {
  if (hidden_states.empty()) throw InternalError("attention_aggregate: empty sequence");
  const int d = static_cast<int>(embedding.value().cols());
  if (heads < 1 || d % heads != 0) throw InternalError("attention_aggregate: heads must divide d");
  const int hd = d / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const int n_steps = static_cast<int>(hidden_states.size());

  Var out;
  for (int h = 0; h < heads; ++h) {
    Var query = g.cols(embedding, h * hd, hd);
    // scores: skills x steps
    Var scores;
    for (int t = 0; t < n_steps; ++t) {
      Var st = g.rowwise_dot(g.cols(hidden_states[t], h * hd, hd), query);
      scores = t == 0 ? st : g.hcat(scores, st);
    }
    Var weights = g.row_softmax(g.scale(scores, inv_scale));
    Var head_out;
    for (int t = 0; t < n_steps; ++t) {
      Var term = g.colwise_scale(g.cols(hidden_states[t], h * hd, hd), g.cols(weights, t, 1));
      head_out = t == 0 ? term : g.add(head_out, term);
    }
    out = h == 0 ? head_out : g.hcat(out, head_out);
  }
  return out;
}

Var fuse(nn::Graph& g, Var embedding, Var summary, const TemporalEncoderParams& p) {
  Var projected = g.matmul(g.hcat(embedding, summary), g.param(p.fuse_proj));
  return g.relu(nn::linear(g, projected, p.fuse_w, p.fuse_b));
}

Var encode_view(nn::Graph& g, const Mat& series_window, Var embedding,
                const TemporalEncoderParams& p, int min_seq_len, bool training,
                double dropout_rate, Rng* dropout_rng) {
  const int n_steps = static_cast<int>(series_window.cols());
  if (n_steps < min_seq_len)
    throw UserError("sequence of length " + std::to_string(n_steps) +
                    " is shorter than the minimum " + std::to_string(min_seq_len));
  if (series_window.rows() != embedding.value().rows())
    throw InternalError("encode_view: series/embedding row mismatch");

  std::vector<Var> lifted;
  lifted.reserve(n_steps);
  for (int t = 0; t < n_steps; ++t) {
    Var col = g.constant(series_window.col(t));
    lifted.push_back(lift_rows(g, col, p, training, dropout_rate, dropout_rng));
  }
  std::vector<Var> hidden = encode_temporal(g, p, lifted, embedding);
  Var summary = attention_aggregate(g, hidden, embedding, p.heads);
  return fuse(g, embedding, summary, p);
}

}  // namespace chgh
