#include "chgh/model/network.hpp"

#include <cmath>

namespace chgh {

using nn::Var;

Network::Network(const ModelConfig& cfg, int n_skills, Mat a_fixed)
    : cfg_(cfg), n_skills_(n_skills), a_fixed_(std::move(a_fixed)) {
  cfg_.validate();
  if (n_skills_ < 1) throw UserError("model needs at least one skill");
  if (a_fixed_.rows() != 2 * n_skills_ || a_fixed_.cols() != 2 * n_skills_)
    throw InternalError("fixed adjacency must be 2K x 2K");
  // Propagation operator from the raw co-occurrence weights: the definitional
  // self-loop is kept at parity with the whole neighborhood (it is the
  // residual path), and the off-diagonal mass is normalized so rows cannot
  // blow up activations at any vocabulary size.
  for (long r = 0; r < a_fixed_.rows(); ++r) {
    double self = a_fixed_(r, r);
    double off = a_fixed_.row(r).sum() - self;
    if (off > 0.0) {
      a_fixed_.row(r) *= 0.5 / off;
      a_fixed_(r, r) = self > 0.0 ? 0.5 : 0.0;
    } else if (self > 0.0) {
      a_fixed_(r, r) = 1.0;
    }
  }
  clusters_ = cfg_.resolve_clusters(n_skills_);

  Rng rng(cfg_.seed);
  const int d = cfg_.d;
  const double embed_scale = 1.0 / std::sqrt(static_cast<double>(d));

  embedding_ = store_.create("embed", n_skills_, d, embed_scale, rng);
  if (!cfg_.shared_embedding)
    embedding_demand_ = store_.create("embed_demand", n_skills_, d, embed_scale, rng);

  enc_supply_ = make_temporal_encoder(store_, "enc_s", d, cfg_.heads, cfg_.recurrent_layers, rng);
  enc_demand_ = make_temporal_encoder(store_, "enc_d", d, cfg_.heads, cfg_.recurrent_layers, rng);

  // Equal scalars are a saddle (the antisymmetric score is identically zero
  // and the rectifier blocks the gradient), so the pair starts apart.
  auto make_scalar_pair = [&](const std::string& base, nn::Param** a, nn::Param** b) {
    *a = store_.create(base + "/alpha", 1, 1, 0.0, rng);
    *b = store_.create(base + "/beta", 1, 1, 0.0, rng);
    (*a)->value(0, 0) = 1.5;
    (*b)->value(0, 0) = 0.5;
  };
  if (cfg_.variant == Variant::Adaptive) {
    make_scalar_pair("adj_s", &alpha_supply_, &beta_supply_);
    make_scalar_pair("adj_d", &alpha_demand_, &beta_demand_);
  } else if (cfg_.variant != Variant::Static) {
    make_scalar_pair("adj", &alpha_, &beta_);
  }

  propagation_ =
      make_propagation(store_, "prop", d, 2, cfg_.variant != Variant::Static, rng);

  if (cfg_.variant == Variant::Hge || cfg_.variant == Variant::Full)
    hierarchical_ = make_hierarchical(store_, "hier", d, clusters_, rng);

  if (cfg_.variant == Variant::Full)
    hyper_ = make_hyper_decoder(store_, "hyper", d, cfg_.n_classes, cfg_.phi_lr_multiplier, rng);

  sup_supply_ = make_supportive_decoder(store_, "dec_s", d, cfg_.n_classes, rng);
  sup_demand_ = make_supportive_decoder(store_, "dec_d", d, cfg_.n_classes, rng);
}

ForwardResult Network::forward(nn::Graph& g, const WindowBatch& batch, bool training,
                               Rng* dropout_rng) const {
  if (batch.demand.rows() != n_skills_ || batch.supply.rows() != n_skills_ ||
      batch.gap.rows() != n_skills_)
    throw InternalError("forward: batch row count does not match the vocabulary");

  ForwardResult out;
  Var embed_s = g.param(embedding_);
  Var embed_d = embedding_demand_ ? g.param(embedding_demand_) : embed_s;

  Var e_s = encode_view(g, batch.supply, embed_s, enc_supply_, cfg_.min_seq_len, training,
                        cfg_.dropout, dropout_rng);
  Var e_d = encode_view(g, batch.demand, embed_d, enc_demand_, cfg_.min_seq_len, training,
                        cfg_.dropout, dropout_rng);
  Var stacked = g.vcat(e_s, e_d);

  Var learned;
  if (cfg_.variant == Variant::Adaptive) {
    Var adj_s = adaptive_adjacency(g, e_s, g.param(alpha_supply_), g.param(beta_supply_),
                                   cfg_.delta);
    Var adj_d = adaptive_adjacency(g, e_d, g.param(alpha_demand_), g.param(beta_demand_),
                                   cfg_.delta);
    learned = block_diagonal(g, adj_s, adj_d);
  } else if (cfg_.variant != Variant::Static) {
    learned = adaptive_adjacency(g, stacked, g.param(alpha_), g.param(beta_), cfg_.delta);
  }
  out.adjacency = learned;

  Var fixed = g.constant(a_fixed_);
  out.e_tilde = propagate(g, stacked, learned, fixed, propagation_);

  if (hierarchical_) {
    out.cluster_assign = assign_clusters(g, out.e_tilde, *hierarchical_);
    Var pooled = pool_clusters(g, out.cluster_assign, out.e_tilde);
    out.e_hat = hierarchical_augment(g, out.e_tilde, pooled);
  }

  auto [bar_s, bar_d] = aggregate_representations(g, out.e_tilde, out.e_hat, n_skills_);

  Var theta;
  if (hyper_) {
    out.gap_condition = encode_gap_condition(g, *hyper_, batch.gap, embed_s, cfg_.min_seq_len);
    theta = generate_decoder_weights(g, *hyper_, out.gap_condition, training, cfg_.dropout,
                                     dropout_rng);
    out.theta = theta;
  }

  const HyperDecoderParams dummy{};  // decode_view only reads d/m when theta is valid
  const HyperDecoderParams& hp = hyper_ ? *hyper_ : dummy;
  out.pred_supply =
      decode_view(g, hp, sup_supply_, bar_s, theta, training, cfg_.dropout, dropout_rng);
  out.pred_demand =
      decode_view(g, hp, sup_demand_, bar_d, theta, training, cfg_.dropout, dropout_rng);
  return out;
}

Var main_loss(nn::Graph& g, Var pred_supply, Var pred_demand, const LabelMatrix& labels_supply,
              const LabelMatrix& labels_demand) {
  const long k = pred_supply.value().rows();
  if (labels_supply.onehot.rows() != k || labels_demand.onehot.rows() != k ||
      labels_supply.onehot.cols() != pred_supply.value().cols() ||
      labels_demand.onehot.cols() != pred_demand.value().cols())
    throw InternalError("main_loss: label/prediction shape mismatch");
  Var ll_s = g.sum(g.hadamard(g.constant(labels_supply.onehot), g.log_clamped(pred_supply)));
  Var ll_d = g.sum(g.hadamard(g.constant(labels_demand.onehot), g.log_clamped(pred_demand)));
  return g.scale(g.add(ll_s, ll_d), -1.0 / (2.0 * static_cast<double>(k)));
}

LossResult Network::loss(nn::Graph& g, const ForwardResult& fwd,
                         const LabelMatrix& labels_supply,
                         const LabelMatrix& labels_demand) const {
  LossResult result;
  Var main = main_loss(g, fwd.pred_supply, fwd.pred_demand, labels_supply, labels_demand);
  result.main = main.value()(0, 0);

  Var total = main;
  if (fwd.cluster_assign.valid()) {
    Var cluster = cluster_entropy_loss(g, fwd.cluster_assign);
    result.cluster = cluster.value()(0, 0);
    total = g.add(total, g.scale(cluster, cfg_.lambda1));
  }
  result.total_var = total;
  result.l2 = store_.l2_norm_sq();
  result.total = result.main + cfg_.lambda1 * result.cluster + cfg_.lambda2 * result.l2;
  if (!std::isfinite(result.total)) throw InternalError("loss is not finite");
  return result;
}

void Network::backward(nn::Graph& g, const LossResult& loss_result) {
  g.backward(loss_result.total_var);
  if (cfg_.lambda2 != 0.0) store_.add_l2_gradient(2.0 * cfg_.lambda2);
}

}  // namespace chgh
