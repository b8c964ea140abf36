#pragma once

// Full model: two temporal encoders, learned + fixed graph propagation,
// optional hierarchical clustering, and the gap-conditioned decoder. The
// `variant` field of the config controls which stages are wired in.

#include <memory>
#include <optional>

#include "chgh/corpus.hpp"
#include "chgh/labels.hpp"
#include "chgh/model/config.hpp"
#include "chgh/model/cross_view.hpp"
#include "chgh/model/hierarchical.hpp"
#include "chgh/model/hyper_decoder.hpp"
#include "chgh/model/temporal_encoder.hpp"

namespace chgh {

struct WindowBatch {
  Mat demand;  // skills x steps
  Mat supply;
  Mat gap;
};

struct ForwardResult {
  nn::Var pred_supply;  // skills x m, row-stochastic
  nn::Var pred_demand;
  nn::Var e_tilde;          // stacked 2-skills x d after propagation
  nn::Var adjacency;        // learned adjacency (invalid for static)
  nn::Var cluster_assign;   // invalid below hge
  nn::Var e_hat;            // invalid below hge
  nn::Var gap_condition;    // invalid below full
  nn::Var theta;            // invalid below full
};

struct LossResult {
  nn::Var total_var;  // main + lambda1 * cluster (tape part)
  double main = 0.0;
  double cluster = 0.0;
  double l2 = 0.0;
  double total = 0.0;  // main + lambda1*cluster + lambda2*l2
};

class Network {
 public:
  // a_fixed: 2K x 2K block-diagonal co-occurrence adjacency.
  Network(const ModelConfig& cfg, int n_skills, Mat a_fixed);

  ForwardResult forward(nn::Graph& g, const WindowBatch& batch, bool training,
                        Rng* dropout_rng) const;

  // Joint cross-entropy averaged over skills and views plus the weighted
  // cluster entropy; the L2 term is computed from the store directly.
  LossResult loss(nn::Graph& g, const ForwardResult& fwd, const LabelMatrix& labels_supply,
                  const LabelMatrix& labels_demand) const;

  // Pulls loss gradients (including the L2 term) into the parameter store.
  void backward(nn::Graph& g, const LossResult& loss_result);

  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }
  const ModelConfig& config() const { return cfg_; }
  int n_skills() const { return n_skills_; }
  int clusters() const { return clusters_; }

 private:
  ModelConfig cfg_;
  int n_skills_;
  int clusters_;
  Mat a_fixed_;

  nn::ParamStore store_;
  nn::Param* embedding_ = nullptr;         // shared table
  nn::Param* embedding_demand_ = nullptr;  // only when shared_embedding = false
  TemporalEncoderParams enc_supply_;
  TemporalEncoderParams enc_demand_;
  nn::Param* alpha_ = nullptr;  // cge and above
  nn::Param* beta_ = nullptr;
  nn::Param* alpha_supply_ = nullptr;  // adaptive variant (per-view pairs)
  nn::Param* beta_supply_ = nullptr;
  nn::Param* alpha_demand_ = nullptr;
  nn::Param* beta_demand_ = nullptr;
  PropagationParams propagation_;
  std::optional<HierarchicalParams> hierarchical_;
  std::optional<HyperDecoderParams> hyper_;
  SupportiveDecoderParams sup_supply_;
  SupportiveDecoderParams sup_demand_;
};

// Cross-entropy of both views as displayed in the training objective.
nn::Var main_loss(nn::Graph& g, nn::Var pred_supply, nn::Var pred_demand,
                  const LabelMatrix& labels_supply, const LabelMatrix& labels_demand);

}  // namespace chgh
