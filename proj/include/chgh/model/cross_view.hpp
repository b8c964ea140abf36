#pragma once

// Learned adjacency over skill-view nodes plus two rounds of propagation
// mixing the learned edges with the fixed co-occurrence edges.

#include "chgh/model/config.hpp"
#include "chgh/nn/graph.hpp"

namespace chgh {

struct PropagationParams {
  // One pair per layer; w_learned entries are null for the static variant.
  std::vector<nn::Param*> w_learned;  // d x d
  std::vector<nn::Param*> w_fixed;    // d x d
};

PropagationParams make_propagation(nn::ParamStore& store, const std::string& prefix, int d,
                                   int n_layers, bool with_learned, Rng& rng);

// Saturated antisymmetric score adjacency:
//   X_A = tanh(alpha X), X_B = tanh(beta X)
//   A = relu(row_softmax(relu(X_A X_B' - X_B X_A')) - delta)
// Entries land in [0, max(0, 1 - delta)] and each row sums to at most 1.
nn::Var adaptive_adjacency(nn::Graph& g, nn::Var x, nn::Var alpha, nn::Var beta, double delta);

// Convenience wrapper taking the two view embeddings.
nn::Var learn_adaptive_adjacency(nn::Graph& g, nn::Var e_s, nn::Var e_d, nn::Var alpha,
                                 nn::Var beta, double delta);

// Assembles [[a, 0], [0, b]] from two square blocks.
nn::Var block_diagonal(nn::Graph& g, nn::Var a, nn::Var b);

// layers of: learned-adjacency term + fixed-adjacency term, rectifier between
// layers (not after the last). `learned` may be invalid for the static
// variant; `fixed` is the block-diagonal co-occurrence adjacency.
nn::Var propagate(nn::Graph& g, nn::Var x, nn::Var learned, nn::Var fixed,
                  const PropagationParams& p);

}  // namespace chgh
