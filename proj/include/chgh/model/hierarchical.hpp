#pragma once

// Soft clustering of skill-view nodes into trend clusters, pooling, and
// attention-based broadcast of cluster context back to the nodes.

#include "chgh/nn/graph.hpp"

namespace chgh {

struct HierarchicalParams {
  nn::Param* assign = nullptr;  // clusters x d
  int clusters = 0;
};

HierarchicalParams make_hierarchical(nn::ParamStore& store, const std::string& prefix, int d,
                                     int clusters, Rng& rng);

// Row-stochastic assignment: row_softmax(x assign').
nn::Var assign_clusters(nn::Graph& g, nn::Var x, const HierarchicalParams& p);

// Cluster representations: S' x.
nn::Var pool_clusters(nn::Graph& g, nn::Var assignment, nn::Var x);

// Each node attends over cluster rows (scaled dot product, no projections);
// output rows live in the convex hull of the cluster rows.
nn::Var hierarchical_augment(nn::Graph& g, nn::Var x, nn::Var pooled);

// Mean over rows of the row entropy; bounded by [0, ln clusters]. Rows that
// are not stochastic within 1e-4 indicate a bug upstream.
nn::Var cluster_entropy_loss(nn::Graph& g, nn::Var assignment);

}  // namespace chgh
