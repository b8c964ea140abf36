#include "chgh/model/hierarchical.hpp"

#include <cmath>

namespace chgh {

using nn::Var;

HierarchicalParams make_hierarchical(nn::ParamStore& store, const std::string& prefix, int d,
                                     int clusters, Rng& rng) {
  if (clusters < 1) throw UserError("cluster count must be at least 1");
  HierarchicalParams p;
  p.clusters = clusters;
  p.assign = store.create(prefix + "/assign", clusters, d,
                          1.0 / std::sqrt(static_cast<double>(d)), rng);
  return p;
}

Var assign_clusters(nn::Graph& g, Var x, const HierarchicalParams& p) {
  return g.row_softmax(g.matmul(x, g.transpose(g.param(p.assign))));
}

Var pool_clusters(nn::Graph& g, Var assignment, Var x) {
  return g.matmul(g.transpose(assignment), x);
}

Var hierarchical_augment(nn::Graph& g, Var x, Var pooled) {
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(x.value().cols()));
  Var weights = g.row_softmax(g.scale(g.matmul(x, g.transpose(pooled)), inv_scale));
  return g.matmul(weights, pooled);
}

Var cluster_entropy_loss(nn::Graph& g, Var assignment) {
  const long n_rows = assignment.value().rows();
  for (long r = 0; r < n_rows; ++r) {
    if (std::abs(assignment.value().row(r).sum() - 1.0) > 1e-4)
      throw InternalError("cluster assignment row " + std::to_string(r) +
                          " is not row-stochastic");
    if (assignment.value().row(r).minCoeff() < 0.0)
      throw InternalError("cluster assignment row " + std::to_string(r) +
                          " has a negative entry");
  }
  Var plogp = g.hadamard(assignment, g.log_clamped(assignment));
  return g.scale(g.sum(plogp), -1.0 / static_cast<double>(n_rows));
}

}  // namespace chgh
