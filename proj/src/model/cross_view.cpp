#include "chgh/model/cross_view.hpp"

#include <cmath>

namespace chgh {

using nn::Var;

PropagationParams make_propagation(nn::ParamStore& store, const std::string& prefix, int d,
                                   int n_layers, bool with_learned, Rng& rng) {
  PropagationParams p;
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  for (int l = 0; l < n_layers; ++l) {
    const std::string base = prefix + "/layer" + std::to_string(l);
    p.w_learned.push_back(
        with_learned ? store.create(base + "/w_learned", d, d, sd, rng) : nullptr);
    p.w_fixed.push_back(store.create(base + "/w_fixed", d, d, sd, rng));
  }
  return p;
}

Var adaptive_adjacency(nn::Graph& g, Var x, Var alpha, Var beta, double delta) {
  if (delta < 0.0) throw UserError("delta must be >= 0");
  Var x_a = g.tanh_(g.scale_by(x, alpha));
  Var x_b = g.tanh_(g.scale_by(x, beta));
  // Antisymmetric raw scores: at most one direction of each pair survives
  // the rectifier, and the diagonal is identically zero.
  Var raw = g.sub(g.matmul(x_a, g.transpose(x_b)), g.matmul(x_b, g.transpose(x_a)));
  Var soft = g.row_softmax(g.relu(raw));
  return g.relu(g.add_scalar(soft, -delta));
}

Var learn_adaptive_adjacency(nn::Graph& g, Var e_s, Var e_d, Var alpha, Var beta, double delta) {
  return adaptive_adjacency(g, g.vcat(e_s, e_d), alpha, beta, delta);
}

Var block_diagonal(nn::Graph& g, Var a, Var b) {
  const long ra = a.value().rows(), ca = a.value().cols();
  const long rb = b.value().rows(), cb = b.value().cols();
  Var top = g.hcat(a, g.constant(Mat::Zero(ra, cb)));
  Var bottom = g.hcat(g.constant(Mat::Zero(rb, ca)), b);
  return g.vcat(top, bottom);
}

Var propagate(nn::Graph& g, Var x, Var learned, Var fixed, const PropagationParams& p) {
  const size_t n_layers = p.w_fixed.size();
  Var current = x;
  for (size_t l = 0; l < n_layers; ++l) {
    Var out = g.matmul(g.matmul(fixed, current), g.param(p.w_fixed[l]));
    if (p.w_learned[l]) {
      if (!learned.valid()) throw InternalError("propagate: missing learned adjacency");
      out = g.add(g.matmul(g.matmul(learned, current), g.param(p.w_learned[l])), out);
    }
    if (l + 1 < n_layers) out = g.relu(out);
    current = out;
  }
  return current;
}

}  // namespace chgh
