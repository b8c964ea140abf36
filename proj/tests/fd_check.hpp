#pragma once

// Shared test helpers: central-difference gradient checking and random
// matrix fixtures.

#include <functional>
#include <map>

#include "chgh/nn/graph.hpp"

namespace chgh_test {

using chgh::Mat;
using chgh::Rng;

inline double max_rel_error(chgh::nn::ParamStore& store,
                            const std::function<chgh::nn::Var(chgh::nn::Graph&)>& build_loss,
                            double h = 1e-6) {
  store.zero_grad();
  {
    chgh::nn::Graph g;
    chgh::nn::Var loss = build_loss(g);
    g.backward(loss);
  }
  std::map<std::string, Mat> analytic;
  for (const auto& p : store.all()) analytic[p->name] = p->grad;

  auto loss_value = [&]() {
    chgh::nn::Graph g;
    return build_loss(g).value()(0, 0);
  };
  double worst = 0.0;
  for (const auto& p : store.all()) {
    for (long c = 0; c < p->value.cols(); ++c) {
      for (long r = 0; r < p->value.rows(); ++r) {
        double saved = p->value(r, c);
        p->value(r, c) = saved + h;
        double up = loss_value();
        p->value(r, c) = saved - h;
        double down = loss_value();
        p->value(r, c) = saved;
        double numeric = (up - down) / (2.0 * h);
        double a = analytic[p->name](r, c);
        double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
        worst = std::max(worst, rel);
      }
    }
  }
  return worst;
}

inline Mat random_mat(Rng& rng, int r, int c, double scale = 1.0) {
  Mat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = rng.uniform(-scale, scale);
  return m;
}

}  // namespace chgh_test
