#pragma once

// Reverse-mode autodiff on dense double matrices. A Graph is a tape of
// nodes created in topological order; backward() replays it in reverse.
// Every op stores a closure that routes the node's gradient to its parents.
//
// The engine is rebuilt every forward pass (parameters live outside the
// tape in ParamStore), which keeps the model code free of state and makes
// finite-difference checks straightforward.

#include <Eigen/Dense>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "chgh/common.hpp"
#include "chgh/nn/params.hpp"

namespace chgh::nn {

using Mat = Eigen::MatrixXd;

class Graph;

struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Mat& value() const;
  bool valid() const { return graph != nullptr && id >= 0; }
};

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaves.
  Var constant(Mat v);
  Var param(Param* p);

  // Elementwise and shape ops.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add_rowvec(Var a, Var bias);  // bias: 1 x cols, broadcast over rows
  Var vcat(Var a, Var b);
  Var hcat(Var a, Var b);
  Var rows(Var a, int first, int count);
  Var cols(Var a, int first, int count);
  Var sum(Var a);  // 1x1

  // Nonlinearities.
  Var tanh_(Var a);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var log_clamped(Var a, double floor = 1e-12);
  Var row_softmax(Var a);

  // Specialized ops.
  Var scale_by(Var a, Var scalar);            // scalar: 1x1 learnable
  Var rowwise_dot(Var a, Var b);              // -> n x 1
  Var colwise_scale(Var a, Var col);          // row i scaled by col(i,0)
  Var row_standardize(Var a, double var_floor = 1e-24);
  Var dropout(Var a, double rate, Rng& rng);  // inverted dropout
  // Per-row generated one-hidden-layer decoder: row k of theta packs
  // [W1 (d*d), b1 (d), W2 (d*m), b2 (m)]; y_k = W2 relu(W1 x_k + b1) + b2.
  Var hyper_apply(Var theta, Var x, int d, int m);

  void backward(Var loss);

  const Mat& value(Var v) const;
  const Mat& grad(Var v) const;  // zero matrix if the node never received one
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool has_grad = false;
    bool needs_grad = false;
    std::function<void(Graph&)> backprop;  // empty for leaves/constants
  };

  int push(Mat value, bool needs_grad, std::function<void(Graph&)> backprop);
  void accumulate(int id, const Mat& g);
  const Node& node(int id) const;
  bool needs(Var v) const { return nodes_[v.id].needs_grad; }
  void check(Var v) const;

  // deque: node references stay valid while the tape grows.
  std::deque<Node> nodes_;
  mutable Mat zero_;

  friend struct Var;
};

}  // namespace chgh::nn
