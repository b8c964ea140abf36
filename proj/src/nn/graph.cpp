#include "chgh/nn/graph.hpp"

#include <cmath>

namespace chgh::nn {

const Mat& Var::value() const { return graph->value(*this); }

void Graph::check(Var v) const {
  if (v.graph != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw InternalError("Var does not belong to this graph");
}

const Graph::Node& Graph::node(int id) const { return nodes_[id]; }

const Mat& Graph::value(Var v) const {
  check(v);
  return nodes_[v.id].value;
}

const Mat& Graph::grad(Var v) const {
  check(v);
  const Node& n = nodes_[v.id];
  if (n.has_grad) return n.grad;
  zero_ = Mat::Zero(n.value.rows(), n.value.cols());
  return zero_;
}

int Graph::push(Mat value, bool needs_grad, std::function<void(Graph&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Graph::accumulate(int id, const Mat& g) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

Var Graph::constant(Mat v) { return {this, push(std::move(v), false, {})}; }

Var Graph::param(Param* p) {
  int id = push(p->value, true, {});
  nodes_[id].backprop = [id, p](Graph& g) {
    if (g.nodes_[id].has_grad) p->grad += g.nodes_[id].grad;
  };
  return {this, id};
}

Var Graph::add(Var a, Var b) {
  check(a);
  check(b);
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
    throw InternalError("add: shape mismatch");
  bool ng = needs(a) || needs(b);
  int ida = a.id, idb = b.id;
  int id = push(a.value() + b.value(), ng, {});
  nodes_[id].backprop = [id, ida, idb](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& gr = g.nodes_[id].grad;
    g.accumulate(ida, gr);
    g.accumulate(idb, gr);
  };
  return {this, id};
}

Var Graph::sub(Var a, Var b) {
  check(a);
  check(b);
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
    throw InternalError("sub: shape mismatch");
  bool ng = needs(a) || needs(b);
  int ida = a.id, idb = b.id;
  int id = push(a.value() - b.value(), ng, {});
  nodes_[id].backprop = [id, ida, idb](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& gr = g.nodes_[id].grad;
    g.accumulate(ida, gr);
    g.accumulate(idb, -gr);
  };
  return {this, id};
}

Var Graph::hadamard(Var a, Var b) {
  check(a);
  check(b);
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
    throw InternalError("hadamard: shape mismatch");
  bool ng = needs(a) || needs(b);
  int ida = a.id, idb = b.id;
  int id = push(a.value().cwiseProduct(b.value()), ng, {});
  nodes_[id].backprop = [id, ida, idb](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& gr = g.nodes_[id].grad;
    g.accumulate(ida, gr.cwiseProduct(g.nodes_[idb].value));
    g.accumulate(idb, gr.cwiseProduct(g.nodes_[ida].value));
  };
  return {this, id};
}

Var Graph::scale(Var a, double s) {
  check(a);
  int ida = a.id;
  int id = push(s * a.value(), needs(a), {});
  nodes_[id].backprop = [id, ida, s](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    g.accumulate(ida, s * g.nodes_[id].grad);
  };
  return {this, id};
}

Var Graph::add_scalar(Var a, double s) {
  check(a);
  int ida = a.id;
  int id = push(a.value().array() + s, needs(a), {});
  nodes_[id].backprop = [id, ida](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    g.accumulate(ida, g.nodes_[id].grad);
  };
  return {this, id};
}

Var Graph::matmul(Var a, Var b) {
  check(a);
  check(b);
  if (a.value().cols() != b.value().rows()) throw InternalError("matmul: inner dim mismatch");
  bool ng = needs(a) || needs(b);
  int ida = a.id, idb = b.id;
  int id = push(a.value() * b.value(), ng, {});
  nodes_[id].backprop = [id, ida, idb](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& gr = g.nodes_[id].grad;
    g.accumulate(ida, gr * g.nodes_[idb].value.transpose());
    g.accumulate(idb, g.nodes_[ida].value.transpose() * gr);
  };
  return {this, id};
}

Var Graph::transpose(Var a) {
  check(a);
  int ida = a.id;
  int id = push(a.value().transpose(), needs(a), {});
  nodes_[id].backprop = [id, ida](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    g.accumulate(ida, g.nodes_[id].grad.transpose());
  };
  return {this, id};
}

Var Graph::add_rowvec(Var a, Var bias) {
  check(a);
  check(bias);
  if (bias.value().rows() != 1 || bias.value().cols() != a.value().cols())
    throw InternalError("add_rowvec: bias must be 1 x cols");
  bool ng = needs(a) || needs(bias);
  int ida = a.id, idb = bias.id;
  Mat v = a.value();
  v.rowwise() += bias.value().row(0);
  int id = push(std::move(v), ng, {});
  nodes_[id].backprop = [id, ida, idb](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& gr = g.nodes_[id].grad;
    g.accumulate(ida, gr);
    g.accumulate(idb, gr.colwise().sum());
  };
  return {this, id};
}

Var Graph::vcat(Var a, Var b) {
  check(a);
  check(b);
  if (a.value().cols() != b.value().cols()) throw InternalError("vcat: column mismatch");
  bool ng = needs(a) || needs(b);
  int ida = a.id, idb = b.id;
  Mat v(a.value().rows() + b.value().rows(), a.value().cols());
  v << a.value(), b.value();
  long ra = a.value().rows();
  int id = push(std::move(v), ng, {});
  nodes_[id].backprop = [id, ida, idb, ra](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& gr = g.nodes_[id].grad;
    g.accumulate(ida, gr.topRows(ra));
    g.accumulate(idb, gr.bottomRows(gr.rows() - ra));
  };
  return {this, id};
}

Var Graph::hcat(Var a, Var b) {
  check(a);
  check(b);
  if (a.value().rows() != b.value().rows()) throw InternalError("hcat: row mismatch");
  bool ng = needs(a) || needs(b);
  int ida = a.id, idb = b.id;
  Mat v(a.value().rows(), a.value().cols() + b.value().cols());
  v << a.value(), b.value();
  long ca = a.value().cols();
  int id = push(std::move(v), ng, {});
  nodes_[id].backprop = [id, ida, idb, ca](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& gr = g.nodes_[id].grad;
    g.accumulate(ida, gr.leftCols(ca));
    g.accumulate(idb, gr.rightCols(gr.cols() - ca));
  };
  return {this, id};
}

Var Graph::rows(Var a, int first, int count) {
  check(a);
  if (first < 0 || count < 0 || first + count > a.value().rows())
    throw InternalError("rows: slice out of range");
  int ida = a.id;
  int id = push(a.value().middleRows(first, count), needs(a), {});
  nodes_[id].backprop = [id, ida, first, count](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    Mat full = Mat::Zero(g.nodes_[ida].value.rows(), g.nodes_[ida].value.cols());
    full.middleRows(first, count) = g.nodes_[id].grad;
    g.accumulate(ida, full);
  };
  return {this, id};
}

Var Graph::cols(Var a, int first, int count) {
  check(a);
  if (first < 0 || count < 0 || first + count > a.value().cols())
    throw InternalError("cols: slice out of range");
  int ida = a.id;
  int id = push(a.value().middleCols(first, count), needs(a), {});
  nodes_[id].backprop = [id, ida, first, count](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    Mat full = Mat::Zero(g.nodes_[ida].value.rows(), g.nodes_[ida].value.cols());
    full.middleCols(first, count) = g.nodes_[id].grad;
    g.accumulate(ida, full);
  };
  return {this, id};
}

Var Graph::sum(Var a) {
  check(a);
  int ida = a.id;
  Mat v(1, 1);
  v(0, 0) = a.value().sum();
  int id = push(std::move(v), needs(a), {});
  nodes_[id].backprop = [id, ida](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    double s = g.nodes_[id].grad(0, 0);
    g.accumulate(ida, Mat::Constant(g.nodes_[ida].value.rows(), g.nodes_[ida].value.cols(), s));
  };
  return {this, id};
}

Var Graph::tanh_(Var a) {
  check(a);
  int ida = a.id;
  int id = push(a.value().array().tanh(), needs(a), {});
  nodes_[id].backprop = [id, ida](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& y = g.nodes_[id].value;
    g.accumulate(ida, (g.nodes_[id].grad.array() * (1.0 - y.array().square())).matrix());
  };
  return {this, id};
}

Var Graph::relu(Var a) {
  check(a);
  int ida = a.id;
  int id = push(a.value().cwiseMax(0.0), needs(a), {});
  nodes_[id].backprop = [id, ida](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& x = g.nodes_[ida].value;
    Mat mask = (x.array() > 0.0).cast<double>();
    g.accumulate(ida, g.nodes_[id].grad.cwiseProduct(mask));
  };
  return {this, id};
}

Var Graph::sigmoid(Var a) {
  check(a);
  int ida = a.id;
  Mat v = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  int id = push(std::move(v), needs(a), {});
  nodes_[id].backprop = [id, ida](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& y = g.nodes_[id].value;
    g.accumulate(ida, (g.nodes_[id].grad.array() * y.array() * (1.0 - y.array())).matrix());
  };
  return {this, id};
}

Var Graph::log_clamped(Var a, double floor) {
  check(a);
  int ida = a.id;
  Mat v = a.value().cwiseMax(floor).array().log().matrix();
  int id = push(std::move(v), needs(a), {});
  nodes_[id].backprop = [id, ida, floor](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& x = g.nodes_[ida].value;
    Mat dx = (x.array() > floor).cast<double>() / x.cwiseMax(floor).array();
    g.accumulate(ida, g.nodes_[id].grad.cwiseProduct(dx.matrix()));
  };
  return {this, id};
}

Var Graph::row_softmax(Var a) {
  check(a);
  int ida = a.id;
  Mat v = a.value();
  for (long r = 0; r < v.rows(); ++r) {
    Eigen::ArrayXd row = v.row(r).array();
    row -= row.maxCoeff();
    Eigen::ArrayXd ex = row.exp();
    v.row(r) = (ex / ex.sum()).matrix().transpose();
  }
  int id = push(std::move(v), needs(a), {});
  nodes_[id].backprop = [id, ida](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& y = g.nodes_[id].value;
    const Mat& gr = g.nodes_[id].grad;
    Mat dx(y.rows(), y.cols());
    for (long r = 0; r < y.rows(); ++r) {
      double dot = y.row(r).dot(gr.row(r));
      dx.row(r) = (gr.row(r).array() - dot) * y.row(r).array();
    }
    g.accumulate(ida, dx);
  };
  return {this, id};
}

Var Graph::scale_by(Var a, Var scalar) {
  check(a);
  check(scalar);
  if (scalar.value().rows() != 1 || scalar.value().cols() != 1)
    throw InternalError("scale_by: scalar must be 1x1");
  bool ng = needs(a) || needs(scalar);
  int ida = a.id, ids = scalar.id;
  int id = push(scalar.value()(0, 0) * a.value(), ng, {});
  nodes_[id].backprop = [id, ida, ids](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& gr = g.nodes_[id].grad;
    double s = g.nodes_[ids].value(0, 0);
    g.accumulate(ida, s * gr);
    Mat ds(1, 1);
    ds(0, 0) = gr.cwiseProduct(g.nodes_[ida].value).sum();
    g.accumulate(ids, ds);
  };
  return {this, id};
}

Var Graph::rowwise_dot(Var a, Var b) {
  check(a);
  check(b);
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
    throw InternalError("rowwise_dot: shape mismatch");
  bool ng = needs(a) || needs(b);
  int ida = a.id, idb = b.id;
  Mat v = a.value().cwiseProduct(b.value()).rowwise().sum();
  int id = push(std::move(v), ng, {});
  nodes_[id].backprop = [id, ida, idb](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& gr = g.nodes_[id].grad;  // n x 1
    const Mat& av = g.nodes_[ida].value;
    const Mat& bv = g.nodes_[idb].value;
    g.accumulate(ida, bv.array().colwise() * gr.col(0).array());
    g.accumulate(idb, av.array().colwise() * gr.col(0).array());
  };
  return {this, id};
}

Var Graph::colwise_scale(Var a, Var col) {
  check(a);
  check(col);
  if (col.value().cols() != 1 || col.value().rows() != a.value().rows())
    throw InternalError("colwise_scale: column shape mismatch");
  bool ng = needs(a) || needs(col);
  int ida = a.id, idc = col.id;
  Mat v = a.value().array().colwise() * col.value().col(0).array();
  int id = push(std::move(v), ng, {});
  nodes_[id].backprop = [id, ida, idc](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& gr = g.nodes_[id].grad;
    const Mat& av = g.nodes_[ida].value;
    const Mat& cv = g.nodes_[idc].value;
    g.accumulate(ida, gr.array().colwise() * cv.col(0).array());
    g.accumulate(idc, gr.cwiseProduct(av).rowwise().sum());
  };
  return {this, id};
}

Var Graph::row_standardize(Var a, double var_floor) {
  check(a);
  int ida = a.id;
  const Mat& x = a.value();
  const double n = static_cast<double>(x.cols());
  Mat y(x.rows(), x.cols());
  std::vector<double> inv_std(x.rows(), 0.0);
  for (long r = 0; r < x.rows(); ++r) {
    double mu = x.row(r).mean();
    double var = (x.row(r).array() - mu).square().sum() / n;
    if (var <= var_floor) {
      y.row(r).setZero();  // all-equal rows map to zero
    } else {
      inv_std[r] = 1.0 / std::sqrt(var);
      y.row(r) = (x.row(r).array() - mu) * inv_std[r];
    }
  }
  int id = push(std::move(y), needs(a), {});
  nodes_[id].backprop = [id, ida, inv_std, n](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& yv = g.nodes_[id].value;
    const Mat& gr = g.nodes_[id].grad;
    Mat dx = Mat::Zero(yv.rows(), yv.cols());
    for (long r = 0; r < yv.rows(); ++r) {
      if (inv_std[r] == 0.0) continue;  // flat region
      double g_mean = gr.row(r).mean();
      double gy_mean = gr.row(r).cwiseProduct(yv.row(r)).sum() / n;
      dx.row(r) =
          inv_std[r] * (gr.row(r).array() - g_mean - yv.row(r).array() * gy_mean).matrix();
    }
    g.accumulate(ida, dx);
  };
  return {this, id};
}

Var Graph::dropout(Var a, double rate, Rng& rng) {
  check(a);
  if (rate < 0.0 || rate >= 1.0) throw InternalError("dropout rate must be in [0, 1)");
  if (rate == 0.0) return a;
  int ida = a.id;
  const double keep = 1.0 - rate;
  Mat mask(a.value().rows(), a.value().cols());
  for (long c = 0; c < mask.cols(); ++c)
    for (long r = 0; r < mask.rows(); ++r) mask(r, c) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
  int id = push(a.value().cwiseProduct(mask), needs(a), {});
  nodes_[id].backprop = [id, ida, mask](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    g.accumulate(ida, g.nodes_[id].grad.cwiseProduct(mask));
  };
  return {this, id};
}

Var Graph::hyper_apply(Var theta, Var x, int d, int m) {
  check(theta);
  check(x);
  const long n = x.value().rows();
  const long expect = static_cast<long>(d) * d + d + static_cast<long>(d) * m + m;
  if (x.value().cols() != d) throw InternalError("hyper_apply: input width mismatch");
  if (theta.value().rows() != n || theta.value().cols() != expect)
    throw InternalError("hyper_apply: theta must be n x (d*d + d + d*m + m)");
  bool ng = needs(theta) || needs(x);
  int idt = theta.id, idx = x.id;

  // Per row k: unpack row-major W1 (d x d), b1 (d), W2 (m x d), b2 (m) and
  // evaluate y = W2 relu(W1 x + b1) + b2.
  auto unpack = [d, m](const Eigen::RowVectorXd& row, Eigen::MatrixXd* w1, Eigen::VectorXd* b1,
                       Eigen::MatrixXd* w2, Eigen::VectorXd* b2) {
    long off = 0;
    w1->resize(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) (*w1)(r, c) = row(off++);
    b1->resize(d);
    for (int r = 0; r < d; ++r) (*b1)(r) = row(off++);
    w2->resize(m, d);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < d; ++c) (*w2)(r, c) = row(off++);
    b2->resize(m);
    for (int r = 0; r < m; ++r) (*b2)(r) = row(off++);
  };

  Mat y(n, m);
  for (long k = 0; k < n; ++k) {
    Eigen::MatrixXd w1, w2;
    Eigen::VectorXd b1, b2;
    unpack(theta.value().row(k), &w1, &b1, &w2, &b2);
    Eigen::VectorXd h = (w1 * x.value().row(k).transpose() + b1).cwiseMax(0.0);
    y.row(k) = (w2 * h + b2).transpose();
  }
  int id = push(std::move(y), ng, {});
  nodes_[id].backprop = [id, idt, idx, d, m, unpack](Graph& g) {
    if (!g.nodes_[id].has_grad) return;
    const Mat& gr = g.nodes_[id].grad;
    const Mat& tv = g.nodes_[idt].value;
    const Mat& xv = g.nodes_[idx].value;
    Mat dtheta = Mat::Zero(tv.rows(), tv.cols());
    Mat dx = Mat::Zero(xv.rows(), xv.cols());
    for (long k = 0; k < xv.rows(); ++k) {
      Eigen::MatrixXd w1, w2;
      Eigen::VectorXd b1, b2;
      unpack(tv.row(k), &w1, &b1, &w2, &b2);
      Eigen::VectorXd xk = xv.row(k).transpose();
      Eigen::VectorXd pre = w1 * xk + b1;
      Eigen::VectorXd h = pre.cwiseMax(0.0);
      Eigen::VectorXd gy = gr.row(k).transpose();            // m
      Eigen::MatrixXd dW2 = gy * h.transpose();              // m x d
      Eigen::VectorXd db2 = gy;                              // m
      Eigen::VectorXd dh = w2.transpose() * gy;              // d
      Eigen::VectorXd dpre =
          dh.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());  // d
      Eigen::MatrixXd dW1 = dpre * xk.transpose();           // d x d
      Eigen::VectorXd db1 = dpre;                            // d
      dx.row(k) = (w1.transpose() * dpre).transpose();
      long off = 0;
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) dtheta(k, off++) = dW1(r, c);
      for (int r = 0; r < d; ++r) dtheta(k, off++) = db1(r);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < d; ++c) dtheta(k, off++) = dW2(r, c);
      for (int r = 0; r < m; ++r) dtheta(k, off++) = db2(r);
    }
    g.accumulate(idt, dtheta);
    g.accumulate(idx, dx);
  };
  return {this, id};
}

void Graph::backward(Var loss) {
  check(loss);
  const Node& ln = nodes_[loss.id];
  if (ln.value.rows() != 1 || ln.value.cols() != 1)
    throw InternalError("backward: loss must be a 1x1 value");
  accumulate(loss.id, Mat::Constant(1, 1, 1.0));
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.needs_grad && n.has_grad && n.backprop) n.backprop(*this);
  }
}

}  // namespace chgh::nn
