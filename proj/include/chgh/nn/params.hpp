#pragma once

// Learnable parameters and their optimizer state. Parameters persist across
// forward passes; gradients are flushed into Param::grad by Graph::backward.

#include <Eigen/Dense>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "chgh/common.hpp"

namespace chgh::nn {

struct Param {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
  Eigen::MatrixXd adam_m;
  Eigen::MatrixXd adam_v;
  double lr_scale = 1.0;  // per-parameter learning-rate multiplier

  long size() const { return value.size(); }
};

class ParamStore {
 public:
  // Uniform init in (-scale, scale); scale <= 0 means zeros.
  Param* create(const std::string& name, int rows, int cols, double scale, Rng& rng);
  Param* find(const std::string& name) const;

  void zero_grad();
  void scale_gradients(double factor);
  double l2_norm_sq() const;
  // Adds coeff * value to every gradient (L2 regularizer pull).
  void add_l2_gradient(double coeff);

  long total_size() const;
  const std::vector<std::unique_ptr<Param>>& all() const { return params_; }

  void save(const std::filesystem::path& path) const;
  // Fills values of already-created params by name; set mismatch is an error.
  void load(const std::filesystem::path& path);

 private:
  std::vector<std::unique_ptr<Param>> params_;
};

// Adam with standard moment defaults.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamStore& store, double lr);
  long steps_taken() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace chgh::nn
