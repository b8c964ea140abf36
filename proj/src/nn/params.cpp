#include "chgh/nn/params.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

namespace chgh::nn {

namespace {
constexpr char kMagic[8] = {'C', 'H', 'G', 'H', 'P', 'R', 'M', '1'};
}

Param* ParamStore::create(const std::string& name, int rows, int cols, double scale, Rng& rng) {
  if (find(name)) throw InternalError("duplicate parameter name: " + name);
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value = Eigen::MatrixXd::Zero(rows, cols);
  if (scale > 0.0)
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) p->value(r, c) = rng.uniform(-scale, scale);
  p->grad = Eigen::MatrixXd::Zero(rows, cols);
  p->adam_m = Eigen::MatrixXd::Zero(rows, cols);
  p->adam_v = Eigen::MatrixXd::Zero(rows, cols);
  params_.push_back(std::move(p));
  return params_.back().get();
}

Param* ParamStore::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->grad.setZero();
}

void ParamStore::scale_gradients(double factor) {
  for (auto& p : params_) p->grad *= factor;
}

double ParamStore::l2_norm_sq() const {
  double total = 0.0;
  for (const auto& p : params_) total += p->value.squaredNorm();
  return total;
}

void ParamStore::add_l2_gradient(double coeff) {
  for (auto& p : params_) p->grad += coeff * p->value;
}

long ParamStore::total_size() const {
  long total = 0;
  for (const auto& p : params_) total += p->size();
  return total;
}

void ParamStore::save(const std::filesystem::path& path) const {
  std::string blob;
  blob.append(kMagic, sizeof(kMagic));
  auto put_u32 = [&](std::uint32_t v) { blob.append(reinterpret_cast<const char*>(&v), 4); };
  put_u32(static_cast<std::uint32_t>(params_.size()));
  for (const auto& p : params_) {
    put_u32(static_cast<std::uint32_t>(p->name.size()));
    blob.append(p->name);
    put_u32(static_cast<std::uint32_t>(p->value.rows()));
    put_u32(static_cast<std::uint32_t>(p->value.cols()));
    blob.append(reinterpret_cast<const char*>(p->value.data()),
                static_cast<size_t>(p->value.size()) * sizeof(double));
  }
  atomic_write_file(path, blob);
}

void ParamStore::load(const std::filesystem::path& path) {
  std::string blob = read_text_file(path);
  size_t off = 0;
  auto need = [&](size_t n) {
    if (off + n > blob.size()) throw UserError("truncated parameter file: " + path.string());
  };
  need(sizeof(kMagic));
  if (std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0)
    throw UserError("not a parameter file: " + path.string());
  off = sizeof(kMagic);
  auto get_u32 = [&]() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, blob.data() + off, 4);
    off += 4;
    return v;
  };
  std::uint32_t count = get_u32();
  std::set<std::string> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t name_len = get_u32();
    need(name_len);
    std::string name(blob.data() + off, name_len);
    off += name_len;
    std::uint32_t rows = get_u32();
    std::uint32_t cols = get_u32();
    size_t bytes = static_cast<size_t>(rows) * cols * sizeof(double);
    need(bytes);
    Param* p = find(name);
    if (!p) throw UserError("parameter file has unknown parameter \"" + name + "\"");
    if (p->value.rows() != static_cast<long>(rows) || p->value.cols() != static_cast<long>(cols))
      throw UserError("parameter \"" + name + "\" has mismatched shape in " + path.string());
    std::memcpy(p->value.data(), blob.data() + off, bytes);
    off += bytes;
    seen.insert(name);
  }
  for (const auto& p : params_)
    if (!seen.count(p->name))
      throw UserError("parameter file is missing parameter \"" + p->name + "\"");
}

void AdamOptimizer::step(ParamStore& store, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& p : store.all()) {
    p->adam_m = beta1_ * p->adam_m + (1.0 - beta1_) * p->grad;
    p->adam_v = beta2_ * p->adam_v.array().matrix() +
                (1.0 - beta2_) * p->grad.array().square().matrix();
    Eigen::ArrayXXd m_hat = p->adam_m.array() / bc1;
    Eigen::ArrayXXd v_hat = p->adam_v.array() / bc2;
    p->value.array() -= lr * p->lr_scale * m_hat / (v_hat.sqrt() + eps_);
  }
}

}  // namespace chgh::nn
