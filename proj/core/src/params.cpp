#include "celltop/params.hpp"

#include <cmath>
#include <stdexcept>

namespace celltop {

Param& ParamStore::create(const std::string& name, int rows, int cols, Rng& rng) {
  Param& p = create_zeros(name, rows, cols);
  double s = 1.0 / std::sqrt(static_cast<double>(rows));
  for (double& v : p.value.data) v = rng.uniform(-s, s);
  return p;
}

Param& ParamStore::create_zeros(const std::string& name, int rows, int cols) {
  if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
  names_.push_back(name);
  Param& p = index_[name];
  p.value = Tensor::zeros(rows, cols);
  p.m = Tensor::zeros(rows, cols);
  p.v = Tensor::zeros(rows, cols);
  return p;
}

Param& ParamStore::create_scalar(const std::string& name, double value) {
  Param& p = create_zeros(name, 1, 1);
  p.value(0, 0) = value;
  return p;
}

Param& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("ParamStore: unknown name " + name);
  return it->second;
}

const Param& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("ParamStore: unknown name " + name);
  return it->second;
}

void Adam::step(ParamStore& params, const GradMap& grads) {
  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (const std::string& name : params.names()) {
    auto it = grads.find(name);
    if (it == grads.end()) continue;
    Param& p = params.at(name);
    const Tensor& g = it->second;
    for (size_t i = 0; i < p.value.size(); ++i) {
      double gi = g.data[i];
      p.m.data[i] = cfg_.beta1 * p.m.data[i] + (1.0 - cfg_.beta1) * gi;
      p.v.data[i] = cfg_.beta2 * p.v.data[i] + (1.0 - cfg_.beta2) * gi * gi;
      double mhat = p.m.data[i] / bc1;
      double vhat = p.v.data[i] / bc2;
      p.value.data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace celltop
