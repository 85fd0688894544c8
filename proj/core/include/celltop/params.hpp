#pragma once

#include <map>
#include <string>
#include <vector>

#include "celltop/tensor.hpp"

namespace celltop {

// Trainable parameter with its optimizer moments.
struct Param {
  Tensor value;
  Tensor m;  // first moment
  Tensor v;  // second moment
};

// Ordered, name-addressed parameter container. Iteration follows insertion
// order so serialization and optimizer sweeps are deterministic.
class ParamStore {
 public:
  // Fan-in scaled uniform init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Param& create(const std::string& name, int rows, int cols, Rng& rng);
  Param& create_zeros(const std::string& name, int rows, int cols);
  Param& create_scalar(const std::string& name, double value);

  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) > 0; }

  const std::vector<std::string>& names() const { return names_; }
  size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::map<std::string, Param> index_;
};

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}
  void step(ParamStore& params, const GradMap& grads);

 private:
  AdamConfig cfg_;
  long t_ = 0;
};

}  // namespace celltop
