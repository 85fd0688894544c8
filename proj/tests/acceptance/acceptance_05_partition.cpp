// Gradient partition: the task loss alone leaves the inference branch
// (nu_0, nu_1, both alphas) at exactly zero; the sampling losses alone leave
// the main branch at exactly zero.
#include <cmath>

#include "acceptance_common.hpp"
#include "celltop/network.hpp"
#include "celltop/training.hpp"

using namespace celltop;

int main() {
  Rng rng(99991);
  ModelConfig cfg;
  cfg.f_in = 5;
  cfg.n_classes = 3;
  cfg.hidden = 16;
  DcmModel model(cfg, rng);
  Tensor x(12, 5);
  for (double& v : x.data) v = rng.uniform(-1.5, 1.5);
  std::vector<int> labels(12), mask(12);
  for (int i = 0; i < 12; ++i) {
    labels[i] = i % 3;
    mask[i] = i;
  }
  std::vector<double> delta(12);
  for (double& d : delta) d = rng.uniform(-0.5, 0.5);

  auto grads_of = [&](double l_task, double l_sampling) {
    Tape tape;
    Rng r(0);
    ForwardResult f = model.forward(tape, x, std::nullopt, false, r);
    Value loss =
        add(scale(softmax_cross_entropy(f.logits, labels, mask), l_task),
            scale(add(graph_loss(delta, f.skeleton), polygon_loss(delta, f.polygons)),
                  l_sampling));
    return tape.backward(loss);
  };

  bool ok = true;
  GradMap task_only = grads_of(1.0, 0.0);
  for (const auto& [name, g] : task_only) {
    bool should_be_zero = DcmModel::is_aux_param(name);
    for (double v : g.data)
      if (should_be_zero && v != 0.0) ok = false;
  }
  GradMap sampling_only = grads_of(0.0, 1.0);
  double aux_mag = 0;
  for (const auto& [name, g] : sampling_only) {
    bool is_aux = DcmModel::is_aux_param(name);
    for (double v : g.data) {
      if (!is_aux && v != 0.0) ok = false;
      if (is_aux) aux_mag += std::fabs(v);
    }
  }
  // the partition is only meaningful if the sampling losses actually reach nu
  if (aux_mag == 0.0) ok = false;
  double main_mag = 0;
  for (const auto& [name, g] : task_only)
    if (!DcmModel::is_aux_param(name))
      for (double v : g.data) main_mag += std::fabs(v);
  if (main_mag == 0.0) ok = false;

  return acceptance::report(5, "gradient partition", ok);
}
