#pragma once

#include <optional>
#include <string>
#include <vector>

#include "celltop/complex.hpp"
#include "celltop/params.hpp"
#include "celltop/polygon_inference.hpp"
#include "celltop/skeleton_inference.hpp"
#include "celltop/tensor.hpp"

namespace celltop {

struct ModelConfig {
  int f_in = 0;
  int n_classes = 0;
  int hidden = 32;
  int k_max = 4;
  int gcn_layers = 1;
  int cccn_layers = 1;
  double dropout = 0.5;
  bool all_polygons = false;
  // When set, the auxiliary encoder conditions on the input graph ("w graph"
  // setting); otherwise it is a plain MLP over raw features.
  bool graph_conditioned = false;
};

// Edge features pushed back down to the vertices through the coboundary, then
// concatenated with the intermediate node features: N x 2F.
Value downlift(Value x_edges_out, Value x_nodes_int, const Skeleton& g, const LiftParams& p);

// Everything a single forward pass produces, with live tape handles for the
// loss terms. Valid until the owning tape is cleared.
struct ForwardResult {
  Value logits;              // N x C
  SkeletonSample skeleton;   // sampled graph + N x N probability matrix
  PolygonSample polygons;    // sampled 2-cells + 1 x P~ probabilities
  std::vector<Cycle> candidates;
  CellComplex complex;
};

class DcmModel {
 public:
  DcmModel(ModelConfig cfg, Rng& rng);

  ForwardResult forward(Tape& tape, const Tensor& x_raw,
                        const std::optional<Skeleton>& g_in, bool train_mode, Rng& rng);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Parameters of the inference branches (nu_0, nu_1, both alphas). These are
  // the ones the task loss must not touch.
  static bool is_aux_param(const std::string& name);

  // path_stem.json (manifest: config + tensor directory) and path_stem.bin
  // (the concatenated little-endian doubles).
  void save(const std::string& path_stem) const;
  static DcmModel load(const std::string& path_stem);

 private:
  explicit DcmModel(ModelConfig cfg) : cfg_(cfg) {}

  ModelConfig cfg_;
  ParamStore params_;
};

}  // namespace celltop
