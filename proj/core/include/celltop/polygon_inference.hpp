#pragma once

#include <span>
#include <vector>

#include "celltop/complex.hpp"
#include "celltop/entmax.hpp"
#include "celltop/tensor.hpp"

namespace celltop {

// Affine-phi / affine-beta pair of a boundary (or coboundary) message passing
// round: out = (sum_{j in B} (x_j W_phi + b_phi)) W_beta + b_beta.
struct LiftParams {
  Value phi_w, phi_b, beta_w, beta_b;
};

// Node features -> edge features via the boundary of each edge. Symmetric in
// the two endpoints by construction (sum aggregation).
Value uplift(Value x_nodes, const Skeleton& g, const LiftParams& p);

// Sum of pairwise negative Euclidean distances over all unordered pairs of a
// cycle's boundary edge embeddings. Plain helper used by cycle_scores.
double cycle_similarity(const Tensor& aux_edges, const std::vector<int>& edge_ids);

// 1 x P~ score vector, one cycle_similarity per candidate; differentiable in
// the edge embeddings.
Value cycle_scores(Value aux_edges, const std::vector<std::vector<int>>& candidate_edge_ids);

struct SampledPolygons {
  std::vector<Cycle> candidates;    // canonical, size P~
  std::vector<double> probs;        // entmax probabilities (uniform in all-polygons mode)
  std::vector<int> selected;        // support of probs
};

struct PolygonSample {
  SampledPolygons sampled;
  Value probs;          // 1 x P~; constant (no gradient) in all-polygons mode
  bool differentiable;  // false when all_polygons or P~ <= 1
};

// Global entmax over the candidate scores. With all_polygons set, sampling is
// bypassed and every candidate is kept with uniform probability.
PolygonSample sample_polygons(Value aux_edges, const Skeleton& g,
                              const std::vector<Cycle>& candidates, Value alpha,
                              bool all_polygons);

// One edge-level convolution layer: upper + lower + skip terms.
struct CccnLayerValues {
  Value w_upper, w_lower, w_skip;
};

// Stacked edge convolutions over the complex, ReLU after each layer.
Value edge_mp(Value x_edges, const CellComplex& cx, std::span<const CccnLayerValues> layers);

}  // namespace celltop
