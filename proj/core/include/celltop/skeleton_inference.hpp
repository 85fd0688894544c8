#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "celltop/complex.hpp"
#include "celltop/entmax.hpp"
#include "celltop/tensor.hpp"

namespace celltop {

// Result of the node-wise sparse edge sampling: the directed probability rows
// and the symmetrized undirected skeleton they induce.
struct SampledSkeleton {
  // per source node, (target, probability) for every strictly positive entry
  std::vector<std::vector<std::pair<int, double>>> prob_rows;
  Skeleton skeleton;
};

// Bound parameter set of the 3-layer auxiliary encoder (ReLU/ReLU/none).
// Graph-conditioned layers follow the degree-normalized convolution rule and
// carry no bias; plain layers are affine.
struct AuxEncoderValues {
  std::array<Value, 3> w;
  std::array<Value, 3> b;  // invalid handles in graph-conditioned mode
  bool graph_conditioned = false;
};

// nu_0: raw node features -> N x 32 auxiliary embeddings.
Value encode_aux(Value x_in, const std::optional<Skeleton>& g_in, const AuxEncoderValues& p);

// sim(i, j) = -||aux_i - aux_j||_2, zero diagonal (masked downstream).
Value similarity_matrix(Value aux);

// Row-wise layer norm (off-diagonal) + entmax + union symmetrization.
struct SkeletonSample {
  SampledSkeleton sampled;
  Value probs;  // N x N, zero diagonal, rows on the simplex
};
SkeletonSample sample_skeleton(Value sim, Value alpha);

// Stacked degree-normalized convolution layers over the inferred skeleton,
// ReLU after each: x <- relu(A x W_l).
Value node_mp(Value x_in, const Skeleton& g, std::span<const Value> layer_weights);

}  // namespace celltop
