#include "celltop/skeleton_inference.hpp"

#include <cmath>
#include <stdexcept>

#include "celltop/operators.hpp"

namespace celltop {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Value encode_aux(Value x_in, const std::optional<Skeleton>& g_in, const AuxEncoderValues& p) {
  SparseMatrix adj;
  if (p.graph_conditioned) {
    require(g_in.has_value(), "encode_aux: graph-conditioned mode requires an input graph");
    require(g_in->n_vertices == x_in.val().rows, "encode_aux: input graph size mismatch");
    adj = gcn_adjacency(*g_in);
  }
  Value h = x_in;
  for (int layer = 0; layer < 3; ++layer) {
    h = matmul(h, p.w[layer]);
    if (p.graph_conditioned)
      h = spmm(adj, h);
    else
      h = add_row_bias(h, p.b[layer]);
    if (layer < 2) h = relu(h);
  }
  return h;
}

Value similarity_matrix(Value aux) {
  Tape& t = *aux.tape;
  const Tensor& a = aux.val();
  int n = a.rows, d = a.cols;
  Tensor out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) {
        double diff = a(i, c) - a(j, c);
        s += diff * diff;
      }
      double v = -std::sqrt(s);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  int aid = aux.id;
  return t.record(std::move(out), {aid}, [aid](Tape& tp, int id) {
    const Tensor& g = tp.grad(id);
    const Tensor& sim = tp.value(id);
    const Tensor& a = tp.value(aid);
    Tensor& ga = tp.grad(aid);
    int n = a.rows, d = a.cols;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double dist = -sim(i, j);
        if (dist <= 0.0) continue;  // coincident rows: subgradient 0
        double w = (g(i, j) + g(j, i)) / dist;
        for (int c = 0; c < d; ++c) {
          double diff = a(i, c) - a(j, c);
          ga(i, c) -= w * diff;
          ga(j, c) += w * diff;
        }
      }
    }
  });
}

SkeletonSample sample_skeleton(Value sim, Value alpha) {
  const Tensor& sv = sim.val();
  require(sv.rows == sv.cols, "sample_skeleton: square similarity matrix required");
  require(sv.rows >= 2, "sample_skeleton: need at least 2 nodes");
  int n = sv.rows;

  Value normed = layer_norm_row_offdiag(sim);
  Value probs = entmax_rows(normed, alpha, /*mask_diagonal=*/true);

  const Tensor& pv = probs.val();
  SkeletonSample out;
  out.probs = probs;
  out.sampled.prob_rows.resize(n);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (pv(i, j) > 0.0) {
        out.sampled.prob_rows[i].emplace_back(j, pv(i, j));
        if (i < j || pv(j, i) <= 0.0) edges.emplace_back(i, j);
      }
    }
  }
  out.sampled.skeleton = Skeleton::from_edges(n, std::move(edges));
  return out;
}

Value node_mp(Value x_in, const Skeleton& g, std::span<const Value> layer_weights) {
  require(g.n_vertices == x_in.val().rows, "node_mp: skeleton size mismatch");
  require(!layer_weights.empty(), "node_mp: need at least one layer");
  SparseMatrix adj = gcn_adjacency(g);
  Value h = x_in;
  for (const Value& w : layer_weights) h = relu(spmm(adj, matmul(h, w)));
  return h;
}

}  // namespace celltop
