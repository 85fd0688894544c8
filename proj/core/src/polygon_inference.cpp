#include "celltop/polygon_inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "celltop/operators.hpp"

namespace celltop {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double neg_dist(const Tensor& x, int a, int b) {
  double s = 0.0;
  for (int c = 0; c < x.cols; ++c) {
    double d = x(a, c) - x(b, c);
    s += d * d;
  }
  return -std::sqrt(s);
}

}  // namespace

Value uplift(Value x_nodes, const Skeleton& g, const LiftParams& p) {
  require(g.n_vertices == x_nodes.val().rows, "uplift: skeleton size mismatch");
  SparseMatrix inc = boundary_incidence(g);
  Value h = add_row_bias(matmul(x_nodes, p.phi_w), p.phi_b);
  Value s = spmm(inc, h);
  return add_row_bias(matmul(s, p.beta_w), p.beta_b);
}

double cycle_similarity(const Tensor& aux_edges, const std::vector<int>& edge_ids) {
  require(edge_ids.size() >= 3, "cycle_similarity: cycle shorter than 3");
  for (int e : edge_ids)
    require(e >= 0 && e < aux_edges.rows, "cycle_similarity: edge id out of range");
  // accumulate in sorted id order so the score is exactly invariant to the
  // cycle's rotation/orientation
  std::vector<int> ids = edge_ids;
  std::sort(ids.begin(), ids.end());
  double total = 0.0;
  for (size_t i = 0; i < ids.size(); ++i)
    for (size_t j = i + 1; j < ids.size(); ++j)
      total += neg_dist(aux_edges, ids[i], ids[j]);
  return total;
}

Value cycle_scores(Value aux_edges, const std::vector<std::vector<int>>& candidate_edge_ids) {
  Tape& t = *aux_edges.tape;
  const Tensor& xv = aux_edges.val();
  int np = static_cast<int>(candidate_edge_ids.size());
  Tensor out(1, np);
  for (int c = 0; c < np; ++c) out(0, c) = cycle_similarity(xv, candidate_edge_ids[c]);
  int xid = aux_edges.id;
  return t.record(std::move(out), {xid},
                  [xid, cands = candidate_edge_ids](Tape& tp, int id) {
    const Tensor& g = tp.grad(id);
    const Tensor& x = tp.value(xid);
    Tensor& gx = tp.grad(xid);
    for (size_t c = 0; c < cands.size(); ++c) {
      double gc = g(0, static_cast<int>(c));
      if (gc == 0.0) continue;
      const auto& ids = cands[c];
      for (size_t i = 0; i < ids.size(); ++i) {
        for (size_t j = i + 1; j < ids.size(); ++j) {
          int a = ids[i], b = ids[j];
          double dist = -neg_dist(x, a, b);
          if (dist <= 0.0) continue;
          double w = gc / dist;
          for (int k = 0; k < x.cols; ++k) {
            double diff = x(a, k) - x(b, k);
            gx(a, k) -= w * diff;
            gx(b, k) += w * diff;
          }
        }
      }
    }
  });
}

PolygonSample sample_polygons(Value aux_edges, const Skeleton& g,
                              const std::vector<Cycle>& candidates, Value alpha,
                              bool all_polygons) {
  Tape& t = *aux_edges.tape;
  int np = static_cast<int>(candidates.size());

  PolygonSample out;
  out.sampled.candidates = candidates;
  out.differentiable = false;

  if (np == 0) {
    out.probs = t.constant(Tensor(0, 0));
    return out;  // complex degenerates to its skeleton
  }

  if (all_polygons) {
    double u = 1.0 / np;
    out.probs = t.constant(Tensor::full(1, np, u));
    out.sampled.probs.assign(np, u);
    for (int c = 0; c < np; ++c) out.sampled.selected.push_back(c);
    return out;
  }

  std::vector<std::vector<int>> edge_ids(np);
  CellComplex tmp;  // only for edge-id resolution
  for (int c = 0; c < np; ++c) {
    const Cycle& cyc = candidates[c];
    int k = static_cast<int>(cyc.size());
    edge_ids[c].resize(k);
    for (int i = 0; i < k; ++i) {
      int e = g.edge_id(cyc[i], cyc[(i + 1) % k]);
      require(e >= 0, "sample_polygons: candidate edge missing from skeleton");
      edge_ids[c][i] = e;
    }
  }
  (void)tmp;

  Value z = cycle_scores(aux_edges, edge_ids);
  if (np == 1) {
    // single candidate: probability 1 regardless of score, no gradient path
    out.probs = t.constant(Tensor::full(1, 1, 1.0));
    out.sampled.probs = {1.0};
    out.sampled.selected = {0};
    return out;
  }

  Value probs = entmax_rows(layer_norm_row(z), alpha, /*mask_diagonal=*/false);
  out.probs = probs;
  out.differentiable = true;
  const Tensor& pv = probs.val();
  out.sampled.probs.assign(pv.data.begin(), pv.data.end());
  for (int c = 0; c < np; ++c)
    if (pv(0, c) > 0.0) out.sampled.selected.push_back(c);
  return out;
}

Value edge_mp(Value x_edges, const CellComplex& cx, std::span<const CccnLayerValues> layers) {
  require(cx.skeleton.n_edges() == x_edges.val().rows, "edge_mp: edge count mismatch");
  require(!layers.empty(), "edge_mp: need at least one layer");
  SparseMatrix upper = cccn_upper_adjacency(cx);
  SparseMatrix lower = cccn_lower_adjacency(cx);
  Value h = x_edges;
  for (const CccnLayerValues& l : layers) {
    Value acc = matmul(h, l.w_skip);
    acc = add(acc, spmm(upper, matmul(h, l.w_upper)));
    acc = add(acc, spmm(lower, matmul(h, l.w_lower)));
    h = relu(acc);
  }
  return h;
}

}  // namespace celltop
