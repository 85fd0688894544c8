#include "celltop/operators.hpp"

#include <cmath>

namespace celltop {

namespace {

SparseMatrix normalized_from_lists(const std::vector<std::vector<int>>& adj) {
  int n = static_cast<int>(adj.size());
  std::vector<std::tuple<int, int, double>> trip;
  for (int i = 0; i < n; ++i) {
    double di = static_cast<double>(adj[i].size());
    for (int j : adj[i]) {
      double dj = static_cast<double>(adj[j].size());
      trip.emplace_back(i, j, 1.0 / std::sqrt(di * dj));
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(trip));
}

}  // namespace

SparseMatrix gcn_adjacency(const Skeleton& g) {
  return normalized_from_lists(g.neighbor_lists());
}

SparseMatrix boundary_incidence(const Skeleton& g) {
  std::vector<std::tuple<int, int, double>> trip;
  for (int e = 0; e < g.n_edges(); ++e) {
    trip.emplace_back(e, g.edges[e].first, 1.0);
    trip.emplace_back(e, g.edges[e].second, 1.0);
  }
  return SparseMatrix::from_triplets(g.n_edges(), g.n_vertices, std::move(trip));
}

SparseMatrix coboundary_incidence(const Skeleton& g) {
  std::vector<std::tuple<int, int, double>> trip;
  for (int e = 0; e < g.n_edges(); ++e) {
    trip.emplace_back(g.edges[e].first, e, 1.0);
    trip.emplace_back(g.edges[e].second, e, 1.0);
  }
  return SparseMatrix::from_triplets(g.n_vertices, g.n_edges(), std::move(trip));
}

SparseMatrix cccn_upper_adjacency(const CellComplex& cx) {
  return normalized_from_lists(cx.upper[1]);
}

SparseMatrix cccn_lower_adjacency(const CellComplex& cx) {
  return normalized_from_lists(cx.lower[1]);
}

}  // namespace celltop
