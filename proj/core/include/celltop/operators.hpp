#pragma once

#include "celltop/complex.hpp"
#include "celltop/tensor.hpp"

namespace celltop {

// Symmetric-degree-normalized adjacency (no self loops): A[i][j] = 1/sqrt(di dj)
// for each edge {i, j}. Isolated vertices get an all-zero row.
SparseMatrix gcn_adjacency(const Skeleton& g);

// Edge-from-vertex boundary incidence, E x N: row e has ones at both endpoints.
SparseMatrix boundary_incidence(const Skeleton& g);

// Vertex-from-edge coboundary incidence, N x E: row v has ones at incident edges.
SparseMatrix coboundary_incidence(const Skeleton& g);

// Edge-level upper adjacency (edges sharing a selected polygon), normalized by
// upper degrees: A[i][j] = 1/sqrt(du_i du_j).
SparseMatrix cccn_upper_adjacency(const CellComplex& cx);

// Edge-level lower adjacency (edges sharing an endpoint), normalized by lower
// degrees: A[i][j] = 1/sqrt(dl_i dl_j).
SparseMatrix cccn_lower_adjacency(const CellComplex& cx);

}  // namespace celltop
