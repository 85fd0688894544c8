#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace celltop {

// Undirected graph with canonical edge ids: edges are stored as sorted pairs
// (u < v) in lexicographic order, so edge ids are deterministic.
struct Skeleton {
  int n_vertices = 0;
  std::vector<std::pair<int, int>> edges;

  // Canonicalizes, deduplicates, and validates (no self-loops, endpoints in
  // range). Accepts pairs in either orientation.
  static Skeleton from_edges(int n_vertices, std::vector<std::pair<int, int>> pairs);

  int n_edges() const { return static_cast<int>(edges.size()); }
  // -1 if the edge is absent.
  int edge_id(int u, int v) const;
  bool has_edge(int u, int v) const { return edge_id(u, v) >= 0; }
  std::vector<std::vector<int>> neighbor_lists() const;  // sorted per vertex
  std::vector<int> degrees() const;
};

using Cycle = std::vector<int>;  // canonical vertex walk, closed implicitly

// Canonical form: rotate so the smallest vertex comes first, then pick the
// orientation whose second vertex is smaller.
Cycle canonical_cycle(const Cycle& c);

// Every chordless cycle of length 3..k_max, each exactly once, sorted
// lexicographically by canonical vertex list.
std::vector<Cycle> enumerate_induced_cycles(const Skeleton& g, int k_max);

enum class AdjKind { Boundary, Coboundary, Lower, Upper };

// Order-2 regular cell complex: the skeleton plus attached polygons, with all
// four adjacency indices materialized per dimension.
struct CellComplex {
  Skeleton skeleton;
  std::vector<Cycle> polygons;
  // indexed [dim][cell id], each list sorted ascending
  std::vector<std::vector<int>> boundary[3];
  std::vector<std::vector<int>> coboundary[3];
  std::vector<std::vector<int>> lower[3];
  std::vector<std::vector<int>> upper[3];

  int n_cells(int dim) const;
  // Boundary edge ids of polygon p, in walk order (not sorted).
  std::vector<int> polygon_edge_ids(int p) const;
};

// Attaches the selected candidate cycles as 2-cells. Every selected id must
// index into `candidates`, and every candidate edge must exist in the skeleton.
CellComplex lift(const Skeleton& g, const std::vector<Cycle>& candidates,
                 const std::vector<int>& selected);

const std::vector<int>& adjacency(const CellComplex& cx, int dim, AdjKind kind, int cell_id);

// Fraction of edges whose endpoints share a label.
double homophily(const Skeleton& g, const std::vector<int>& labels);

std::map<int, int> degree_histogram(const Skeleton& g);

struct ComplexExportInfo {
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<std::pair<double, double>>> positions;
  std::optional<double> homophily_level;
  std::optional<double> pct_polygons;
  std::optional<int> epoch;
};

// Writes `path`.json ({vertices, edges, polygons, ...}) and `path`.dot (the
// skeleton, polygons as comment annotations).
void export_complex(const CellComplex& cx, const std::string& path_stem,
                    const ComplexExportInfo& info = {});

}  // namespace celltop
