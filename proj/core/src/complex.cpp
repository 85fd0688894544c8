#include "celltop/complex.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace celltop {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Skeleton Skeleton::from_edges(int n_vertices, std::vector<std::pair<int, int>> pairs) {
  require(n_vertices >= 0, "Skeleton: negative vertex count");
  for (auto& [u, v] : pairs) {
    require(u >= 0 && u < n_vertices && v >= 0 && v < n_vertices,
            "Skeleton: edge endpoint out of range");
    require(u != v, "Skeleton: self-loop");
    if (u > v) std::swap(u, v);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  Skeleton g;
  g.n_vertices = n_vertices;
  g.edges = std::move(pairs);
  return g;
}

int Skeleton::edge_id(int u, int v) const {
  if (u > v) std::swap(u, v);
  auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(u, v));
  if (it == edges.end() || *it != std::make_pair(u, v)) return -1;
  return static_cast<int>(it - edges.begin());
}

std::vector<std::vector<int>> Skeleton::neighbor_lists() const {
  std::vector<std::vector<int>> nbr(n_vertices);
  for (const auto& [u, v] : edges) {
    nbr[u].push_back(v);
    nbr[v].push_back(u);
  }
  for (auto& l : nbr) std::sort(l.begin(), l.end());
  return nbr;
}

std::vector<int> Skeleton::degrees() const {
  std::vector<int> d(n_vertices, 0);
  for (const auto& [u, v] : edges) {
    d[u]++;
    d[v]++;
  }
  return d;
}

Cycle canonical_cycle(const Cycle& c) {
  int k = static_cast<int>(c.size());
  int mi = static_cast<int>(std::min_element(c.begin(), c.end()) - c.begin());
  Cycle fwd(k), bwd(k);
  for (int i = 0; i < k; ++i) {
    fwd[i] = c[(mi + i) % k];
    bwd[i] = c[(mi - i + k) % k];
  }
  return fwd[1] <= bwd[1] ? fwd : bwd;
}

namespace {

struct CycleSearch {
  const std::vector<std::vector<int>>& nbr;
  int k_max;
  int start;
  std::vector<char>& in_path;
  Cycle path;
  std::vector<Cycle>& out;

  bool adjacent(int a, int b) const {
    const auto& l = nbr[a];
    return std::binary_search(l.begin(), l.end(), b);
  }

  void extend() {
    int u = path.back();
    for (int w : nbr[u]) {
      if (w <= start || in_path[w]) continue;
      // a chord to any internal path vertex kills every cycle through w
      bool chord = false;
      for (size_t i = 1; i + 1 < path.size(); ++i)
        if (adjacent(w, path[i])) {
          chord = true;
          break;
        }
      if (chord) continue;
      if (adjacent(w, start)) {
        // closing edge; the cycle is chordless by construction
        if (path[1] < w) {
          path.push_back(w);
          out.push_back(path);
          path.pop_back();
        }
        // extending past w would leave (w, start) as a chord
      } else if (static_cast<int>(path.size()) + 2 <= k_max) {
        in_path[w] = 1;
        path.push_back(w);
        extend();
        path.pop_back();
        in_path[w] = 0;
      }
    }
  }
};

}  // namespace

std::vector<Cycle> enumerate_induced_cycles(const Skeleton& g, int k_max) {
  require(k_max >= 3, "enumerate_induced_cycles: k_max must be >= 3");
  std::vector<Cycle> out;
  auto nbr = g.neighbor_lists();
  std::vector<char> in_path(g.n_vertices, 0);
  for (int s = 0; s < g.n_vertices; ++s) {
    for (int v1 : nbr[s]) {
      if (v1 <= s) continue;
      CycleSearch search{nbr, k_max, s, in_path, {s, v1}, out};
      search.in_path[s] = 1;
      search.in_path[v1] = 1;
      search.extend();
      search.in_path[s] = 0;
      search.in_path[v1] = 0;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int CellComplex::n_cells(int dim) const {
  switch (dim) {
    case 0: return skeleton.n_vertices;
    case 1: return skeleton.n_edges();
    case 2: return static_cast<int>(polygons.size());
    default: throw std::invalid_argument("CellComplex: dimension out of range");
  }
}

std::vector<int> CellComplex::polygon_edge_ids(int p) const {
  const Cycle& c = polygons[p];
  int k = static_cast<int>(c.size());
  std::vector<int> ids(k);
  for (int i = 0; i < k; ++i) {
    ids[i] = skeleton.edge_id(c[i], c[(i + 1) % k]);
    require(ids[i] >= 0, "CellComplex: polygon edge missing from skeleton");
  }
  return ids;
}

CellComplex lift(const Skeleton& g, const std::vector<Cycle>& candidates,
                 const std::vector<int>& selected) {
  CellComplex cx;
  cx.skeleton = g;
  for (int id : selected) {
    require(id >= 0 && id < static_cast<int>(candidates.size()),
            "lift: selected cycle id out of range");
    cx.polygons.push_back(canonical_cycle(candidates[id]));
  }

  int n0 = g.n_vertices, n1 = g.n_edges(), n2 = static_cast<int>(cx.polygons.size());
  for (int dim = 0; dim < 3; ++dim) {
    int n = dim == 0 ? n0 : dim == 1 ? n1 : n2;
    cx.boundary[dim].assign(n, {});
    cx.coboundary[dim].assign(n, {});
    cx.lower[dim].assign(n, {});
    cx.upper[dim].assign(n, {});
  }

  for (int e = 0; e < n1; ++e) {
    auto [u, v] = g.edges[e];
    cx.boundary[1][e] = {u, v};
    cx.coboundary[0][u].push_back(e);
    cx.coboundary[0][v].push_back(e);
    cx.upper[0][u].push_back(v);
    cx.upper[0][v].push_back(u);
  }

  // edges sharing an endpoint
  for (int v = 0; v < n0; ++v) {
    const auto& inc = cx.coboundary[0][v];
    for (size_t i = 0; i < inc.size(); ++i)
      for (size_t j = i + 1; j < inc.size(); ++j) {
        cx.lower[1][inc[i]].push_back(inc[j]);
        cx.lower[1][inc[j]].push_back(inc[i]);
      }
  }

  for (int p = 0; p < n2; ++p) {
    std::vector<int> eids = cx.polygon_edge_ids(p);
    for (int e : eids) {
      cx.coboundary[1][e].push_back(p);
    }
    for (size_t i = 0; i < eids.size(); ++i)
      for (size_t j = i + 1; j < eids.size(); ++j) {
        cx.upper[1][eids[i]].push_back(eids[j]);
        cx.upper[1][eids[j]].push_back(eids[i]);
      }
    std::sort(eids.begin(), eids.end());
    cx.boundary[2][p] = eids;
  }

  // polygons sharing a boundary edge
  for (int e = 0; e < n1; ++e) {
    const auto& cob = cx.coboundary[1][e];
    for (size_t i = 0; i < cob.size(); ++i)
      for (size_t j = i + 1; j < cob.size(); ++j) {
        cx.lower[2][cob[i]].push_back(cob[j]);
        cx.lower[2][cob[j]].push_back(cob[i]);
      }
  }

  for (int dim = 0; dim < 3; ++dim) {
    for (auto& l : cx.boundary[dim]) sort_unique(l);
    for (auto& l : cx.coboundary[dim]) sort_unique(l);
    for (auto& l : cx.lower[dim]) sort_unique(l);
    for (auto& l : cx.upper[dim]) sort_unique(l);
  }
  return cx;
}

const std::vector<int>& adjacency(const CellComplex& cx, int dim, AdjKind kind, int cell_id) {
  require(dim >= 0 && dim <= 2, "adjacency: dimension out of range");
  if (cell_id < 0 || cell_id >= cx.n_cells(dim))
    throw std::out_of_range("adjacency: cell id out of range");
  switch (kind) {
    case AdjKind::Boundary: return cx.boundary[dim][cell_id];
    case AdjKind::Coboundary: return cx.coboundary[dim][cell_id];
    case AdjKind::Lower: return cx.lower[dim][cell_id];
    case AdjKind::Upper: return cx.upper[dim][cell_id];
  }
  throw std::invalid_argument("adjacency: bad kind");
}

double homophily(const Skeleton& g, const std::vector<int>& labels) {
  require(static_cast<int>(labels.size()) == g.n_vertices,
          "homophily: label count mismatch");
  if (g.edges.empty()) return 0.0;
  int same = 0;
  for (const auto& [u, v] : g.edges)
    if (labels[u] == labels[v]) same++;
  return static_cast<double>(same) / static_cast<double>(g.edges.size());
}

std::map<int, int> degree_histogram(const Skeleton& g) {
  std::map<int, int> hist;
  for (int d : g.degrees()) hist[d]++;
  return hist;
}

void export_complex(const CellComplex& cx, const std::string& path_stem,
                    const ComplexExportInfo& info) {
  nlohmann::json j;
  j["vertices"] = cx.skeleton.n_vertices;
  auto& je = j["edges"] = nlohmann::json::array();
  for (const auto& [u, v] : cx.skeleton.edges) je.push_back({u, v});
  j["polygons"] = cx.polygons;
  if (info.labels) j["labels"] = *info.labels;
  if (info.positions) {
    auto& jp = j["positions"] = nlohmann::json::array();
    for (const auto& [x, y] : *info.positions) jp.push_back({x, y});
  }
  if (info.homophily_level) j["homophily"] = *info.homophily_level;
  if (info.pct_polygons) j["pct_polygons"] = *info.pct_polygons;
  if (info.epoch) j["epoch"] = *info.epoch;

  {
    std::ofstream f(path_stem + ".json");
    require(f.good(), "export_complex: cannot open " + path_stem + ".json");
    f << j.dump(2) << "\n";
  }
  {
    std::ofstream f(path_stem + ".dot");
    require(f.good(), "export_complex: cannot open " + path_stem + ".dot");
    f << "graph complex {\n";
    for (int p = 0; p < static_cast<int>(cx.polygons.size()); ++p) {
      f << "  // polygon " << p << ":";
      for (int v : cx.polygons[p]) f << " " << v;
      f << "\n";
    }
    for (int v = 0; v < cx.skeleton.n_vertices; ++v) f << "  " << v << ";\n";
    for (const auto& [u, v] : cx.skeleton.edges) f << "  " << u << " -- " << v << ";\n";
    f << "}\n";
  }
}

}  // namespace celltop
