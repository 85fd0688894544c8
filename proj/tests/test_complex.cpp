#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>

#include "celltop/complex.hpp"
#include "oracles.hpp"

using namespace celltop;

namespace {

Skeleton complete_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) e.emplace_back(u, v);
  return Skeleton::from_edges(n, std::move(e));
}

Skeleton cycle_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Skeleton::from_edges(n, std::move(e));
}

}  // namespace

TEST_CASE("skeleton canonicalization and validation") {
  Skeleton g = Skeleton::from_edges(4, {{2, 0}, {0, 1}, {1, 0}, {3, 2}});
  CHECK(g.n_edges() == 3);  // duplicate (0,1)/(1,0) collapsed
  CHECK(g.edges[0] == std::pair<int, int>{0, 1});
  CHECK(g.edge_id(2, 0) == 1);
  CHECK(g.edge_id(1, 3) == -1);
  CHECK_THROWS_AS(Skeleton::from_edges(3, {{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(Skeleton::from_edges(3, {{0, 3}}), std::invalid_argument);
  CHECK(g.degrees() == std::vector<int>{2, 1, 2, 1});
}

TEST_CASE("canonical cycle form") {
  CHECK(canonical_cycle({2, 0, 1}) == Cycle{0, 1, 2});
  CHECK(canonical_cycle({3, 2, 1, 0}) == Cycle{0, 1, 2, 3});
  CHECK(canonical_cycle({1, 4, 2, 3}) == Cycle{1, 3, 2, 4});
}

TEST_CASE("enumerate_induced_cycles examples") {
  CHECK(enumerate_induced_cycles(complete_graph(3), 4).size() == 1);

  Skeleton path = Skeleton::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  CHECK(enumerate_induced_cycles(path, 5).empty());

  // K4: 4 triangles, no chordless quadrilaterals
  std::vector<Cycle> k4 = enumerate_induced_cycles(complete_graph(4), 4);
  CHECK(k4.size() == 4);
  for (const Cycle& c : k4) CHECK(c.size() == 3);

  // C5 only appears once k_max admits it
  CHECK(enumerate_induced_cycles(cycle_graph(5), 4).empty());
  CHECK(enumerate_induced_cycles(cycle_graph(5), 5).size() == 1);

  CHECK(enumerate_induced_cycles(Skeleton::from_edges(0, {}), 4).empty());
  CHECK_THROWS_AS(enumerate_induced_cycles(complete_graph(3), 2), std::invalid_argument);
}

TEST_CASE("enumeration equals brute-force oracle on random graphs") {
  Rng rng(101);
  for (int trial = 0; trial < 150; ++trial) {
    int n = 3 + static_cast<int>(rng.next_u64() % 6);  // 3..8
    Skeleton g = oracle::random_graph(n, rng.uniform(0.2, 0.8), rng);
    for (int k_max : {3, 4, 5}) {
      std::vector<Cycle> got = enumerate_induced_cycles(g, k_max);
      std::vector<Cycle> want = oracle::chordless_cycles_bruteforce(g, k_max);
      REQUIRE(got == want);
    }
  }
}

TEST_CASE("relabeling invariance of the candidate count") {
  Rng rng(33);
  Skeleton g = oracle::random_graph(7, 0.5, rng);
  std::vector<int> perm = rng.permutation(7);
  std::vector<std::pair<int, int>> relabeled;
  for (const auto& [u, v] : g.edges) relabeled.emplace_back(perm[u], perm[v]);
  Skeleton h = Skeleton::from_edges(7, std::move(relabeled));
  for (int k = 3; k <= 5; ++k)
    CHECK(enumerate_induced_cycles(g, k).size() == enumerate_induced_cycles(h, k).size());
}

TEST_CASE("lift on K3") {
  Skeleton g = complete_graph(3);
  std::vector<Cycle> cand = enumerate_induced_cycles(g, 3);
  CellComplex cx = lift(g, cand, {0});
  CHECK(cx.n_cells(0) == 3);
  CHECK(cx.n_cells(1) == 3);
  CHECK(cx.n_cells(2) == 1);
  for (int e = 0; e < 3; ++e) {
    const std::vector<int>& up = adjacency(cx, 1, AdjKind::Upper, e);
    CHECK(up.size() == 2);
    for (int o : up) CHECK(o != e);
  }
  // vertex coboundary: two incident edges each
  for (int v = 0; v < 3; ++v) CHECK(adjacency(cx, 0, AdjKind::Coboundary, v).size() == 2);
  CHECK(adjacency(cx, 2, AdjKind::Boundary, 0).size() == 3);
  CHECK_THROWS_AS(adjacency(cx, 2, AdjKind::Boundary, 1), std::out_of_range);
  CHECK_THROWS_AS(lift(g, cand, {5}), std::invalid_argument);
}

TEST_CASE("lift on C4 with empty selection") {
  Skeleton g = cycle_graph(4);
  CellComplex cx = lift(g, {}, {});
  CHECK(cx.n_cells(2) == 0);
  for (int e = 0; e < 4; ++e) {
    CHECK(adjacency(cx, 1, AdjKind::Upper, e).empty());
    CHECK(adjacency(cx, 1, AdjKind::Lower, e).size() == 2);
  }
  // vertex upper adjacency = graph neighbors
  for (int v = 0; v < 4; ++v) CHECK(adjacency(cx, 0, AdjKind::Upper, v).size() == 2);
}

TEST_CASE("adjacency indices equal incidence-matrix oracle on random lifts") {
  Rng rng(202);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 4 + static_cast<int>(rng.next_u64() % 5);
    Skeleton g = oracle::random_graph(n, 0.5, rng);
    std::vector<Cycle> cand = enumerate_induced_cycles(g, 4);
    std::vector<int> selected;
    for (int i = 0; i < static_cast<int>(cand.size()); ++i) selected.push_back(i);
    CellComplex cx = lift(g, cand, selected);

    Tensor b1 = oracle::dense_b1(g);
    Tensor b2 = oracle::dense_b2(cx);
    int ne = g.n_edges();
    for (int e = 0; e < ne; ++e) {
      // N_u pattern of B2 B2^T, N_d pattern of B1^T B1, off-diagonal
      std::vector<int> upper, lower;
      for (int f = 0; f < ne; ++f) {
        if (f == e) continue;
        double u = 0, d = 0;
        for (int p = 0; p < b2.cols; ++p) u += b2(e, p) * b2(f, p);
        for (int v = 0; v < n; ++v) d += b1(v, e) * b1(v, f);
        if (u > 0) upper.push_back(f);
        if (d > 0) lower.push_back(f);
      }
      CHECK(adjacency(cx, 1, AdjKind::Upper, e) == upper);
      CHECK(adjacency(cx, 1, AdjKind::Lower, e) == lower);
    }
    // symmetry of N_u / N_d and B/CB duality
    for (int d = 0; d <= 2; ++d) {
      for (int c = 0; c < cx.n_cells(d); ++c) {
        for (int o : adjacency(cx, d, AdjKind::Upper, c)) {
          const auto& back = adjacency(cx, d, AdjKind::Upper, o);
          CHECK(std::find(back.begin(), back.end(), c) != back.end());
        }
        if (d > 0)
          for (int b : adjacency(cx, d, AdjKind::Boundary, c)) {
            const auto& cb = adjacency(cx, d - 1, AdjKind::Coboundary, b);
            CHECK(std::find(cb.begin(), cb.end(), c) != cb.end());
          }
      }
    }
    // structural idempotence of lift
    CellComplex cx2 = lift(cx.skeleton, cx.polygons,  selected);
    for (int e = 0; e < ne; ++e)
      CHECK(adjacency(cx2, 1, AdjKind::Upper, e) == adjacency(cx, 1, AdjKind::Upper, e));
  }
}

TEST_CASE("polygon boundary is a closed walk") {
  Rng rng(303);
  Skeleton g = oracle::random_graph(8, 0.45, rng);
  std::vector<Cycle> cand = enumerate_induced_cycles(g, 5);
  if (!cand.empty()) {
    std::vector<int> all(cand.size());
    for (size_t i = 0; i < cand.size(); ++i) all[i] = static_cast<int>(i);
    CellComplex cx = lift(g, cand, all);
    for (int p = 0; p < cx.n_cells(2); ++p) {
      std::vector<int> eids = cx.polygon_edge_ids(p);
      CHECK(eids.size() == cx.polygons[p].size());
      std::map<int, int> vertex_count;
      for (int e : eids) {
        vertex_count[cx.skeleton.edges[e].first]++;
        vertex_count[cx.skeleton.edges[e].second]++;
      }
      for (const auto& [v, cnt] : vertex_count) CHECK(cnt == 2);
    }
  }
}

TEST_CASE("homophily and degree histogram") {
  Skeleton g = complete_graph(3);
  CHECK(homophily(g, {1, 1, 1}) == 1.0);
  // bipartite with labels = sides
  Skeleton b = Skeleton::from_edges(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}});
  CHECK(homophily(b, {0, 0, 1, 1}) == 0.0);
  CHECK(homophily(Skeleton::from_edges(2, {}), {0, 1}) == 0.0);
  CHECK_THROWS_AS(homophily(g, {0, 1}), std::invalid_argument);

  std::map<int, int> c4 = degree_histogram(cycle_graph(4));
  CHECK(c4 == std::map<int, int>{{2, 4}});
  Skeleton star = Skeleton::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
  CHECK(degree_histogram(star) == std::map<int, int>{{1, 3}, {3, 1}});
}

TEST_CASE("export_complex writes json and dot") {
  Skeleton g = complete_graph(3);
  CellComplex cx = lift(g, enumerate_induced_cycles(g, 3), {0});
  std::string stem = (std::filesystem::temp_directory_path() / "celltop_export_test").string();
  ComplexExportInfo info;
  info.labels = std::vector<int>{0, 1, 0};
  info.homophily_level = 1.0 / 3.0;
  export_complex(cx, stem, info);
  std::ifstream js(stem + ".json"), dot(stem + ".dot");
  CHECK(js.good());
  CHECK(dot.good());
  std::string all((std::istreambuf_iterator<char>(js)), std::istreambuf_iterator<char>());
  CHECK(all.find("\"polygons\"") != std::string::npos);
}
