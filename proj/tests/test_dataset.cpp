#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>

#include "celltop/dataset.hpp"
#include "oracles.hpp"

using namespace celltop;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

}  // namespace

TEST_CASE("minimal 3-node fixture loads") {
  fs::path dir = temp_dir("celltop_ds_min");
  write(dir / "dataset.json", R"({
    "name": "mini", "n": 3, "f_in": 2, "n_classes": 2,
    "features": "features.csv",
    "labels": [0, 1, 0],
    "edges": "edges.csv",
    "splits": [{"train": [0, 1], "val": [], "test": [2]}]
  })");
  write(dir / "features.csv", "1.0,2.0\n3.0,4.0\n5.0,6.0\n");
  write(dir / "edges.csv", "0,1\n1,2\n");
  Dataset ds = load_dataset(dir.string());
  CHECK(ds.n() == 3);
  CHECK(ds.f_in() == 2);
  CHECK(ds.features(2, 1) == 6.0);
  REQUIRE(ds.edges.has_value());
  CHECK(ds.edges->size() == 2);
  REQUIRE(ds.splits.size() == 1);
  CHECK(ds.splits[0].test == std::vector<int>{2});
}

TEST_CASE("out-of-range edge names the offending record") {
  fs::path dir = temp_dir("celltop_ds_bad");
  write(dir / "dataset.json", R"({
    "name": "bad", "n": 3, "f_in": 1, "n_classes": 2,
    "features": "features.csv", "labels": [0, 1, 0],
    "edges": "edges.csv", "splits": null
  })");
  write(dir / "features.csv", "1\n2\n3\n");
  write(dir / "edges.csv", "0,1\n0,99\n");
  try {
    load_dataset(dir.string());
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find("edges.csv:2") != std::string::npos);
    CHECK(msg.find("99") != std::string::npos);
  }
}

TEST_CASE("schema violations are reported") {
  fs::path dir = temp_dir("celltop_ds_schema");
  write(dir / "dataset.json", R"({"name": "x", "n": 2, "f_in": 1})");
  CHECK_THROWS_WITH_AS(load_dataset(dir.string()),
                       doctest::Contains("missing key"), std::invalid_argument);

  write(dir / "dataset.json", R"({
    "name": "x", "n": 2, "f_in": 1, "n_classes": 2,
    "features": "features.csv", "labels": [0, 7], "edges": null, "splits": null
  })");
  write(dir / "features.csv", "1\n2\n");
  CHECK_THROWS_AS(load_dataset(dir.string()), std::invalid_argument);
}

TEST_CASE("save -> load round-trip is exact") {
  Dataset ds = make_blobs(25, 4, 3, 3.0, 1.0, 11);
  ds.name = "roundtrip";
  ds.edges = std::vector<std::pair<int, int>>{{0, 1}, {2, 3}, {5, 9}};
  ds.splits = make_stratified_splits(ds.labels, 2, 6);
  fs::path dir = temp_dir("celltop_ds_rt");
  save_dataset(ds, dir.string());
  Dataset back = load_dataset(dir.string());
  CHECK(back.name == ds.name);
  CHECK(back.features.data == ds.features.data);  // bit-exact
  CHECK(back.labels == ds.labels);
  CHECK(*back.edges == *ds.edges);
  REQUIRE(back.splits.size() == ds.splits.size());
  for (size_t i = 0; i < ds.splits.size(); ++i) {
    CHECK(back.splits[i].train == ds.splits[i].train);
    CHECK(back.splits[i].val == ds.splits[i].val);
    CHECK(back.splits[i].test == ds.splits[i].test);
  }
  CHECK(dataset_content_hash(back) == dataset_content_hash(ds));

  // hash is sensitive to content
  Dataset mut = ds;
  mut.features(0, 0) += 1e-9;
  CHECK(dataset_content_hash(mut) != dataset_content_hash(ds));
}

TEST_CASE("stratified splits cover, stay disjoint, and stratify") {
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) labels.push_back(i % 3);
  std::vector<SplitMasks> splits = make_stratified_splits(labels, 4, 99);
  REQUIRE(splits.size() == 4);
  for (const SplitMasks& m : splits) {
    std::vector<char> seen(50, 0);
    for (const auto* mask : {&m.train, &m.val, &m.test})
      for (int i : *mask) {
        CHECK(!seen[i]);
        seen[i] = 1;
      }
    for (char s : seen) CHECK(s == 1);  // full cover
    // every class present in every mask
    for (const auto* mask : {&m.train, &m.val, &m.test}) {
      std::set<int> classes;
      for (int i : *mask) classes.insert(labels[i]);
      CHECK(classes.size() == 3);
    }
    // roughly 60/20/20
    CHECK(m.train.size() >= 25);
    CHECK(m.val.size() >= 6);
    CHECK(m.test.size() >= 6);
  }
  // deterministic in the seed
  std::vector<SplitMasks> again = make_stratified_splits(labels, 4, 99);
  CHECK(again[2].train == splits[2].train);
}

TEST_CASE("make_blobs is separable and balanced") {
  Dataset ds = make_blobs(60, 8, 3, 5.0, 1.0, 123);
  CHECK(ds.n() == 60);
  std::map<int, int> counts;
  for (int l : ds.labels) counts[l]++;
  for (const auto& [cls, cnt] : counts) CHECK(cnt == 20);
  CHECK(oracle::one_nn_accuracy(ds.features, ds.labels) >= 0.95);
}

TEST_CASE("webkb converter") {
  fs::path dir = temp_dir("celltop_ds_webkb");
  write(dir / "nodes.txt",
        "node_id\tfeature\tlabel\n"
        "0\t1,0,1\t2\n"
        "1\t0,1,0\t0\n"
        "2\t1,1,1\t1\n");
  write(dir / "edges.txt",
        "src\tdst\n"
        "0\t1\n"
        "1\t0\n"
        "2\t2\n"
        "1\t2\n");
  Dataset ds = convert_webkb((dir / "nodes.txt").string(), (dir / "edges.txt").string(), "t");
  CHECK(ds.n() == 3);
  CHECK(ds.f_in() == 3);
  CHECK(ds.n_classes == 3);
  // duplicate orientation collapsed, self-loop dropped
  CHECK(ds.edges->size() == 2);
}

TEST_CASE("planetoid converter") {
  fs::path dir = temp_dir("celltop_ds_planetoid");
  write(dir / "content",
        "paperA\t1\t0\tml\n"
        "paperB\t0\t1\tdb\n"
        "paperC\t1\t1\tml\n");
  write(dir / "cites",
        "paperA\tpaperB\n"
        "paperB\tpaperC\n"
        "paperX\tpaperA\n");  // unknown id skipped
  Dataset ds =
      convert_planetoid((dir / "content").string(), (dir / "cites").string(), "c");
  CHECK(ds.n() == 3);
  CHECK(ds.f_in() == 2);
  CHECK(ds.n_classes == 2);
  CHECK(ds.labels[0] == ds.labels[2]);
  CHECK(ds.edges->size() == 2);
}
