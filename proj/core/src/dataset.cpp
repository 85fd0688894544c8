#include "celltop/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace celltop {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

[[noreturn]] void fail_at(const std::string& file, int line, const std::string& msg) {
  fail(file + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double parse_real(const std::string& tok, const std::string& file, int line) {
  try {
    size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) fail_at(file, line, "trailing characters in number '" + tok + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail_at(file, line, "not a number: '" + tok + "'");
  } catch (const std::out_of_range&) {
    fail_at(file, line, "number out of range: '" + tok + "'");
  }
}

int parse_int(const std::string& tok, const std::string& file, int line) {
  int v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    fail_at(file, line, "not an integer: '" + tok + "'");
  return v;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

Tensor read_features_csv(const std::string& path, int n, int f_in) {
  std::ifstream in(path);
  if (!in.good()) fail("cannot open " + path);
  Tensor t(n, f_in);
  std::string line;
  int row = 0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    if (row >= n) fail_at(path, lineno, "more feature rows than declared n=" + std::to_string(n));
    auto toks = split_on(line, ',');
    if (static_cast<int>(toks.size()) != f_in)
      fail_at(path, lineno,
              "expected " + std::to_string(f_in) + " values, got " + std::to_string(toks.size()));
    for (int c = 0; c < f_in; ++c) t(row, c) = parse_real(toks[c], path, lineno);
    ++row;
  }
  if (row != n)
    fail(path + ": expected " + std::to_string(n) + " feature rows, got " + std::to_string(row));
  if (!t.all_finite()) fail(path + ": non-finite feature value");
  return t;
}

std::vector<std::pair<int, int>> read_edges_csv(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in.good()) fail("cannot open " + path);
  std::vector<std::pair<int, int>> edges;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto toks = split_on(line, ',');
    if (toks.size() != 2) fail_at(path, lineno, "expected 'u,v'");
    int u = parse_int(toks[0], path, lineno);
    int v = parse_int(toks[1], path, lineno);
    if (u < 0 || u >= n || v < 0 || v >= n)
      fail_at(path, lineno,
              "edge (" + std::to_string(u) + ", " + std::to_string(v) + ") out of range for n=" +
                  std::to_string(n));
    edges.emplace_back(u, v);
  }
  return edges;
}

std::vector<int> json_int_vector(const nlohmann::json& arr, const std::string& where, int n) {
  if (!arr.is_array()) fail(where + ": expected an array");
  std::vector<int> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number_integer()) fail(where + ": expected integers");
    int x = v.get<int>();
    if (x < 0 || x >= n) fail(where + ": index " + std::to_string(x) + " out of range");
    out.push_back(x);
  }
  return out;
}

// FNV-1a over a canonical byte stream; printed as 16 hex digits.
struct Hasher {
  uint64_t h = 1469598103934665603ull;
  void bytes(const void* p, size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  }
  void i32(int v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    i32(static_cast<int>(s.size()));
    bytes(s.data(), s.size());
  }
};

void format_real(std::ostream& os, double v) {
  // round-trippable text form so save -> load is bit-exact
  char buf[40];
  snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

void Dataset::validate() const {
  if (name.empty()) fail("dataset: empty name");
  if (features.rows <= 0 || features.cols <= 0) fail("dataset: empty feature matrix");
  if (!features.all_finite()) fail("dataset: non-finite features");
  if (static_cast<int>(labels.size()) != n())
    fail("dataset: " + std::to_string(labels.size()) + " labels for n=" + std::to_string(n()));
  if (n_classes <= 0) fail("dataset: n_classes must be positive");
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || labels[i] >= n_classes)
      fail("dataset: label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
           " outside [0, " + std::to_string(n_classes) + ")");
  if (edges) {
    for (const auto& [u, v] : *edges)
      if (u < 0 || u >= n() || v < 0 || v >= n() || u == v)
        fail("dataset: invalid edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
  }
  for (size_t s = 0; s < splits.size(); ++s) {
    std::vector<char> seen(static_cast<size_t>(n()), 0);
    auto check = [&](const std::vector<int>& mask, const char* which) {
      for (int i : mask) {
        if (i < 0 || i >= n())
          fail("dataset: split " + std::to_string(s) + " " + which + " index " +
               std::to_string(i) + " out of range");
        if (seen[i])
          fail("dataset: split " + std::to_string(s) + " reuses node " + std::to_string(i));
        seen[i] = 1;
      }
    };
    check(splits[s].train, "train");
    check(splits[s].val, "val");
    check(splits[s].test, "test");
    if (splits[s].train.empty()) fail("dataset: split " + std::to_string(s) + " has empty train mask");
  }
}

Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  std::string manifest_path = (fs::path(dir) / "dataset.json").string();
  std::ifstream in(manifest_path);
  if (!in.good()) fail("cannot open " + manifest_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(manifest_path + ": " + e.what());
  }

  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) fail(manifest_path + ": missing key \"" + key + "\"");
    return j.at(key);
  };

  Dataset ds;
  ds.name = need("name").get<std::string>();
  int n = need("n").get<int>();
  int f_in = need("f_in").get<int>();
  ds.n_classes = need("n_classes").get<int>();
  if (n <= 0 || f_in <= 0) fail(manifest_path + ": n and f_in must be positive");

  std::string feat_file = need("features").get<std::string>();
  ds.features = read_features_csv((fs::path(dir) / feat_file).string(), n, f_in);

  const auto& labels = need("labels");
  if (!labels.is_array() || static_cast<int>(labels.size()) != n)
    fail(manifest_path + ": \"labels\" must be an array of length n");
  ds.labels = json_int_vector(labels, manifest_path + ": labels", ds.n_classes);

  const auto& edges = need("edges");
  if (!edges.is_null())
    ds.edges = read_edges_csv((fs::path(dir) / edges.get<std::string>()).string(), n);

  const auto& splits = need("splits");
  if (!splits.is_null()) {
    if (!splits.is_array()) fail(manifest_path + ": \"splits\" must be an array or null");
    for (size_t s = 0; s < splits.size(); ++s) {
      const auto& sp = splits[s];
      std::string where = manifest_path + ": splits[" + std::to_string(s) + "]";
      SplitMasks m;
      m.train = json_int_vector(sp.at("train"), where + ".train", n);
      m.val = json_int_vector(sp.at("val"), where + ".val", n);
      m.test = json_int_vector(sp.at("test"), where + ".test", n);
      ds.splits.push_back(std::move(m));
    }
  }

  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  ds.validate();
  fs::create_directories(dir);

  {
    std::ofstream f(fs::path(dir) / "features.csv");
    if (!f.good()) fail("cannot write features.csv in " + dir);
    for (int r = 0; r < ds.features.rows; ++r) {
      for (int c = 0; c < ds.features.cols; ++c) {
        if (c) f << ',';
        format_real(f, ds.features(r, c));
      }
      f << '\n';
    }
  }
  if (ds.edges) {
    std::ofstream f(fs::path(dir) / "edges.csv");
    if (!f.good()) fail("cannot write edges.csv in " + dir);
    for (const auto& [u, v] : *ds.edges) f << u << ',' << v << '\n';
  }

  nlohmann::json j;
  j["name"] = ds.name;
  j["n"] = ds.n();
  j["f_in"] = ds.f_in();
  j["n_classes"] = ds.n_classes;
  j["features"] = "features.csv";
  j["labels"] = ds.labels;
  j["edges"] = ds.edges ? nlohmann::json("edges.csv") : nlohmann::json(nullptr);
  if (ds.splits.empty()) {
    j["splits"] = nullptr;
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const SplitMasks& m : ds.splits)
      arr.push_back({{"train", m.train}, {"val", m.val}, {"test", m.test}});
    j["splits"] = std::move(arr);
  }
  std::ofstream f(fs::path(dir) / "dataset.json");
  if (!f.good()) fail("cannot write dataset.json in " + dir);
  f << j.dump(2) << '\n';
}

std::string dataset_content_hash(const Dataset& ds) {
  Hasher h;
  h.str(ds.name);
  h.i32(ds.n());
  h.i32(ds.f_in());
  h.i32(ds.n_classes);
  for (double v : ds.features.data) h.f64(v);
  for (int l : ds.labels) h.i32(l);
  h.i32(ds.edges ? static_cast<int>(ds.edges->size()) : -1);
  if (ds.edges)
    for (const auto& [u, v] : *ds.edges) {
      h.i32(u);
      h.i32(v);
    }
  h.i32(static_cast<int>(ds.splits.size()));
  for (const SplitMasks& m : ds.splits)
    for (const auto* mask : {&m.train, &m.val, &m.test}) {
      h.i32(static_cast<int>(mask->size()));
      for (int i : *mask) h.i32(i);
    }
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.h));
  return buf;
}

std::vector<SplitMasks> make_stratified_splits(const std::vector<int>& labels, int n_splits,
                                               uint64_t seed) {
  if (n_splits <= 0) fail("make_stratified_splits: n_splits must be positive");
  int n = static_cast<int>(labels.size());
  std::map<int, std::vector<int>> by_class;
  for (int i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
  for (const auto& [cls, idx] : by_class)
    if (idx.size() < 3)
      fail("make_stratified_splits: class " + std::to_string(cls) +
           " has fewer than 3 samples");

  Rng rng(seed);
  std::vector<SplitMasks> out(n_splits);
  for (int s = 0; s < n_splits; ++s) {
    SplitMasks& m = out[s];
    for (const auto& [cls, idx] : by_class) {
      int k = static_cast<int>(idx.size());
      std::vector<int> perm = rng.permutation(k);
      // 60/20/20, rounding down for val/test so train never starves
      int n_val = std::max(1, k / 5);
      int n_test = std::max(1, k / 5);
      int n_train = k - n_val - n_test;
      for (int i = 0; i < k; ++i) {
        int node = idx[perm[i]];
        if (i < n_train)
          m.train.push_back(node);
        else if (i < n_train + n_val)
          m.val.push_back(node);
        else
          m.test.push_back(node);
      }
    }
    std::sort(m.train.begin(), m.train.end());
    std::sort(m.val.begin(), m.val.end());
    std::sort(m.test.begin(), m.test.end());
  }
  return out;
}

Dataset make_blobs(int n, int f_in, int n_classes, double center_dist, double stddev,
                   uint64_t seed) {
  if (n < n_classes || f_in < n_classes || n_classes < 2)
    fail("make_blobs: need n >= n_classes, f_in >= n_classes, n_classes >= 2");
  Rng rng(seed);
  Dataset ds;
  ds.name = "blobs";
  ds.n_classes = n_classes;
  ds.features = Tensor(n, f_in);
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    int cls = i % n_classes;  // balanced
    ds.labels[i] = cls;
    for (int c = 0; c < f_in; ++c) {
      double center = (c == cls) ? center_dist : 0.0;  // axis-aligned blob centers
      ds.features(i, c) = center + stddev * rng.normal();
    }
  }
  return ds;
}

Dataset convert_webkb(const std::string& node_file, const std::string& edge_file,
                      const std::string& name) {
  std::ifstream nodes(node_file);
  if (!nodes.good()) fail("cannot open " + node_file);
  Dataset ds;
  ds.name = name;
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  std::getline(nodes, line);  // header
  ++lineno;
  int max_label = -1;
  while (std::getline(nodes, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto toks = split_on(line, '\t');
    if (toks.size() != 3) fail_at(node_file, lineno, "expected 'id\\tfeatures\\tlabel'");
    int id = parse_int(toks[0], node_file, lineno);
    if (id != static_cast<int>(rows.size()))
      fail_at(node_file, lineno, "non-contiguous node id " + std::to_string(id));
    auto feats = split_on(toks[1], ',');
    std::vector<double> row;
    row.reserve(feats.size());
    for (const auto& f : feats) row.push_back(parse_real(f, node_file, lineno));
    if (!rows.empty() && rows[0].size() != row.size())
      fail_at(node_file, lineno, "inconsistent feature width");
    rows.push_back(std::move(row));
    int label = parse_int(toks[2], node_file, lineno);
    if (label < 0) fail_at(node_file, lineno, "negative label");
    max_label = std::max(max_label, label);
    ds.labels.push_back(label);
  }
  if (rows.empty()) fail(node_file + ": no nodes");
  int n = static_cast<int>(rows.size());
  int f = static_cast<int>(rows[0].size());
  ds.features = Tensor(n, f);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < f; ++c) ds.features(r, c) = rows[r][c];
  ds.n_classes = max_label + 1;

  std::ifstream edges(edge_file);
  if (!edges.good()) fail("cannot open " + edge_file);
  std::vector<std::pair<int, int>> e;
  lineno = 0;
  std::getline(edges, line);  // header
  ++lineno;
  while (std::getline(edges, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto toks = split_on(line, '\t');
    if (toks.size() != 2) fail_at(edge_file, lineno, "expected 'u\\tv'");
    int u = parse_int(toks[0], edge_file, lineno);
    int v = parse_int(toks[1], edge_file, lineno);
    if (u < 0 || u >= n || v < 0 || v >= n)
      fail_at(edge_file, lineno, "edge endpoint out of range");
    if (u == v) continue;  // raw files contain self-loops; drop them
    if (u > v) std::swap(u, v);
    e.emplace_back(u, v);
  }
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  ds.edges = std::move(e);
  ds.validate();
  return ds;
}

Dataset convert_planetoid(const std::string& content_file, const std::string& cites_file,
                          const std::string& name) {
  std::ifstream content(content_file);
  if (!content.good()) fail("cannot open " + content_file);
  Dataset ds;
  ds.name = name;
  std::map<std::string, int> id_of;
  std::map<std::string, int> label_of;  // label string -> class id, first-seen order
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(content, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto toks = split_on(line, '\t');
    if (toks.size() < 3) fail_at(content_file, lineno, "expected 'id\\tf...\\tlabel'");
    const std::string& id = toks.front();
    if (!id_of.emplace(id, static_cast<int>(rows.size())).second)
      fail_at(content_file, lineno, "duplicate node id '" + id + "'");
    std::vector<double> row;
    row.reserve(toks.size() - 2);
    for (size_t i = 1; i + 1 < toks.size(); ++i)
      row.push_back(parse_real(toks[i], content_file, lineno));
    if (!rows.empty() && rows[0].size() != row.size())
      fail_at(content_file, lineno, "inconsistent feature width");
    rows.push_back(std::move(row));
    auto [it, _] = label_of.emplace(toks.back(), static_cast<int>(label_of.size()));
    ds.labels.push_back(it->second);
  }
  if (rows.empty()) fail(content_file + ": no nodes");
  int n = static_cast<int>(rows.size());
  int f = static_cast<int>(rows[0].size());
  ds.features = Tensor(n, f);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < f; ++c) ds.features(r, c) = rows[r][c];
  ds.n_classes = static_cast<int>(label_of.size());

  std::ifstream cites(cites_file);
  if (!cites.good()) fail("cannot open " + cites_file);
  std::vector<std::pair<int, int>> e;
  lineno = 0;
  while (std::getline(cites, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto toks = split_on(line, '\t');
    if (toks.size() != 2) fail_at(cites_file, lineno, "expected 'cited\\tciting'");
    auto a = id_of.find(toks[0]);
    auto b = id_of.find(toks[1]);
    // citation lists reference papers outside the content file; skip those
    if (a == id_of.end() || b == id_of.end()) continue;
    int u = a->second, v = b->second;
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    e.emplace_back(u, v);
  }
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  ds.edges = std::move(e);
  ds.validate();
  return ds;
}

}  // namespace celltop
