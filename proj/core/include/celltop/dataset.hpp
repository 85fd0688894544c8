#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "celltop/tensor.hpp"

namespace celltop {

struct SplitMasks {
  std::vector<int> train, val, test;
};

struct Dataset {
  std::string name;
  Tensor features;  // N x F_in
  std::vector<int> labels;
  int n_classes = 0;
  std::optional<std::vector<std::pair<int, int>>> edges;  // "w graph" input
  std::vector<SplitMasks> splits;

  int n() const { return features.rows; }
  int f_in() const { return features.cols; }
  void validate() const;  // throws std::invalid_argument with a description
};

// Reads <dir>/dataset.json plus the referenced feature/edge CSVs. Errors name
// the offending file and line.
Dataset load_dataset(const std::string& dir);

// Writes dataset.json, features.csv, and edges.csv (when present) into `dir`
// (created if missing). load_dataset round-trips the result bit-exactly.
void save_dataset(const Dataset& ds, const std::string& dir);

// Content hash over a canonical serialization of everything load_dataset
// reads; equal datasets hash equal regardless of their on-disk layout.
std::string dataset_content_hash(const Dataset& ds);

// Random stratified 60/20/20 splits; every class contributes to each mask.
std::vector<SplitMasks> make_stratified_splits(const std::vector<int>& labels, int n_splits,
                                               uint64_t seed);

// Isotropic Gaussian blobs, one per class, centers on a scaled simplex.
Dataset make_blobs(int n, int f_in, int n_classes, double center_dist, double stddev,
                   uint64_t seed);

// Converters for the common raw distribution formats.
// WebKB style: node file "id\tf1,f2,...\tlabel" (one header line), edge file
// "u\tv" (one header line).
Dataset convert_webkb(const std::string& node_file, const std::string& edge_file,
                      const std::string& name);
// Planetoid style: content file "id\tf...\tlabel_string" (tab-separated
// features), cites file "cited\tciting".
Dataset convert_planetoid(const std::string& content_file, const std::string& cites_file,
                          const std::string& name);

}  // namespace celltop
