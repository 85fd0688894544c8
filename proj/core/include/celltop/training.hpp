#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "celltop/dataset.hpp"
#include "celltop/network.hpp"

namespace celltop {

// Per-node exponential moving average of prediction accuracy.
struct RewardState {
  std::vector<double> ema;
  double mu = 0.9;

  static RewardState init(int n, int n_classes);
};

// delta_i = ema_i - a_i with a_i = [y_true == y_pred], then ema <- mu*ema +
// (1-mu)*a, both restricted to `mask`. Returns a full-length delta vector,
// zero outside the mask.
std::vector<double> reward(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                           const std::vector<int>& mask, RewardState& state);

// Edge-sampling loss over the symmetrized edge set:
// sum over edges {u, v} of (delta_u + delta_v) * (P[u][v] + P[v][u]).
Value graph_loss(const std::vector<double>& delta, const SkeletonSample& skeleton);

// Polygon-sampling loss: sum over candidates j of p(j) * (sum of delta over
// j's vertices). Unselected candidates contribute 0 through p(j) = 0.
Value polygon_loss(const std::vector<double>& delta, const PolygonSample& polygons);

struct TrainConfig {
  double lr = 0.01;
  int epochs = 200;
  uint64_t seed = 1;
  double lambda_task = 1.0;
  double lambda_gl = 1.0;
  double lambda_pl = 1.0;
  int export_every = 0;     // complex snapshot cadence in epochs; 0 disables
  std::string export_dir;   // required when export_every > 0
};

struct EpochMetrics {
  int epoch = 0;
  double loss_task = 0, loss_gl = 0, loss_pl = 0;
  double acc_train = 0, acc_val = 0, acc_test = 0;
  double homophily = 0;       // of the inferred skeleton w.r.t. labels
  double pct_polygons = 0;    // 100 * P / P~ (100 when P~ = 0)
  int n_edges = 0;
  int n_candidates = 0;       // P~
  int n_selected = 0;         // P
  std::map<int, int> degree_hist;
};

struct TrainResult {
  DcmModel model;  // snapshot at best validation accuracy
  std::vector<EpochMetrics> history;
  int best_epoch = -1;
  double best_val_acc = 0;
  double test_acc = 0;  // at best_epoch
};

// Full-batch training of one split. Throws std::runtime_error with context on
// a non-finite loss; std::invalid_argument on an empty train mask.
TrainResult train(const Dataset& ds, const SplitMasks& split, const ModelConfig& mcfg,
                  const TrainConfig& tcfg);

struct EvalMetrics {
  double accuracy = 0;
  double homophily = 0;
  double pct_polygons = 0;
  int n_edges = 0;
  std::map<int, int> degree_hist;
};

// Deterministic eval-mode forward; accuracy over `mask`.
EvalMetrics evaluate(DcmModel& model, const Dataset& ds, const std::vector<int>& mask);

void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& history,
                       int split_index);

double mean(const std::vector<double>& xs);
double sample_stddev(const std::vector<double>& xs);

}  // namespace celltop
