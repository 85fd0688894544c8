#include "celltop/training.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace celltop {

namespace {

double accuracy_on(const std::vector<int>& preds, const std::vector<int>& labels,
                   const std::vector<int>& mask) {
  if (mask.empty()) return 0.0;
  int correct = 0;
  for (int i : mask) correct += preds[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

double pct_polygons_of(int n_selected, int n_candidates) {
  if (n_candidates == 0) return 100.0;
  return 100.0 * n_selected / n_candidates;
}

}  // namespace

RewardState RewardState::init(int n, int n_classes) {
  if (n <= 0 || n_classes <= 0)
    throw std::invalid_argument("RewardState: positive n and n_classes required");
  RewardState s;
  s.ema.assign(static_cast<size_t>(n), 1.0 / n_classes);
  return s;
}

std::vector<double> reward(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                           const std::vector<int>& mask, RewardState& state) {
  if (y_true.size() != state.ema.size() || y_pred.size() != state.ema.size())
    throw std::invalid_argument("reward: length mismatch");
  std::vector<double> delta(state.ema.size(), 0.0);
  for (int i : mask) {
    double a = y_true[i] == y_pred[i] ? 1.0 : 0.0;
    delta[i] = state.ema[i] - a;
    state.ema[i] = state.mu * state.ema[i] + (1.0 - state.mu) * a;
  }
  return delta;
}

Value graph_loss(const std::vector<double>& delta, const SkeletonSample& skeleton) {
  Tape& tape = *skeleton.probs.tape;
  const Skeleton& g = skeleton.sampled.skeleton;
  int n = g.n_vertices;
  if (static_cast<int>(delta.size()) != n)
    throw std::invalid_argument("graph_loss: delta length mismatch");
  Tensor w(n, n);
  for (const auto& [u, v] : g.edges) {
    double d = delta[u] + delta[v];
    w(u, v) += d;
    w(v, u) += d;
  }
  return sum(mul(tape.constant(std::move(w)), skeleton.probs));
}

Value polygon_loss(const std::vector<double>& delta, const PolygonSample& polygons) {
  Tape& tape = *polygons.probs.tape;
  int np = static_cast<int>(polygons.sampled.candidates.size());
  if (np == 0) return tape.constant(Tensor::zeros(1, 1));
  Tensor w(1, np);
  for (int c = 0; c < np; ++c)
    for (int v : polygons.sampled.candidates[c]) {
      if (v < 0 || v >= static_cast<int>(delta.size()))
        throw std::invalid_argument("polygon_loss: vertex outside delta range");
      w(0, c) += delta[v];
    }
  return sum(mul(tape.constant(std::move(w)), polygons.probs));
}

TrainResult train(const Dataset& ds, const SplitMasks& split, const ModelConfig& mcfg,
                  const TrainConfig& tcfg) {
  if (split.train.empty()) throw std::invalid_argument("train: empty train mask");
  if (tcfg.lr <= 0 || tcfg.epochs <= 0)
    throw std::invalid_argument("train: lr and epochs must be positive");
  if (mcfg.graph_conditioned && !ds.edges)
    throw std::invalid_argument("train: graph-conditioned model but dataset has no edges");
  if (tcfg.export_every > 0 && tcfg.export_dir.empty())
    throw std::invalid_argument("train: export_every set without export_dir");

  std::optional<Skeleton> g_in;
  if (mcfg.graph_conditioned) g_in = Skeleton::from_edges(ds.n(), *ds.edges);

  Rng rng(tcfg.seed);
  DcmModel model(mcfg, rng);
  Adam adam(AdamConfig{.lr = tcfg.lr});
  RewardState state = RewardState::init(ds.n(), ds.n_classes);

  TrainResult res{model};
  if (tcfg.export_every > 0) std::filesystem::create_directories(tcfg.export_dir);

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    Tape tape;
    ForwardResult fwd = model.forward(tape, ds.features, g_in, /*train_mode=*/true, rng);
    std::vector<int> preds = argmax_rows(fwd.logits.val());
    std::vector<double> delta = reward(ds.labels, preds, split.train, state);

    Value l_task = softmax_cross_entropy(fwd.logits, ds.labels, split.train);
    Value l_gl = graph_loss(delta, fwd.skeleton);
    Value l_pl = polygon_loss(delta, fwd.polygons);

    EpochMetrics m;
    m.epoch = epoch;
    m.loss_task = l_task.val()(0, 0);
    m.loss_gl = l_gl.val()(0, 0);
    m.loss_pl = l_pl.val()(0, 0);

    Value total = add(scale(l_task, tcfg.lambda_task),
                      add(scale(l_gl, tcfg.lambda_gl), scale(l_pl, tcfg.lambda_pl)));
    if (!std::isfinite(total.val()(0, 0)))
      throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                               " (task=" + std::to_string(m.loss_task) +
                               ", gl=" + std::to_string(m.loss_gl) +
                               ", pl=" + std::to_string(m.loss_pl) + ")");
    GradMap grads = tape.backward(total);
    adam.step(model.params(), grads);

    // deterministic post-update pass for reporting and model selection
    Tape eval_tape;
    Rng dummy(0);
    ForwardResult ev = model.forward(eval_tape, ds.features, g_in, /*train_mode=*/false, dummy);
    std::vector<int> eval_preds = argmax_rows(ev.logits.val());
    m.acc_train = accuracy_on(eval_preds, ds.labels, split.train);
    m.acc_val = accuracy_on(eval_preds, ds.labels, split.val);
    m.acc_test = accuracy_on(eval_preds, ds.labels, split.test);
    m.homophily = homophily(ev.skeleton.sampled.skeleton, ds.labels);
    m.n_edges = ev.skeleton.sampled.skeleton.n_edges();
    m.n_candidates = static_cast<int>(ev.candidates.size());
    m.n_selected = static_cast<int>(ev.polygons.sampled.selected.size());
    m.pct_polygons = pct_polygons_of(m.n_selected, m.n_candidates);
    m.degree_hist = degree_histogram(ev.skeleton.sampled.skeleton);

    if (tcfg.export_every > 0 && (epoch + 1) % tcfg.export_every == 0) {
      char stem[32];
      snprintf(stem, sizeof stem, "complex_epoch_%04d", epoch);
      ComplexExportInfo info;
      info.labels = ds.labels;
      info.homophily_level = m.homophily;
      info.pct_polygons = m.pct_polygons;
      info.epoch = epoch;
      export_complex(ev.complex, (std::filesystem::path(tcfg.export_dir) / stem).string(), info);
    }

    // >= so ties go to the later, more-converged snapshot
    if (res.best_epoch < 0 || m.acc_val >= res.best_val_acc) {
      res.best_epoch = epoch;
      res.best_val_acc = m.acc_val;
      res.test_acc = m.acc_test;
      res.model = model;
    }
    res.history.push_back(std::move(m));
  }
  return res;
}

EvalMetrics evaluate(DcmModel& model, const Dataset& ds, const std::vector<int>& mask) {
  for (int i : mask)
    if (i < 0 || i >= ds.n()) throw std::invalid_argument("evaluate: mask index out of range");
  std::optional<Skeleton> g_in;
  if (model.config().graph_conditioned) {
    if (!ds.edges)
      throw std::invalid_argument("evaluate: graph-conditioned model but dataset has no edges");
    g_in = Skeleton::from_edges(ds.n(), *ds.edges);
  }
  Tape tape;
  Rng dummy(0);
  ForwardResult fwd = model.forward(tape, ds.features, g_in, /*train_mode=*/false, dummy);
  std::vector<int> preds = argmax_rows(fwd.logits.val());
  EvalMetrics m;
  m.accuracy = accuracy_on(preds, ds.labels, mask);
  m.homophily = homophily(fwd.skeleton.sampled.skeleton, ds.labels);
  m.n_edges = fwd.skeleton.sampled.skeleton.n_edges();
  m.pct_polygons = pct_polygons_of(static_cast<int>(fwd.polygons.sampled.selected.size()),
                                   static_cast<int>(fwd.candidates.size()));
  m.degree_hist = degree_histogram(fwd.skeleton.sampled.skeleton);
  return m;
}

void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& history,
                       int split_index) {
  std::ofstream f(path);
  if (!f.good()) throw std::runtime_error("write_metrics_csv: cannot open " + path);
  f << "epoch,split,loss_task,loss_gl,loss_pl,acc_train,acc_val,acc_test,"
       "homophily,pct_polygons,n_edges,n_candidates,n_selected,degree_hist\n";
  for (const EpochMetrics& m : history) {
    f << m.epoch << ',' << split_index << ',' << m.loss_task << ',' << m.loss_gl << ','
      << m.loss_pl << ',' << m.acc_train << ',' << m.acc_val << ',' << m.acc_test << ','
      << m.homophily << ',' << m.pct_polygons << ',' << m.n_edges << ',' << m.n_candidates
      << ',' << m.n_selected << ',';
    bool first = true;
    for (const auto& [deg, count] : m.degree_hist) {
      if (!first) f << '|';
      f << deg << ':' << count;
      first = false;
    }
    f << '\n';
  }
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mu = mean(xs);
  double s = 0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace celltop
