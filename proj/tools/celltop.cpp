// celltop: experiment driver for latent-cell-complex node classification.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "celltop/dataset.hpp"
#include "celltop/network.hpp"
#include "celltop/toml.hpp"
#include "celltop/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitTrainingAbort = 2;

std::optional<uint64_t> env_seed() {
  const char* s = std::getenv("CELLTOP_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw std::invalid_argument("CELLTOP_SEED is not an integer: '" + std::string(s) + "'");
  }
}

struct RunOptions {
  std::string config_path;
  // flag overrides; negative/empty means "not given"
  std::string dataset_dir, out_dir;
  int epochs = -1, splits = -1, kmax = -1, export_every = -1;
  double lr = -1;
  int64_t seed = -1;
  int with_graph = -1;     // tri-state
  int all_polygons = -1;
};

json degree_hist_json(const std::map<int, int>& hist) {
  json j = json::object();
  for (const auto& [d, c] : hist) j[std::to_string(d)] = c;
  return j;
}

int do_run(const RunOptions& opt) {
  celltop::TomlTable cfg;
  if (!opt.config_path.empty()) cfg = celltop::parse_toml_file(opt.config_path);

  std::string data_dir =
      !opt.dataset_dir.empty() ? opt.dataset_dir : cfg.require_string("data.path");
  std::string out_dir =
      !opt.out_dir.empty() ? opt.out_dir : cfg.get_string("data.output_dir", "celltop_out");

  celltop::Dataset ds = celltop::load_dataset(data_dir);

  celltop::ModelConfig mcfg;
  mcfg.f_in = ds.f_in();
  mcfg.n_classes = ds.n_classes;
  mcfg.hidden = static_cast<int>(cfg.get_int("model.hidden", 32));
  mcfg.k_max = opt.kmax > 0 ? opt.kmax : static_cast<int>(cfg.get_int("model.k_max", 4));
  mcfg.gcn_layers = static_cast<int>(cfg.get_int("model.gcn_layers", 1));
  mcfg.cccn_layers = static_cast<int>(cfg.get_int("model.cccn_layers", 1));
  mcfg.dropout = cfg.get_double("model.dropout", 0.5);
  mcfg.all_polygons = opt.all_polygons >= 0 ? opt.all_polygons
                                            : cfg.get_bool("model.all_polygons", false);
  bool with_graph_default = cfg.get_bool("model.with_graph", ds.edges.has_value());
  mcfg.graph_conditioned = opt.with_graph >= 0 ? opt.with_graph : with_graph_default;

  celltop::TrainConfig tcfg;
  tcfg.lr = opt.lr > 0 ? opt.lr : cfg.get_double("train.lr", 0.01);
  tcfg.epochs = opt.epochs > 0 ? opt.epochs : static_cast<int>(cfg.get_int("train.epochs", 200));
  tcfg.seed = opt.seed >= 0 ? static_cast<uint64_t>(opt.seed)
                            : static_cast<uint64_t>(cfg.get_int("train.seed", 1));
  if (auto s = env_seed()) tcfg.seed = *s;
  tcfg.lambda_task = cfg.get_double("train.lambda_task", 1.0);
  tcfg.lambda_gl = cfg.get_double("train.lambda_gl", 1.0);
  tcfg.lambda_pl = cfg.get_double("train.lambda_pl", 1.0);
  int export_every = opt.export_every >= 0
                         ? opt.export_every
                         : static_cast<int>(cfg.get_int("train.export_every", 0));

  int n_splits = opt.splits > 0 ? opt.splits : static_cast<int>(cfg.get_int("train.splits", 10));
  std::vector<celltop::SplitMasks> splits = ds.splits;
  if (splits.empty())
    splits = celltop::make_stratified_splits(ds.labels, n_splits, tcfg.seed * 7919 + 13);

  fs::create_directories(out_dir);

  std::vector<double> test_accs, val_accs, homos, pcts;
  for (size_t s = 0; s < splits.size(); ++s) {
    celltop::TrainConfig split_cfg = tcfg;
    split_cfg.seed = tcfg.seed + s;  // independent streams per split
    if (export_every > 0) {
      split_cfg.export_every = export_every;
      split_cfg.export_dir = (fs::path(out_dir) / ("complexes_split_" + std::to_string(s))).string();
    }
    celltop::TrainResult res = celltop::train(ds, splits[s], mcfg, split_cfg);

    celltop::write_metrics_csv(
        (fs::path(out_dir) / ("metrics_split_" + std::to_string(s) + ".csv")).string(),
        res.history, static_cast<int>(s));
    res.model.save((fs::path(out_dir) / ("model_split_" + std::to_string(s))).string());

    const celltop::EpochMetrics& best = res.history[res.best_epoch];
    test_accs.push_back(res.test_acc);
    val_accs.push_back(res.best_val_acc);
    homos.push_back(best.homophily);
    pcts.push_back(best.pct_polygons);
    std::cout << "split " << s << ": best epoch " << res.best_epoch << ", val acc "
              << res.best_val_acc << ", test acc " << res.test_acc << ", h " << best.homophily
              << "\n";
  }

  json summary;
  summary["dataset"] = {{"name", ds.name},
                        {"n", ds.n()},
                        {"f_in", ds.f_in()},
                        {"n_classes", ds.n_classes},
                        {"content_hash", celltop::dataset_content_hash(ds)}};
  summary["config"] = {{"lr", tcfg.lr},
                       {"epochs", tcfg.epochs},
                       {"seed", tcfg.seed},
                       {"splits", splits.size()},
                       {"k_max", mcfg.k_max},
                       {"hidden", mcfg.hidden},
                       {"gcn_layers", mcfg.gcn_layers},
                       {"cccn_layers", mcfg.cccn_layers},
                       {"dropout", mcfg.dropout},
                       {"with_graph", mcfg.graph_conditioned},
                       {"all_polygons", mcfg.all_polygons},
                       {"lambda_task", tcfg.lambda_task},
                       {"lambda_gl", tcfg.lambda_gl},
                       {"lambda_pl", tcfg.lambda_pl}};
  auto agg = [](const std::vector<double>& xs) {
    return json{{"mean", celltop::mean(xs)}, {"stddev", celltop::sample_stddev(xs)}};
  };
  summary["test_accuracy"] = agg(test_accs);
  summary["val_accuracy"] = agg(val_accs);
  summary["homophily"] = agg(homos);
  summary["pct_polygons"] = agg(pcts);

  std::ofstream sf(fs::path(out_dir) / "summary.json");
  sf << summary.dump(2) << "\n";
  std::cout << "test accuracy: " << celltop::mean(test_accs) << " +/- "
            << celltop::sample_stddev(test_accs) << "  (" << splits.size() << " splits)\n";
  return kExitOk;
}

int do_eval(const std::string& model_stem, const std::string& data_dir, int split_idx,
            const std::string& which_mask) {
  celltop::DcmModel model = celltop::DcmModel::load(model_stem);
  celltop::Dataset ds = celltop::load_dataset(data_dir);

  std::vector<int> mask;
  if (which_mask == "all") {
    for (int i = 0; i < ds.n(); ++i) mask.push_back(i);
  } else {
    std::vector<celltop::SplitMasks> splits = ds.splits;
    if (splits.empty())
      throw std::invalid_argument("eval: dataset has no splits; use --mask all");
    if (split_idx < 0 || split_idx >= static_cast<int>(splits.size()))
      throw std::invalid_argument("eval: split index out of range");
    const celltop::SplitMasks& m = splits[split_idx];
    mask = which_mask == "train" ? m.train : which_mask == "val" ? m.val : m.test;
  }

  celltop::EvalMetrics m = celltop::evaluate(model, ds, mask);
  json out = {{"accuracy", m.accuracy},
              {"homophily", m.homophily},
              {"pct_polygons", m.pct_polygons},
              {"n_edges", m.n_edges},
              {"degree_hist", degree_hist_json(m.degree_hist)}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int do_lift(const std::string& graph_path, int kmax, const std::string& out_path) {
  std::ifstream in(graph_path);
  if (!in.good()) throw std::invalid_argument("cannot open " + graph_path);
  json j = json::parse(in);
  int n = j.at("n");
  std::vector<std::pair<int, int>> pairs;
  for (const auto& e : j.at("edges")) pairs.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  celltop::Skeleton g = celltop::Skeleton::from_edges(n, std::move(pairs));

  std::vector<celltop::Cycle> cycles = celltop::enumerate_induced_cycles(g, kmax);
  std::cout << "candidates: " << cycles.size() << "\n";
  json out = {{"n", n}, {"k_max", kmax}, {"candidates", cycles}};
  if (out_path.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::ofstream f(out_path);
    if (!f.good()) throw std::invalid_argument("cannot write " + out_path);
    f << out.dump(2) << "\n";
  }
  return kExitOk;
}

int do_entmax(double alpha, const std::string& scores_csv) {
  std::vector<double> scores;
  std::stringstream ss(scores_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) scores.push_back(std::stod(tok));
  celltop::EntmaxResult r = celltop::entmax_forward(scores, alpha);
  for (size_t i = 0; i < r.probs.size(); ++i) {
    if (i) std::cout << ' ';
    std::cout << r.probs[i];
  }
  std::cout << "\n";
  return kExitOk;
}

int do_export_complex(const std::string& model_stem, const std::string& data_dir,
                      const std::string& out_stem) {
  celltop::DcmModel model = celltop::DcmModel::load(model_stem);
  celltop::Dataset ds = celltop::load_dataset(data_dir);
  std::optional<celltop::Skeleton> g_in;
  if (model.config().graph_conditioned) {
    if (!ds.edges)
      throw std::invalid_argument("export-complex: model expects a graph, dataset has none");
    g_in = celltop::Skeleton::from_edges(ds.n(), *ds.edges);
  }
  celltop::Tape tape;
  celltop::Rng dummy(0);
  celltop::ForwardResult fwd = model.forward(tape, ds.features, g_in, false, dummy);
  celltop::ComplexExportInfo info;
  info.labels = ds.labels;
  info.homophily_level = celltop::homophily(fwd.skeleton.sampled.skeleton, ds.labels);
  celltop::export_complex(fwd.complex, out_stem, info);
  std::cout << "wrote " << out_stem << ".json and " << out_stem << ".dot\n";
  return kExitOk;
}

int do_convert(const std::string& format, const std::string& nodes, const std::string& edges,
               const std::string& name, const std::string& out_dir, int splits, int64_t seed) {
  celltop::Dataset ds;
  if (format == "webkb")
    ds = celltop::convert_webkb(nodes, edges, name);
  else if (format == "planetoid")
    ds = celltop::convert_planetoid(nodes, edges, name);
  else
    throw std::invalid_argument("convert: unknown format '" + format + "'");
  uint64_t s = static_cast<uint64_t>(seed);
  if (auto es = env_seed()) s = *es;
  if (splits > 0) ds.splits = celltop::make_stratified_splits(ds.labels, splits, s);
  celltop::save_dataset(ds, out_dir);
  std::cout << "wrote " << out_dir << " (n=" << ds.n() << ", f_in=" << ds.f_in()
            << ", classes=" << ds.n_classes
            << ", edges=" << (ds.edges ? ds.edges->size() : 0) << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent cell complex training and tooling"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "train over all splits and write artifacts");
  run->add_option("--config", run_opt.config_path, "TOML config file");
  run->add_option("--dataset", run_opt.dataset_dir, "dataset directory (overrides config)");
  run->add_option("--out", run_opt.out_dir, "output directory");
  run->add_option("--epochs", run_opt.epochs, "training epochs");
  run->add_option("--splits", run_opt.splits, "number of generated splits");
  run->add_option("--kmax", run_opt.kmax, "maximum polygon size");
  run->add_option("--lr", run_opt.lr, "learning rate");
  run->add_option("--seed", run_opt.seed, "master seed");
  run->add_option("--export-every", run_opt.export_every, "complex snapshot cadence");
  run->add_flag("--with-graph{1},--no-graph{0}", run_opt.with_graph,
                "condition the aux encoder on the input graph");
  run->add_flag("--all-polygons{1}", run_opt.all_polygons, "keep every candidate polygon");

  std::string model_stem, data_dir, mask = "test", graph_path, out_path;
  int split_idx = 0;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a saved model");
  eval->add_option("--model", model_stem, "model path stem")->required();
  eval->add_option("--dataset", data_dir, "dataset directory")->required();
  eval->add_option("--split", split_idx, "split index");
  eval->add_option("--mask", mask, "train|val|test|all")
      ->check(CLI::IsMember({"train", "val", "test", "all"}));

  int kmax = 4;
  CLI::App* lift = app.add_subcommand("lift", "enumerate candidate polygons of a graph");
  lift->add_option("--graph", graph_path, "graph JSON ({n, edges})")->required();
  lift->add_option("--kmax", kmax, "maximum cycle length");
  lift->add_option("--out", out_path, "output JSON (default: stdout)");

  double alpha = 1.5;
  std::string scores_csv;
  CLI::App* entmax = app.add_subcommand("entmax", "print the entmax of a score vector");
  entmax->add_option("--alpha", alpha, "exponent in [1, 2]");
  entmax->add_option("--scores", scores_csv, "comma-separated scores")->required();

  std::string export_out;
  CLI::App* exp = app.add_subcommand("export-complex", "export a model's inferred complex");
  exp->add_option("--model", model_stem, "model path stem")->required();
  exp->add_option("--dataset", data_dir, "dataset directory")->required();
  exp->add_option("--out", export_out, "output path stem")->required();

  std::string cv_format, cv_nodes, cv_edges, cv_name = "converted", cv_out;
  int cv_splits = 10;
  int64_t cv_seed = 1;
  CLI::App* conv = app.add_subcommand("convert", "convert raw dataset files");
  conv->add_option("--format", cv_format, "webkb|planetoid")->required();
  conv->add_option("--nodes", cv_nodes, "node/content file")->required();
  conv->add_option("--edges", cv_edges, "edge/cites file")->required();
  conv->add_option("--name", cv_name, "dataset name");
  conv->add_option("--out", cv_out, "output dataset directory")->required();
  conv->add_option("--splits", cv_splits, "stratified splits to generate (0 = none)");
  conv->add_option("--seed", cv_seed, "split generation seed");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return do_run(run_opt);
    if (eval->parsed()) return do_eval(model_stem, data_dir, split_idx, mask);
    if (lift->parsed()) return do_lift(graph_path, kmax, out_path);
    if (entmax->parsed()) return do_entmax(alpha, scores_csv);
    if (exp->parsed()) return do_export_complex(model_stem, data_dir, export_out);
    if (conv->parsed())
      return do_convert(cv_format, cv_nodes, cv_edges, cv_name, cv_out, cv_splits, cv_seed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTrainingAbort;
  }
  return kExitValidation;
}
