// Identical seed + config produce bit-identical metrics CSVs across two runs.
#include <filesystem>
#include <fstream>
#include <string>

#include "acceptance_common.hpp"
#include "celltop/training.hpp"

using namespace celltop;
namespace fs = std::filesystem;

namespace {

std::string run_once(const std::string& tag) {
  Dataset ds = make_blobs(40, 6, 3, 3.0, 1.2, 321);
  ds.splits = make_stratified_splits(ds.labels, 2, 17);
  ModelConfig mcfg;
  mcfg.f_in = ds.f_in();
  mcfg.n_classes = ds.n_classes;
  std::string all;
  for (size_t s = 0; s < ds.splits.size(); ++s) {
    TrainConfig tcfg;
    tcfg.epochs = 25;
    tcfg.seed = 900 + s;
    TrainResult res = train(ds, ds.splits[s], mcfg, tcfg);
    std::string path =
        (fs::temp_directory_path() / ("celltop_det_" + tag + std::to_string(s) + ".csv"))
            .string();
    write_metrics_csv(path, res.history, static_cast<int>(s));
    std::ifstream f(path);
    all.append((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  }
  return all;
}

}  // namespace

int main() {
  bool ok = run_once("a") == run_once("b");
  return acceptance::report(10, "determinism", ok);
}
