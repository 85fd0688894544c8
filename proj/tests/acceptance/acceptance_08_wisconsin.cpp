// Wisconsin without input graph: mean test accuracy >= 80% over 10 splits.
#include "acceptance_dataset_run.hpp"

int main() {
  return acceptance::run_dataset_benchmark(
      {8, "Wisconsin w/o graph", "wisconsin", /*with_graph=*/false, /*epochs=*/200,
       /*min_mean_test_acc=*/0.80});
}
