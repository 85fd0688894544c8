// Cora with input graph: mean test accuracy >= 82% over 10 splits (slow suite).
#include "acceptance_dataset_run.hpp"

int main() {
  return acceptance::run_dataset_benchmark(
      {9, "Cora w graph", "cora", /*with_graph=*/true, /*epochs=*/100,
       /*min_mean_test_acc=*/0.82});
}
