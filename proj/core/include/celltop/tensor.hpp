#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace celltop {

// Dense 2-D tensor of doubles, row-major. Values are plain data; autodiff
// lives in Tape below.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor full(int r, int c, double v);
  static Tensor identity(int n);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);

  double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  size_t size() const { return data.size(); }
  bool all_finite() const;
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
};

// Constant sparse matrix in CSR form. Used for the fixed aggregation
// coefficients of message passing; never carries gradient itself.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;  // size rows+1
  std::vector<int> col_idx;
  std::vector<double> vals;

  static SparseMatrix from_triplets(int rows, int cols,
                                    std::vector<std::tuple<int, int, double>> triplets);
  Tensor apply(const Tensor& x) const;            // rows x k
  Tensor apply_transpose(const Tensor& y) const;  // cols x k
};

// Deterministic RNG: splitmix64 stream + Box-Muller. Hand-rolled so that
// replays are bit-identical regardless of the standard library in use.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}
  uint64_t next_u64();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();   // standard normal
  // Fisher-Yates over [0, n)
  std::vector<int> permutation(int n);

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid until the tape is cleared.
struct Value {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Tensor& val() const;
};

using GradMap = std::map<std::string, Tensor>;

// Define-by-run reverse-mode tape. Rebuilt for every forward pass; owned by
// exactly one training run.
class Tape {
 public:
  using BackFn = std::function<void(Tape&, int)>;

  // Trainable leaf; its gradient is reported by backward() under `name`.
  Value leaf(const Tensor& value, std::string name);
  // Non-trainable input; participates in the graph but reports no gradient.
  Value constant(const Tensor& value);
  Value record(Tensor out, std::vector<int> inputs, BackFn back);

  const Tensor& value(int id) const { return nodes_[id].val; }
  // Gradient buffer for a node, allocated (zero) on first access.
  Tensor& grad(int id);
  size_t node_count() const { return nodes_.size(); }

  // Runs the backward sweep from a 1x1 loss, returns gradients for every
  // leaf (zeros for leaves the loss does not reach), then clears the tape.
  GradMap backward(Value loss);
  void clear();

 private:
  struct Node {
    Tensor val;
    Tensor grad;  // empty until touched
    std::vector<int> inputs;
    BackFn back;
    std::string leaf_name;  // empty for interior nodes and constants
  };
  std::vector<Node> nodes_;
};

// ---- differentiable operations ---------------------------------------------

Value matmul(Value a, Value b);
Value add(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);  // elementwise
Value relu(Value a);
Value concat_cols(Value a, Value b);
Value row_gather(Value a, std::vector<int> idx);
// Scatter rows of `a` into a fresh (out_rows x cols) tensor, accumulating.
Value row_scatter_add(Value a, std::vector<int> idx, int out_rows);
Value layer_norm_row(Value a);  // zero mean / unit variance per row, eps 1e-5
Value log(Value a);
Value exp(Value a);
Value sum(Value a);             // -> 1x1
Value scale(Value a, double c);
Value spmm(const SparseMatrix& m, Value x);
Value dropout(Value a, double rate, Rng& rng);
// Mean cross entropy with integrated row softmax over `mask_rows`.
Value softmax_cross_entropy(Value logits, const std::vector<int>& labels,
                            const std::vector<int>& mask_rows);

// x (N x F) plus a 1 x F bias row broadcast over rows; built from matmul+add.
Value add_row_bias(Value x, Value bias);

// Plain (non-recorded) helpers.
Tensor softmax_rows(const Tensor& logits);
std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace celltop
