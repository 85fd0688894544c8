#include "celltop/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace celltop {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_finite(const Tensor& t, const char* where) {
  if (!t.all_finite())
    throw std::invalid_argument(std::string(where) + ": non-finite values in input");
}

// C += A * B, naive ikj loop; all operands dense row-major.
void gemm_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.data[static_cast<size_t>(i) * a.cols];
    double* crow = &c.data[static_cast<size_t>(i) * c.cols];
    for (int k = 0; k < a.cols; ++k) {
      double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = &b.data[static_cast<size_t>(k) * b.cols];
      for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
}

// C += A^T * B
void gemm_at_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  for (int k = 0; k < a.rows; ++k) {
    const double* arow = &a.data[static_cast<size_t>(k) * a.cols];
    const double* brow = &b.data[static_cast<size_t>(k) * b.cols];
    for (int i = 0; i < a.cols; ++i) {
      double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = &c.data[static_cast<size_t>(i) * c.cols];
      for (int j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
    }
  }
}

// C += A * B^T
void gemm_bt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.data[static_cast<size_t>(i) * a.cols];
    double* crow = &c.data[static_cast<size_t>(i) * c.cols];
    for (int j = 0; j < b.rows; ++j) {
      const double* brow = &b.data[static_cast<size_t>(j) * b.cols];
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
      crow[j] += acc;
    }
  }
}

Tape& same_tape(Value a, Value b) {
  require(a.tape != nullptr && a.tape == b.tape, "op: values on different tapes");
  return *a.tape;
}

}  // namespace

Tensor Tensor::full(int r, int c, double v) {
  Tensor t(r, c);
  std::fill(t.data.begin(), t.data.end(), v);
  return t;
}

Tensor Tensor::identity(int n) {
  Tensor t(n, n);
  for (int i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  int r = static_cast<int>(rows.size());
  int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  Tensor t(r, c);
  int i = 0;
  for (const auto& row : rows) {
    require(static_cast<int>(row.size()) == c, "Tensor::from_rows: ragged rows");
    int j = 0;
    for (double v : row) t(i, j++) = v;
    ++i;
  }
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols,
                                         std::vector<std::tuple<int, int, double>> triplets) {
  std::sort(triplets.begin(), triplets.end());
  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (const auto& [r, c, v] : triplets) {
    require(r >= 0 && r < rows && c >= 0 && c < cols, "SparseMatrix: index out of range");
    (void)v;
    m.row_ptr[r + 1]++;
  }
  for (int r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  m.col_idx.reserve(triplets.size());
  m.vals.reserve(triplets.size());
  for (const auto& [r, c, v] : triplets) {
    (void)r;
    m.col_idx.push_back(c);
    m.vals.push_back(v);
  }
  return m;
}

Tensor SparseMatrix::apply(const Tensor& x) const {
  require(x.rows == cols, "SparseMatrix::apply: shape mismatch");
  Tensor y(rows, x.cols);
  for (int r = 0; r < rows; ++r) {
    double* yrow = &y.data[static_cast<size_t>(r) * y.cols];
    for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      const double* xrow = &x.data[static_cast<size_t>(col_idx[p]) * x.cols];
      double w = vals[p];
      for (int j = 0; j < x.cols; ++j) yrow[j] += w * xrow[j];
    }
  }
  return y;
}

Tensor SparseMatrix::apply_transpose(const Tensor& y) const {
  require(y.rows == rows, "SparseMatrix::apply_transpose: shape mismatch");
  Tensor x(cols, y.cols);
  for (int r = 0; r < rows; ++r) {
    const double* yrow = &y.data[static_cast<size_t>(r) * y.cols];
    for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      double* xrow = &x.data[static_cast<size_t>(col_idx[p]) * x.cols];
      double w = vals[p];
      for (int j = 0; j < y.cols; ++j) xrow[j] += w * yrow[j];
    }
  }
  return x;
}

// ---- Rng -------------------------------------------------------------------

uint64_t Rng::next_u64() {
  // splitmix64
  uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

std::vector<int> Rng::permutation(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(next_u64() % static_cast<uint64_t>(i + 1));
    std::swap(p[i], p[j]);
  }
  return p;
}

// ---- Tape ------------------------------------------------------------------

const Tensor& Value::val() const { return tape->value(id); }

Value Tape::leaf(const Tensor& value, std::string name) {
  check_finite(value, "Tape::leaf");
  require(!name.empty(), "Tape::leaf: empty name");
  Node n;
  n.val = value;
  n.leaf_name = std::move(name);
  nodes_.push_back(std::move(n));
  return Value{this, static_cast<int>(nodes_.size()) - 1};
}

Value Tape::constant(const Tensor& value) {
  check_finite(value, "Tape::constant");
  Node n;
  n.val = value;
  nodes_.push_back(std::move(n));
  return Value{this, static_cast<int>(nodes_.size()) - 1};
}

Value Tape::record(Tensor out, std::vector<int> inputs, BackFn back) {
  check_finite(out, "Tape::record");
  Node n;
  n.val = std::move(out);
  n.inputs = std::move(inputs);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Value{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad(int id) {
  Node& n = nodes_[id];
  if (n.grad.rows == 0 && n.val.rows > 0) n.grad = Tensor::zeros(n.val.rows, n.val.cols);
  return n.grad;
}

GradMap Tape::backward(Value loss) {
  require(loss.tape == this && loss.id >= 0 && loss.id < static_cast<int>(nodes_.size()),
          "backward: loss not on this tape");
  const Tensor& lv = nodes_[loss.id].val;
  require(lv.rows == 1 && lv.cols == 1, "backward: loss must be a 1x1 scalar");

  grad(loss.id)(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.rows == 0 || !n.back) continue;
    n.back(*this, i);
  }

  GradMap grads;
  for (Node& n : nodes_) {
    if (n.leaf_name.empty()) continue;
    if (n.grad.rows == 0) n.grad = Tensor::zeros(n.val.rows, n.val.cols);
    grads[n.leaf_name] = std::move(n.grad);
  }
  clear();
  return grads;
}

void Tape::clear() { nodes_.clear(); }

// ---- ops -------------------------------------------------------------------

Value matmul(Value a, Value b) {
  Tape& t = same_tape(a, b);
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  require(av.cols == bv.rows, "matmul: inner dimensions differ");
  Tensor out(av.rows, bv.cols);
  gemm_acc(av, bv, out);
  int aid = a.id, bid = b.id;
  return t.record(std::move(out), {aid, bid}, [aid, bid](Tape& tp, int id) {
    const Tensor g = tp.grad(id);
    gemm_bt_acc(g, tp.value(bid), tp.grad(aid));   // dA += dC B^T
    gemm_at_acc(tp.value(aid), g, tp.grad(bid));   // dB += A^T dC
  });
}

Value add(Value a, Value b) {
  Tape& t = same_tape(a, b);
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  require(av.same_shape(bv), "add: shape mismatch");
  Tensor out = av;
  for (size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
  int aid = a.id, bid = b.id;
  return t.record(std::move(out), {aid, bid}, [aid, bid](Tape& tp, int id) {
    const Tensor g = tp.grad(id);
    Tensor& ga = tp.grad(aid);
    Tensor& gb = tp.grad(bid);
    for (size_t i = 0; i < g.size(); ++i) {
      ga.data[i] += g.data[i];
      gb.data[i] += g.data[i];
    }
  });
}

Value sub(Value a, Value b) {
  Tape& t = same_tape(a, b);
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  require(av.same_shape(bv), "sub: shape mismatch");
  Tensor out = av;
  for (size_t i = 0; i < out.size(); ++i) out.data[i] -= bv.data[i];
  int aid = a.id, bid = b.id;
  return t.record(std::move(out), {aid, bid}, [aid, bid](Tape& tp, int id) {
    const Tensor g = tp.grad(id);
    Tensor& ga = tp.grad(aid);
    Tensor& gb = tp.grad(bid);
    for (size_t i = 0; i < g.size(); ++i) {
      ga.data[i] += g.data[i];
      gb.data[i] -= g.data[i];
    }
  });
}

Value mul(Value a, Value b) {
  Tape& t = same_tape(a, b);
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  require(av.same_shape(bv), "mul: shape mismatch");
  Tensor out = av;
  for (size_t i = 0; i < out.size(); ++i) out.data[i] *= bv.data[i];
  int aid = a.id, bid = b.id;
  return t.record(std::move(out), {aid, bid}, [aid, bid](Tape& tp, int id) {
    const Tensor g = tp.grad(id);
    const Tensor& av2 = tp.value(aid);
    const Tensor& bv2 = tp.value(bid);
    Tensor& ga = tp.grad(aid);
    Tensor& gb = tp.grad(bid);
    for (size_t i = 0; i < g.size(); ++i) {
      ga.data[i] += g.data[i] * bv2.data[i];
      gb.data[i] += g.data[i] * av2.data[i];
    }
  });
}

Value relu(Value a) {
  Tape& t = *a.tape;
  Tensor out = a.val();
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;  // subgradient at 0 is 0
  int aid = a.id;
  return t.record(std::move(out), {aid}, [aid](Tape& tp, int id) {
    const Tensor& g = tp.grad(id);
    const Tensor& x = tp.value(aid);
    Tensor& ga = tp.grad(aid);
    for (size_t i = 0; i < g.size(); ++i)
      if (x.data[i] > 0.0) ga.data[i] += g.data[i];
  });
}

Value concat_cols(Value a, Value b) {
  Tape& t = same_tape(a, b);
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  require(av.rows == bv.rows, "concat_cols: row count mismatch");
  Tensor out(av.rows, av.cols + bv.cols);
  for (int r = 0; r < av.rows; ++r) {
    for (int c = 0; c < av.cols; ++c) out(r, c) = av(r, c);
    for (int c = 0; c < bv.cols; ++c) out(r, av.cols + c) = bv(r, c);
  }
  int aid = a.id, bid = b.id;
  int acols = av.cols, bcols = bv.cols;
  return t.record(std::move(out), {aid, bid}, [aid, bid, acols, bcols](Tape& tp, int id) {
    const Tensor& g = tp.grad(id);
    Tensor& ga = tp.grad(aid);
    Tensor& gb = tp.grad(bid);
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 0; c < acols; ++c) ga(r, c) += g(r, c);
      for (int c = 0; c < bcols; ++c) gb(r, c) += g(r, acols + c);
    }
  });
}

Value row_gather(Value a, std::vector<int> idx) {
  Tape& t = *a.tape;
  const Tensor& av = a.val();
  for (int i : idx) require(i >= 0 && i < av.rows, "row_gather: index out of range");
  Tensor out(static_cast<int>(idx.size()), av.cols);
  for (size_t r = 0; r < idx.size(); ++r)
    for (int c = 0; c < av.cols; ++c) out(static_cast<int>(r), c) = av(idx[r], c);
  int aid = a.id;
  return t.record(std::move(out), {aid}, [aid, idx = std::move(idx)](Tape& tp, int id) {
    const Tensor& g = tp.grad(id);
    Tensor& ga = tp.grad(aid);
    for (size_t r = 0; r < idx.size(); ++r)
      for (int c = 0; c < g.cols; ++c) ga(idx[r], c) += g(static_cast<int>(r), c);
  });
}

Value row_scatter_add(Value a, std::vector<int> idx, int out_rows) {
  Tape& t = *a.tape;
  const Tensor& av = a.val();
  require(static_cast<int>(idx.size()) == av.rows, "row_scatter_add: index count mismatch");
  for (int i : idx) require(i >= 0 && i < out_rows, "row_scatter_add: index out of range");
  Tensor out(out_rows, av.cols);
  for (int r = 0; r < av.rows; ++r)
    for (int c = 0; c < av.cols; ++c) out(idx[r], c) += av(r, c);
  int aid = a.id;
  return t.record(std::move(out), {aid}, [aid, idx = std::move(idx)](Tape& tp, int id) {
    const Tensor& g = tp.grad(id);
    Tensor& ga = tp.grad(aid);
    for (int r = 0; r < ga.rows; ++r)
      for (int c = 0; c < g.cols; ++c) ga(r, c) += g(idx[r], c);
  });
}

Value layer_norm_row(Value a) {
  constexpr double kEps = 1e-5;
  Tape& t = *a.tape;
  const Tensor& av = a.val();
  require(av.cols >= 2, "layer_norm_row: needs at least 2 columns");
  Tensor out(av.rows, av.cols);
  std::vector<double> inv_sigma(av.rows);
  for (int r = 0; r < av.rows; ++r) {
    double mean = 0.0;
    for (int c = 0; c < av.cols; ++c) mean += av(r, c);
    mean /= av.cols;
    double var = 0.0;
    for (int c = 0; c < av.cols; ++c) {
      double d = av(r, c) - mean;
      var += d * d;
    }
    var /= av.cols;
    double is = 1.0 / std::sqrt(var + kEps);
    inv_sigma[r] = is;
    for (int c = 0; c < av.cols; ++c) out(r, c) = (av(r, c) - mean) * is;
  }
  int aid = a.id;
  return t.record(std::move(out), {aid},
                  [aid, inv_sigma = std::move(inv_sigma)](Tape& tp, int id) {
    const Tensor& g = tp.grad(id);
    const Tensor& y = tp.value(id);
    Tensor& ga = tp.grad(aid);
    for (int r = 0; r < g.rows; ++r) {
      double gmean = 0.0, gymean = 0.0;
      for (int c = 0; c < g.cols; ++c) {
        gmean += g(r, c);
        gymean += g(r, c) * y(r, c);
      }
      gmean /= g.cols;
      gymean /= g.cols;
      for (int c = 0; c < g.cols; ++c)
        ga(r, c) += inv_sigma[r] * (g(r, c) - gmean - y(r, c) * gymean);
    }
  });
}

Value log(Value a) {
  Tape& t = *a.tape;
  Tensor out = a.val();
  for (double& v : out.data) {
    require(v > 0.0, "log: non-positive input");
    v = std::log(v);
  }
  int aid = a.id;
  return t.record(std::move(out), {aid}, [aid](Tape& tp, int id) {
    const Tensor& g = tp.grad(id);
    const Tensor& x = tp.value(aid);
    Tensor& ga = tp.grad(aid);
    for (size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] / x.data[i];
  });
}

Value exp(Value a) {
  Tape& t = *a.tape;
  Tensor out = a.val();
  for (double& v : out.data) v = std::exp(v);
  int aid = a.id;
  return t.record(std::move(out), {aid}, [aid](Tape& tp, int id) {
    const Tensor& g = tp.grad(id);
    const Tensor& y = tp.value(id);
    Tensor& ga = tp.grad(aid);
    for (size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * y.data[i];
  });
}

Value sum(Value a) {
  Tape& t = *a.tape;
  double s = 0.0;
  for (double v : a.val().data) s += v;
  Tensor out(1, 1);
  out(0, 0) = s;
  int aid = a.id;
  return t.record(std::move(out), {aid}, [aid](Tape& tp, int id) {
    double g = tp.grad(id)(0, 0);
    Tensor& ga = tp.grad(aid);
    for (double& v : ga.data) v += g;
  });
}

Value scale(Value a, double c) {
  Tape& t = *a.tape;
  Tensor out = a.val();
  for (double& v : out.data) v *= c;
  int aid = a.id;
  return t.record(std::move(out), {aid}, [aid, c](Tape& tp, int id) {
    const Tensor& g = tp.grad(id);
    Tensor& ga = tp.grad(aid);
    for (size_t i = 0; i < g.size(); ++i) ga.data[i] += c * g.data[i];
  });
}

Value spmm(const SparseMatrix& m, Value x) {
  Tape& t = *x.tape;
  Tensor out = m.apply(x.val());
  int xid = x.id;
  return t.record(std::move(out), {xid}, [xid, m](Tape& tp, int id) {
    Tensor gx = m.apply_transpose(tp.grad(id));
    Tensor& ga = tp.grad(xid);
    for (size_t i = 0; i < gx.size(); ++i) ga.data[i] += gx.data[i];
  });
}

Value dropout(Value a, double rate, Rng& rng) {
  require(rate >= 0.0 && rate < 1.0, "dropout: rate out of range");
  Tape& t = *a.tape;
  const Tensor& av = a.val();
  double keep = 1.0 - rate;
  std::vector<uint8_t> mask(av.size());
  Tensor out(av.rows, av.cols);
  for (size_t i = 0; i < av.size(); ++i) {
    mask[i] = rng.uniform() < keep ? 1 : 0;
    out.data[i] = mask[i] ? av.data[i] / keep : 0.0;
  }
  int aid = a.id;
  return t.record(std::move(out), {aid}, [aid, keep, mask = std::move(mask)](Tape& tp, int id) {
    const Tensor& g = tp.grad(id);
    Tensor& ga = tp.grad(aid);
    for (size_t i = 0; i < g.size(); ++i)
      if (mask[i]) ga.data[i] += g.data[i] / keep;
  });
}

Value softmax_cross_entropy(Value logits, const std::vector<int>& labels,
                            const std::vector<int>& mask_rows) {
  Tape& t = *logits.tape;
  const Tensor& lv = logits.val();
  require(static_cast<int>(labels.size()) == lv.rows, "cross_entropy: label count mismatch");
  require(!mask_rows.empty(), "cross_entropy: empty mask");
  for (int r : mask_rows) {
    require(r >= 0 && r < lv.rows, "cross_entropy: mask row out of range");
    require(labels[r] >= 0 && labels[r] < lv.cols, "cross_entropy: label out of range");
  }
  Tensor probs = softmax_rows(lv);
  double loss = 0.0;
  for (int r : mask_rows) loss -= std::log(std::max(probs(r, labels[r]), 1e-300));
  loss /= static_cast<double>(mask_rows.size());
  Tensor out(1, 1);
  out(0, 0) = loss;
  int lid = logits.id;
  return t.record(std::move(out), {lid},
                  [lid, probs = std::move(probs), labels, mask_rows](Tape& tp, int id) {
    double g = tp.grad(id)(0, 0) / static_cast<double>(mask_rows.size());
    Tensor& gl = tp.grad(lid);
    for (int r : mask_rows) {
      for (int c = 0; c < gl.cols; ++c) gl(r, c) += g * probs(r, c);
      gl(r, labels[r]) -= g;
    }
  });
}

Value add_row_bias(Value x, Value bias) {
  Tape& t = same_tape(x, bias);
  const Tensor& bv = bias.val();
  require(bv.rows == 1 && bv.cols == x.val().cols, "add_row_bias: bias must be 1 x cols");
  Value ones = t.constant(Tensor::full(x.val().rows, 1, 1.0));
  return add(x, matmul(ones, bias));
}

Tensor softmax_rows(const Tensor& logits) {
  Tensor out(logits.rows, logits.cols);
  for (int r = 0; r < logits.rows; ++r) {
    double mx = logits(r, 0);
    for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, logits(r, c));
    double z = 0.0;
    for (int c = 0; c < logits.cols; ++c) {
      out(r, c) = std::exp(logits(r, c) - mx);
      z += out(r, c);
    }
    for (int c = 0; c < logits.cols; ++c) out(r, c) /= z;
  }
  return out;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  std::vector<int> out(logits.rows, 0);
  for (int r = 0; r < logits.rows; ++r) {
    double best = logits(r, 0);
    for (int c = 1; c < logits.cols; ++c)
      if (logits(r, c) > best) {
        best = logits(r, c);
        out[r] = c;
      }
  }
  return out;
}

}  // namespace celltop
