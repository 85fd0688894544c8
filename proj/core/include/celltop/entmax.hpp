#pragma once

#include <span>
#include <vector>

#include "celltop/tensor.hpp"

namespace celltop {

// Learnable exponent of the sparse probability mapping. The raw scalar is
// unconstrained; value() = 1 + sigmoid(raw) stays in (1, 2) and starts at 1.5.
struct AlphaParam {
  double raw = 0.0;
  double value() const;
};

struct EntmaxResult {
  std::vector<double> probs;  // on the simplex, may contain exact zeros
  std::vector<int> support;   // indices with probs > 0
  double tau = 0.0;           // threshold found by the solver
};

// Maps a score vector onto the probability simplex. alpha = 1 is softmax;
// alpha > 1 is solved by bisection on the threshold and can produce exact
// zeros. Output is renormalized so the sum is 1 up to rounding.
EntmaxResult entmax_forward(std::span<const double> scores, double alpha, double eps = 1e-8);

// Jacobian-vector product of entmax_forward at `result`, plus the derivative
// with respect to alpha. d_alpha is only defined for alpha > 1; at alpha == 1
// it is reported as 0.
void entmax_backward(const EntmaxResult& result, double alpha,
                     std::span<const double> upstream, std::span<double> d_scores,
                     double& d_alpha);

// ---- tape ops --------------------------------------------------------------

// 1x1 raw parameter -> 1x1 alpha value (1 + sigmoid).
Value alpha_from_raw(Value raw);

// Row-wise entmax of a score matrix. With mask_diagonal, entry (i, i) is
// excluded from row i's solve and its output probability is exactly 0.
// alpha is a 1x1 value; its gradient accumulates over all rows.
Value entmax_rows(Value scores, Value alpha, bool mask_diagonal);

// Layer normalization of each row computed over off-diagonal entries only;
// the diagonal output is 0 and carries no gradient. Requires a square input
// with at least 2 columns; a row with a single off-diagonal entry maps to 0
// (the downstream per-row entmax yields 1 for a single candidate anyway).
Value layer_norm_row_offdiag(Value a);

}  // namespace celltop
