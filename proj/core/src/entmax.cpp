#include "celltop/entmax.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace celltop {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

EntmaxResult softmax_result(std::span<const double> scores) {
  EntmaxResult r;
  int d = static_cast<int>(scores.size());
  double mx = *std::max_element(scores.begin(), scores.end());
  r.probs.resize(d);
  double z = 0.0;
  for (int i = 0; i < d; ++i) {
    r.probs[i] = std::exp(scores[i] - mx);
    z += r.probs[i];
  }
  for (int i = 0; i < d; ++i) {
    r.probs[i] /= z;
    r.support.push_back(i);
  }
  r.tau = mx + std::log(z);  // log-partition; p_i = exp(s_i - tau)
  return r;
}

}  // namespace

double AlphaParam::value() const { return 1.0 + sigmoid(raw); }

EntmaxResult entmax_forward(std::span<const double> scores, double alpha, double eps) {
  require(!scores.empty(), "entmax_forward: empty input");
  require(eps > 0.0, "entmax_forward: eps must be positive");
  require(alpha >= 1.0 && alpha <= 2.0, "entmax_forward: alpha outside [1, 2]");
  for (double s : scores) require(std::isfinite(s), "entmax_forward: non-finite score");

  if (alpha == 1.0) return softmax_result(scores);

  int d = static_cast<int>(scores.size());
  double am1 = alpha - 1.0;
  double expo = 1.0 / am1;
  double mx = *std::max_element(scores.begin(), scores.end());

  // Shifted scores s_i = (alpha-1)(z_i - max z); p_i = [s_i - tau]_+^{1/(alpha-1)}.
  // The sum is 1 at some tau in [-1, 0]: at tau=-1 the max term alone is 1,
  // at tau=0 every term vanishes. f is decreasing in tau.
  std::vector<double> s(d);
  for (int i = 0; i < d; ++i) s[i] = am1 * (scores[i] - mx);

  auto mass = [&](double tau) {
    double total = 0.0;
    for (int i = 0; i < d; ++i) {
      double v = s[i] - tau;
      if (v > 0.0) total += std::pow(v, expo);
    }
    return total;
  };

  double lo = -1.0, hi = 0.0, tau = -1.0;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    double f = mass(mid);
    // keep bisecting past the mass tolerance until tau itself is pinned down;
    // downstream finite-difference probes are sensitive to solver noise
    if (std::abs(f - 1.0) <= eps && hi - lo <= 1e-13) {
      tau = mid;
      break;
    }
    if (f < 1.0)
      hi = mid;
    else
      lo = mid;
    tau = lo;  // f(lo) >= 1, so the support stays nonempty
  }

  EntmaxResult r;
  r.tau = tau;
  r.probs.resize(d, 0.0);
  double total = 0.0;
  for (int i = 0; i < d; ++i) {
    double v = s[i] - tau;
    if (v > 0.0) {
      r.probs[i] = std::pow(v, expo);
      total += r.probs[i];
    }
  }
  for (int i = 0; i < d; ++i) {
    if (r.probs[i] > 0.0) {
      r.probs[i] /= total;  // exact simplex membership despite solver tolerance
      r.support.push_back(i);
    }
  }
  return r;
}

void entmax_backward(const EntmaxResult& result, double alpha,
                     std::span<const double> upstream, std::span<double> d_scores,
                     double& d_alpha) {
  int d = static_cast<int>(result.probs.size());
  require(static_cast<int>(upstream.size()) == d && static_cast<int>(d_scores.size()) == d,
          "entmax_backward: size mismatch");
  require(!result.support.empty(), "entmax_backward: empty support");

  // d_scores = s .* u - (s.u / sum s) * s  with s_i = p_i^(2-alpha) on the support.
  std::vector<double> w(d, 0.0);
  double wsum = 0.0, wu = 0.0;
  for (int i : result.support) {
    w[i] = std::pow(result.probs[i], 2.0 - alpha);
    wsum += w[i];
    wu += w[i] * upstream[i];
  }
  double q = wu / wsum;
  for (int i = 0; i < d; ++i) d_scores[i] = w[i] * (upstream[i] - q);

  if (alpha <= 1.0) {
    d_alpha = 0.0;
    return;
  }
  // Closed-form alpha derivative restricted to the support.
  double am1 = alpha - 1.0;
  double ent = 0.0;
  for (int i : result.support) ent += result.probs[i] * std::log(result.probs[i]);
  d_alpha = 0.0;
  for (int i : result.support) {
    double p = result.probs[i];
    double skew = w[i] / wsum;
    double slog = p * std::log(p);
    double dpda = (p - skew) / (am1 * am1) - (slog - skew * ent) / am1;
    d_alpha += upstream[i] * dpda;
  }
}

// ---- tape ops --------------------------------------------------------------

Value alpha_from_raw(Value raw) {
  Tape& t = *raw.tape;
  const Tensor& rv = raw.val();
  require(rv.rows == 1 && rv.cols == 1, "alpha_from_raw: raw must be 1x1");
  double sg = sigmoid(rv(0, 0));
  Tensor out(1, 1);
  out(0, 0) = 1.0 + sg;
  int rid = raw.id;
  return t.record(std::move(out), {rid}, [rid, sg](Tape& tp, int id) {
    tp.grad(rid)(0, 0) += tp.grad(id)(0, 0) * sg * (1.0 - sg);
  });
}

Value entmax_rows(Value scores, Value alpha, bool mask_diagonal) {
  Tape& t = *scores.tape;
  require(scores.tape == alpha.tape, "entmax_rows: values on different tapes");
  const Tensor& sv = scores.val();
  const Tensor& av = alpha.val();
  require(av.rows == 1 && av.cols == 1, "entmax_rows: alpha must be 1x1");
  if (mask_diagonal) require(sv.rows == sv.cols, "entmax_rows: diagonal mask needs square input");
  double a = av(0, 0);

  Tensor out(sv.rows, sv.cols);
  std::vector<EntmaxResult> rows(sv.rows);
  std::vector<double> buf;
  for (int r = 0; r < sv.rows; ++r) {
    buf.clear();
    for (int c = 0; c < sv.cols; ++c) {
      if (mask_diagonal && c == r) continue;
      buf.push_back(sv(r, c));
    }
    rows[r] = entmax_forward(buf, a);
    int k = 0;
    for (int c = 0; c < sv.cols; ++c) {
      if (mask_diagonal && c == r) continue;
      out(r, c) = rows[r].probs[k++];
    }
  }

  int sid = scores.id, aid = alpha.id;
  return t.record(std::move(out), {sid, aid},
                  [sid, aid, a, mask_diagonal, rows = std::move(rows)](Tape& tp, int id) {
    const Tensor& g = tp.grad(id);
    Tensor& gs = tp.grad(sid);
    Tensor& galpha = tp.grad(aid);
    std::vector<double> up, ds;
    for (int r = 0; r < g.rows; ++r) {
      int d = static_cast<int>(rows[r].probs.size());
      up.assign(d, 0.0);
      ds.assign(d, 0.0);
      int k = 0;
      for (int c = 0; c < g.cols; ++c) {
        if (mask_diagonal && c == r) continue;
        up[k++] = g(r, c);
      }
      double da = 0.0;
      entmax_backward(rows[r], a, up, ds, da);
      k = 0;
      for (int c = 0; c < g.cols; ++c) {
        if (mask_diagonal && c == r) continue;
        gs(r, c) += ds[k++];
      }
      galpha(0, 0) += da;
    }
  });
}

Value layer_norm_row_offdiag(Value a) {
  constexpr double kEps = 1e-5;
  Tape& t = *a.tape;
  const Tensor& av = a.val();
  require(av.rows == av.cols, "layer_norm_row_offdiag: square input required");
  require(av.cols >= 2, "layer_norm_row_offdiag: needs at least 2 columns");
  int n = av.rows;
  Tensor out(n, n);
  std::vector<double> inv_sigma(n, 0.0);
  for (int r = 0; r < n; ++r) {
    int m = n - 1;
    if (m < 2) continue;  // single candidate row; leave 0
    double mean = 0.0;
    for (int c = 0; c < n; ++c)
      if (c != r) mean += av(r, c);
    mean /= m;
    double var = 0.0;
    for (int c = 0; c < n; ++c)
      if (c != r) {
        double d = av(r, c) - mean;
        var += d * d;
      }
    var /= m;
    double is = 1.0 / std::sqrt(var + kEps);
    inv_sigma[r] = is;
    for (int c = 0; c < n; ++c)
      if (c != r) out(r, c) = (av(r, c) - mean) * is;
  }
  int aid = a.id;
  return t.record(std::move(out), {aid},
                  [aid, inv_sigma = std::move(inv_sigma)](Tape& tp, int id) {
    const Tensor& g = tp.grad(id);
    const Tensor& y = tp.value(id);
    Tensor& ga = tp.grad(aid);
    int n = g.rows;
    for (int r = 0; r < n; ++r) {
      if (inv_sigma[r] == 0.0) continue;
      int m = n - 1;
      double gmean = 0.0, gymean = 0.0;
      for (int c = 0; c < n; ++c)
        if (c != r) {
          gmean += g(r, c);
          gymean += g(r, c) * y(r, c);
        }
      gmean /= m;
      gymean /= m;
      for (int c = 0; c < n; ++c)
        if (c != r) ga(r, c) += inv_sigma[r] * (g(r, c) - gmean - y(r, c) * gymean);
    }
  });
}

}  // namespace celltop
