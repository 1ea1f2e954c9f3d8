#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "shuffleguard/graph.hpp"
#include "shuffleguard/tensor.hpp"

namespace shuffleguard {

namespace detail {

inline void check_arg(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Gathers receptive fields of one NHWC image into rows of `cols`,
// row (oh*OW+ow), column ((kh*KW+kw)*C+c). Out-of-range taps read zero.
template <typename S>
void im2col(const S* img, int h, int w, int c, int kh, int kw, int stride, int pad,
            int oh, int ow, MatrixRM<S>& cols) {
  for (int r = 0; r < oh; ++r) {
    for (int s = 0; s < ow; ++s) {
      S* row = cols.row(static_cast<int64_t>(r) * ow + s).data();
      int k = 0;
      for (int i = 0; i < kh; ++i) {
        const int ih = r * stride + i - pad;
        for (int j = 0; j < kw; ++j, k += c) {
          const int iw = s * stride + j - pad;
          if (ih >= 0 && ih < h && iw >= 0 && iw < w) {
            const S* src = img + (static_cast<int64_t>(ih) * w + iw) * c;
            std::copy(src, src + c, row + k);
          } else {
            std::fill(row + k, row + k + c, S(0));
          }
        }
      }
    }
  }
}

// Scatter-add transpose of im2col.
template <typename S>
void col2im_add(const MatrixRM<S>& cols, int h, int w, int c, int kh, int kw, int stride,
                int pad, int oh, int ow, S* img_grad) {
  for (int r = 0; r < oh; ++r) {
    for (int s = 0; s < ow; ++s) {
      const S* row = cols.row(static_cast<int64_t>(r) * ow + s).data();
      int k = 0;
      for (int i = 0; i < kh; ++i) {
        const int ih = r * stride + i - pad;
        for (int j = 0; j < kw; ++j, k += c) {
          const int iw = s * stride + j - pad;
          if (ih >= 0 && ih < h && iw >= 0 && iw < w) {
            S* dst = img_grad + (static_cast<int64_t>(ih) * w + iw) * c;
            for (int ch = 0; ch < c; ++ch) dst[ch] += row[k + ch];
          }
        }
      }
    }
  }
}

}  // namespace detail

template <typename S>
Var<S> relu(Var<S> x) {
  Tensor<S> out(x.value().shape);
  out.flat() = x.value().flat().max(S(0));
  GraphNode<S>* xn = x.node;
  Var<S> result = x.graph->emplace(std::move(out), xn->requires_grad, {});
  if (GraphNode<S>* on = result.node; on->requires_grad) {
    on->backward = [xn, on] {
      // Subgradient 0 at the kink, matching the sign(0)=0 convention.
      xn->grad.flat() += (xn->value.flat() > S(0)).template cast<S>() * on->grad.flat();
    };
  }
  return result;
}

template <typename S>
Var<S> add(Var<S> a, Var<S> b) {
  detail::check_arg(a.value().shape == b.value().shape,
                    "add: shape mismatch " + shape_string(a.value().shape) + " vs " +
                        shape_string(b.value().shape));
  Tensor<S> out(a.value().shape);
  out.flat() = a.value().flat() + b.value().flat();
  GraphNode<S>* an = a.node;
  GraphNode<S>* bn = b.node;
  Var<S> result = a.graph->emplace(std::move(out), an->requires_grad || bn->requires_grad, {});
  if (GraphNode<S>* on = result.node; on->requires_grad) {
    on->backward = [an, bn, on] {
      if (an->requires_grad) an->grad.flat() += on->grad.flat();
      if (bn->requires_grad) bn->grad.flat() += on->grad.flat();
    };
  }
  return result;
}

template <typename S>
Var<S> mul(Var<S> a, Var<S> b) {
  detail::check_arg(a.value().shape == b.value().shape,
                    "mul: shape mismatch " + shape_string(a.value().shape) + " vs " +
                        shape_string(b.value().shape));
  Tensor<S> out(a.value().shape);
  out.flat() = a.value().flat() * b.value().flat();
  GraphNode<S>* an = a.node;
  GraphNode<S>* bn = b.node;
  Var<S> result = a.graph->emplace(std::move(out), an->requires_grad || bn->requires_grad, {});
  if (GraphNode<S>* on = result.node; on->requires_grad) {
    on->backward = [an, bn, on] {
      if (an->requires_grad) an->grad.flat() += bn->value.flat() * on->grad.flat();
      if (bn->requires_grad) bn->grad.flat() += an->value.flat() * on->grad.flat();
    };
  }
  return result;
}

template <typename S>
Var<S> reduce_sum(Var<S> x) {
  GraphNode<S>* xn = x.node;
  // fixed-order accumulation: Eigen's vectorized redux groups terms by the
  // buffer's heap alignment, which would make results vary run to run
  double acc = 0.0;
  for (const S v : x.value().data) acc += static_cast<double>(v);
  Var<S> result = x.graph->emplace(Tensor<S>::scalar(static_cast<S>(acc)), xn->requires_grad, {});
  if (GraphNode<S>* on = result.node; on->requires_grad) {
    on->backward = [xn, on] { xn->grad.flat() += on->grad.data[0]; };
  }
  return result;
}

// x: [N,D], w: [D,F], b: [F] -> [N,F]
template <typename S>
Var<S> dense(Var<S> x, Var<S> w, Var<S> b) {
  detail::check_arg(x.value().rank() == 2 && w.value().rank() == 2 && b.value().rank() == 1,
                    "dense expects ranks 2,2,1, got " + shape_string(x.value().shape) + " " +
                        shape_string(w.value().shape) + " " + shape_string(b.value().shape));
  const int64_t n = x.value().dim(0);
  const int64_t d = x.value().dim(1);
  const int64_t f = w.value().dim(1);
  detail::check_arg(w.value().dim(0) == d && b.value().dim(0) == f,
                    "dense: shape mismatch " + shape_string(x.value().shape) + " x " +
                        shape_string(w.value().shape) + " + " + shape_string(b.value().shape));
  Tensor<S> out({n, f});
  out.matrix(n, f).noalias() = x.value().matrix(n, d) * w.value().matrix(d, f);
  out.matrix(n, f).rowwise() += b.value().matrix(1, f).row(0);
  GraphNode<S>* xn = x.node;
  GraphNode<S>* wn = w.node;
  GraphNode<S>* bnode = b.node;
  const bool req = xn->requires_grad || wn->requires_grad || bnode->requires_grad;
  Var<S> result = x.graph->emplace(std::move(out), req, {});
  if (GraphNode<S>* on = result.node; on->requires_grad) {
    on->backward = [xn, wn, bnode, on, n, d, f] {
      auto dy = on->grad.matrix(n, f);
      if (xn->requires_grad) {
        xn->grad.matrix(n, d).noalias() += dy * wn->value.matrix(d, f).transpose();
      }
      if (wn->requires_grad) {
        wn->grad.matrix(d, f).noalias() += xn->value.matrix(n, d).transpose() * dy;
      }
      if (bnode->requires_grad) {
        for (int64_t j = 0; j < f; ++j) {  // fixed-order column sums
          double acc = 0.0;
          for (int64_t i = 0; i < n; ++i) acc += static_cast<double>(dy(i, j));
          bnode->grad.data[static_cast<std::size_t>(j)] += static_cast<S>(acc);
        }
      }
    };
  }
  return result;
}

// x: [N,H,W,Cin], w: [KH,KW,Cin,Cout] -> [N,OH,OW,Cout], zero padding.
template <typename S>
Var<S> conv2d(Var<S> x, Var<S> w, int stride = 1, int pad = 0) {
  const Tensor<S>& xv = x.value();
  const Tensor<S>& wv = w.value();
  detail::check_arg(xv.rank() == 4 && wv.rank() == 4,
                    "conv2d expects rank-4 input and weights, got " + shape_string(xv.shape) +
                        " and " + shape_string(wv.shape));
  const int n = static_cast<int>(xv.dim(0));
  const int h = static_cast<int>(xv.dim(1));
  const int wd = static_cast<int>(xv.dim(2));
  const int cin = static_cast<int>(xv.dim(3));
  const int kh = static_cast<int>(wv.dim(0));
  const int kw = static_cast<int>(wv.dim(1));
  const int cout = static_cast<int>(wv.dim(3));
  detail::check_arg(wv.dim(2) == cin, "conv2d: input channels " + shape_string(xv.shape) +
                                          " do not match weights " + shape_string(wv.shape));
  detail::check_arg(stride >= 1 && pad >= 0, "conv2d: stride must be >= 1 and pad >= 0");
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (wd + 2 * pad - kw) / stride + 1;
  detail::check_arg(h + 2 * pad >= kh && wd + 2 * pad >= kw && oh >= 1 && ow >= 1,
                    "conv2d: kernel " + shape_string(wv.shape) + " does not fit input " +
                        shape_string(xv.shape) + " with pad " + std::to_string(pad));

  const int64_t patch = static_cast<int64_t>(kh) * kw * cin;
  const int64_t rows = static_cast<int64_t>(oh) * ow;
  Tensor<S> out({n, oh, ow, cout});
  {
    MatrixRM<S> cols(rows, patch);
    auto wm = wv.matrix(patch, cout);
    for (int i = 0; i < n; ++i) {
      detail::im2col(xv.data.data() + static_cast<int64_t>(i) * h * wd * cin, h, wd, cin, kh, kw,
                     stride, pad, oh, ow, cols);
      Eigen::Map<MatrixRM<S>> ym(out.data.data() + static_cast<int64_t>(i) * rows * cout, rows,
                                 cout);
      ym.noalias() = cols * wm;
    }
  }

  GraphNode<S>* xn = x.node;
  GraphNode<S>* wn = w.node;
  Var<S> result = x.graph->emplace(std::move(out), xn->requires_grad || wn->requires_grad, {});
  if (GraphNode<S>* on = result.node; on->requires_grad) {
    on->backward = [xn, wn, on, n, h, wd, cin, kh, kw, cout, stride, pad, oh, ow, rows, patch] {
      // im2col is recomputed per image rather than cached: caching it for every
      // conv node would dominate peak memory at training batch sizes.
      MatrixRM<S> cols(rows, patch);
      MatrixRM<S> dcols(rows, patch);
      auto wm = wn->value.matrix(patch, cout);
      for (int i = 0; i < n; ++i) {
        Eigen::Map<const MatrixRM<S>> dy(on->grad.data.data() + static_cast<int64_t>(i) * rows * cout,
                                         rows, cout);
        if (wn->requires_grad || xn->requires_grad) {
          detail::im2col(xn->value.data.data() + static_cast<int64_t>(i) * h * wd * cin, h, wd, cin,
                         kh, kw, stride, pad, oh, ow, cols);
        }
        if (wn->requires_grad) {
          wn->grad.matrix(patch, cout).noalias() += cols.transpose() * dy;
        }
        if (xn->requires_grad) {
          dcols.noalias() = dy * wm.transpose();
          detail::col2im_add(dcols, h, wd, cin, kh, kw, stride, pad, oh, ow,
                             xn->grad.data.data() + static_cast<int64_t>(i) * h * wd * cin);
        }
      }
    };
  }
  return result;
}

// x: [N,H,W,C] -> [N,C]
template <typename S>
Var<S> global_avg_pool(Var<S> x) {
  const Tensor<S>& xv = x.value();
  detail::check_arg(xv.rank() == 4,
                    "global_avg_pool expects rank-4 input, got " + shape_string(xv.shape));
  const int64_t n = xv.dim(0);
  const int64_t hw = xv.dim(1) * xv.dim(2);
  const int64_t c = xv.dim(3);
  detail::check_arg(hw > 0, "global_avg_pool: empty spatial extent " + shape_string(xv.shape));
  Tensor<S> out({n, c});
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t ch = 0; ch < c; ++ch) {  // fixed-order spatial means
      double acc = 0.0;
      for (int64_t p = 0; p < hw; ++p)
        acc += static_cast<double>(xv.data[static_cast<std::size_t>((i * hw + p) * c + ch)]);
      out.data[static_cast<std::size_t>(i * c + ch)] =
          static_cast<S>(acc / static_cast<double>(hw));
    }
  }
  GraphNode<S>* xn = x.node;
  Var<S> result = x.graph->emplace(std::move(out), xn->requires_grad, {});
  if (GraphNode<S>* on = result.node; on->requires_grad) {
    on->backward = [xn, on, n, hw, c] {
      const S inv = S(1) / static_cast<S>(hw);
      for (int64_t i = 0; i < n; ++i) {
        Eigen::Map<MatrixRM<S>> dplane(xn->grad.data.data() + i * hw * c, hw, c);
        dplane.rowwise() += on->grad.matrix(n, c).row(i) * inv;
      }
    };
  }
  return result;
}

template <typename S>
struct BatchNormStats {
  Tensor<S> running_mean;  // [C]
  Tensor<S> running_var;   // [C], unbiased

  explicit BatchNormStats(int64_t channels = 0)
      : running_mean({channels}), running_var(Tensor<S>::full({channels}, S(1))) {}
};

// x: [N,H,W,C]; gamma, beta: [C]. Training mode normalizes with biased batch
// variance and updates running stats with the unbiased one; eval mode is a
// per-channel affine map using the running stats.
template <typename S>
Var<S> batch_norm(Var<S> x, Var<S> gamma, Var<S> beta, BatchNormStats<S>& stats, bool training,
                  S momentum = S(0.1), S eps = S(1e-5)) {
  const Tensor<S>& xv = x.value();
  detail::check_arg(xv.rank() == 4, "batch_norm expects rank-4 input, got " + shape_string(xv.shape));
  const int64_t c = xv.dim(3);
  detail::check_arg(gamma.value().shape == std::vector<int64_t>{c} &&
                        beta.value().shape == std::vector<int64_t>{c} &&
                        stats.running_mean.shape == std::vector<int64_t>{c} &&
                        stats.running_var.shape == std::vector<int64_t>{c},
                    "batch_norm: per-channel parameters do not match input " +
                        shape_string(xv.shape));
  const int64_t rows = xv.dim(0) * xv.dim(1) * xv.dim(2);
  auto xm = xv.matrix(rows, c);

  std::vector<S> mean(static_cast<std::size_t>(c)), inv_std(static_cast<std::size_t>(c));
  if (training) {
    detail::check_arg(rows > 1, "batch_norm training needs more than one value per channel, got " +
                                    shape_string(xv.shape));
    // Two-pass moments with double accumulators regardless of S.
    std::vector<double> sum(static_cast<std::size_t>(c), 0.0);
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t k = 0; k < c; ++k) sum[static_cast<std::size_t>(k)] += xm(r, k);
    for (int64_t k = 0; k < c; ++k)
      mean[static_cast<std::size_t>(k)] = static_cast<S>(sum[static_cast<std::size_t>(k)] / rows);
    std::vector<double> sq(static_cast<std::size_t>(c), 0.0);
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t k = 0; k < c; ++k) {
        const double d = xm(r, k) - mean[static_cast<std::size_t>(k)];
        sq[static_cast<std::size_t>(k)] += d * d;
      }
    for (int64_t k = 0; k < c; ++k) {
      const double biased = sq[static_cast<std::size_t>(k)] / rows;
      inv_std[static_cast<std::size_t>(k)] = static_cast<S>(1.0 / std::sqrt(biased + eps));
      const double unbiased = sq[static_cast<std::size_t>(k)] / (rows - 1);
      stats.running_mean.data[static_cast<std::size_t>(k)] =
          (S(1) - momentum) * stats.running_mean.data[static_cast<std::size_t>(k)] +
          momentum * mean[static_cast<std::size_t>(k)];
      stats.running_var.data[static_cast<std::size_t>(k)] =
          (S(1) - momentum) * stats.running_var.data[static_cast<std::size_t>(k)] +
          momentum * static_cast<S>(unbiased);
    }
  } else {
    for (int64_t k = 0; k < c; ++k) {
      mean[static_cast<std::size_t>(k)] = stats.running_mean.data[static_cast<std::size_t>(k)];
      inv_std[static_cast<std::size_t>(k)] = S(1) / std::sqrt(stats.running_var.data[static_cast<std::size_t>(k)] + eps);
    }
  }

  Tensor<S> out(xv.shape);
  {
    auto om = out.matrix(rows, c);
    const auto& gv = gamma.value().data;
    const auto& bv = beta.value().data;
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t k = 0; k < c; ++k) {
        const std::size_t kk = static_cast<std::size_t>(k);
        om(r, k) = gv[kk] * (xm(r, k) - mean[kk]) * inv_std[kk] + bv[kk];
      }
  }

  GraphNode<S>* xn = x.node;
  GraphNode<S>* gn = gamma.node;
  GraphNode<S>* bn = beta.node;
  const bool req = xn->requires_grad || gn->requires_grad || bn->requires_grad;
  Var<S> result = x.graph->emplace(std::move(out), req, {});
  if (GraphNode<S>* on = result.node; on->requires_grad) {
    on->backward = [xn, gn, bn, on, rows, c, training, mean = std::move(mean),
                    inv_std = std::move(inv_std)] {
      auto xm2 = xn->value.matrix(rows, c);
      auto dy = on->grad.matrix(rows, c);
      std::vector<double> sum_dy(static_cast<std::size_t>(c), 0.0);
      std::vector<double> sum_dy_xhat(static_cast<std::size_t>(c), 0.0);
      for (int64_t r = 0; r < rows; ++r)
        for (int64_t k = 0; k < c; ++k) {
          const std::size_t kk = static_cast<std::size_t>(k);
          const double xhat = (xm2(r, k) - mean[kk]) * inv_std[kk];
          sum_dy[kk] += dy(r, k);
          sum_dy_xhat[kk] += dy(r, k) * xhat;
        }
      if (gn->requires_grad)
        for (int64_t k = 0; k < c; ++k)
          gn->grad.data[static_cast<std::size_t>(k)] += static_cast<S>(sum_dy_xhat[static_cast<std::size_t>(k)]);
      if (bn->requires_grad)
        for (int64_t k = 0; k < c; ++k)
          bn->grad.data[static_cast<std::size_t>(k)] += static_cast<S>(sum_dy[static_cast<std::size_t>(k)]);
      if (!xn->requires_grad) return;
      auto dx = xn->grad.matrix(rows, c);
      const auto& gv = gn->value.data;
      if (training) {
        const double m = static_cast<double>(rows);
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t k = 0; k < c; ++k) {
            const std::size_t kk = static_cast<std::size_t>(k);
            const double xhat = (xm2(r, k) - mean[kk]) * inv_std[kk];
            dx(r, k) += static_cast<S>(static_cast<double>(gv[kk]) * inv_std[kk] / m *
                                       (m * dy(r, k) - sum_dy[kk] - xhat * sum_dy_xhat[kk]));
          }
      } else {
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t k = 0; k < c; ++k) {
            const std::size_t kk = static_cast<std::size_t>(k);
            dx(r, k) += gv[kk] * inv_std[kk] * dy(r, k);
          }
      }
    };
  }
  return result;
}

enum class Reduction { kMean, kSum };

// logits: [N,K]; labels in [0,K). Returns a scalar loss.
template <typename S>
Var<S> softmax_cross_entropy(Var<S> logits, const std::vector<int>& labels,
                             Reduction reduction = Reduction::kMean) {
  const Tensor<S>& zv = logits.value();
  detail::check_arg(zv.rank() == 2, "softmax_cross_entropy expects rank-2 logits, got " +
                                        shape_string(zv.shape));
  const int64_t n = zv.dim(0);
  const int64_t k = zv.dim(1);
  detail::check_arg(static_cast<int64_t>(labels.size()) == n,
                    "softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                        shape_string(zv.shape) + " logits");
  for (int label : labels)
    detail::check_arg(label >= 0 && label < k,
                      "softmax_cross_entropy: label " + std::to_string(label) + " out of range for " +
                          std::to_string(k) + " classes");

  Tensor<S> probs({n, k});
  double total = 0.0;
  auto zm = zv.matrix(n, k);
  auto pm = probs.matrix(n, k);
  for (int64_t i = 0; i < n; ++i) {
    const S zmax = zm.row(i).maxCoeff();
    double denom = 0.0;
    for (int64_t j = 0; j < k; ++j) denom += std::exp(static_cast<double>(zm(i, j) - zmax));
    const double lse = std::log(denom) + static_cast<double>(zmax);
    for (int64_t j = 0; j < k; ++j)
      pm(i, j) = static_cast<S>(std::exp(static_cast<double>(zm(i, j)) - lse));
    total += lse - static_cast<double>(zm(i, labels[static_cast<std::size_t>(i)]));
  }
  if (reduction == Reduction::kMean) total /= static_cast<double>(n);

  GraphNode<S>* zn = logits.node;
  Var<S> result = logits.graph->emplace(Tensor<S>::scalar(static_cast<S>(total)), zn->requires_grad, {});
  if (GraphNode<S>* on = result.node; on->requires_grad) {
    on->backward = [zn, on, n, k, reduction, labels, probs = std::move(probs)] {
      S scale = on->grad.data[0];
      if (reduction == Reduction::kMean) scale /= static_cast<S>(n);
      auto dz = zn->grad.matrix(n, k);
      auto pm2 = probs.matrix(n, k);
      for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < k; ++j) {
          const S onehot = labels[static_cast<std::size_t>(i)] == j ? S(1) : S(0);
          dz(i, j) += scale * (pm2(i, j) - onehot);
        }
    };
  }
  return result;
}

}  // namespace shuffleguard
