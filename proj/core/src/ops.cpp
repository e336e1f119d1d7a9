#include "polarfront/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "polarfront/errors.hpp"
#include "polarfront/gemm.hpp"

namespace polarfront {

namespace {

struct ConvDims {
  int C, H, W, Co, kh, kw, Ho, Wo;
  int K() const { return C * kh * kw; }
  int P() const { return Ho * Wo; }
};

ConvDims conv_dims(const std::vector<int>& xs, const std::vector<int>& ws, int ph, int pw) {
  ConvDims d{};
  d.C = xs[0];
  d.H = xs[1];
  d.W = xs[2];
  d.Co = ws[0];
  d.kh = ws[2];
  d.kw = ws[3];
  if (ws[1] != d.C)
    throw DimensionError("conv2d channel mismatch: input " + shape_to_string(xs) +
                         " vs kernels " + shape_to_string(ws));
  if (ph < 0 || pw < 0) throw ArgumentError("conv2d padding must be non-negative");
  d.Ho = d.H + 2 * ph - d.kh + 1;
  d.Wo = d.W + 2 * pw - d.kw + 1;
  if (d.Ho < 1 || d.Wo < 1)
    throw DimensionError("conv2d kernel exceeds padded input: input " +
                         shape_to_string(xs) + " vs kernels " + shape_to_string(ws) +
                         " with padding " + std::to_string(ph) + "," + std::to_string(pw));
  return d;
}

// col[k][p] with k = (ci, ki, kj) row-major and p = (oh, ow) row-major.
void im2col_kmajor(const double* x, const ConvDims& d, int ph, int pw, double* col) {
  const int P = d.P();
  int k = 0;
  for (int ci = 0; ci < d.C; ++ci) {
    const double* xc = x + static_cast<long>(ci) * d.H * d.W;
    for (int ki = 0; ki < d.kh; ++ki)
      for (int kj = 0; kj < d.kw; ++kj, ++k) {
        double* dst = col + static_cast<long>(k) * P;
        for (int oh = 0; oh < d.Ho; ++oh) {
          const int ih = oh - ph + ki;
          double* row = dst + static_cast<long>(oh) * d.Wo;
          if (ih < 0 || ih >= d.H) {
            std::fill(row, row + d.Wo, 0.0);
            continue;
          }
          const double* xr = xc + static_cast<long>(ih) * d.W;
          for (int ow = 0; ow < d.Wo; ++ow) {
            const int iw = ow - pw + kj;
            row[ow] = (iw >= 0 && iw < d.W) ? xr[iw] : 0.0;
          }
        }
      }
  }
}

// col_o[p][k], the transpose layout, used when accumulating kernel gradients.
void im2col_omajor(const double* x, const ConvDims& d, int ph, int pw, double* col) {
  const int K = d.K();
  for (int oh = 0; oh < d.Ho; ++oh)
    for (int ow = 0; ow < d.Wo; ++ow) {
      double* dst = col + (static_cast<long>(oh) * d.Wo + ow) * K;
      int k = 0;
      for (int ci = 0; ci < d.C; ++ci) {
        const double* xc = x + static_cast<long>(ci) * d.H * d.W;
        for (int ki = 0; ki < d.kh; ++ki) {
          const int ih = oh - ph + ki;
          for (int kj = 0; kj < d.kw; ++kj, ++k) {
            const int iw = ow - pw + kj;
            dst[k] = (ih >= 0 && ih < d.H && iw >= 0 && iw < d.W)
                         ? xc[static_cast<long>(ih) * d.W + iw]
                         : 0.0;
          }
        }
      }
    }
}

void conv_fwd_raw(const double* x, const double* w, double* y, const ConvDims& d, int ph,
                  int pw, std::vector<double>& col) {
  col.resize(static_cast<size_t>(d.K()) * d.P());
  im2col_kmajor(x, d, ph, pw, col.data());
  gemm_kseq(w, col.data(), y, d.Co, d.K(), d.P(), false);
}

// gx += full gradient w.r.t. the input sample.
void conv_grad_x_raw(const double* gy, const double* wt, double* gx, const ConvDims& d,
                     int ph, int pw, std::vector<double>& gcols) {
  const int K = d.K(), P = d.P();
  gcols.resize(static_cast<size_t>(K) * P);
  gemm_kseq(wt, gy, gcols.data(), K, d.Co, P, false);
  int k = 0;
  for (int ci = 0; ci < d.C; ++ci) {
    double* gc = gx + static_cast<long>(ci) * d.H * d.W;
    for (int ki = 0; ki < d.kh; ++ki)
      for (int kj = 0; kj < d.kw; ++kj, ++k) {
        const double* src = gcols.data() + static_cast<long>(k) * P;
        for (int oh = 0; oh < d.Ho; ++oh) {
          const int ih = oh - ph + ki;
          if (ih < 0 || ih >= d.H) continue;
          double* gr = gc + static_cast<long>(ih) * d.W;
          const double* sr = src + static_cast<long>(oh) * d.Wo;
          for (int ow = 0; ow < d.Wo; ++ow) {
            const int iw = ow - pw + kj;
            if (iw >= 0 && iw < d.W) gr[iw] += sr[ow];
          }
        }
      }
  }
}

void conv_grad_w_raw(const double* gy, const double* x, double* gw, const ConvDims& d,
                     int ph, int pw, std::vector<double>& col) {
  col.resize(static_cast<size_t>(d.P()) * d.K());
  im2col_omajor(x, d, ph, pw, col.data());
  gemm_kseq(gy, col.data(), gw, d.Co, d.P(), d.K(), true);
}

void check_rank_3_or_4(const Tensor& x, const char* op) {
  if (x.rank() != 3 && x.rank() != 4)
    throw DimensionError(std::string(op) + " expects rank 3 or 4 input, got shape " +
                         x.shape_str());
}

}  // namespace

Tensor conv2d_fwd(const Tensor& x, const Tensor& w, int ph, int pw) {
  if (x.rank() != 3 || w.rank() != 4)
    throw DimensionError("conv2d_fwd expects [C,H,W] and [Co,C,kh,kw], got " +
                         x.shape_str() + " and " + w.shape_str());
  const ConvDims d = conv_dims(x.shape(), w.shape(), ph, pw);
  Tensor y({d.Co, d.Ho, d.Wo});
  std::vector<double> col;
  conv_fwd_raw(x.data(), w.data(), y.data(), d, ph, pw, col);
  return y;
}

Tensor conv2d_grad_x(const Tensor& gy, const Tensor& w, int ph, int pw, int H, int W) {
  if (gy.rank() != 3 || w.rank() != 4)
    throw DimensionError("conv2d_grad_x expects [Co,Ho,Wo] and [Co,C,kh,kw], got " +
                         gy.shape_str() + " and " + w.shape_str());
  const ConvDims d = conv_dims({w.dim(1), H, W}, w.shape(), ph, pw);
  if (gy.dim(0) != d.Co || gy.dim(1) != d.Ho || gy.dim(2) != d.Wo)
    throw DimensionError("conv2d_grad_x upstream shape " + gy.shape_str() +
                         " does not match expected " +
                         shape_to_string({d.Co, d.Ho, d.Wo}));
  std::vector<double> wt(static_cast<size_t>(d.K()) * d.Co), gcols;
  transpose(w.data(), wt.data(), d.Co, d.K());
  Tensor gx = Tensor::zeros({d.C, H, W});
  conv_grad_x_raw(gy.data(), wt.data(), gx.data(), d, ph, pw, gcols);
  return gx;
}

void conv2d_grad_w_accum(const Tensor& gy, const Tensor& x, int ph, int pw, Tensor& gw) {
  const ConvDims d = conv_dims(x.shape(), gw.shape(), ph, pw);
  if (gy.dim(0) != d.Co || gy.dim(1) != d.Ho || gy.dim(2) != d.Wo)
    throw DimensionError("conv2d_grad_w upstream shape " + gy.shape_str() +
                         " does not match expected " +
                         shape_to_string({d.Co, d.Ho, d.Wo}));
  std::vector<double> col;
  conv_grad_w_raw(gy.data(), x.data(), gw.data(), d, ph, pw, col);
}

Var conv2d(Tape& t, Var x, Var w, int pad) { return conv2d(t, x, w, pad, pad); }

Var conv2d(Tape& t, Var x, Var w, int ph, int pw) {
  const Tensor& xv = t.value(x);
  const Tensor& wv = t.value(w);
  check_rank_3_or_4(xv, "conv2d");
  if (wv.rank() != 4)
    throw DimensionError("conv2d kernels must be [Co,C,kh,kw], got " + wv.shape_str());
  const bool batched = xv.rank() == 4;
  const int B = batched ? xv.dim(0) : 1;
  const std::vector<int> xs = batched
                                  ? std::vector<int>{xv.dim(1), xv.dim(2), xv.dim(3)}
                                  : xv.shape();
  const ConvDims d = conv_dims(xs, wv.shape(), ph, pw);
  const long xsz = static_cast<long>(d.C) * d.H * d.W;
  const long ysz = static_cast<long>(d.Co) * d.P();

  Tensor y(batched ? std::vector<int>{B, d.Co, d.Ho, d.Wo}
                   : std::vector<int>{d.Co, d.Ho, d.Wo});
#pragma omp parallel for schedule(static)
  for (int b = 0; b < B; ++b) {
    std::vector<double> col;
    conv_fwd_raw(xv.data() + b * xsz, wv.data(), y.data() + b * ysz, d, ph, pw, col);
  }

  auto bw = [xid = x.id, wid = w.id, d, ph, pw, B, xsz, ysz](Tape& tp, int self) {
    const Tensor& gy = tp.grad_accum(self);
    if (tp.requires_grad(Var{xid})) {
      const Tensor& wv2 = tp.value(Var{wid});
      std::vector<double> wt(static_cast<size_t>(d.K()) * d.Co);
      transpose(wv2.data(), wt.data(), d.Co, d.K());
      Tensor& gx = tp.grad_accum(xid);
#pragma omp parallel for schedule(static)
      for (int b = 0; b < B; ++b) {
        std::vector<double> gcols;
        conv_grad_x_raw(gy.data() + b * ysz, wt.data(), gx.data() + b * xsz, d, ph, pw,
                        gcols);
      }
    }
    if (tp.requires_grad(Var{wid})) {
      const Tensor& xv2 = tp.value(Var{xid});
      Tensor& gw = tp.grad_accum(wid);
      std::vector<double> col;
      for (int b = 0; b < B; ++b)
        conv_grad_w_raw(gy.data() + b * ysz, xv2.data() + b * xsz, gw.data(), d, ph, pw,
                        col);
    }
  };
  return t.record("conv2d", std::move(y), {x.id, w.id}, bw);
}

Var maxpool2(Tape& t, Var x) {
  const Tensor& xv = t.value(x);
  check_rank_3_or_4(xv, "maxpool2");
  const bool batched = xv.rank() == 4;
  const int B = batched ? xv.dim(0) : 1;
  const int C = batched ? xv.dim(1) : xv.dim(0);
  const int H = batched ? xv.dim(2) : xv.dim(1);
  const int W = batched ? xv.dim(3) : xv.dim(2);
  if (H % 2 != 0 || W % 2 != 0)
    throw DimensionError("maxpool2 needs even spatial dims, got shape " + xv.shape_str());
  const int Ho = H / 2, Wo = W / 2;

  Tensor y(batched ? std::vector<int>{B, C, Ho, Wo} : std::vector<int>{C, Ho, Wo});
  std::vector<long> arg(y.size());
  const double* xd = xv.data();
  double* yd = y.data();
  long o = 0;
  for (long plane = 0; plane < static_cast<long>(B) * C; ++plane)
    for (int oh = 0; oh < Ho; ++oh)
      for (int ow = 0; ow < Wo; ++ow, ++o) {
        long best = plane * H * W + static_cast<long>(2 * oh) * W + 2 * ow;
        double bv = xd[best];
        const long cand[3] = {best + 1, best + W, best + W + 1};
        for (long c : cand)
          if (xd[c] > bv) {
            bv = xd[c];
            best = c;
          }
        yd[o] = bv;
        arg[o] = best;
      }

  auto bw = [xid = x.id, arg = std::move(arg)](Tape& tp, int self) {
    if (!tp.requires_grad(Var{xid})) return;
    const Tensor& gy = tp.grad_accum(self);
    Tensor& gx = tp.grad_accum(xid);
    for (size_t i = 0; i < arg.size(); ++i) gx.data()[arg[i]] += gy.data()[i];
  };
  return t.record("maxpool2", std::move(y), {x.id}, bw);
}

Var relu(Tape& t, Var x) {
  const Tensor& xv = t.value(x);
  Tensor y(xv.shape());
  for (long i = 0; i < xv.size(); ++i) y.data()[i] = xv.data()[i] > 0.0 ? xv.data()[i] : 0.0;
  auto bw = [xid = x.id](Tape& tp, int self) {
    if (!tp.requires_grad(Var{xid})) return;
    const Tensor& gy = tp.grad_accum(self);
    const Tensor& xv2 = tp.value(Var{xid});
    Tensor& gx = tp.grad_accum(xid);
    for (long i = 0; i < xv2.size(); ++i)
      if (xv2.data()[i] > 0.0) gx.data()[i] += gy.data()[i];
  };
  return t.record("relu", std::move(y), {x.id}, bw);
}

Var channel_bias_add(Tape& t, Var x, Var b) {
  const Tensor& xv = t.value(x);
  const Tensor& bv = t.value(b);
  check_rank_3_or_4(xv, "channel_bias_add");
  const bool batched = xv.rank() == 4;
  const int B = batched ? xv.dim(0) : 1;
  const int C = batched ? xv.dim(1) : xv.dim(0);
  if (bv.rank() != 1 || bv.dim(0) != C)
    throw DimensionError("channel_bias_add bias " + bv.shape_str() +
                         " does not match input " + xv.shape_str());
  const long per = xv.size() / (static_cast<long>(B) * C);

  Tensor y(xv.shape());
  for (long bc = 0; bc < static_cast<long>(B) * C; ++bc) {
    const double bias = bv.data()[bc % C];
    const double* src = xv.data() + bc * per;
    double* dst = y.data() + bc * per;
    for (long i = 0; i < per; ++i) dst[i] = src[i] + bias;
  }

  auto bw = [xid = x.id, bid = b.id, B, C, per](Tape& tp, int self) {
    const Tensor& gy = tp.grad_accum(self);
    if (tp.requires_grad(Var{xid})) {
      Tensor& gx = tp.grad_accum(xid);
      for (long i = 0; i < gx.size(); ++i) gx.data()[i] += gy.data()[i];
    }
    if (tp.requires_grad(Var{bid})) {
      Tensor& gb = tp.grad_accum(bid);
      for (long bc = 0; bc < static_cast<long>(B) * C; ++bc) {
        const double* src = gy.data() + bc * per;
        double s = 0.0;
        for (long i = 0; i < per; ++i) s += src[i];
        gb.data()[bc % C] += s;
      }
    }
  };
  return t.record("channel_bias_add", std::move(y), {x.id, b.id}, bw);
}

Var affine(Tape& t, Var x, Var w, Var b) {
  const Tensor& xv = t.value(x);
  const Tensor& wv = t.value(w);
  const Tensor& bv = t.value(b);
  if (xv.rank() != 1 && xv.rank() != 2)
    throw DimensionError("affine expects rank 1 or 2 input, got shape " + xv.shape_str());
  if (wv.rank() != 2 || bv.rank() != 1)
    throw DimensionError("affine expects weights [D_in,D_out] and bias [D_out], got " +
                         wv.shape_str() + " and " + bv.shape_str());
  const bool batched = xv.rank() == 2;
  const int B = batched ? xv.dim(0) : 1;
  const int Din = batched ? xv.dim(1) : xv.dim(0);
  const int Dout = wv.dim(1);
  if (wv.dim(0) != Din || bv.dim(0) != Dout)
    throw DimensionError("affine shape mismatch: input " + xv.shape_str() +
                         ", weights " + wv.shape_str() + ", bias " + bv.shape_str());

  Tensor y(batched ? std::vector<int>{B, Dout} : std::vector<int>{Dout});
  gemm_kseq(xv.data(), wv.data(), y.data(), B, Din, Dout, false);
  for (int r = 0; r < B; ++r) {
    double* row = y.data() + static_cast<long>(r) * Dout;
    for (int j = 0; j < Dout; ++j) row[j] += bv.data()[j];
  }

  auto bw = [xid = x.id, wid = w.id, bid = b.id, B, Din, Dout](Tape& tp, int self) {
    const Tensor& gy = tp.grad_accum(self);
    if (tp.requires_grad(Var{xid})) {
      const Tensor& wv2 = tp.value(Var{wid});
      std::vector<double> wt(static_cast<size_t>(Dout) * Din);
      transpose(wv2.data(), wt.data(), Din, Dout);
      gemm_kseq(gy.data(), wt.data(), tp.grad_accum(xid).data(), B, Dout, Din, true);
    }
    if (tp.requires_grad(Var{wid})) {
      const Tensor& xv2 = tp.value(Var{xid});
      std::vector<double> xt(static_cast<size_t>(Din) * B);
      transpose(xv2.data(), xt.data(), B, Din);
      gemm_kseq(xt.data(), gy.data(), tp.grad_accum(wid).data(), Din, B, Dout, true);
    }
    if (tp.requires_grad(Var{bid})) {
      Tensor& gb = tp.grad_accum(bid);
      for (int r = 0; r < B; ++r) {
        const double* row = gy.data() + static_cast<long>(r) * Dout;
        for (int j = 0; j < Dout; ++j) gb.data()[j] += row[j];
      }
    }
  };
  return t.record("affine", std::move(y), {x.id, w.id, b.id}, bw);
}

Var softmax_cross_entropy(Tape& t, Var logits, const std::vector<int>& labels) {
  const Tensor& lv = t.value(logits);
  if (lv.rank() != 1 && lv.rank() != 2)
    throw DimensionError("softmax_cross_entropy expects rank 1 or 2 logits, got shape " +
                         lv.shape_str());
  const bool batched = lv.rank() == 2;
  const int B = batched ? lv.dim(0) : 1;
  const int M = batched ? lv.dim(1) : lv.dim(0);
  if (static_cast<int>(labels.size()) != B)
    throw DimensionError("softmax_cross_entropy got " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(B) + " rows");
  for (int lab : labels)
    if (lab < 0 || lab >= M)
      throw IndexError("label " + std::to_string(lab) + " out of range [0, " +
                       std::to_string(M) + ")");

  Tensor probs({B, M});
  double total = 0.0;
  for (int r = 0; r < B; ++r) {
    const double* row = lv.data() + static_cast<long>(r) * M;
    double* prow = probs.data() + static_cast<long>(r) * M;
    double mx = row[0];
    for (int j = 1; j < M; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (int j = 0; j < M; ++j) {
      prow[j] = std::exp(row[j] - mx);
      z += prow[j];
    }
    for (int j = 0; j < M; ++j) prow[j] /= z;
    total += std::log(z) + mx - row[labels[static_cast<size_t>(r)]];
  }
  Tensor loss = Tensor::scalar(total / B);

  auto bw = [lid = logits.id, labels, probs = std::move(probs), B, M](Tape& tp, int self) {
    if (!tp.requires_grad(Var{lid})) return;
    const double g = tp.grad_accum(self).data()[0] / B;
    Tensor& gl = tp.grad_accum(lid);
    for (int r = 0; r < B; ++r) {
      const double* prow = probs.data() + static_cast<long>(r) * M;
      double* grow = gl.data() + static_cast<long>(r) * M;
      const int lab = labels[static_cast<size_t>(r)];
      for (int j = 0; j < M; ++j) grow[j] += g * (prow[j] - (j == lab ? 1.0 : 0.0));
    }
  };
  return t.record("softmax_cross_entropy", std::move(loss), {logits.id}, bw);
}

Var reshape(Tape& t, Var x, const std::vector<int>& shape) {
  const Tensor& xv = t.value(x);
  if (shape_numel(shape) != xv.size())
    throw DimensionError("reshape from " + xv.shape_str() + " to " +
                         shape_to_string(shape) + " changes element count");
  Tensor y(shape, std::vector<double>(xv.data(), xv.data() + xv.size()));
  auto bw = [xid = x.id](Tape& tp, int self) {
    if (!tp.requires_grad(Var{xid})) return;
    const Tensor& gy = tp.grad_accum(self);
    Tensor& gx = tp.grad_accum(xid);
    for (long i = 0; i < gx.size(); ++i) gx.data()[i] += gy.data()[i];
  };
  return t.record("reshape", std::move(y), {x.id}, bw);
}

Var add(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_same_shape(av, bv, "add");
  Tensor y(av.shape());
  for (long i = 0; i < av.size(); ++i) y.data()[i] = av.data()[i] + bv.data()[i];
  auto bw = [aid = a.id, bid = b.id](Tape& tp, int self) {
    const Tensor& gy = tp.grad_accum(self);
    for (int id : {aid, bid}) {
      if (!tp.requires_grad(Var{id})) continue;
      Tensor& g = tp.grad_accum(id);
      for (long i = 0; i < g.size(); ++i) g.data()[i] += gy.data()[i];
    }
  };
  return t.record("add", std::move(y), {a.id, b.id}, bw);
}

Var scale(Tape& t, Var x, double s) {
  const Tensor& xv = t.value(x);
  Tensor y(xv.shape());
  for (long i = 0; i < xv.size(); ++i) y.data()[i] = s * xv.data()[i];
  auto bw = [xid = x.id, s](Tape& tp, int self) {
    if (!tp.requires_grad(Var{xid})) return;
    const Tensor& gy = tp.grad_accum(self);
    Tensor& gx = tp.grad_accum(xid);
    for (long i = 0; i < gx.size(); ++i) gx.data()[i] += s * gy.data()[i];
  };
  return t.record("scale", std::move(y), {x.id}, bw);
}

Var vsum(Tape& t, Var x) {
  const Tensor& xv = t.value(x);
  double total = 0.0;
  for (long i = 0; i < xv.size(); ++i) total += xv.data()[i];
  auto bw = [xid = x.id](Tape& tp, int self) {
    if (!tp.requires_grad(Var{xid})) return;
    const double g = tp.grad_accum(self).data()[0];
    Tensor& gx = tp.grad_accum(xid);
    for (long i = 0; i < gx.size(); ++i) gx.data()[i] += g;
  };
  return t.record("vsum", Tensor::scalar(total), {x.id}, bw);
}

Var vdot(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_same_shape(av, bv, "vdot");
  double total = 0.0;
  for (long i = 0; i < av.size(); ++i) total += av.data()[i] * bv.data()[i];
  auto bw = [aid = a.id, bid = b.id](Tape& tp, int self) {
    const double g = tp.grad_accum(self).data()[0];
    const Tensor& av2 = tp.value(Var{aid});
    const Tensor& bv2 = tp.value(Var{bid});
    if (tp.requires_grad(Var{aid})) {
      Tensor& ga = tp.grad_accum(aid);
      for (long i = 0; i < ga.size(); ++i) ga.data()[i] += g * bv2.data()[i];
    }
    if (tp.requires_grad(Var{bid})) {
      Tensor& gb = tp.grad_accum(bid);
      for (long i = 0; i < gb.size(); ++i) gb.data()[i] += g * av2.data()[i];
    }
  };
  return t.record("vdot", Tensor::scalar(total), {a.id, b.id}, bw);
}

Tensor softmax_ce_per_sample(const Tensor& logits, const std::vector<int>& labels) {
  if (logits.rank() != 2)
    throw DimensionError("softmax_ce_per_sample expects [B,M] logits, got shape " +
                         logits.shape_str());
  const int B = logits.dim(0), M = logits.dim(1);
  if (static_cast<int>(labels.size()) != B)
    throw DimensionError("softmax_ce_per_sample got " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(B) + " rows");
  Tensor out({B});
  for (int r = 0; r < B; ++r) {
    const int lab = labels[static_cast<size_t>(r)];
    if (lab < 0 || lab >= M)
      throw IndexError("label " + std::to_string(lab) + " out of range [0, " +
                       std::to_string(M) + ")");
    const double* row = logits.data() + static_cast<long>(r) * M;
    double mx = row[0];
    for (int j = 1; j < M; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (int j = 0; j < M; ++j) z += std::exp(row[j] - mx);
    out.data()[r] = std::log(z) + mx - row[lab];
  }
  return out;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  if (logits.rank() != 2)
    throw DimensionError("argmax_rows expects [B,M], got shape " + logits.shape_str());
  const int B = logits.dim(0), M = logits.dim(1);
  std::vector<int> out(static_cast<size_t>(B));
  for (int r = 0; r < B; ++r) {
    const double* row = logits.data() + static_cast<long>(r) * M;
    int best = 0;
    for (int j = 1; j < M; ++j)
      if (row[j] > row[best]) best = j;
    out[static_cast<size_t>(r)] = best;
  }
  return out;
}

}  // namespace polarfront
