#pragma once

#include <vector>

#include "polarfront/tape.hpp"
#include "polarfront/tensor.hpp"

namespace polarfront {

// Raw single-sample kernels. Cross-correlation, stride 1, symmetric zero
// padding. Inner accumulation runs over (in-channel, kernel row, kernel col)
// in ascending row-major order for every output element; that order is part
// of the contract and is what makes results reproducible bit for bit.
Tensor conv2d_fwd(const Tensor& x, const Tensor& w, int ph, int pw);
Tensor conv2d_grad_x(const Tensor& gy, const Tensor& w, int ph, int pw, int H, int W);
void conv2d_grad_w_accum(const Tensor& gy, const Tensor& x, int ph, int pw, Tensor& gw);

// Tape ops. conv2d and maxpool2 accept [C,H,W] or [B,C,H,W]; affine accepts
// [D] or [B,D]; softmax_cross_entropy reduces a batch to its mean loss.
Var conv2d(Tape& t, Var x, Var w, int pad);
Var conv2d(Tape& t, Var x, Var w, int ph, int pw);
Var maxpool2(Tape& t, Var x);
Var relu(Tape& t, Var x);
Var channel_bias_add(Tape& t, Var x, Var b);
Var affine(Tape& t, Var x, Var w, Var b);
Var softmax_cross_entropy(Tape& t, Var logits, const std::vector<int>& labels);
Var reshape(Tape& t, Var x, const std::vector<int>& shape);
Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var x, double s);
Var vsum(Tape& t, Var x);
Var vdot(Tape& t, Var a, Var b);

// Forward-only helpers shared with attack/eval code.
Tensor softmax_ce_per_sample(const Tensor& logits, const std::vector<int>& labels);
std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace polarfront
