#pragma once

namespace polarfront {

/// C[m][n] (+)= sum_k A[m][k] * B[k][n]; all matrices row-major contiguous.
///
/// Every C element's k-sum is formed from zero over ascending k only, one
/// fused multiply-add per step, then stored (or added once to the existing
/// C value when accumulate is set). Equivalent reference:
///   acc = 0; for k: acc = fma(a(i,k), b(k,j), acc); c(i,j) (+)= acc;
/// The result is therefore identical to the textbook triple loop bit for
/// bit, regardless of blocking or thread count. This is the one dense
/// kernel behind conv2d and the fully connected layers.
void gemm_kseq(const double* A, const double* B, double* C, int M, int K, int N,
               bool accumulate);

/// dst[c][r] = src[r][c]; dst must not alias src.
void transpose(const double* src, double* dst, int rows, int cols);

}  // namespace polarfront
