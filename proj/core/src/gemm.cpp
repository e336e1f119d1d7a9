#include "polarfront/gemm.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace polarfront {

namespace {

constexpr int kMr = 4;   // A rows per microkernel tile
constexpr int kNr = 16;  // C columns per panel

// MR x 16 register tile. k is the only loop-carried dependency and runs in
// ascending order for every accumulator, each step an explicit fused
// multiply-add, so results match an fma triple loop bit for bit no matter
// how tiles are scheduled or what the compiler's contraction default is.
// Named accumulator arrays in a single flat j loop keep GCC from spilling
// them.
template <int MR>
inline void micro_full(const double* __restrict A, long lda, const double* __restrict B,
                       long ldb, double* __restrict C, long ldc, int K, bool accumulate) {
  double acc0[kNr]{}, acc1[kNr]{}, acc2[kNr]{}, acc3[kNr]{};
  for (int k = 0; k < K; ++k) {
    const double* __restrict b = B + k * ldb;
    const double va0 = A[k];
    const double va1 = MR > 1 ? A[lda + k] : 0.0;
    const double va2 = MR > 2 ? A[2 * lda + k] : 0.0;
    const double va3 = MR > 3 ? A[3 * lda + k] : 0.0;
    for (int j = 0; j < kNr; ++j) {
      const double vb = b[j];
      acc0[j] = std::fma(va0, vb, acc0[j]);
      if constexpr (MR > 1) acc1[j] = std::fma(va1, vb, acc1[j]);
      if constexpr (MR > 2) acc2[j] = std::fma(va2, vb, acc2[j]);
      if constexpr (MR > 3) acc3[j] = std::fma(va3, vb, acc3[j]);
    }
  }
  const double* accs[kMr] = {acc0, acc1, acc2, acc3};
  for (int i = 0; i < MR; ++i) {
    double* c = C + i * ldc;
    if (accumulate)
      for (int j = 0; j < kNr; ++j) c[j] += accs[i][j];
    else
      for (int j = 0; j < kNr; ++j) c[j] = accs[i][j];
  }
}

// MR x nr tail (nr < 16), same ascending-k order, contiguous B rows.
template <int MR>
inline void micro_tail(const double* __restrict A, long lda, const double* __restrict B,
                       long ldb, double* __restrict C, long ldc, int K, int nr,
                       bool accumulate) {
  double acc0[kNr]{}, acc1[kNr]{}, acc2[kNr]{}, acc3[kNr]{};
  for (int k = 0; k < K; ++k) {
    const double* __restrict b = B + k * ldb;
    const double va0 = A[k];
    const double va1 = MR > 1 ? A[lda + k] : 0.0;
    const double va2 = MR > 2 ? A[2 * lda + k] : 0.0;
    const double va3 = MR > 3 ? A[3 * lda + k] : 0.0;
    for (int j = 0; j < nr; ++j) {
      const double vb = b[j];
      acc0[j] = std::fma(va0, vb, acc0[j]);
      if constexpr (MR > 1) acc1[j] = std::fma(va1, vb, acc1[j]);
      if constexpr (MR > 2) acc2[j] = std::fma(va2, vb, acc2[j]);
      if constexpr (MR > 3) acc3[j] = std::fma(va3, vb, acc3[j]);
    }
  }
  const double* accs[kMr] = {acc0, acc1, acc2, acc3};
  for (int i = 0; i < MR; ++i) {
    double* c = C + i * ldc;
    if (accumulate)
      for (int j = 0; j < nr; ++j) c[j] += accs[i][j];
    else
      for (int j = 0; j < nr; ++j) c[j] = accs[i][j];
  }
}

inline void run_panel(const double* A, const double* Bp, long ldb, double* C, int M,
                      int K, int N, int n0, int nr, bool accumulate) {
  const int m_full = M - M % kMr;
  if (nr == kNr) {
    for (int m = 0; m < m_full; m += kMr)
      micro_full<kMr>(A + static_cast<long>(m) * K, K, Bp, ldb,
                      C + static_cast<long>(m) * N + n0, N, K, accumulate);
    const double* Am = A + static_cast<long>(m_full) * K;
    double* Cm = C + static_cast<long>(m_full) * N + n0;
    switch (M - m_full) {
      case 1: micro_full<1>(Am, K, Bp, ldb, Cm, N, K, accumulate); break;
      case 2: micro_full<2>(Am, K, Bp, ldb, Cm, N, K, accumulate); break;
      case 3: micro_full<3>(Am, K, Bp, ldb, Cm, N, K, accumulate); break;
      default: break;
    }
  } else {
    for (int m = 0; m < m_full; m += kMr)
      micro_tail<kMr>(A + static_cast<long>(m) * K, K, Bp, ldb,
                      C + static_cast<long>(m) * N + n0, N, K, nr, accumulate);
    const double* Am = A + static_cast<long>(m_full) * K;
    double* Cm = C + static_cast<long>(m_full) * N + n0;
    switch (M - m_full) {
      case 1: micro_tail<1>(Am, K, Bp, ldb, Cm, N, K, nr, accumulate); break;
      case 2: micro_tail<2>(Am, K, Bp, ldb, Cm, N, K, nr, accumulate); break;
      case 3: micro_tail<3>(Am, K, Bp, ldb, Cm, N, K, nr, accumulate); break;
      default: break;
    }
  }
}

}  // namespace

void gemm_kseq(const double* A, const double* B, double* C, int M, int K, int N,
               bool accumulate) {
  const int panels = (N + kNr - 1) / kNr;
  const bool pack = M >= 2 * kMr && K >= 64;
  // Panels write disjoint C columns, so the schedule cannot change results.
  // Packing copies a panel of B into contiguous scratch; values are untouched.
#pragma omp parallel
  {
    static thread_local std::vector<double> scratch;
    if (pack) scratch.resize(static_cast<size_t>(K) * kNr);
#pragma omp for schedule(static)
    for (int p = 0; p < panels; ++p) {
      const int n0 = p * kNr;
      const int nr = std::min(kNr, N - n0);
      if (pack) {
        for (int k = 0; k < K; ++k)
          for (int j = 0; j < nr; ++j)
            scratch[static_cast<size_t>(k) * nr + j] = B[static_cast<long>(k) * N + n0 + j];
        run_panel(A, scratch.data(), nr, C, M, K, N, n0, nr, accumulate);
      } else {
        run_panel(A, B + n0, N, C, M, K, N, n0, nr, accumulate);
      }
    }
  }
}

void transpose(const double* src, double* dst, int rows, int cols) {
  constexpr int kBlock = 32;
  for (int r0 = 0; r0 < rows; r0 += kBlock) {
    const int r1 = std::min(rows, r0 + kBlock);
    for (int c0 = 0; c0 < cols; c0 += kBlock) {
      const int c1 = std::min(cols, c0 + kBlock);
      for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c)
          dst[static_cast<long>(c) * rows + r] = src[static_cast<long>(r) * cols + c];
    }
  }
}

}  // namespace polarfront
