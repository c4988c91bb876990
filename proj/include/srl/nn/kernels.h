// Dense linear-algebra kernels used by the computation graph.
//
// Each kernel has a serial reference and an OpenMP variant. The OpenMP
// variants partition work so that every output element is accumulated in
// the same order as in the serial version, so both produce bit-identical
// results. The dispatching entry points pick the OpenMP variant only when
// more than one kernel thread is configured and the problem is large.

#ifndef SRL_NN_KERNELS_H_
#define SRL_NN_KERNELS_H_

#include <algorithm>
#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace srl::nn::kernels {

namespace internal {
inline std::atomic<int>& ThreadSetting() {
  static std::atomic<int> threads{1};
  return threads;
}
inline constexpr long kParallelThreshold = 1L << 15;
}  // namespace internal

inline void SetKernelThreads(int threads) {
  internal::ThreadSetting().store(std::max(1, threads));
}
inline int KernelThreads() { return internal::ThreadSetting().load(); }

// Shared row kernels. Kept out of line so the serial and parallel drivers
// run the exact same vectorized code for every row.
template <typename Real>
[[gnu::noinline]] Real Dot(const Real* a, const Real* b, int n) {
  Real acc = 0;
#pragma omp simd reduction(+ : acc)
  for (int j = 0; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

template <typename Real>
[[gnu::noinline]] void Axpy(Real alpha, const Real* x, Real* y, int n) {
#pragma omp simd
  for (int j = 0; j < n; ++j) y[j] += alpha * x[j];
}

// y[m] += A[m x k] * x[k]
template <typename Real>
void MatVecAccumSerial(const Real* a, int m, int k, const Real* x, Real* y) {
  for (int i = 0; i < m; ++i) y[i] += Dot(a + static_cast<long>(i) * k, x, k);
}

template <typename Real>
void MatVecAccumParallel(const Real* a, int m, int k, const Real* x, Real* y) {
#pragma omp parallel for schedule(static) num_threads(KernelThreads())
  for (int i = 0; i < m; ++i) y[i] += Dot(a + static_cast<long>(i) * k, x, k);
}

// dx[k] += A[m x k]^T * g[m]
template <typename Real>
void MatTVecAccumSerial(const Real* a, int m, int k, const Real* g, Real* dx) {
  for (int i = 0; i < m; ++i) {
    if (g[i] != Real(0)) Axpy(g[i], a + static_cast<long>(i) * k, dx, k);
  }
}

// Columns are split into blocks; each block sweeps the rows in order.
template <typename Real>
void MatTVecAccumParallel(const Real* a, int m, int k, const Real* g,
                          Real* dx) {
  const int block = 64;
  const int blocks = (k + block - 1) / block;
#pragma omp parallel for schedule(static) num_threads(KernelThreads())
  for (int b = 0; b < blocks; ++b) {
    const int lo = b * block;
    const int len = std::min(block, k - lo);
    for (int i = 0; i < m; ++i) {
      if (g[i] != Real(0)) {
        Axpy(g[i], a + static_cast<long>(i) * k + lo, dx + lo, len);
      }
    }
  }
}

// dA[m x k] += g[m] * x[k]^T
template <typename Real>
void OuterAccumSerial(Real* da, int m, int k, const Real* g, const Real* x) {
  for (int i = 0; i < m; ++i) {
    if (g[i] != Real(0)) Axpy(g[i], x, da + static_cast<long>(i) * k, k);
  }
}

template <typename Real>
void OuterAccumParallel(Real* da, int m, int k, const Real* g, const Real* x) {
#pragma omp parallel for schedule(static) num_threads(KernelThreads())
  for (int i = 0; i < m; ++i) {
    if (g[i] != Real(0)) Axpy(g[i], x, da + static_cast<long>(i) * k, k);
  }
}

// C[m x n] += A[m x k] * B[k x n]
template <typename Real>
void MatMulAccumSerial(const Real* a, const Real* b, Real* c, int m, int k,
                       int n) {
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const Real aip = a[static_cast<long>(i) * k + p];
      if (aip != Real(0)) Axpy(aip, b + static_cast<long>(p) * n,
                               c + static_cast<long>(i) * n, n);
    }
  }
}

template <typename Real>
void MatMulAccumParallel(const Real* a, const Real* b, Real* c, int m, int k,
                         int n) {
#pragma omp parallel for schedule(static) num_threads(KernelThreads())
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const Real aip = a[static_cast<long>(i) * k + p];
      if (aip != Real(0)) Axpy(aip, b + static_cast<long>(p) * n,
                               c + static_cast<long>(i) * n, n);
    }
  }
}

inline bool UseParallel(long work) {
  return KernelThreads() > 1 && work >= internal::kParallelThreshold;
}

template <typename Real>
void MatVecAccum(const Real* a, int m, int k, const Real* x, Real* y) {
  if (UseParallel(static_cast<long>(m) * k)) {
    MatVecAccumParallel(a, m, k, x, y);
  } else {
    MatVecAccumSerial(a, m, k, x, y);
  }
}

template <typename Real>
void MatTVecAccum(const Real* a, int m, int k, const Real* g, Real* dx) {
  if (UseParallel(static_cast<long>(m) * k)) {
    MatTVecAccumParallel(a, m, k, g, dx);
  } else {
    MatTVecAccumSerial(a, m, k, g, dx);
  }
}

template <typename Real>
void OuterAccum(Real* da, int m, int k, const Real* g, const Real* x) {
  if (UseParallel(static_cast<long>(m) * k)) {
    OuterAccumParallel(da, m, k, g, x);
  } else {
    OuterAccumSerial(da, m, k, g, x);
  }
}

template <typename Real>
void MatMulAccum(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  if (UseParallel(static_cast<long>(m) * k * n)) {
    MatMulAccumParallel(a, b, c, m, k, n);
  } else {
    MatMulAccumSerial(a, b, c, m, k, n);
  }
}

}  // namespace srl::nn::kernels

#endif  // SRL_NN_KERNELS_H_
