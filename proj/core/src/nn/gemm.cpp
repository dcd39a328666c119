#include "sehsn/nn/gemm.hpp"

#include <algorithm>
#include <vector>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace sehsn::nn {
namespace {

constexpr std::size_t kBlockK = 256;

// Portable reference kernel: C[0:rows, 0:cols] += A[0:rows, 0:kc] · B[0:kc, 0:cols].
template <typename T>
void kernel_generic(std::size_t rows, std::size_t cols, std::size_t kc, const T* a, std::size_t lda,
                    const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  for (std::size_t r = 0; r < rows; ++r) {
    T* crow = c + r * ldc;
    for (std::size_t p = 0; p < kc; ++p) {
      const T av = a[r * lda + p];
      const T* brow = b + p * ldb;
      for (std::size_t j = 0; j < cols; ++j) crow[j] += av * brow[j];
    }
  }
}

#if defined(__AVX512F__)

struct F32 {
  using scalar = float;
  using vec = __m512;
  using mask = __mmask16;
  static constexpr std::size_t kLanes = 16;
  static mask lanes(std::size_t n) { return n >= 16 ? mask(0xffff) : mask((1u << n) - 1u); }
  static vec load(mask m, const float* p) { return _mm512_maskz_loadu_ps(m, p); }
  static void store(mask m, float* p, vec v) { _mm512_mask_storeu_ps(p, m, v); }
  static vec bcast(float x) { return _mm512_set1_ps(x); }
  static vec fma(vec a, vec b, vec c) { return _mm512_fmadd_ps(a, b, c); }
};

struct F64 {
  using scalar = double;
  using vec = __m512d;
  using mask = __mmask8;
  static constexpr std::size_t kLanes = 8;
  static mask lanes(std::size_t n) { return n >= 8 ? mask(0xff) : mask((1u << n) - 1u); }
  static vec load(mask m, const double* p) { return _mm512_maskz_loadu_pd(m, p); }
  static void store(mask m, double* p, vec v) { _mm512_mask_storeu_pd(p, m, v); }
  static vec bcast(double x) { return _mm512_set1_pd(x); }
  static vec fma(vec a, vec b, vec c) { return _mm512_fmadd_pd(a, b, c); }
};

// Register tile of Rows x (2 vectors); cols <= 2 * lanes handled with masks.
template <typename V, std::size_t Rows>
void kernel_tile(std::size_t cols, std::size_t kc, const typename V::scalar* a, std::size_t lda,
                 const typename V::scalar* b, std::size_t ldb, typename V::scalar* c, std::size_t ldc) {
  const auto m0 = V::lanes(cols);
  const auto m1 = V::lanes(cols > V::kLanes ? cols - V::kLanes : 0);
  typename V::vec acc0[Rows];
  typename V::vec acc1[Rows];
  for (std::size_t r = 0; r < Rows; ++r) {
    acc0[r] = V::load(m0, c + r * ldc);
    acc1[r] = V::load(m1, c + r * ldc + V::kLanes);
  }
  for (std::size_t p = 0; p < kc; ++p) {
    const auto b0 = V::load(m0, b + p * ldb);
    const auto b1 = V::load(m1, b + p * ldb + V::kLanes);
    for (std::size_t r = 0; r < Rows; ++r) {
      const auto av = V::bcast(a[r * lda + p]);
      acc0[r] = V::fma(av, b0, acc0[r]);
      acc1[r] = V::fma(av, b1, acc1[r]);
    }
  }
  for (std::size_t r = 0; r < Rows; ++r) {
    V::store(m0, c + r * ldc, acc0[r]);
    V::store(m1, c + r * ldc + V::kLanes, acc1[r]);
  }
}

template <typename V>
void kernel_rows(std::size_t rows, std::size_t cols, std::size_t kc, const typename V::scalar* a,
                 std::size_t lda, const typename V::scalar* b, std::size_t ldb,
                 typename V::scalar* c, std::size_t ldc) {
  switch (rows) {
    case 6: kernel_tile<V, 6>(cols, kc, a, lda, b, ldb, c, ldc); break;
    case 5: kernel_tile<V, 5>(cols, kc, a, lda, b, ldb, c, ldc); break;
    case 4: kernel_tile<V, 4>(cols, kc, a, lda, b, ldb, c, ldc); break;
    case 3: kernel_tile<V, 3>(cols, kc, a, lda, b, ldb, c, ldc); break;
    case 2: kernel_tile<V, 2>(cols, kc, a, lda, b, ldb, c, ldc); break;
    case 1: kernel_tile<V, 1>(cols, kc, a, lda, b, ldb, c, ldc); break;
    default: break;
  }
}

template <typename T>
using Simd = std::conditional_t<std::is_same_v<T, float>, F32, F64>;

constexpr std::size_t kRows = 6;

template <typename T>
void block_kernel(std::size_t rows, std::size_t cols, std::size_t kc, const T* a, std::size_t lda,
                  const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  kernel_rows<Simd<T>>(rows, cols, kc, a, lda, b, ldb, c, ldc);
}

template <typename T>
constexpr std::size_t tile_cols() {
  return 2 * Simd<T>::kLanes;
}

#else

constexpr std::size_t kRows = 4;

template <typename T>
void block_kernel(std::size_t rows, std::size_t cols, std::size_t kc, const T* a, std::size_t lda,
                  const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  kernel_generic(rows, cols, kc, a, lda, b, ldb, c, ldc);
}

template <typename T>
constexpr std::size_t tile_cols() {
  return 256;
}

#endif

}  // namespace

template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, T{0});
  if (m == 0 || n == 0 || k == 0) return;
  constexpr std::size_t kCols = tile_cols<T>();
  for (std::size_t p0 = 0; p0 < k; p0 += kBlockK) {
    const std::size_t kc = std::min(kBlockK, k - p0);
    for (std::size_t j = 0; j < n; j += kCols) {
      const std::size_t cols = std::min(kCols, n - j);
      for (std::size_t i = 0; i < m; i += kRows) {
        const std::size_t rows = std::min(kRows, m - i);
        block_kernel(rows, cols, kc, a + i * k + p0, k, b + p0 * n + j, n, c + i * n + j, n);
      }
    }
  }
}

template <typename T>
void transpose(std::size_t rows, std::size_t cols, const T* in, T* out) {
  constexpr std::size_t kB = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += kB) {
    for (std::size_t c0 = 0; c0 < cols; c0 += kB) {
      const std::size_t r1 = std::min(rows, r0 + kB);
      const std::size_t c1 = std::min(cols, c0 + kB);
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t cc = c0; cc < c1; ++cc) out[cc * rows + r] = in[r * cols + cc];
      }
    }
  }
}

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  std::vector<T> at(m * k);
  transpose(k, m, a, at.data());
  gemm(m, n, k, at.data(), b, c, accumulate);
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  std::vector<T> bt(k * n);
  transpose(n, k, b, bt.data());
  gemm(m, n, k, a, bt.data(), c, accumulate);
}

#define SEHSN_INSTANTIATE_GEMM(T)                                                              \
  template void gemm<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*, bool);    \
  template void gemm_tn<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*, bool); \
  template void gemm_nt<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*, bool); \
  template void transpose<T>(std::size_t, std::size_t, const T*, T*);

SEHSN_INSTANTIATE_GEMM(float)
SEHSN_INSTANTIATE_GEMM(double)

}  // namespace sehsn::nn
