#pragma once

#include <cstddef>

namespace sehsn::nn {

// Row-major single-threaded matrix products with a fixed summation order
// (results are bit-reproducible for a given build).
//
//   gemm:    C = beta*C + A·B     A: m x k,  B: k x n
//   gemm_tn: C = beta*C + Aᵀ·B    A: k x m,  B: k x n
//   gemm_nt: C = beta*C + A·Bᵀ    A: m x k,  B: n x k
//
// beta is 0 (overwrite) or 1 (accumulate).
template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);

// out (cols x rows) = in (rows x cols)ᵀ
template <typename T>
void transpose(std::size_t rows, std::size_t cols, const T* in, T* out);

}  // namespace sehsn::nn
