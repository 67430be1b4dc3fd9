#pragma once

#include <cstddef>

// Low-level dense kernels with a scalar reference implementation and an AVX2
// variant selected at runtime. Both backends are bit-identical by
// construction: matmuls accumulate each output element left-to-right over the
// inner dimension (the SIMD variants vectorize across independent output
// columns, never across the reduction), and no kernel uses FMA. Reductions
// whose order cannot be preserved under vectorization (softmax sums,
// LayerNorm moments) live in numkern and stay scalar.
namespace sgca::kern {

enum class Backend { scalar, avx2 };

const char* backend_name(Backend b);
bool backend_supported(Backend b);

// Detection order: forced backend if set, else SGCA_KERNELS env var
// ("scalar" | "avx2" | "auto"), else the best supported instruction set.
Backend active_backend();
void force_backend(Backend b);  // throws ValidationError if unsupported
void clear_forced_backend();

// c (+)= a * b with a m-by-k, b k-by-n, c m-by-n, all row-major.
void matmul_nn(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate);

// c (+)= a^T * b with a m-by-k (read transposed), b m-by-n, c k-by-n.
void matmul_tn(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate);

void transpose(const double* a, double* out, std::size_t rows,
               std::size_t cols);

void relu_forward(const double* x, double* y, std::size_t n);

// dx += dy where x > 0 (subgradient 0 at x == 0)
void relu_backward(const double* x, const double* dy, double* dx,
                   std::size_t n);

void axpy(double alpha, const double* x, double* y, std::size_t n);  // y += ax
void scale(double* x, double alpha, std::size_t n);
void hadamard(const double* a, const double* b, double* out, std::size_t n);

// out_i = (x_i - mu) * inv_std * gain_i + bias_i
void ln_affine(const double* x, const double* gain, const double* bias,
               double mu, double inv_std, double* out, std::size_t n);

}  // namespace sgca::kern
