#pragma once

#include <cstddef>

// Per-backend entry points wired up by dispatch.cpp.
namespace sgca::kern::detail {

void scalar_matmul_nn(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n,
                      bool accumulate);
void scalar_matmul_tn(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n,
                      bool accumulate);
void scalar_relu_forward(const double* x, double* y, std::size_t n);
void scalar_relu_backward(const double* x, const double* dy, double* dx,
                          std::size_t n);
void scalar_axpy(double alpha, const double* x, double* y, std::size_t n);
void scalar_scale(double* x, double alpha, std::size_t n);
void scalar_hadamard(const double* a, const double* b, double* out,
                     std::size_t n);
void scalar_ln_affine(const double* x, const double* gain, const double* bias,
                      double mu, double inv_std, double* out, std::size_t n);

#ifdef SGCA_HAVE_AVX2
void avx2_matmul_nn(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n, bool accumulate);
void avx2_matmul_tn(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n, bool accumulate);
void avx2_relu_forward(const double* x, double* y, std::size_t n);
void avx2_relu_backward(const double* x, const double* dy, double* dx,
                        std::size_t n);
void avx2_axpy(double alpha, const double* x, double* y, std::size_t n);
void avx2_scale(double* x, double alpha, std::size_t n);
void avx2_hadamard(const double* a, const double* b, double* out,
                   std::size_t n);
void avx2_ln_affine(const double* x, const double* gain, const double* bias,
                    double mu, double inv_std, double* out, std::size_t n);
#endif

}  // namespace sgca::kern::detail
