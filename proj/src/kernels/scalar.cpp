#include <algorithm>
#include <cstddef>

#include "kernels_internal.hpp"

// Reference kernels. The SIMD backends must reproduce these bit for bit, so
// every accumulation here runs in ascending index order and nothing is
// allowed to reassociate (the project builds with -ffp-contract=off).
namespace sgca::kern::detail {

void scalar_matmul_nn(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n,
                      bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const double* brow = b + kk * n;
      for (std::size_t j = 0; j < n; ++j) {
        crow[j] += av * brow[j];
      }
    }
  }
}

void scalar_matmul_tn(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n,
                      bool accumulate) {
  if (!accumulate) std::fill(c, c + k * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      double* crow = c + kk * n;
      for (std::size_t j = 0; j < n; ++j) {
        crow[j] += av * brow[j];
      }
    }
  }
}

void scalar_relu_forward(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = x[i] > 0.0 ? x[i] : 0.0;
  }
}

void scalar_relu_backward(const double* x, const double* dy, double* dx,
                          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dx[i] += x[i] > 0.0 ? dy[i] : 0.0;
  }
}

void scalar_axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += alpha * x[i];
  }
}

void scalar_scale(double* x, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    x[i] *= alpha;
  }
}

void scalar_hadamard(const double* a, const double* b, double* out,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a[i] * b[i];
  }
}

void scalar_ln_affine(const double* x, const double* gain, const double* bias,
                      double mu, double inv_std, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (x[i] - mu) * inv_std * gain[i] + bias[i];
  }
}

}  // namespace sgca::kern::detail
