#include <algorithm>
#include <cstddef>

#include "kernels_internal.hpp"

#ifdef SGCA_HAVE_AVX2

#include <immintrin.h>

// AVX2 variants. Vectorization runs across output columns only; each output
// element sees the same mul/add sequence as the scalar reference (explicit
// mul_pd + add_pd, never fmadd), so results match the scalar backend bitwise.
namespace sgca::kern::detail {

void avx2_matmul_nn(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const double* brow = b + kk * n;
      const __m256d avv = _mm256_set1_pd(av);
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d cv = _mm256_loadu_pd(crow + j);
        __m256d bv = _mm256_loadu_pd(brow + j);
        cv = _mm256_add_pd(cv, _mm256_mul_pd(avv, bv));
        _mm256_storeu_pd(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void avx2_matmul_tn(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n, bool accumulate) {
  if (!accumulate) std::fill(c, c + k * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      double* crow = c + kk * n;
      const __m256d avv = _mm256_set1_pd(av);
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d cv = _mm256_loadu_pd(crow + j);
        __m256d bv = _mm256_loadu_pd(brow + j);
        cv = _mm256_add_pd(cv, _mm256_mul_pd(avv, bv));
        _mm256_storeu_pd(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void avx2_relu_forward(const double* x, double* y, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // max_pd(x, 0) returns the second operand when x <= 0, matching the
    // scalar (x > 0 ? x : 0.0) including the -0.0 case.
    _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void avx2_relu_backward(const double* x, const double* dy, double* dx,
                        std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    __m256d g = _mm256_and_pd(mask, _mm256_loadu_pd(dy + i));
    _mm256_storeu_pd(dx + i, _mm256_add_pd(_mm256_loadu_pd(dx + i), g));
  }
  for (; i < n; ++i) dx[i] += x[i] > 0.0 ? dy[i] : 0.0;
}

void avx2_axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_add_pd(yv, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void avx2_scale(double* x, double alpha, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), av));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

void avx2_hadamard(const double* a, const double* b, double* out,
                   std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(
        out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void avx2_ln_affine(const double* x, const double* gain, const double* bias,
                    double mu, double inv_std, double* out, std::size_t n) {
  const __m256d muv = _mm256_set1_pd(mu);
  const __m256d isv = _mm256_set1_pd(inv_std);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_sub_pd(_mm256_loadu_pd(x + i), muv);
    xv = _mm256_mul_pd(_mm256_mul_pd(xv, isv), _mm256_loadu_pd(gain + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(xv, _mm256_loadu_pd(bias + i)));
  }
  for (; i < n; ++i) out[i] = (x[i] - mu) * inv_std * gain[i] + bias[i];
}

}  // namespace sgca::kern::detail

#endif  // SGCA_HAVE_AVX2
