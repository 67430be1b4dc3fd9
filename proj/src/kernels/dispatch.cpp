#include "sgca/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>

#include "kernels_internal.hpp"
#include "sgca/error.hpp"

namespace sgca::kern {

namespace {

std::optional<Backend> g_forced;

bool cpu_has_avx2() {
#if defined(SGCA_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("SGCA_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!cpu_has_avx2()) {
        throw ValidationError("backend_unsupported",
                              "SGCA_KERNELS=avx2 but the CPU or build lacks "
                              "AVX2 support");
      }
      return Backend::avx2;
    }
    // anything else (including "auto") falls through to detection
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

Backend current() {
  if (g_forced) return *g_forced;
  static const Backend detected = detect();
  return detected;
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "?";
}

bool backend_supported(Backend b) {
  return b == Backend::scalar || cpu_has_avx2();
}

Backend active_backend() { return current(); }

void force_backend(Backend b) {
  if (!backend_supported(b)) {
    throw ValidationError("backend_unsupported",
                          std::string("kernel backend not supported here: ") +
                              backend_name(b));
  }
  g_forced = b;
}

void clear_forced_backend() { g_forced.reset(); }

#ifdef SGCA_HAVE_AVX2
#define SGCA_DISPATCH(fn, ...)                 \
  do {                                         \
    if (current() == Backend::avx2) {          \
      detail::avx2_##fn(__VA_ARGS__);          \
    } else {                                   \
      detail::scalar_##fn(__VA_ARGS__);        \
    }                                          \
  } while (0)
#else
#define SGCA_DISPATCH(fn, ...) detail::scalar_##fn(__VA_ARGS__)
#endif

void matmul_nn(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate) {
  SGCA_DISPATCH(matmul_nn, a, b, c, m, k, n, accumulate);
}

void matmul_tn(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate) {
  SGCA_DISPATCH(matmul_tn, a, b, c, m, k, n, accumulate);
}

void transpose(const double* a, double* out, std::size_t rows,
               std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out[j * rows + i] = a[i * cols + j];
    }
  }
}

void relu_forward(const double* x, double* y, std::size_t n) {
  SGCA_DISPATCH(relu_forward, x, y, n);
}

void relu_backward(const double* x, const double* dy, double* dx,
                   std::size_t n) {
  SGCA_DISPATCH(relu_backward, x, dy, dx, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  SGCA_DISPATCH(axpy, alpha, x, y, n);
}

void scale(double* x, double alpha, std::size_t n) {
  SGCA_DISPATCH(scale, x, alpha, n);
}

void hadamard(const double* a, const double* b, double* out, std::size_t n) {
  SGCA_DISPATCH(hadamard, a, b, out, n);
}

void ln_affine(const double* x, const double* gain, const double* bias,
               double mu, double inv_std, double* out, std::size_t n) {
  SGCA_DISPATCH(ln_affine, x, gain, bias, mu, inv_std, out, n);
}

}  // namespace sgca::kern
