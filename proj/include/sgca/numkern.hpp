#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sgca/matrix.hpp"
#include "sgca/rng.hpp"

// Forward/backward kernel pairs. Forward ops hand back a context holding the
// cached intermediates their backward consumes; calling a backward on a
// context that never ran forward raises StateError. All backward ops
// accumulate into their gradient outputs.
namespace sgca::numkern {

inline constexpr double kLayerNormEps = 1e-5;

Matrix matmul(const Matrix& a, const Matrix& b);

// da += dc * b^T, db += a^T * dc; either output may be null
void matmul_backward(const Matrix& a, const Matrix& b, const Matrix& dc,
                     Matrix* da, Matrix* db);

struct SoftmaxTempCtx {
  std::vector<double> probs;    // masked entries exactly 0
  std::vector<double> scaled;   // logit / tau on unmasked entries
  std::vector<std::uint8_t> mask;
  double tau = 0.0;
  bool ready = false;
};

// probs_i = exp(z_i/tau - m) / sum_j exp(z_j/tau - m) over unmasked j,
// m = max unmasked z/tau. Requires tau > 0 and at least one unmasked entry.
SoftmaxTempCtx softmax_temp(std::span<const double> logits, double tau,
                            std::span<const std::uint8_t> mask);

// dlogits += dL/dz, *dtau += dL/dtau (dtau may be null)
void softmax_temp_backward(const SoftmaxTempCtx& ctx,
                           std::span<const double> dprobs,
                           std::span<double> dlogits, double* dtau);

struct LayerNormCtx {
  std::vector<double> xhat;
  double inv_std = 0.0;
  bool ready = false;
};

// out = gain .* (x - mean) / sqrt(var + eps) + bias, population variance
void layernorm(std::span<const double> x, std::span<const double> gain,
               std::span<const double> bias, double eps, std::span<double> out,
               LayerNormCtx* ctx = nullptr);

void layernorm_backward(const LayerNormCtx& ctx, std::span<const double> gain,
                        std::span<const double> dy, std::span<double> dx,
                        std::span<double> dgain, std::span<double> dbias);

void relu(std::span<const double> x, std::span<double> out);
void relu_backward(std::span<const double> x, std::span<const double> dy,
                   std::span<double> dx);

struct DropoutCtx {
  std::vector<std::uint8_t> keep;
  double scale = 1.0;
  bool active = false;  // false when inference or p == 0
  bool ready = false;
};

// Inverted dropout: kept elements scale by 1/(1-p) during training so
// inference is the identity. Requires 0 <= p < 1.
void dropout(std::span<const double> x, double p, bool training, Rng& rng,
             std::span<double> out, DropoutCtx* ctx = nullptr);

void dropout_backward(const DropoutCtx& ctx, std::span<const double> dy,
                      std::span<double> dx);

double sigmoid(double x);
// given s = sigmoid(x), returns dL/dx for upstream ds
double sigmoid_backward(double s, double ds);

double mse(std::span<const double> pred, std::span<const double> target);
void mse_backward(std::span<const double> pred, std::span<const double> target,
                  double dloss, std::span<double> dpred);

}  // namespace sgca::numkern
