#include "sgca/numkern.hpp"

#include <cmath>
#include <cstddef>

#include "sgca/kernels.hpp"

namespace sgca::numkern {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError("shape_mismatch",
                         std::string(what) + ": length " + std::to_string(a) +
                             " vs " + std::to_string(b));
  }
}

void require_ready(bool ready, const char* what) {
  if (!ready) {
    throw StateError("backward_before_forward",
                     std::string(what) + ": backward called without a "
                                         "completed forward pass");
  }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    throw DimensionError("shape_mismatch", "matmul: " + a.shape_str() +
                                               " incompatible with " +
                                               b.shape_str());
  }
  Matrix c(a.rows, b.cols);
  kern::matmul_nn(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols,
                  b.cols, false);
  return c;
}

void matmul_backward(const Matrix& a, const Matrix& b, const Matrix& dc,
                     Matrix* da, Matrix* db) {
  if (a.cols != b.rows || dc.rows != a.rows || dc.cols != b.cols) {
    throw DimensionError("shape_mismatch",
                         "matmul_backward: " + a.shape_str() + " * " +
                             b.shape_str() + " vs upstream " + dc.shape_str());
  }
  if (da != nullptr) {
    // da += dc * b^T, evaluated as rows of (b * dc_row^T) to keep every
    // reduction in ascending-index order.
    Matrix dct(dc.cols, dc.rows);
    kern::transpose(dc.data.data(), dct.data.data(), dc.rows, dc.cols);
    Matrix dat(a.cols, a.rows);
    kern::matmul_nn(b.data.data(), dct.data.data(), dat.data.data(), b.rows,
                    b.cols, dc.rows, false);
    for (std::size_t i = 0; i < a.rows; ++i) {
      for (std::size_t j = 0; j < a.cols; ++j) {
        da->at(i, j) += dat.at(j, i);
      }
    }
  }
  if (db != nullptr) {
    kern::matmul_tn(a.data.data(), dc.data.data(), db->data.data(), a.rows,
                    a.cols, dc.cols, true);
  }
}

SoftmaxTempCtx softmax_temp(std::span<const double> logits, double tau,
                            std::span<const std::uint8_t> mask) {
  require_same_size(logits.size(), mask.size(), "softmax_temp");
  if (!(tau > 0.0)) {
    throw DomainError("tau_nonpositive",
                      "softmax_temp: tau must be positive, got " +
                          std::to_string(tau));
  }
  const std::size_t n = logits.size();
  SoftmaxTempCtx ctx;
  ctx.tau = tau;
  ctx.mask.assign(mask.begin(), mask.end());
  ctx.scaled.assign(n, 0.0);
  ctx.probs.assign(n, 0.0);

  double max_scaled = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    ctx.scaled[i] = logits[i] / tau;
    if (!any || ctx.scaled[i] > max_scaled) max_scaled = ctx.scaled[i];
    any = true;
  }
  if (!any) {
    throw ValidationError("all_masked",
                          "softmax_temp: every position is masked");
  }

  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    ctx.probs[i] = std::exp(ctx.scaled[i] - max_scaled);
    denom += ctx.probs[i];
  }
  const double inv = 1.0 / denom;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) ctx.probs[i] *= inv;
  }
  ctx.ready = true;
  return ctx;
}

void softmax_temp_backward(const SoftmaxTempCtx& ctx,
                           std::span<const double> dprobs,
                           std::span<double> dlogits, double* dtau) {
  require_ready(ctx.ready, "softmax_temp_backward");
  const std::size_t n = ctx.probs.size();
  require_same_size(dprobs.size(), n, "softmax_temp_backward");
  require_same_size(dlogits.size(), n, "softmax_temp_backward");

  double dot = 0.0;  // sum_j dprobs_j * p_j
  for (std::size_t i = 0; i < n; ++i) {
    if (ctx.mask[i]) dot += dprobs[i] * ctx.probs[i];
  }
  const double inv_tau = 1.0 / ctx.tau;
  double dtau_acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ctx.mask[i]) continue;
    const double du = ctx.probs[i] * (dprobs[i] - dot);  // dL/d(z_i/tau)
    dlogits[i] += du * inv_tau;
    dtau_acc += du * ctx.scaled[i];
  }
  if (dtau != nullptr) *dtau += -dtau_acc * inv_tau;
}

void layernorm(std::span<const double> x, std::span<const double> gain,
               std::span<const double> bias, double eps, std::span<double> out,
               LayerNormCtx* ctx) {
  const std::size_t d = x.size();
  if (d == 0) {
    throw ValidationError("empty_input", "layernorm: empty input");
  }
  require_same_size(gain.size(), d, "layernorm gain");
  require_same_size(bias.size(), d, "layernorm bias");
  require_same_size(out.size(), d, "layernorm out");

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(d);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(d);
  const double inv_std = 1.0 / std::sqrt(var + eps);

  kern::ln_affine(x.data(), gain.data(), bias.data(), mean, inv_std,
                  out.data(), d);
  if (ctx != nullptr) {
    ctx->xhat.resize(d);
    for (std::size_t i = 0; i < d; ++i) ctx->xhat[i] = (x[i] - mean) * inv_std;
    ctx->inv_std = inv_std;
    ctx->ready = true;
  }
}

void layernorm_backward(const LayerNormCtx& ctx, std::span<const double> gain,
                        std::span<const double> dy, std::span<double> dx,
                        std::span<double> dgain, std::span<double> dbias) {
  require_ready(ctx.ready, "layernorm_backward");
  const std::size_t d = ctx.xhat.size();
  require_same_size(dy.size(), d, "layernorm_backward dy");
  require_same_size(dx.size(), d, "layernorm_backward dx");

  double sum_t = 0.0;
  double sum_tx = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double t = dy[i] * gain[i];
    sum_t += t;
    sum_tx += t * ctx.xhat[i];
  }
  const double inv_d = 1.0 / static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double t = dy[i] * gain[i];
    dx[i] += ctx.inv_std * (t - sum_t * inv_d - ctx.xhat[i] * sum_tx * inv_d);
    dgain[i] += dy[i] * ctx.xhat[i];
    dbias[i] += dy[i];
  }
}

void relu(std::span<const double> x, std::span<double> out) {
  require_same_size(x.size(), out.size(), "relu");
  kern::relu_forward(x.data(), out.data(), x.size());
}

void relu_backward(std::span<const double> x, std::span<const double> dy,
                   std::span<double> dx) {
  require_same_size(x.size(), dy.size(), "relu_backward");
  require_same_size(x.size(), dx.size(), "relu_backward");
  kern::relu_backward(x.data(), dy.data(), dx.data(), x.size());
}

void dropout(std::span<const double> x, double p, bool training, Rng& rng,
             std::span<double> out, DropoutCtx* ctx) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw DomainError("dropout_probability",
                      "dropout: p must lie in [0,1), got " + std::to_string(p));
  }
  require_same_size(x.size(), out.size(), "dropout");
  const std::size_t n = x.size();

  if (!training) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i];
    if (ctx != nullptr) {
      ctx->active = false;
      ctx->scale = 1.0;
      ctx->keep.assign(n, 1);
      ctx->ready = true;
    }
    return;
  }

  const double scale = 1.0 / (1.0 - p);
  if (ctx != nullptr) {
    ctx->keep.resize(n);
    ctx->scale = scale;
    ctx->active = p > 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool keep = rng.uniform() >= p;
    if (ctx != nullptr) ctx->keep[i] = keep ? 1 : 0;
    out[i] = keep ? x[i] * scale : 0.0;
  }
  if (ctx != nullptr) ctx->ready = true;
}

void dropout_backward(const DropoutCtx& ctx, std::span<const double> dy,
                      std::span<double> dx) {
  require_ready(ctx.ready, "dropout_backward");
  require_same_size(dy.size(), ctx.keep.size(), "dropout_backward");
  require_same_size(dx.size(), ctx.keep.size(), "dropout_backward");
  if (!ctx.active) {
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
    return;
  }
  for (std::size_t i = 0; i < dy.size(); ++i) {
    if (ctx.keep[i]) dx[i] += dy[i] * ctx.scale;
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double sigmoid_backward(double s, double ds) { return ds * s * (1.0 - s); }

double mse(std::span<const double> pred, std::span<const double> target) {
  if (pred.empty()) {
    throw ValidationError("empty_input", "mse: empty input");
  }
  require_same_size(pred.size(), target.size(), "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

void mse_backward(std::span<const double> pred, std::span<const double> target,
                  double dloss, std::span<double> dpred) {
  require_same_size(pred.size(), target.size(), "mse_backward");
  require_same_size(pred.size(), dpred.size(), "mse_backward");
  const double c = 2.0 * dloss / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    dpred[i] += c * (pred[i] - target[i]);
  }
}

}  // namespace sgca::numkern
