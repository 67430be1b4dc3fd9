#include "sgca/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgca/kernels.hpp"
#include "sgca/numkern.hpp"

namespace sgca::model {

TauMode tau_mode_from_string(const std::string& s) {
  if (s == "none") return TauMode::none;
  if (s == "global") return TauMode::global;
  if (s == "per_symptom") return TauMode::per_symptom;
  throw ValidationError("bad_tau_mode", "unknown tau mode: " + s);
}

const char* tau_mode_name(TauMode m) {
  switch (m) {
    case TauMode::none:
      return "none";
    case TauMode::global:
      return "global";
    case TauMode::per_symptom:
      return "per_symptom";
  }
  return "?";
}

Bounding bounding_from_string(const std::string& s) {
  if (s == "sigmoid3") return Bounding::sigmoid3;
  if (s == "clamp") return Bounding::clamp;
  throw ValidationError("bad_bounding", "unknown output bounding: " + s);
}

const char* bounding_name(Bounding b) {
  return b == Bounding::sigmoid3 ? "sigmoid3" : "clamp";
}

void ModelConfig::validate() const {
  if (num_symptoms != kNumSymptoms) {
    throw ValidationError("bad_config", "num_symptoms is fixed at 8 (PHQ-8)");
  }
  if (embed_dim < 1 || head_hidden < 1) {
    throw ValidationError("bad_config",
                          "embed_dim and head_hidden must be >= 1");
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw DomainError("dropout_probability",
                      "dropout_p must lie in [0,1), got " +
                          std::to_string(dropout_p));
  }
}

std::size_t ModelConfig::rho_count() const {
  switch (tau_mode) {
    case TauMode::none:
      return 0;
    case TauMode::global:
      return 1;
    case TauMode::per_symptom:
      return kNumSymptoms;
  }
  return 0;
}

std::size_t ModelConfig::param_count() const {
  const std::size_t d = embed_dim;
  const std::size_t h = head_hidden;
  return 8 * d + 6 * d + rho_count() + 8 * (d * h + h + h + 1);
}

double ModelParams::tau(std::size_t s) const {
  switch (config.tau_mode) {
    case TauMode::none:
      return 1.0;
    case TauMode::global:
      return std::exp(rho.value.at(0, 0));
    case TauMode::per_symptom:
      return std::exp(rho.value.at(0, s));
  }
  return 1.0;
}

std::array<double, 8> ModelParams::taus() const {
  std::array<double, 8> out{};
  for (std::size_t s = 0; s < 8; ++s) out[s] = tau(s);
  return out;
}

void ModelParams::zero_grad() {
  for_each_param(*this,
                 [](const ParamInfo&, DualTensor& t) { t.zero_grad(); });
}

void for_each_param(
    ModelParams& p,
    const std::function<void(const ParamInfo&, DualTensor&)>& fn) {
  fn({"queries", true}, p.queries);
  fn({"ln_q.gain", false}, p.ln_q.gain);
  fn({"ln_q.bias", false}, p.ln_q.bias);
  fn({"ln_k.gain", false}, p.ln_k.gain);
  fn({"ln_k.bias", false}, p.ln_k.bias);
  fn({"ln_v.gain", false}, p.ln_v.gain);
  fn({"ln_v.bias", false}, p.ln_v.bias);
  if (p.config.rho_count() > 0) fn({"rho", false}, p.rho);
  for (std::size_t s = 0; s < p.heads.size(); ++s) {
    const std::string prefix = "head" + std::to_string(s);
    fn({prefix + ".w1", true}, p.heads[s].w1);
    fn({prefix + ".b1", false}, p.heads[s].b1);
    fn({prefix + ".w2", true}, p.heads[s].w2);
    fn({prefix + ".b2", false}, p.heads[s].b2);
  }
}

void for_each_param(
    const ModelParams& p,
    const std::function<void(const ParamInfo&, const DualTensor&)>& fn) {
  for_each_param(const_cast<ModelParams&>(p),
                 [&fn](const ParamInfo& info, DualTensor& t) {
                   fn(info, static_cast<const DualTensor&>(t));
                 });
}

ModelParams init_params(const ModelConfig& cfg, const Matrix& query_init,
                        std::uint64_t seed) {
  cfg.validate();
  if (query_init.rows != 8 || query_init.cols != cfg.embed_dim) {
    throw DimensionError("shape_mismatch",
                         "query init must be 8x" +
                             std::to_string(cfg.embed_dim) + ", got " +
                             query_init.shape_str());
  }
  ModelParams p;
  p.config = cfg;
  p.queries = DualTensor(query_init);
  const std::size_t d = cfg.embed_dim;
  const std::size_t h = cfg.head_hidden;
  for (LayerNormParams* ln : {&p.ln_q, &p.ln_k, &p.ln_v}) {
    ln->gain = DualTensor(Matrix(1, d, 1.0));
    ln->bias = DualTensor(Matrix(1, d, 0.0));
  }
  p.rho = DualTensor(Matrix(1, cfg.rho_count(), 0.0));

  Rng rng = Rng::keyed(seed, stream::init);
  const double w1_bound = std::sqrt(1.0 / static_cast<double>(d));
  const double w2_bound = std::sqrt(1.0 / static_cast<double>(h));
  p.heads.resize(8);
  for (auto& head : p.heads) {
    Matrix w1(d, h);
    for (double& v : w1.data) v = (2.0 * rng.uniform() - 1.0) * w1_bound;
    head.w1 = DualTensor(std::move(w1));
    head.b1 = DualTensor(Matrix(1, h, 0.0));
    Matrix w2(h, 1);
    for (double& v : w2.data) v = (2.0 * rng.uniform() - 1.0) * w2_bound;
    head.w2 = DualTensor(std::move(w2));
    head.b2 = DualTensor(Matrix(1, 1, 0.0));
  }
  return p;
}

namespace {

struct ForwardCache {
  std::size_t n = 0;
  double inv_sqrt_d = 0.0;
  Matrix qn, qs;  // 8 x d; qs = qn / sqrt(d)
  Matrix k, v;    // N x d
  std::vector<numkern::LayerNormCtx> q_ctx, k_ctx, v_ctx;
  std::array<numkern::SoftmaxTempCtx, 8> sm;
  Matrix attn;  // 8 x N
  Matrix ctx;   // 8 x d, attention-weighted values
  std::array<std::vector<double>, 8> pre1, h, hd;
  std::array<numkern::DropoutCtx, 8> drop;
  std::array<double, 8> u{}, sig{}, y{};
};

void check_inputs(const ModelParams& p, const Matrix& segments,
                  const std::vector<std::uint8_t>& mask) {
  if (segments.rows == 0) {
    throw ValidationError("empty_segments", "forward: no segments");
  }
  if (segments.cols != p.config.embed_dim) {
    throw DimensionError("shape_mismatch",
                         "forward: segments are " + segments.shape_str() +
                             " but the model embed_dim is " +
                             std::to_string(p.config.embed_dim));
  }
  if (mask.size() != segments.rows) {
    throw DimensionError("shape_mismatch",
                         "forward: mask length " +
                             std::to_string(mask.size()) + " vs " +
                             std::to_string(segments.rows) + " segments");
  }
  if (std::find(mask.begin(), mask.end(), std::uint8_t{1}) == mask.end()) {
    throw ValidationError("all_masked", "forward: every segment is masked");
  }
}

// slot distinguishes participants inside a batch; the dropout stream is
// keyed by (seed, epoch, batch, slot*8 + head).
ForwardCache run_forward(const ModelParams& p, const Matrix& segments,
                         const std::vector<std::uint8_t>& mask, bool training,
                         const RngKey& key, std::size_t slot) {
  check_inputs(p, segments, mask);
  const std::size_t d = p.config.embed_dim;
  const std::size_t hdim = p.config.head_hidden;
  const std::size_t n = segments.rows;

  ForwardCache c;
  c.n = n;
  c.inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  c.qn = Matrix(8, d);
  c.q_ctx.resize(8);
  for (std::size_t s = 0; s < 8; ++s) {
    numkern::layernorm({p.queries.value.row_ptr(s), d},
                       {p.ln_q.gain.value.data.data(), d},
                       {p.ln_q.bias.value.data.data(), d},
                       numkern::kLayerNormEps, {c.qn.row_ptr(s), d},
                       &c.q_ctx[s]);
  }
  c.k = Matrix(n, d);
  c.v = Matrix(n, d);
  c.k_ctx.resize(n);
  c.v_ctx.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    numkern::layernorm({segments.row_ptr(i), d},
                       {p.ln_k.gain.value.data.data(), d},
                       {p.ln_k.bias.value.data.data(), d},
                       numkern::kLayerNormEps, {c.k.row_ptr(i), d},
                       &c.k_ctx[i]);
    numkern::layernorm({segments.row_ptr(i), d},
                       {p.ln_v.gain.value.data.data(), d},
                       {p.ln_v.bias.value.data.data(), d},
                       numkern::kLayerNormEps, {c.v.row_ptr(i), d},
                       &c.v_ctx[i]);
  }

  c.qs = c.qn;
  kern::scale(c.qs.data.data(), c.inv_sqrt_d, c.qs.size());

  // scores^T = K * (Q/sqrt(d))^T, built N-major so the reduction over the
  // embedding dimension vectorizes across the 8 symptom columns
  Matrix qst(d, 8);
  kern::transpose(c.qs.data.data(), qst.data.data(), 8, d);
  Matrix scores_t(n, 8);
  kern::matmul_nn(c.k.data.data(), qst.data.data(), scores_t.data.data(), n, d,
                  8, false);

  c.attn = Matrix(8, n);
  std::vector<double> row(n);
  for (std::size_t s = 0; s < 8; ++s) {
    for (std::size_t i = 0; i < n; ++i) row[i] = scores_t.at(i, s);
    c.sm[s] = numkern::softmax_temp(row, p.tau(s), mask);
    std::copy(c.sm[s].probs.begin(), c.sm[s].probs.end(), c.attn.row_ptr(s));
  }

  c.ctx = Matrix(8, d);
  kern::matmul_nn(c.attn.data.data(), c.v.data.data(), c.ctx.data.data(), 8, n,
                  d, false);

  for (std::size_t s = 0; s < 8; ++s) {
    const HeadParams& head = p.heads[s];
    c.pre1[s].assign(hdim, 0.0);
    kern::matmul_nn(c.ctx.row_ptr(s), head.w1.value.data.data(),
                    c.pre1[s].data(), 1, d, hdim, false);
    for (std::size_t j = 0; j < hdim; ++j) {
      c.pre1[s][j] += head.b1.value.at(0, j);
    }
    c.h[s].resize(hdim);
    numkern::relu(c.pre1[s], c.h[s]);
    c.hd[s].resize(hdim);
    Rng drop_rng = Rng::keyed(key.seed, stream::dropout, key.epoch, key.batch,
                              slot * 8 + s);
    numkern::dropout(c.h[s], p.config.dropout_p, training, drop_rng, c.hd[s],
                     &c.drop[s]);

    double u = head.b2.value.at(0, 0);
    for (std::size_t j = 0; j < hdim; ++j) {
      u += c.hd[s][j] * head.w2.value.at(j, 0);
    }
    c.u[s] = u;
    if (p.config.bounding == Bounding::sigmoid3) {
      c.sig[s] = numkern::sigmoid(u);
      c.y[s] = 3.0 * c.sig[s];
    } else {
      c.y[s] = std::clamp(u, 0.0, 3.0);
    }
  }
  return c;
}

// Accumulates raw (unscaled) gradients for one participant into p's grad
// buffers; loss_scale multiplies the upstream dL to support batch averaging.
double run_backward(ModelParams& p, const Matrix& segments,
                    const std::vector<std::uint8_t>& mask,
                    const std::array<double, 8>& labels, bool training,
                    const RngKey& key, std::size_t slot, double loss_scale) {
  ForwardCache c = run_forward(p, segments, mask, training, key, slot);
  const std::size_t d = p.config.embed_dim;
  const std::size_t hdim = p.config.head_hidden;
  const std::size_t n = c.n;

  const double loss = numkern::mse(c.y, labels);
  std::array<double, 8> dy{};
  numkern::mse_backward(c.y, labels, loss_scale, dy);

  Matrix dctx(8, d);   // dL/d(attention-weighted values)
  Matrix dattn(8, n);  // dL/d(attention weights)
  std::vector<double> dhd(hdim), dh(hdim), dpre1(hdim);

  for (std::size_t s = 0; s < 8; ++s) {
    HeadParams& head = p.heads[s];
    double du;
    if (p.config.bounding == Bounding::sigmoid3) {
      du = numkern::sigmoid_backward(c.sig[s], 3.0 * dy[s]);
    } else {
      // clamp derivative is 0 on and outside the bounds
      du = (c.u[s] > 0.0 && c.u[s] < 3.0) ? dy[s] : 0.0;
    }
    head.b2.grad.at(0, 0) += du;
    std::fill(dhd.begin(), dhd.end(), 0.0);
    for (std::size_t j = 0; j < hdim; ++j) {
      head.w2.grad.at(j, 0) += c.hd[s][j] * du;
      dhd[j] += du * head.w2.value.at(j, 0);
    }
    std::fill(dh.begin(), dh.end(), 0.0);
    numkern::dropout_backward(c.drop[s], dhd, dh);
    std::fill(dpre1.begin(), dpre1.end(), 0.0);
    numkern::relu_backward(c.pre1[s], dh, dpre1);
    for (std::size_t j = 0; j < hdim; ++j) {
      head.b1.grad.at(0, j) += dpre1[j];
    }
    kern::matmul_tn(c.ctx.row_ptr(s), dpre1.data(), head.w1.grad.data.data(),
                    1, d, hdim, true);
    // dctx_s = dpre1 * w1^T, via rows of w1 to keep ascending-index sums
    kern::matmul_nn(head.w1.value.data.data(), dpre1.data(), dctx.row_ptr(s),
                    d, hdim, 1, false);
  }

  // ctx = attn * V
  Matrix dv(n, d);
  kern::matmul_tn(c.attn.data.data(), dctx.data.data(), dv.data.data(), 8, n,
                  d, false);
  {
    Matrix dctx_t(d, 8);
    kern::transpose(dctx.data.data(), dctx_t.data.data(), 8, d);
    Matrix dattn_t(n, 8);
    kern::matmul_nn(c.v.data.data(), dctx_t.data.data(), dattn_t.data.data(),
                    n, d, 8, false);
    kern::transpose(dattn_t.data.data(), dattn.data.data(), n, 8);
  }

  // softmax with temperature; tau = exp(rho) so d rho = d tau * tau
  Matrix dscores_t(n, 8);
  std::vector<double> dscores(n);
  for (std::size_t s = 0; s < 8; ++s) {
    std::fill(dscores.begin(), dscores.end(), 0.0);
    double dtau = 0.0;
    numkern::softmax_temp_backward(c.sm[s], {dattn.row_ptr(s), n}, dscores,
                                   &dtau);
    for (std::size_t i = 0; i < n; ++i) dscores_t.at(i, s) = dscores[i];
    if (p.config.tau_mode == TauMode::per_symptom) {
      p.rho.grad.at(0, s) += dtau * p.tau(s);
    } else if (p.config.tau_mode == TauMode::global) {
      p.rho.grad.at(0, 0) += dtau * p.tau(s);
    }
  }

  // scores^T = K * qs^T
  Matrix dk(n, d);
  kern::matmul_nn(dscores_t.data.data(), c.qs.data.data(), dk.data.data(), n,
                  8, d, false);
  Matrix dqs_t(d, 8);
  kern::matmul_tn(c.k.data.data(), dscores_t.data.data(), dqs_t.data.data(), n,
                  d, 8, false);

  // LayerNorm backward into the query matrix and all LN parameters
  std::vector<double> dqn_row(d);
  for (std::size_t s = 0; s < 8; ++s) {
    for (std::size_t j = 0; j < d; ++j) {
      dqn_row[j] = dqs_t.at(j, s) * c.inv_sqrt_d;
    }
    numkern::layernorm_backward(c.q_ctx[s], {p.ln_q.gain.value.data.data(), d},
                                dqn_row, {p.queries.grad.row_ptr(s), d},
                                {p.ln_q.gain.grad.data.data(), d},
                                {p.ln_q.bias.grad.data.data(), d});
  }
  std::vector<double> dx_scratch(d);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(dx_scratch.begin(), dx_scratch.end(), 0.0);
    numkern::layernorm_backward(c.k_ctx[i], {p.ln_k.gain.value.data.data(), d},
                                {dk.row_ptr(i), d}, dx_scratch,
                                {p.ln_k.gain.grad.data.data(), d},
                                {p.ln_k.bias.grad.data.data(), d});
    std::fill(dx_scratch.begin(), dx_scratch.end(), 0.0);
    numkern::layernorm_backward(c.v_ctx[i], {p.ln_v.gain.value.data.data(), d},
                                {dv.row_ptr(i), d}, dx_scratch,
                                {p.ln_v.gain.grad.data.data(), d},
                                {p.ln_v.bias.grad.data.data(), d});
  }
  return loss;
}

ForwardOutput output_from_cache(const ForwardCache& c) {
  ForwardOutput out;
  out.symptom_scores = c.y;
  out.total = 0.0;
  for (std::size_t s = 0; s < 8; ++s) out.total += c.y[s];
  out.attention.weights = c.attn;
  out.attention.segment_ids.resize(c.n);
  std::iota(out.attention.segment_ids.begin(),
            out.attention.segment_ids.end(), std::size_t{0});
  return out;
}

}  // namespace

ForwardOutput forward(const ModelParams& p, const Matrix& segments,
                      const std::vector<std::uint8_t>& mask, bool training,
                      const RngKey& key) {
  return output_from_cache(run_forward(p, segments, mask, training, key, 0));
}

double loss_only(const ModelParams& p, const Matrix& segments,
                 const std::vector<std::uint8_t>& mask,
                 const std::array<double, 8>& labels, bool training,
                 const RngKey& key) {
  ForwardCache c = run_forward(p, segments, mask, training, key, 0);
  return numkern::mse(c.y, labels);
}

double backward(ModelParams& p, const Matrix& segments,
                const std::vector<std::uint8_t>& mask,
                const std::array<double, 8>& labels, bool training,
                const RngKey& key) {
  return run_backward(p, segments, mask, labels, training, key, 0, 1.0);
}

double batch_forward_backward(ModelParams& p, std::span<const BatchItem> batch,
                              bool training, const RngKey& key) {
  if (batch.empty()) {
    throw ValidationError("empty_batch", "batch_forward_backward: no items");
  }
  const std::size_t d = p.config.embed_dim;
  std::size_t max_n = 0;
  for (const auto& item : batch) {
    if (item.segments == nullptr || item.segments->rows == 0) {
      throw ValidationError("empty_segments",
                            "batch_forward_backward: empty participant");
    }
    max_n = std::max(max_n, item.segments->rows);
  }

  // stash current grads, accumulate the batch sum, then average and restore
  std::vector<Matrix> saved;
  for_each_param(p, [&saved](const ParamInfo&, DualTensor& t) {
    saved.push_back(t.grad);
    t.grad.fill(0.0);
  });

  double loss_sum = 0.0;
  Matrix padded(max_n, d);
  std::vector<std::uint8_t> mask(max_n);
  for (std::size_t slot = 0; slot < batch.size(); ++slot) {
    const Matrix& seg = *batch[slot].segments;
    if (seg.cols != d) {
      throw DimensionError("shape_mismatch",
                           "batch item " + std::to_string(slot) +
                               ": segments are " + seg.shape_str() +
                               " but embed_dim is " + std::to_string(d));
    }
    padded.fill(0.0);
    std::copy(seg.data.begin(), seg.data.end(), padded.data.begin());
    std::fill(mask.begin(), mask.end(), std::uint8_t{0});
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(seg.rows),
              std::uint8_t{1});
    loss_sum += run_backward(p, padded, mask, batch[slot].labels, training,
                             key, slot, 1.0);
  }

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::size_t idx = 0;
  for_each_param(p, [&](const ParamInfo&, DualTensor& t) {
    kern::scale(t.grad.data.data(), inv_b, t.grad.size());
    kern::axpy(1.0, saved[idx].data.data(), t.grad.data.data(),
               t.grad.size());
    ++idx;
  });
  return loss_sum * inv_b;
}

AttentionRecord export_attention(const ForwardOutput& out,
                                 const std::string& participant_id) {
  AttentionRecord rec;
  rec.participant_id = participant_id;
  rec.segment_ids = out.attention.segment_ids;
  rec.weights = out.attention.weights;
  const std::size_t n = rec.weights.cols;
  const std::size_t k = std::min<std::size_t>(3, n);
  for (std::size_t s = 0; s < 8; ++s) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const double* w = rec.weights.row_ptr(s);
    std::sort(order.begin(), order.end(),
              [w](std::size_t a, std::size_t b) {
                if (w[a] != w[b]) return w[a] > w[b];
                return a < b;
              });
    rec.topk[s].assign(order.begin(),
                       order.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return rec;
}

}  // namespace sgca::model
