#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sgca/matrix.hpp"
#include "sgca/rng.hpp"
#include "sgca/symptoms.hpp"

namespace sgca::model {

enum class TauMode { none, global, per_symptom };
enum class Bounding { sigmoid3, clamp };

TauMode tau_mode_from_string(const std::string& s);
const char* tau_mode_name(TauMode m);
Bounding bounding_from_string(const std::string& s);
const char* bounding_name(Bounding b);

struct ModelConfig {
  std::size_t embed_dim = 1024;
  std::size_t num_symptoms = kNumSymptoms;  // PHQ-8, fixed
  std::size_t head_hidden = 128;
  double dropout_p = 0.1;
  TauMode tau_mode = TauMode::per_symptom;
  Bounding bounding = Bounding::sigmoid3;

  void validate() const;
  std::size_t rho_count() const;
  std::size_t param_count() const;
};

struct LayerNormParams {
  DualTensor gain;  // 1 x d
  DualTensor bias;  // 1 x d
};

// Regression head; w1 is stored input-major (d x hidden) and applied as
// x * w1, which keeps the kernel reductions in ascending-index order.
struct HeadParams {
  DualTensor w1;  // d x hidden
  DualTensor b1;  // 1 x hidden
  DualTensor w2;  // hidden x 1
  DualTensor b2;  // 1 x 1
};

struct ModelParams {
  ModelConfig config;
  DualTensor queries;  // 8 x d, trainable, initialized from a QuerySet
  LayerNormParams ln_q, ln_k, ln_v;
  DualTensor rho;  // tau log-parameters: 1x8 per_symptom, 1x1 global, 1x0 none
  std::vector<HeadParams> heads;  // 8

  double tau(std::size_t s) const;  // exp(rho) under the configured mode
  std::array<double, 8> taus() const;
  void zero_grad();
};

struct ParamInfo {
  std::string name;
  bool weight_decay;  // queries and head weights decay; biases, LayerNorm
                      // parameters and rho do not
};

// Visits every parameter in the fixed manifest order (queries, LayerNorms,
// rho, heads). Checkpoints, the optimizer state and gradient flattening all
// share this order.
void for_each_param(ModelParams& p,
                    const std::function<void(const ParamInfo&, DualTensor&)>& fn);
void for_each_param(
    const ModelParams& p,
    const std::function<void(const ParamInfo&, const DualTensor&)>& fn);

// query_init is the 8 x d QuerySet matrix; head weights draw uniform
// +-sqrt(1/fan_in) from the seeded generator, everything else is
// deterministic (LayerNorm gain 1 / bias 0, rho 0).
ModelParams init_params(const ModelConfig& cfg, const Matrix& query_init,
                        std::uint64_t seed);

struct AttentionMap {
  Matrix weights;  // 8 x N, rows sum to 1 over unmasked columns
  std::vector<std::size_t> segment_ids;
};

struct ForwardOutput {
  std::array<double, 8> symptom_scores{};
  double total = 0.0;
  AttentionMap attention;
};

// Stream key for the counter-based dropout generator; masks depend only on
// (seed, epoch, batch, slot, head), never on the data.
struct RngKey {
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  std::uint64_t batch = 0;
};

ForwardOutput forward(const ModelParams& p, const Matrix& segments,
                      const std::vector<std::uint8_t>& mask, bool training,
                      const RngKey& key);

double loss_only(const ModelParams& p, const Matrix& segments,
                 const std::vector<std::uint8_t>& mask,
                 const std::array<double, 8>& labels, bool training,
                 const RngKey& key);

// MSE over the 8 symptom scores; accumulates exact gradients into every
// parameter's grad buffer and returns the loss.
double backward(ModelParams& p, const Matrix& segments,
                const std::vector<std::uint8_t>& mask,
                const std::array<double, 8>& labels, bool training,
                const RngKey& key);

struct BatchItem {
  const Matrix* segments = nullptr;
  std::array<double, 8> labels{};
};

// Pads every participant to the longest N in the batch (padding masked),
// averages the per-participant losses and gradients, and accumulates the
// averaged gradients. A batch of one is bit-identical to backward().
double batch_forward_backward(ModelParams& p, std::span<const BatchItem> batch,
                              bool training, const RngKey& key);

struct AttentionRecord {
  std::string participant_id;
  std::vector<std::size_t> segment_ids;
  Matrix weights;                             // 8 x N
  std::array<std::vector<std::size_t>, 8> topk;  // per symptom, k=3, ties to
                                                 // the lower index
};

AttentionRecord export_attention(const ForwardOutput& out,
                                 const std::string& participant_id);

}  // namespace sgca::model
