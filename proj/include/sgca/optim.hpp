#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sgca/data.hpp"
#include "sgca/metrics.hpp"
#include "sgca/model.hpp"

namespace sgca::optim {

struct Hyper {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double clip_norm = 1.0;
  std::size_t epochs = 20;
  std::size_t batch_size = 8;
};

// First/second moment buffers mirror the parameter manifest exactly.
struct OptimState {
  std::size_t step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  Hyper hyper;
};

OptimState init_state(const model::ModelParams& params, const Hyper& hyper);

// Joint L2 norm over every gradient element; if it exceeds max_norm, every
// gradient is scaled by max_norm / norm. Returns the pre-clip norm. Throws
// NumericError naming the parameter on non-finite gradients.
double clip_global_norm(model::ModelParams& params, double max_norm);

// Decoupled weight decay applies to queries and head weights only.
void adamw_step(model::ModelParams& params, OptimState& state);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_rmse = 0.0;
  double dev_mae = 0.0;
  double dev_ccc = 0.0;
  std::array<double, 8> tau{};
};

struct TrainResult {
  model::ModelParams best_params;
  std::size_t best_epoch = 0;
  double best_dev_rmse = 0.0;
  std::vector<EpochLog> log;
};

// 20-epoch AdamW loop: per-epoch seeded shuffle, batches of hyper.batch_size
// (last partial batch kept), global-norm clipping, and dev selection by
// lowest total-score RMSE with ties resolved toward the earlier epoch.
TrainResult train(const data::Corpus& corpus, const data::QuerySet& queries,
                  const model::ModelConfig& config, const Hyper& hyper,
                  std::uint64_t seed);

// Checkpoint file: one line of JSON (format_version, config, seed, epoch,
// dev_rmse, param_manifest with byte offsets), then little-endian float64
// parameter data in manifest order.
void save_checkpoint(const std::filesystem::path& path,
                     const model::ModelParams& params, std::uint64_t seed,
                     std::size_t epoch, double dev_rmse);

struct Checkpoint {
  model::ModelParams params;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  double dev_rmse = 0.0;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sgca::optim
