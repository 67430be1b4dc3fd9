#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sgca/data.hpp"
#include "sgca/metrics.hpp"
#include "sgca/model.hpp"
#include "sgca/optim.hpp"

namespace sgca::harness {

struct CorpusSource {
  std::optional<std::filesystem::path> manifest;
  std::optional<data::SyntheticSpec> synthetic;
};

struct ExperimentSpec {
  CorpusSource corpus;
  std::optional<std::filesystem::path> queries;  // required with a manifest
  model::ModelConfig model_config;
  optim::Hyper hyper;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

// Reads the config JSON (keys: corpus, queries, model, optim, seed, out);
// relative paths resolve against the config file's directory.
ExperimentSpec load_spec(const std::filesystem::path& config_path);

struct LoadedInputs {
  data::Corpus corpus;
  data::QuerySet queries;
  std::optional<data::RelevanceSets> relevance;  // synthetic corpora only
};

LoadedInputs load_inputs(const ExperimentSpec& spec);

struct RunArtifacts {
  optim::TrainResult train;
  metrics::MetricsReport dev_report;
  std::optional<metrics::MetricsReport> test_report;
  std::filesystem::path checkpoint_path;
};

// Trains and writes run.json, checkpoint.bin, log.jsonl, metrics.json under
// spec.out_dir.
RunArtifacts run_training(const ExperimentSpec& spec);
RunArtifacts run_training_on(const LoadedInputs& inputs,
                             const ExperimentSpec& spec);

struct AblationRow {
  std::string tau_mode;
  double rmse = 0.0;
  double mae = 0.0;
  double ccc = 0.0;
};

// Three runs differing only in tau_mode (none / global / per_symptom), same
// seed and data order; test-split metrics land in ablation.json.
std::vector<AblationRow> run_tau_ablation(const ExperimentSpec& spec);
std::string format_ablation_table(const std::vector<AblationRow>& rows);

struct AttentionSummary {
  std::size_t n_participants = 0;
  std::array<double, 8> mean_entropy{};
  bool has_relevance = false;
  double planted_recovery = 0.0;  // top-1 hit rate over label>0 pairs
};

// Exports attention/<id>.json per test participant plus
// attention_summary.json. Picks up relevance.json next to the manifest when
// present.
AttentionSummary run_attention_report(
    const std::filesystem::path& checkpoint_path,
    const std::filesystem::path& manifest_path,
    const std::filesystem::path& out_dir);

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t n_params = 0;
  std::string worst_param;
};

// Central finite differences (h = 1e-5) against the analytic gradients over
// every parameter of a small randomly initialized model, dropout off.
GradCheckResult gradcheck(std::size_t dim, std::size_t segments,
                          std::size_t hidden, std::uint64_t seed);

}  // namespace sgca::harness
