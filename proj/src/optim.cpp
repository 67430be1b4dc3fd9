#include "sgca/optim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include <json.hpp>

#include "sgca/jsonio.hpp"
#include "sgca/kernels.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace sgca::optim {

OptimState init_state(const model::ModelParams& params, const Hyper& hyper) {
  OptimState state;
  state.hyper = hyper;
  model::for_each_param(
      params, [&state](const model::ParamInfo&, const DualTensor& t) {
        state.m.emplace_back(t.value.rows, t.value.cols);
        state.v.emplace_back(t.value.rows, t.value.cols);
      });
  return state;
}

double clip_global_norm(model::ModelParams& params, double max_norm) {
  double sq = 0.0;
  model::for_each_param(
      params, [&sq](const model::ParamInfo& info, DualTensor& t) {
        for (double g : t.grad.data) {
          if (!std::isfinite(g)) {
            throw NumericError("nonfinite_gradient",
                               "non-finite gradient in " + info.name);
          }
          sq += g * g;
        }
      });
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    model::for_each_param(params,
                          [factor](const model::ParamInfo&, DualTensor& t) {
                            kern::scale(t.grad.data.data(), factor,
                                        t.grad.size());
                          });
  }
  return norm;
}

void adamw_step(model::ModelParams& params, OptimState& state) {
  const Hyper& h = state.hyper;
  state.step += 1;
  const double bc1 =
      1.0 - std::pow(h.beta1, static_cast<double>(state.step));
  const double bc2 =
      1.0 - std::pow(h.beta2, static_cast<double>(state.step));

  std::size_t idx = 0;
  model::for_each_param(params, [&](const model::ParamInfo& info,
                                    DualTensor& t) {
    Matrix& m = state.m[idx];
    Matrix& v = state.v[idx];
    ++idx;
    if (!m.same_shape(t.grad)) {
      throw DimensionError("shape_mismatch",
                           "optimizer state does not match parameter " +
                               info.name);
    }
    for (std::size_t i = 0; i < t.value.size(); ++i) {
      const double g = t.grad.data[i];
      m.data[i] = h.beta1 * m.data[i] + (1.0 - h.beta1) * g;
      v.data[i] = h.beta2 * v.data[i] + (1.0 - h.beta2) * g * g;
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      const double p_old = t.value.data[i];
      t.value.data[i] = p_old - h.lr * (mhat / (std::sqrt(vhat) + h.eps));
      if (info.weight_decay) {
        t.value.data[i] -= h.lr * h.weight_decay * p_old;
      }
    }
  });
}

TrainResult train(const data::Corpus& corpus, const data::QuerySet& queries,
                  const model::ModelConfig& config, const Hyper& hyper,
                  std::uint64_t seed) {
  const auto train_recs = corpus.split_records(data::Split::train);
  const auto dev_recs = corpus.split_records(data::Split::dev);
  if (train_recs.empty() || dev_recs.empty()) {
    throw ValidationError("empty_split",
                          "training needs non-empty train and dev splits");
  }
  if (queries.vectors.cols != config.embed_dim) {
    throw DimensionError("dim_mismatch",
                         "query set dim " +
                             std::to_string(queries.vectors.cols) +
                             " vs model embed_dim " +
                             std::to_string(config.embed_dim));
  }

  model::ModelParams params = model::init_params(config, queries.vectors, seed);
  OptimState state = init_state(params, hyper);

  TrainResult result;
  result.best_dev_rmse = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train_recs.size());
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng = Rng::keyed(seed, stream::shuffle, epoch);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const std::size_t j = i + shuffle_rng.below(order.size() - i);
      std::swap(order[i], order[j]);
    }

    double loss_weighted = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size();
         start += hyper.batch_size, ++batch_index) {
      const std::size_t end =
          std::min(start + hyper.batch_size, order.size());
      std::vector<model::BatchItem> items;
      items.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const auto* rec = train_recs[order[i]];
        items.push_back({&rec->segments, rec->labels_d()});
      }
      params.zero_grad();
      const double loss = model::batch_forward_backward(
          params, items, true, model::RngKey{seed, epoch, batch_index});
      if (!std::isfinite(loss)) {
        throw NumericError("nonfinite_loss",
                           "non-finite loss at epoch " +
                               std::to_string(epoch) + ", batch " +
                               std::to_string(batch_index));
      }
      clip_global_norm(params, hyper.clip_norm);
      adamw_step(params, state);
      loss_weighted += loss * static_cast<double>(items.size());
    }

    const auto dev_report = metrics::evaluate(params, dev_recs);
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss =
        loss_weighted / static_cast<double>(train_recs.size());
    entry.dev_rmse = dev_report.total_rmse;
    entry.dev_mae = dev_report.total_mae;
    entry.dev_ccc = dev_report.total_ccc;
    entry.tau = params.taus();
    result.log.push_back(entry);

    // strict improvement only: ties keep the earlier epoch
    if (entry.dev_rmse < result.best_dev_rmse) {
      result.best_dev_rmse = entry.dev_rmse;
      result.best_epoch = epoch;
      result.best_params = params;
    }
  }
  return result;
}

void save_checkpoint(const std::filesystem::path& path,
                     const model::ModelParams& params, std::uint64_t seed,
                     std::size_t epoch, double dev_rmse) {
  const model::ModelConfig& cfg = params.config;
  jsonio::Writer w;
  w.begin_object();
  w.key("format_version").value(std::int64_t{1});
  w.key("config").begin_object();
  w.key("embed_dim").value(static_cast<std::uint64_t>(cfg.embed_dim));
  w.key("num_symptoms").value(static_cast<std::uint64_t>(cfg.num_symptoms));
  w.key("head_hidden").value(static_cast<std::uint64_t>(cfg.head_hidden));
  w.key("dropout_p").value(cfg.dropout_p);
  w.key("tau_mode").value(model::tau_mode_name(cfg.tau_mode));
  w.key("bounding").value(model::bounding_name(cfg.bounding));
  w.end_object();
  w.key("seed").value(static_cast<std::uint64_t>(seed));
  w.key("epoch").value(static_cast<std::uint64_t>(epoch));
  w.key("dev_rmse").value(dev_rmse);
  w.key("param_manifest").begin_array();
  std::size_t offset = 0;
  model::for_each_param(
      params, [&](const model::ParamInfo& info, const DualTensor& t) {
        w.begin_object();
        w.key("name").value(info.name);
        w.key("rows").value(static_cast<std::uint64_t>(t.value.rows));
        w.key("cols").value(static_cast<std::uint64_t>(t.value.cols));
        w.key("byte_offset").value(static_cast<std::uint64_t>(offset));
        w.end_object();
        offset += t.value.size() * sizeof(double);
      });
  w.end_array();
  w.end_object();

  std::string out = w.str();
  out += '\n';
  const std::size_t body_start = out.size();
  out.resize(body_start + offset);
  std::size_t pos = body_start;
  model::for_each_param(
      params, [&](const model::ParamInfo&, const DualTensor& t) {
        const std::size_t bytes = t.value.size() * sizeof(double);
        std::memcpy(out.data() + pos, t.value.data.data(), bytes);
        pos += bytes;
      });
  jsonio::write_file(path, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ValidationError("checkpoint_not_found",
                          "checkpoint does not exist: " + path.string());
  }
  const std::string raw = jsonio::read_file(path);
  const std::size_t nl = raw.find('\n');
  if (nl == std::string::npos) {
    throw FormatError("bad_checkpoint",
                      "checkpoint has no header line: " + path.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw.substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad_checkpoint",
                      "checkpoint header is not valid JSON: " +
                          std::string(e.what()));
  }
  Checkpoint ck;
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw FormatError("bad_checkpoint",
                        "unsupported checkpoint format_version");
    }
    const auto& jc = j.at("config");
    model::ModelConfig cfg;
    cfg.embed_dim = jc.at("embed_dim").get<std::size_t>();
    cfg.num_symptoms = jc.at("num_symptoms").get<std::size_t>();
    cfg.head_hidden = jc.at("head_hidden").get<std::size_t>();
    cfg.dropout_p = jc.at("dropout_p").get<double>();
    cfg.tau_mode =
        model::tau_mode_from_string(jc.at("tau_mode").get<std::string>());
    cfg.bounding =
        model::bounding_from_string(jc.at("bounding").get<std::string>());
    cfg.validate();

    ck.seed = j.at("seed").get<std::uint64_t>();
    ck.epoch = j.at("epoch").get<std::size_t>();
    ck.dev_rmse = j.at("dev_rmse").get<double>();
    ck.params = model::init_params(cfg, Matrix(8, cfg.embed_dim), 0);

    const auto& manifest = j.at("param_manifest");
    const char* body = raw.data() + nl + 1;
    const std::size_t body_size = raw.size() - nl - 1;
    std::size_t entry = 0;
    std::size_t expected_offset = 0;
    model::for_each_param(ck.params, [&](const model::ParamInfo& info,
                                         DualTensor& t) {
      if (entry >= manifest.size()) {
        throw FormatError("bad_checkpoint",
                          "param_manifest is missing " + info.name);
      }
      const auto& e = manifest[entry];
      ++entry;
      if (e.at("name").get<std::string>() != info.name ||
          e.at("rows").get<std::size_t>() != t.value.rows ||
          e.at("cols").get<std::size_t>() != t.value.cols ||
          e.at("byte_offset").get<std::size_t>() != expected_offset) {
        throw FormatError("bad_checkpoint",
                          "param_manifest entry mismatch at " + info.name);
      }
      const std::size_t bytes = t.value.size() * sizeof(double);
      if (expected_offset + bytes > body_size) {
        throw FormatError("truncated_file",
                          "checkpoint body too short for " + info.name);
      }
      std::memcpy(t.value.data.data(), body + expected_offset, bytes);
      expected_offset += bytes;
    });
    if (entry != manifest.size()) {
      throw FormatError("bad_checkpoint", "extra param_manifest entries");
    }
    if (expected_offset != body_size) {
      throw FormatError("bad_checkpoint",
                        "checkpoint body size mismatch: expected " +
                            std::to_string(expected_offset) + ", found " +
                            std::to_string(body_size));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad_checkpoint",
                      "malformed checkpoint header: " + std::string(e.what()));
  }
  return ck;
}

}  // namespace sgca::optim
