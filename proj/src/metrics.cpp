#include "sgca/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace sgca::metrics {

namespace {

void require_lengths(std::span<const double> a, std::span<const double> b,
                     std::size_t min_len, const char* what) {
  if (a.size() != b.size()) {
    throw ValidationError("length_mismatch",
                          std::string(what) + ": " + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + " values");
  }
  if (a.size() < min_len) {
    throw ValidationError("too_few_values",
                          std::string(what) + ": needs at least " +
                              std::to_string(min_len) + " values");
  }
}

double mean_of(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> truth) {
  require_lengths(pred, truth, 1, "rmse");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> truth) {
  require_lengths(pred, truth, 1, "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    acc += std::fabs(pred[i] - truth[i]);
  }
  return acc / static_cast<double>(pred.size());
}

double ccc(std::span<const double> pred, std::span<const double> truth) {
  require_lengths(pred, truth, 2, "ccc");
  const double mp = mean_of(pred);
  const double mt = mean_of(truth);
  double cov = 0.0, vp = 0.0, vt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    cov += (pred[i] - mp) * (truth[i] - mt);
    vp += (pred[i] - mp) * (pred[i] - mp);
    vt += (truth[i] - mt) * (truth[i] - mt);
  }
  const double n = static_cast<double>(pred.size());
  cov /= n;
  vp /= n;
  vt /= n;
  const double denom = vp + vt + (mp - mt) * (mp - mt);
  if (denom == 0.0) return 1.0;  // both constant with equal means
  return 2.0 * cov / denom;
}

MetricsReport report_from_predictions(
    const std::vector<std::array<double, 8>>& pred,
    const std::vector<std::array<int, 8>>& truth) {
  if (pred.size() != truth.size() || pred.empty()) {
    throw ValidationError("length_mismatch",
                          "report_from_predictions: needs matching, non-empty "
                          "prediction and truth lists");
  }
  const std::size_t n = pred.size();
  MetricsReport report;
  report.n = n;

  std::vector<double> pt(n), tt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double ps = 0.0;
    int ts = 0;
    for (std::size_t s = 0; s < 8; ++s) {
      ps += pred[i][s];
      ts += truth[i][s];
    }
    pt[i] = ps;
    tt[i] = static_cast<double>(ts);
  }
  report.total_rmse = rmse(pt, tt);
  report.total_mae = mae(pt, tt);
  report.total_ccc = n >= 2 ? ccc(pt, tt) : 0.0;

  std::vector<double> ps(n), ts(n);
  for (std::size_t s = 0; s < 8; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      ps[i] = pred[i][s];
      ts[i] = static_cast<double>(truth[i][s]);
    }
    report.per_symptom[s].rmse = rmse(ps, ts);
    report.per_symptom[s].mae = mae(ps, ts);
  }
  return report;
}

MetricsReport evaluate(
    const model::ModelParams& params,
    std::span<const data::ParticipantRecord* const> records) {
  if (records.empty()) {
    throw ValidationError("empty_split", "evaluate: no records");
  }
  std::vector<std::array<double, 8>> pred;
  std::vector<std::array<int, 8>> truth;
  pred.reserve(records.size());
  truth.reserve(records.size());
  for (const auto* rec : records) {
    std::vector<std::uint8_t> mask(rec->segments.rows, 1);
    const auto out =
        model::forward(params, rec->segments, mask, false, model::RngKey{});
    pred.push_back(out.symptom_scores);
    truth.push_back(rec->labels);
  }
  return report_from_predictions(pred, truth);
}

std::string format_table(const MetricsReport& report) {
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-16s %8s %8s %8s\n", "", "RMSE", "MAE",
                "CCC");
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-16s %8.3f %8.3f %8.3f\n", "total",
                report.total_rmse, report.total_mae, report.total_ccc);
  out += buf;
  for (std::size_t s = 0; s < 8; ++s) {
    std::snprintf(buf, sizeof(buf), "%-16s %8.3f %8.3f %8s\n",
                  std::string(kSymptomNames[s]).c_str(),
                  report.per_symptom[s].rmse, report.per_symptom[s].mae, "-");
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "n=%zu\n", report.n);
  out += buf;
  return out;
}

}  // namespace sgca::metrics
