#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "sgca/data.hpp"
#include "sgca/model.hpp"

namespace sgca::metrics {

double rmse(std::span<const double> pred, std::span<const double> truth);
double mae(std::span<const double> pred, std::span<const double> truth);

// Lin's concordance correlation coefficient with population (1/n) moments:
// 2*cov / (var_p + var_t + (mean_p - mean_t)^2). Both inputs constant and
// equal gives 1; any other zero denominator gives 0. Needs n >= 2.
double ccc(std::span<const double> pred, std::span<const double> truth);

struct SymptomMetrics {
  double rmse = 0.0;
  double mae = 0.0;
};

struct MetricsReport {
  double total_rmse = 0.0;
  double total_mae = 0.0;
  double total_ccc = 0.0;
  std::array<SymptomMetrics, 8> per_symptom{};
  std::size_t n = 0;
};

MetricsReport report_from_predictions(
    const std::vector<std::array<double, 8>>& pred,
    const std::vector<std::array<int, 8>>& truth);

// Dropout-off forward per participant, in id order.
MetricsReport evaluate(const model::ModelParams& params,
                       std::span<const data::ParticipantRecord* const> records);

std::string format_table(const MetricsReport& report);

}  // namespace sgca::metrics
