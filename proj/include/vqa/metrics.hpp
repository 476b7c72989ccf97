#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vqa {

struct MetricReport {
  double srocc = 0.0;
  double krocc = 0.0;
  double plcc = 0.0;
  double rmse = 0.0;
};

/// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

// All correlations throw UndefinedCorrelation when either side is constant,
// and DimensionMismatch / EmptyInput for unequal or too-short inputs.

/// Pearson correlation of average ranks.
double srocc(std::span<const double> x, std::span<const double> y);
/// Kendall tau-b, O(n log n) (Knight's merge-sort count).
double krocc(std::span<const double> x, std::span<const double> y);
/// Raw Pearson correlation, no logistic fit.
double plcc(std::span<const double> x, std::span<const double> y);
double rmse(std::span<const double> x, std::span<const double> y);

MetricReport evaluate(std::span<const double> predictions, std::span<const double> mos);

using ScoreTable = std::vector<std::pair<std::string, double>>;

/// Inner join on clip_id. Every prediction must have a MOS row
/// (JoinError otherwise); duplicate ids on either side raise DuplicateId.
MetricReport evaluate(const ScoreTable& predictions, const ScoreTable& mos);

/// {"srocc":..,"krocc":..,"plcc":..,"rmse":..} with 6-decimal fixed values.
std::string metric_report_to_json(const MetricReport& report);

}  // namespace vqa
