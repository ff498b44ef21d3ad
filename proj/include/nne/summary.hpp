#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nne/csv_io.hpp"

namespace nne {

struct ParameterSummary {
  std::string parameter;
  std::size_t replications = 0;
  double mean = 0.0;
  double sd = 0.0;  ///< Monte Carlo SD of the estimates (divides by R - 1; 0 when R = 1)
  double mean_accuracy = 0.0;  ///< average reported SD, NaN when none reported
  std::optional<double> bias;
  std::optional<double> bias_se;  ///< sd / sqrt(R)
  std::optional<double> rmse;
};

/// One record per (scenario, method, spec).
struct SummaryRecord {
  std::string scenario;
  std::string method;
  std::string spec;
  std::size_t replications = 0;
  std::vector<ParameterSummary> parameters;
  /// Filled when truth is known. For several parameters rmse is the root mean
  /// squared Euclidean distance between estimate and truth, bias is the signed
  /// bias of a single parameter or the Euclidean norm of the bias vector.
  std::optional<double> bias;
  std::optional<double> bias_se;
  std::optional<double> rmse;
  std::optional<double> rmse_se;  ///< se(MSE) / (2 RMSE)
  std::optional<double> total_abs_bias;
};

/// Groups rows by (scenario, method, spec) in first-appearance order; parameters
/// keep first-appearance order. Parameters missing from `truth` get fit statistics only.
std::vector<SummaryRecord> summarize(const std::vector<io::EstimateRow>& rows,
                                     const std::map<std::string, double>& truth = {});

void write_summary_csv(std::ostream& out, const std::vector<SummaryRecord>& records);

}  // namespace nne
