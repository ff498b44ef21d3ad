#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nne/config.hpp"
#include "nne/core_types.hpp"
#include "nne/csv_io.hpp"
#include "nne/nne.hpp"
#include "nne/search_model.hpp"
#include "nne/smle.hpp"
#include "nne/summary.hpp"

namespace nne::experiments {

/// A plot-ready table written as `<name>.csv`.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string cell(double v);
std::string cell(std::size_t v);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<io::EstimateRow> rows;
  std::vector<SummaryRecord> summary;
  std::vector<Table> tables;
  /// Other files written verbatim (name, content), e.g. generated search data.
  std::vector<std::pair<std::string, std::string>> files;
};

// -- search-model studies ------------------------------------------------------------

/// Everything one Monte Carlo or real-data estimation round computes. Stream
/// layout below a replication stream s:
///   s/0 covariates, s/1 observed shocks,
///   s/2/0 NNE training set (example l at s/2/0/l/attempt),
///   s/2/1/k/L net for moment spec k (index in all_moment_specs) trained on the first L examples,
///   s/3/R SMLE draws (shared across lambda), s/4 counterfactual shocks, s/5 fit-statistic shocks.
/// Counterfactuals and fit statistics reuse their shocks for every estimate.
struct SearchStudyOptions {
  std::size_t replications = 20;
  std::size_t n = 1000;
  std::size_t J = 30;
  /// NNE training sizes; nets for smaller sizes train on prefixes of one set. Empty disables NNE.
  std::vector<std::size_t> L_sizes{10000};
  /// Hidden units per training size (same length as L_sizes).
  std::vector<std::size_t> hidden_units{64};
  std::vector<search::MomentSpec> specs{search::MomentSpec::m46};
  net::TrainSpec train;
  /// SMLE draw counts; empty disables SMLE.
  std::vector<std::size_t> R_sizes;
  std::vector<double> lambdas;
  std::size_t smle_max_evaluations = 2000;
  ParamSpace space = search::default_space();
  bool counterfactual = false;
  bool fit_stats = false;
  bool timing = false;
  /// Path of the family stream; replication r uses family/r.
  std::vector<std::uint64_t> family{2};
};

struct NneFit {
  search::MomentSpec spec;
  std::size_t L = 0;
  EstimateReport report;
  std::optional<double> runtime_s;
  std::optional<search::CounterfactualResult> counterfactual;
  std::optional<search::KeyStats> fit;
};

struct SmleFit {
  std::size_t R = 0;
  double lambda = 0.0;
  baselines::SmleResult result;
  std::string seed_path;
  std::optional<double> runtime_s;
  std::optional<search::CounterfactualResult> counterfactual;
  std::optional<search::KeyStats> fit;
};

struct DatasetFit {
  search::KeyStats observed;
  std::vector<NneFit> nne;
  std::vector<SmleFit> smle;
};

struct SearchReplication {
  std::size_t replication = 0;
  std::string seed_path;
  DatasetFit fit;
  /// Under the true parameters, same shocks as the estimates' counterfactuals.
  std::optional<search::CounterfactualResult> truth_counterfactual;
};

/// Estimates on one dataset; `stream` plays the role of a replication stream (s/2.. are used).
DatasetFit fit_search_dataset(const std::shared_ptr<const search::ConsumerGrid>& grid,
                              const std::vector<search::SearchOutcome>& outcomes, const SearchStudyOptions& options,
                              const RngStream& stream);

/// Monte Carlo datasets under the true parameters, replications in parallel.
std::vector<SearchReplication> run_search_study(const SearchStudyOptions& options, std::uint64_t seed);

/// Method/spec labels used in result rows.
std::string nne_label(const NneFit& fit, const SearchStudyOptions& options);
std::string smle_label(const SmleFit& fit);

/// Estimate rows for every NNE and SMLE fit of every replication.
std::vector<io::EstimateRow> search_rows(const std::string& scenario, const std::vector<SearchReplication>& reps,
                                         const SearchStudyOptions& options);

std::map<std::string, double> search_truth();

/// Study options implied by a config (specs, L_star, R, lambdas, training knobs).
SearchStudyOptions search_options(const ExperimentConfig& config);

// -- runner -------------------------------------------------------------------------

/// Executes one scenario. Throws ConfigError for an invalid config.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes estimates.csv, summary.csv, every table and config.json into `dir`,
/// creating it. Throws ConfigError when the directory is not writable.
void write_experiment(const ExperimentResult& result, const std::string& dir);

/// Creates `dir` and checks a file can be written there. Throws ConfigError otherwise.
void ensure_writable(const std::string& dir);

/// Synthetic search data shaped like the hotel sessions: n consumers with J or J+1 options.
io::SearchData synthetic_search_data(std::size_t n, std::size_t J, const RngStream& rng);

}  // namespace nne::experiments
