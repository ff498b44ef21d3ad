#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace nne {

enum class Scale { desk, paper };

/// Knobs for one experiment run. Every scenario reads the subset it needs;
/// defaults depend on scenario and scale (see default_config).
struct ExperimentConfig {
  std::string scenario;
  Scale scale = Scale::desk;
  std::uint64_t seed = 20240917;
  std::string out_dir = "results";
  std::size_t threads = 0;
  bool timing = false;

  std::size_t replications = 20;
  std::size_t L_star = 10000;
  std::size_t R = 50;
  std::size_t n = 1000;
  std::size_t J = 30;
  std::size_t hidden_units = 64;
  std::vector<double> lambdas;
  std::vector<std::string> specs;

  // net training
  std::size_t max_epochs = 500;
  std::size_t patience = 25;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  std::string loss = "c2_diag";

  // scenario specific
  std::size_t smle_max_evaluations = 2000;
  std::size_t smm_R = 10;
  std::vector<int> lasso_degrees;
  std::vector<std::size_t> L_grid;
  std::vector<std::size_t> R_grid;
  std::vector<std::size_t> n_grid;
  std::vector<std::pair<double, double>> delta0_ranges;
  std::vector<std::size_t> hidden_candidates;
  std::string data;  ///< search CSV for real_data; synthetic data when empty
  std::size_t bootstrap = 20;
};

const std::vector<std::string>& scenario_ids();
bool is_scenario(const std::string& id);

std::string scale_name(Scale s);
Scale parse_scale(const std::string& s);

/// Defaults for a scenario at a scale. Throws ConfigError for an unknown scenario.
ExperimentConfig default_config(const std::string& scenario, Scale scale);

/// Overrides `base` with keys present in `doc`. Unknown keys raise ConfigError.
void apply_json(ExperimentConfig& base, const nlohmann::json& doc);

/// Reads a JSON config file. Its "scenario" and "scale" keys, when present,
/// pick the defaults the remaining keys override.
nlohmann::json read_json_file(const std::string& path);

nlohmann::json to_json(const ExperimentConfig& config);

/// Throws ConfigError when a knob is out of range.
void validate(const ExperimentConfig& config);

/// Hidden units for a training-set size: the power of two nearest to 64 * sqrt(L / 1e4).
std::size_t hidden_units_for(std::size_t L_star);

}  // namespace nne
