#include "nne/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "nne/errors.hpp"

namespace nne {

const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids = {
      "ar1_table2",       "ar1_fig3_curves", "search_mc",    "search_rmse_vs_cost",  "search_moment_sweep",
      "search_data_size", "smoothing_grid",  "theta_misspec", "accuracy_calibration", "counterfactual",
      "real_data"};
  return ids;
}

bool is_scenario(const std::string& id) {
  const auto& ids = scenario_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

std::string scale_name(Scale s) { return s == Scale::desk ? "desk" : "paper"; }

Scale parse_scale(const std::string& s) {
  if (s == "desk") return Scale::desk;
  if (s == "paper") return Scale::paper;
  throw ConfigError("scale must be 'desk' or 'paper', got '" + s + "'");
}

std::size_t hidden_units_for(std::size_t L_star) {
  const double target = 64.0 * std::sqrt(static_cast<double>(L_star) / 1e4);
  const double e = std::round(std::log2(std::max(target, 1.0)));
  return static_cast<std::size_t>(std::llround(std::exp2(e)));
}

ExperimentConfig default_config(const std::string& scenario, Scale scale) {
  if (!is_scenario(scenario)) throw ConfigError("unknown scenario '" + scenario + "'");
  const bool paper = scale == Scale::paper;
  ExperimentConfig c;
  c.scenario = scenario;
  c.scale = scale;
  c.replications = paper ? 100 : 20;
  c.specs = {"m46"};
  if (scenario == "ar1_table2" || scenario == "ar1_fig3_curves") {
    c.replications = 1000;
    c.L_star = 1000;
    c.n = 100;
    c.J = 0;
    c.hidden_units = 32;
    c.specs = {"ar1_row1", "ar1_row2", "ar1_row3", "ar1_row4", "ar1_row5", "ar1_row6"};
    c.lasso_degrees = paper ? std::vector<int>{2, 3} : std::vector<int>{2};
    // 900 training series give a noisy validation loss; smaller batches and
    // longer patience let training converge (chosen by validation loss)
    c.batch_size = 32;
    c.learning_rate = 3e-3;
    c.patience = 100;
    c.max_epochs = 2000;
    if (scenario == "ar1_fig3_curves") {
      // 25 training points and 4-node nets, the illustration's own settings
      c.specs = {"ar1_row1"};
      c.replications = 1;
      c.L_star = 25;
      c.hidden_units = 4;
      c.max_epochs = 5000;
      c.patience = 500;
      c.learning_rate = 1e-2;
      c.lasso_degrees.clear();
    }
  } else if (scenario == "search_mc") {
    c.lambdas = {3, 7, 10};
  } else if (scenario == "search_rmse_vs_cost") {
    c.L_grid = paper ? std::vector<std::size_t>{2500, 10000, 50000, 200000} : std::vector<std::size_t>{2500, 10000};
    c.R_grid = paper ? std::vector<std::size_t>{5, 25, 100, 400} : std::vector<std::size_t>{5, 25};
    c.lambdas = {7};
  } else if (scenario == "search_moment_sweep") {
    c.specs = {"m16", "m32", "m40", "m46", "m60", "m81"};
  } else if (scenario == "search_data_size") {
    c.n_grid = paper ? std::vector<std::size_t>{500, 1000, 2500, 5000} : std::vector<std::size_t>{500, 1000};
    // (L_grid[k], R_grid[k]) carry matched simulation burdens
    c.L_grid = paper ? std::vector<std::size_t>{10000, 40000} : std::vector<std::size_t>{10000};
    c.R_grid = paper ? std::vector<std::size_t>{15, 50} : std::vector<std::size_t>{15};
    c.lambdas = {3, 7, 10};
  } else if (scenario == "smoothing_grid") {
    if (paper) {
      for (int l = 1; l <= 15; ++l) c.lambdas.push_back(l);
    } else {
      c.lambdas = {1, 3, 5, 7, 9, 11, 15};
    }
  } else if (scenario == "theta_misspec") {
    c.delta0_ranges = {{-3.0, -2.0}, {-3.5, -2.0}, {-4.0, -2.0}, {-5.0, -2.0}};
  } else if (scenario == "counterfactual") {
    c.lambdas = {3, 7, 10};
  } else if (scenario == "real_data") {
    c.n = 1055;
    c.J = 33;
    c.lambdas = {3, 7, 10};
    c.bootstrap = paper ? 100 : 20;
    c.replications = 1;
  }
  return c;
}

namespace {

template <class T>
void read(const nlohmann::json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

}  // namespace

void apply_json(ExperimentConfig& c, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
  static const std::vector<std::string> known = {
      "scenario", "scale",      "seed",         "out_dir",   "threads",   "timing",  "replications",
      "L_star",   "R",          "n",            "J",         "hidden_units", "lambda", "spec_id",
      "max_epochs", "patience", "batch_size",   "learning_rate", "loss",   "smle_max_evaluations", "smm_R",
      "lasso_degrees", "L_grid", "R_grid",      "n_grid",    "delta0_ranges", "hidden_candidates", "data",
      "bootstrap"};
  for (const auto& [key, value] : doc.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown config key '" + key + "'");
  try {
    read(doc, "scenario", c.scenario);
    if (doc.contains("scale")) c.scale = parse_scale(doc.at("scale").get<std::string>());
    read(doc, "seed", c.seed);
    read(doc, "out_dir", c.out_dir);
    read(doc, "threads", c.threads);
    read(doc, "timing", c.timing);
    read(doc, "replications", c.replications);
    read(doc, "L_star", c.L_star);
    read(doc, "R", c.R);
    read(doc, "n", c.n);
    read(doc, "J", c.J);
    read(doc, "hidden_units", c.hidden_units);
    if (doc.contains("lambda")) {
      const auto& l = doc.at("lambda");
      c.lambdas = l.is_array() ? l.get<std::vector<double>>() : std::vector<double>{l.get<double>()};
    }
    if (doc.contains("spec_id")) {
      const auto& s = doc.at("spec_id");
      c.specs = s.is_array() ? s.get<std::vector<std::string>>() : std::vector<std::string>{s.get<std::string>()};
    }
    read(doc, "max_epochs", c.max_epochs);
    read(doc, "patience", c.patience);
    read(doc, "batch_size", c.batch_size);
    read(doc, "learning_rate", c.learning_rate);
    read(doc, "loss", c.loss);
    read(doc, "smle_max_evaluations", c.smle_max_evaluations);
    read(doc, "smm_R", c.smm_R);
    read(doc, "lasso_degrees", c.lasso_degrees);
    read(doc, "L_grid", c.L_grid);
    read(doc, "R_grid", c.R_grid);
    read(doc, "n_grid", c.n_grid);
    read(doc, "delta0_ranges", c.delta0_ranges);
    read(doc, "hidden_candidates", c.hidden_candidates);
    read(doc, "data", c.data);
    read(doc, "bootstrap", c.bootstrap);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["scenario"] = c.scenario;
  j["scale"] = scale_name(c.scale);
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["timing"] = c.timing;
  j["replications"] = c.replications;
  j["L_star"] = c.L_star;
  j["R"] = c.R;
  j["n"] = c.n;
  j["J"] = c.J;
  j["hidden_units"] = c.hidden_units;
  j["lambda"] = c.lambdas;
  j["spec_id"] = c.specs;
  j["max_epochs"] = c.max_epochs;
  j["patience"] = c.patience;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["loss"] = c.loss;
  j["smle_max_evaluations"] = c.smle_max_evaluations;
  j["smm_R"] = c.smm_R;
  j["lasso_degrees"] = c.lasso_degrees;
  j["L_grid"] = c.L_grid;
  j["R_grid"] = c.R_grid;
  j["n_grid"] = c.n_grid;
  j["delta0_ranges"] = c.delta0_ranges;
  j["hidden_candidates"] = c.hidden_candidates;
  j["data"] = c.data;
  j["bootstrap"] = c.bootstrap;
  return j;
}

void validate(const ExperimentConfig& c) {
  if (!is_scenario(c.scenario)) throw ConfigError("unknown scenario '" + c.scenario + "'");
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(c.replications, "replications");
  positive(c.L_star, "L_star");
  positive(c.R, "R");
  positive(c.n, "n");
  positive(c.hidden_units, "hidden_units");
  positive(c.max_epochs, "max_epochs");
  positive(c.batch_size, "batch_size");
  positive(c.smle_max_evaluations, "smle_max_evaluations");
  positive(c.smm_R, "smm_R");
  if (c.L_star < 10) throw ConfigError("L_star must be at least 10");
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  for (double l : c.lambdas)
    if (!(l > 0.0)) throw ConfigError("every lambda must be positive");
  for (auto v : c.L_grid) positive(v, "L_grid entries");
  for (auto v : c.R_grid) positive(v, "R_grid entries");
  for (auto v : c.n_grid) positive(v, "n_grid entries");
  for (auto v : c.hidden_candidates) positive(v, "hidden_candidates entries");
  for (auto d : c.lasso_degrees)
    if (d < 1 || d > 3) throw ConfigError("lasso degrees must be 1, 2 or 3");
  for (const auto& [lo, hi] : c.delta0_ranges)
    if (!(lo < hi)) throw ConfigError("delta0 range needs lower < upper");
  const bool search = c.scenario.rfind("ar1", 0) != 0;
  if (search && c.scenario != "real_data" && c.J < 2) throw ConfigError("J must be at least 2");
  if (c.scenario == "search_data_size" && c.L_grid.size() != c.R_grid.size())
    throw ConfigError("search_data_size pairs L_grid with R_grid; they need equal lengths");
  if (c.specs.empty()) throw ConfigError("spec_id must name at least one moment spec");
}

}  // namespace nne
