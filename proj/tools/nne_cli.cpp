#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include "nne/ar1.hpp"
#include "nne/config.hpp"
#include "nne/csv_io.hpp"
#include "nne/errors.hpp"
#include "nne/experiments.hpp"
#include "nne/nne.hpp"
#include "nne/parallel.hpp"
#include "nne/smle.hpp"

namespace {

using namespace nne;

int cmd_simulate(const std::string& model, std::size_t n, std::size_t J, double beta, std::uint64_t seed,
                 const std::string& out_path) {
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw ConfigError("cannot write '" + out_path + "'");
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  const RngStream rng(seed, {7});
  if (model == "search") {
    RngStream cov = rng.substream(0), shocks = rng.substream(1);
    const auto grid = search::generate_covariates(n, J, cov);
    const auto outcomes = search::simulate_search(search::true_params(), grid, shocks);
    io::write_search_csv(out, grid, outcomes);
  } else if (model == "ar1") {
    RngStream r = rng.substream(0);
    const auto s = ar1::simulate(beta, n, r);
    out << "t,y\n";
    for (std::size_t t = 0; t < s.size(); ++t)
      out << t + 1 << ',' << io::format_double(s.values(static_cast<Eigen::Index>(t))) << '\n';
  } else {
    throw ConfigError("model must be 'search' or 'ar1'");
  }
  return 0;
}

int cmd_estimate(const std::string& data_path, const std::string& method, const std::string& spec_id,
                 std::size_t L_star, std::size_t hidden, double lambda, std::size_t R, std::uint64_t seed,
                 const std::string& out_dir) {
  const auto data = io::read_search_csv(data_path);
  const auto grid = std::make_shared<const search::ConsumerGrid>(data.grid);
  experiments::SearchStudyOptions o;
  o.specs = {search::parse_moment_spec(spec_id)};
  if (method == "nne") {
    o.L_sizes = {L_star};
    o.hidden_units = {hidden};
  } else if (method == "smle") {
    o.L_sizes.clear();
    o.hidden_units.clear();
    o.R_sizes = {R};
    o.lambdas = {lambda};
  } else {
    throw ConfigError("method must be 'nne' or 'smle'");
  }
  const auto fit = experiments::fit_search_dataset(grid, data.outcomes, o, RngStream(seed, {8}));

  std::vector<io::EstimateRow> rows;
  const auto& names = o.space.names();
  for (const auto& f : fit.nne) {
    const auto adv = check_theta_range(f.report);
    if (!adv.ok()) std::cerr << "warning: estimate at or beyond the parameter box\n" << adv.message();
    for (std::size_t k = 0; k < names.size(); ++k) {
      io::EstimateRow r{"estimate", "nne", experiments::nne_label(f, o), 0, names[k], f.report.theta_hat[k],
                        std::nullopt, std::nullopt, f.L, f.report.seed};
      if (f.report.sd.size() > 0) r.accuracy = f.report.sd(static_cast<Eigen::Index>(k));
      rows.push_back(r);
    }
  }
  for (const auto& f : fit.smle)
    for (std::size_t k = 0; k < names.size(); ++k) {
      io::EstimateRow r{"estimate", "smle", experiments::smle_label(f), 0, names[k], f.result.theta[k],
                        std::nullopt, std::nullopt, f.result.sim_burden, f.seed_path};
      if (f.result.se_valid) r.accuracy = f.result.se(static_cast<Eigen::Index>(k));
      rows.push_back(r);
    }
  if (out_dir.empty()) {
    io::write_estimates_csv(std::cout, rows);
  } else {
    experiments::ensure_writable(out_dir);
    std::ofstream out(out_dir + "/estimates.csv");
    io::write_estimates_csv(out, rows);
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  const auto data = io::read_search_csv(path);
  std::size_t jmin = data.grid.max_options(), jmax = 0;
  for (std::size_t i = 0; i < data.grid.n(); ++i) {
    jmin = std::min(jmin, data.grid.options(i));
    jmax = std::max(jmax, data.grid.options(i));
  }
  const auto k = search::key_stats(data.grid, data.outcomes);
  std::cout << "sessions " << data.grid.n() << "\noptions per session " << jmin << ".." << jmax << "\nbuy rate "
            << k.buy_rate << "\nsearches per session " << k.searches_per_consumer << "\nmean searched rank "
            << k.mean_search_rank << "\n";
  const auto trim = search::trim_reason(data.grid, data.outcomes);
  if (trim != search::TrimReason::none) std::cout << "degenerate: " << search::trim_reason_name(trim) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural net estimation of structural models: simulation, estimation and experiments"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");

  auto* sim = app.add_subcommand("simulate", "write a dataset simulated under the true parameters");
  std::string sim_model = "search", sim_out;
  std::size_t sim_n = 1000, sim_J = 30;
  double sim_beta = 0.6;
  std::uint64_t sim_seed = 1;
  sim->add_option("--model", sim_model, "search or ar1")->check(CLI::IsMember({"search", "ar1"}));
  sim->add_option("--n", sim_n, "consumers or series length");
  sim->add_option("--J", sim_J, "options per consumer");
  sim->add_option("--beta", sim_beta, "AR(1) coefficient");
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--out", sim_out, "output file (stdout when omitted)");

  auto* est = app.add_subcommand("estimate", "estimate the search model on a search-data CSV");
  std::string est_data, est_method = "nne", est_spec = "m46", est_out;
  std::size_t est_L = 10000, est_hidden = 64, est_R = 50;
  double est_lambda = 7.0;
  std::uint64_t est_seed = 1;
  est->add_option("data", est_data, "search-data CSV")->required();
  est->add_option("--method", est_method, "nne or smle")->check(CLI::IsMember({"nne", "smle"}));
  est->add_option("--spec", est_spec, "moment spec (m16..m81)");
  est->add_option("--L-star", est_L, "training-set size");
  est->add_option("--hidden", est_hidden, "hidden units");
  est->add_option("--lambda", est_lambda, "SMLE smoothing factor");
  est->add_option("--R", est_R, "SMLE draws per consumer");
  est->add_option("--seed", est_seed, "master seed");
  est->add_option("--out", est_out, "output directory (stdout when omitted)");

  auto* exp = app.add_subcommand("experiment", "run one experiment scenario");
  std::string scenario, config_path, out_dir, scale = "desk";
  std::optional<std::uint64_t> exp_seed;
  std::optional<std::size_t> replications;
  bool timing = false;
  exp->add_option("scenario", scenario, "scenario id")->required()->check(CLI::IsMember(nne::scenario_ids()));
  exp->add_option("--config", config_path, "JSON config overriding the scenario defaults");
  exp->add_option("--seed", exp_seed, "master seed");
  exp->add_option("--out", out_dir, "output root; results go to <out>/<scenario>");
  exp->add_option("--scale", scale, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  exp->add_option("--replications", replications, "Monte Carlo replications");
  exp->add_flag("--timing", timing, "record wall time per estimate (results are then not byte-stable)");

  auto* val = app.add_subcommand("validate-data", "check a search-data CSV against its schema and invariants");
  std::string val_path;
  val->add_option("data", val_path, "search-data CSV")->required();

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) nne::set_thread_count(threads);

  try {
    if (*sim) return cmd_simulate(sim_model, sim_n, sim_J, sim_beta, sim_seed, sim_out);
    if (*est)
      return cmd_estimate(est_data, est_method, est_spec, est_L, est_hidden, est_lambda, est_R, est_seed, est_out);
    if (*val) return cmd_validate(val_path);
    if (*exp) {
      // precedence: scenario defaults < config file < command line
      nlohmann::json doc = nlohmann::json::object();
      if (!config_path.empty()) doc = nne::read_json_file(config_path);
      nne::Scale sc = nne::parse_scale(doc.contains("scale") && !exp->count("--scale")
                                           ? doc.at("scale").get<std::string>()
                                           : scale);
      if (doc.contains("scenario") && doc.at("scenario").get<std::string>() != scenario)
        throw nne::ConfigError("config file is for scenario '" + doc.at("scenario").get<std::string>() + "'");
      nne::ExperimentConfig cfg = nne::default_config(scenario, sc);
      nne::apply_json(cfg, doc);
      cfg.scale = sc;
      if (exp_seed) cfg.seed = *exp_seed;
      if (replications) cfg.replications = *replications;
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (timing) cfg.timing = true;
      if (threads == 0 && cfg.threads > 0) nne::set_thread_count(cfg.threads);
      nne::validate(cfg);
      const std::string dir = cfg.out_dir + "/" + scenario;
      nne::experiments::ensure_writable(dir);
      const auto result = nne::experiments::run_experiment(cfg);
      nne::experiments::write_experiment(result, dir);
      std::cout << "wrote " << result.rows.size() << " estimate rows to " << dir << "\n";
      return 0;
    }
  } catch (const nne::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const nne::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
