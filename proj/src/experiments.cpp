#include "nne/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "nne/ar1.hpp"
#include "nne/errors.hpp"
#include "nne/gmm.hpp"
#include "nne/lasso.hpp"
#include "nne/parallel.hpp"
#include "nne/shallow_net.hpp"

namespace nne::experiments {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string cell(double v) { return std::isfinite(v) ? io::format_double(v) : ""; }
std::string cell(std::size_t v) { return std::to_string(v); }

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::size_t spec_index(search::MomentSpec spec) {
  const auto& all = search::all_moment_specs();
  return static_cast<std::size_t>(std::find(all.begin(), all.end(), spec) - all.begin());
}

net::TrainSpec train_spec(const ExperimentConfig& c) {
  net::TrainSpec t;
  t.loss = net::parse_loss(c.loss);
  t.max_epochs = c.max_epochs;
  t.learning_rate = c.learning_rate;
  t.batch_size = c.batch_size;
  t.patience = c.patience;
  return t;
}

const char* const kKeyStatNames[] = {"buy_rate", "searches_per_consumer", "mean_search_rank"};

std::array<double, 3> key_values(const search::KeyStats& k) {
  return {k.buy_rate, k.searches_per_consumer, k.mean_search_rank};
}

const SummaryRecord* find_record(const std::vector<SummaryRecord>& records, const std::string& method,
                                 const std::string& spec) {
  for (const auto& r : records)
    if (r.method == method && r.spec == spec) return &r;
  return nullptr;
}

struct GroupCost {
  double burden = 0.0;
  double runtime = 0.0;
  std::size_t count = 0;
  bool timed = true;
};

/// Mean burden and runtime per (method, spec), in first-appearance order.
std::vector<std::pair<std::pair<std::string, std::string>, GroupCost>> group_costs(
    const std::vector<io::EstimateRow>& rows) {
  std::vector<std::pair<std::pair<std::string, std::string>, GroupCost>> out;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.method, r.spec);
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == key; });
    if (it == out.end()) {
      out.push_back({key, GroupCost{}});
      it = out.end() - 1;
    }
    it->second.burden += static_cast<double>(r.sim_burden);
    if (r.runtime_s)
      it->second.runtime += *r.runtime_s;
    else
      it->second.timed = false;
    ++it->second.count;
  }
  for (auto& [key, g] : out) {
    g.burden /= static_cast<double>(g.count);
    g.runtime /= static_cast<double>(g.count);
  }
  return out;
}

std::string opt_cell(const std::optional<double>& v) { return v ? cell(*v) : ""; }

std::string range_label(double lo, double hi) {
  return "delta0=[" + io::format_double(lo) + ";" + io::format_double(hi) + "]";
}

search::ConsumerGrid select_sessions(const search::ConsumerGrid& grid, const std::vector<std::size_t>& picks) {
  search::ConsumerGrid out;
  for (std::size_t i : picks) {
    const std::size_t J = grid.options(i), off = grid.offset(i);
    out.add_consumer(std::span<const search::Attributes>(grid.flat_attributes().data() + off, J),
                     std::span<const int>(grid.flat_ranks().data() + off, J));
  }
  return out;
}

void append_fit_rows(std::vector<io::EstimateRow>& rows, const std::string& scenario, const std::string& spec_prefix,
                     std::size_t replication, const DatasetFit& fit, const SearchStudyOptions& options) {
  const auto& names = options.space.names();
  for (const auto& f : fit.nne) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      io::EstimateRow r;
      r.scenario = scenario;
      r.method = "nne";
      r.spec = spec_prefix + nne_label(f, options);
      r.replication = replication;
      r.parameter = names[k];
      r.estimate = f.report.theta_hat[k];
      if (f.report.sd.size() > 0) r.accuracy = f.report.sd(static_cast<Eigen::Index>(k));
      r.runtime_s = f.runtime_s;
      r.sim_burden = f.L;
      r.seed_path = f.report.seed;
      rows.push_back(std::move(r));
    }
  }
  for (const auto& f : fit.smle) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      io::EstimateRow r;
      r.scenario = scenario;
      r.method = "smle";
      r.spec = spec_prefix + smle_label(f);
      r.replication = replication;
      r.parameter = names[k];
      r.estimate = f.result.theta[k];
      if (f.result.se_valid) r.accuracy = f.result.se(static_cast<Eigen::Index>(k));
      r.runtime_s = f.runtime_s;
      r.sim_burden = f.result.sim_burden;
      r.seed_path = f.seed_path;
      rows.push_back(std::move(r));
    }
  }
}

Table fit_table() {
  return Table{"fit_stats", {"source", "replication", "method", "spec", "statistic", "observed", "predicted"}, {}};
}

void append_fit_stats(Table& t, const std::string& source, std::size_t replication, const DatasetFit& fit,
                      const SearchStudyOptions& options, const std::string& spec_prefix = "") {
  const auto obs = key_values(fit.observed);
  auto add = [&](const std::string& method, const std::string& spec, const search::KeyStats& k) {
    const auto pred = key_values(k);
    for (std::size_t s = 0; s < 3; ++s)
      t.add({source, cell(replication), method, spec, kKeyStatNames[s], cell(obs[s]), cell(pred[s])});
  };
  for (const auto& f : fit.nne)
    if (f.fit) add("nne", spec_prefix + nne_label(f, options), *f.fit);
  for (const auto& f : fit.smle)
    if (f.fit) add("smle", spec_prefix + smle_label(f), *f.fit);
}

}  // namespace

std::map<std::string, double> search_truth() {
  std::map<std::string, double> t;
  const auto v = search::true_params().to_vector();
  const auto& names = search::param_names();
  for (std::size_t k = 0; k < names.size(); ++k) t[names[k]] = v(static_cast<Eigen::Index>(k));
  return t;
}

std::string nne_label(const NneFit& fit, const SearchStudyOptions& options) {
  std::string label = search::moment_spec_id(fit.spec);
  if (options.L_sizes.size() > 1) label += "/L=" + std::to_string(fit.L);
  return label;
}

std::string smle_label(const SmleFit& fit) {
  return "lambda=" + io::format_double(fit.lambda) + "/R=" + std::to_string(fit.R);
}

SearchStudyOptions search_options(const ExperimentConfig& c) {
  SearchStudyOptions o;
  o.replications = c.replications;
  o.n = c.n;
  o.J = c.J;
  o.L_sizes = {c.L_star};
  o.hidden_units = {c.hidden_units};
  o.specs.clear();
  for (const auto& s : c.specs) o.specs.push_back(search::parse_moment_spec(s));
  o.train = train_spec(c);
  if (!c.lambdas.empty()) o.R_sizes = {c.R};
  o.lambdas = c.lambdas;
  o.smle_max_evaluations = c.smle_max_evaluations;
  o.timing = c.timing;
  return o;
}

DatasetFit fit_search_dataset(const std::shared_ptr<const search::ConsumerGrid>& grid,
                              const std::vector<search::SearchOutcome>& outcomes, const SearchStudyOptions& o,
                              const RngStream& stream) {
  if (o.L_sizes.size() != o.hidden_units.size())
    throw ConfigError("one hidden-unit count per training size is required");
  DatasetFit out;
  out.observed = search::key_stats(*grid, outcomes);

  auto consequences = [&](const Eigen::VectorXd& theta, std::optional<search::CounterfactualResult>& cf,
                          std::optional<search::KeyStats>& fit) {
    const auto params = search::SearchParams::from_vector(theta);
    if (o.counterfactual) {
      RngStream r = stream.substream(4);
      cf = search::counterfactual_zero_cost(params, *grid, r);
    }
    if (o.fit_stats) {
      RngStream r = stream.substream(5);
      fit = search::key_stats(*grid, search::simulate_search(params, *grid, r));
    }
  };

  if (!o.L_sizes.empty()) {
    const std::size_t L_max = *std::max_element(o.L_sizes.begin(), o.L_sizes.end());
    SearchBinding model(grid, o.specs, o.space, true);
    const RngStream nne_stream = stream.substream(2);
    const auto t0 = Clock::now();
    const auto sets = generate_training_sets(model, L_max, nne_stream.substream(0));
    const double sim_seconds = seconds_since(t0);
    for (std::size_t k = 0; k < o.specs.size(); ++k) {
      const auto observed = search::search_moments(*grid, outcomes, o.specs[k]);
      for (std::size_t s = 0; s < o.L_sizes.size(); ++s) {
        NneFit f;
        f.spec = o.specs[k];
        f.L = o.L_sizes[s];
        NneOptions opts;
        opts.hidden_units = o.hidden_units[s];
        opts.train = o.train;
        const auto t1 = Clock::now();
        f.report = estimate_from_examples(o.space, std::span<const TrainExample>(sets[k]).first(f.L), observed, opts,
                                          nne_stream.substream(1).substream(spec_index(o.specs[k])).substream(f.L));
        // the shared training set is charged pro rata
        if (o.timing)
          f.runtime_s = seconds_since(t1) + sim_seconds * static_cast<double>(f.L) / static_cast<double>(L_max);
        consequences(f.report.theta_hat.values, f.counterfactual, f.fit);
        out.nne.push_back(std::move(f));
      }
    }
  }

  for (std::size_t R : o.R_sizes) {
    for (double lambda : o.lambdas) {
      SmleFit f;
      f.R = R;
      f.lambda = lambda;
      baselines::SmleSpec spec;
      spec.lambda = lambda;
      spec.R = R;
      spec.max_evaluations = o.smle_max_evaluations;
      const RngStream draws = stream.substream(3).substream(R);
      f.seed_path = draws.path_string();
      const auto t0 = Clock::now();
      f.result = baselines::smle_search(*grid, outcomes, spec, draws, o.space);
      if (o.timing) f.runtime_s = seconds_since(t0);
      consequences(f.result.theta.values, f.counterfactual, f.fit);
      out.smle.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<SearchReplication> run_search_study(const SearchStudyOptions& o, std::uint64_t seed) {
  const RngStream family(seed, o.family);
  std::vector<SearchReplication> reps(o.replications);
  parallel_for(o.replications, [&](std::size_t rep) {
    const RngStream s = family.substream(rep);
    RngStream cov = s.substream(0);
    auto grid = std::make_shared<const search::ConsumerGrid>(search::generate_covariates(o.n, o.J, cov));
    RngStream shocks = s.substream(1);
    const auto outcomes = search::simulate_search(search::true_params(), *grid, shocks);
    SearchReplication& r = reps[rep];
    r.replication = rep;
    r.seed_path = s.path_string();
    r.fit = fit_search_dataset(grid, outcomes, o, s);
    if (o.counterfactual) {
      RngStream cf = s.substream(4);
      r.truth_counterfactual = search::counterfactual_zero_cost(search::true_params(), *grid, cf);
    }
  });
  return reps;
}

std::vector<io::EstimateRow> search_rows(const std::string& scenario, const std::vector<SearchReplication>& reps,
                                         const SearchStudyOptions& options) {
  std::vector<io::EstimateRow> rows;
  for (const auto& r : reps) append_fit_rows(rows, scenario, "", r.replication, r.fit, options);
  return rows;
}

io::SearchData synthetic_search_data(std::size_t n, std::size_t J, const RngStream& rng) {
  RngStream a = rng.substream(0), b = rng.substream(1);
  const auto short_lists = search::generate_covariates(n, J, a);
  const auto long_lists = search::generate_covariates(n, J + 1, b);
  search::ConsumerGrid grid;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& src = i % 2 == 0 ? short_lists : long_lists;
    const std::size_t off = src.offset(i), m = src.options(i);
    grid.add_consumer(std::span<const search::Attributes>(src.flat_attributes().data() + off, m),
                      std::span<const int>(src.flat_ranks().data() + off, m));
  }
  RngStream shocks = rng.substream(2);
  const auto outcomes = search::simulate_search(search::true_params(), grid, shocks);
  // round-trip through the file format so the estimators see what ingestion produces
  std::stringstream csv;
  io::write_search_csv(csv, grid, outcomes);
  return io::read_search_csv(csv);
}

// -- scenarios ------------------------------------------------------------------------

namespace {

void run_search_mc(const ExperimentConfig& c, ExperimentResult& res) {
  SearchStudyOptions o = search_options(c);
  o.fit_stats = true;
  if (!c.hidden_candidates.empty()) {
    // validation loss per width on the first replication's training set
    const RngStream s = RngStream(c.seed, o.family).substream(0);
    RngStream cov = s.substream(0);
    auto grid = std::make_shared<const search::ConsumerGrid>(search::generate_covariates(o.n, o.J, cov));
    SearchBinding model(grid, {o.specs.front()}, o.space, true);
    const auto set = generate_training_set(model, c.L_star, s.substream(2).substream(0));
    Table t{"hidden_nodes", {"hidden_units", "validation_loss", "chosen"}, {}};
    std::vector<double> losses(c.hidden_candidates.size());
    parallel_for(c.hidden_candidates.size(), [&](std::size_t k) {
      net::NetConfig cfg;
      cfg.input_dim = set.front().moments.size();
      cfg.output_dim = o.space.dim();
      cfg.hidden_units = c.hidden_candidates[k];
      cfg.head = net::head_for(o.train.loss);
      losses[k] = net::train(set, cfg, o.train, s.substream(6)).meta.validation_loss;
    });
    const std::size_t best =
        static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) - losses.begin());
    for (std::size_t k = 0; k < losses.size(); ++k)
      t.add({cell(c.hidden_candidates[k]), cell(losses[k]), k == best ? "1" : "0"});
    o.hidden_units = {c.hidden_candidates[best]};
    res.tables.push_back(std::move(t));
  }
  const auto reps = run_search_study(o, c.seed);
  res.rows = search_rows(c.scenario, reps, o);
  res.summary = summarize(res.rows, search_truth());
  Table fit = fit_table();
  for (const auto& r : reps) append_fit_stats(fit, "monte_carlo", r.replication, r.fit, o);
  res.tables.push_back(std::move(fit));
}

void run_counterfactual(const ExperimentConfig& c, ExperimentResult& res) {
  SearchStudyOptions o = search_options(c);
  o.counterfactual = true;
  const auto reps = run_search_study(o, c.seed);
  res.rows = search_rows(c.scenario, reps, o);
  res.summary = summarize(res.rows, search_truth());

  Table per_rep{"counterfactual", {"replication", "method", "spec", "buy_rate", "zero_cost_buy_rate", "increment"}, {}};
  std::vector<std::pair<std::pair<std::string, std::string>, std::vector<double>>> groups;
  auto add = [&](std::size_t rep, const std::string& method, const std::string& spec,
                 const search::CounterfactualResult& r) {
    per_rep.add({cell(rep), method, spec, cell(r.buy_rate), cell(r.zero_cost_buy_rate), cell(r.increment())});
    auto key = std::make_pair(method, spec);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, {}});
      it = groups.end() - 1;
    }
    it->second.push_back(r.increment());
  };
  for (const auto& r : reps) {
    add(r.replication, "truth", "", *r.truth_counterfactual);
    for (const auto& f : r.fit.nne) add(r.replication, "nne", nne_label(f, o), *f.counterfactual);
    for (const auto& f : r.fit.smle) add(r.replication, "smle", smle_label(f), *f.counterfactual);
  }
  Table summary{"counterfactual_summary", {"method", "spec", "replications", "mean_increment", "se"}, {}};
  for (const auto& [key, v] : groups) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double se = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))
                                   : std::nan("");
    summary.add({key.first, key.second, cell(v.size()), cell(m), cell(se)});
  }
  res.tables.push_back(std::move(per_rep));
  res.tables.push_back(std::move(summary));
}

void run_accuracy_calibration(const ExperimentConfig& c, ExperimentResult& res) {
  SearchStudyOptions o = search_options(c);
  o.R_sizes.clear();
  const auto reps = run_search_study(o, c.seed);
  res.rows = search_rows(c.scenario, reps, o);
  res.summary = summarize(res.rows, search_truth());
  Table t{"calibration", {"spec", "parameter", "replications", "mc_sd", "mean_reported_sd", "ratio"}, {}};
  for (const auto& rec : res.summary)
    for (const auto& p : rec.parameters)
      t.add({rec.spec, p.parameter, cell(p.replications), cell(p.sd), cell(p.mean_accuracy),
             cell(p.mean_accuracy / p.sd)});
  res.tables.push_back(std::move(t));
}

void run_smoothing_grid(const ExperimentConfig& c, ExperimentResult& res) {
  SearchStudyOptions o = search_options(c);
  o.L_sizes.clear();
  o.hidden_units.clear();
  if (o.lambdas.empty()) throw ConfigError("smoothing_grid needs a lambda grid");
  const auto reps = run_search_study(o, c.seed);
  res.rows = search_rows(c.scenario, reps, o);
  res.summary = summarize(res.rows, search_truth());
  Table t{"smoothing", {"lambda", "R", "replications", "rmse", "rmse_se", "total_abs_bias", "mean_sim_burden"}, {}};
  const auto costs = group_costs(res.rows);
  for (double lambda : o.lambdas) {
    SmleFit probe;
    probe.lambda = lambda;
    probe.R = o.R_sizes.front();
    const auto* rec = find_record(res.summary, "smle", smle_label(probe));
    const auto cost = std::find_if(costs.begin(), costs.end(),
                                   [&](const auto& g) { return g.first == std::make_pair(rec->method, rec->spec); });
    t.add({cell(lambda), cell(probe.R), cell(rec->replications), opt_cell(rec->rmse), opt_cell(rec->rmse_se),
           opt_cell(rec->total_abs_bias), cell(cost->second.burden)});
  }
  res.tables.push_back(std::move(t));
}

void run_moment_sweep(const ExperimentConfig& c, ExperimentResult& res) {
  SearchStudyOptions o = search_options(c);
  o.R_sizes.clear();
  const auto reps = run_search_study(o, c.seed);
  res.rows = search_rows(c.scenario, reps, o);
  res.summary = summarize(res.rows, search_truth());
  Table t{"moment_sweep", {"spec", "moments", "replications", "total_abs_bias", "rmse", "rmse_se"}, {}};
  for (auto spec : o.specs) {
    const auto* rec = find_record(res.summary, "nne", search::moment_spec_id(spec));
    t.add({rec->spec, cell(search::moment_count(spec)), cell(rec->replications), opt_cell(rec->total_abs_bias),
           opt_cell(rec->rmse), opt_cell(rec->rmse_se)});
  }
  res.tables.push_back(std::move(t));
}

Table cost_table(const std::string& name) {
  return Table{name,
               {"n", "method", "spec", "size", "hidden_units", "replications", "mean_sim_burden", "mean_runtime_s",
                "rmse", "rmse_se"},
               {}};
}

void add_cost_rows(Table& t, const std::string& n_label, const std::vector<io::EstimateRow>& rows,
                   const std::vector<SummaryRecord>& summary, const SearchStudyOptions& o) {
  const auto costs = group_costs(rows);
  for (const auto& [key, g] : costs) {
    const auto* rec = find_record(summary, key.first, key.second);
    std::string size, hidden;
    if (key.first == "nne") {
      // the spec label ends in L=<size> when several sizes run
      const std::size_t L = static_cast<std::size_t>(std::llround(g.burden));
      const auto it = std::find(o.L_sizes.begin(), o.L_sizes.end(), L);
      size = cell(L);
      if (it != o.L_sizes.end()) hidden = cell(o.hidden_units[static_cast<std::size_t>(it - o.L_sizes.begin())]);
    } else {
      size = key.second.substr(key.second.find("R=") + 2);
    }
    t.add({n_label, key.first, key.second, size, hidden, cell(rec->replications), cell(g.burden),
           g.timed ? cell(g.runtime) : "", opt_cell(rec->rmse), opt_cell(rec->rmse_se)});
  }
}

void run_rmse_vs_cost(const ExperimentConfig& c, ExperimentResult& res) {
  SearchStudyOptions o = search_options(c);
  o.L_sizes = c.L_grid;
  o.hidden_units.clear();
  for (auto L : o.L_sizes) o.hidden_units.push_back(hidden_units_for(L));
  o.R_sizes = c.lambdas.empty() ? std::vector<std::size_t>{} : c.R_grid;
  const auto reps = run_search_study(o, c.seed);
  res.rows = search_rows(c.scenario, reps, o);
  res.summary = summarize(res.rows, search_truth());
  Table t = cost_table("cost_curve");
  add_cost_rows(t, cell(o.n), res.rows, res.summary, o);
  res.tables.push_back(std::move(t));
}

void run_data_size(const ExperimentConfig& c, ExperimentResult& res) {
  Table t = cost_table("data_size");
  for (std::size_t k = 0; k < c.n_grid.size(); ++k) {
    SearchStudyOptions o = search_options(c);
    o.n = c.n_grid[k];
    o.L_sizes = c.L_grid;
    o.hidden_units.clear();
    for (auto L : o.L_sizes) o.hidden_units.push_back(hidden_units_for(L));
    o.R_sizes = c.lambdas.empty() ? std::vector<std::size_t>{} : c.R_grid;
    o.family = {3, k};
    const auto reps = run_search_study(o, c.seed);
    std::vector<io::EstimateRow> rows;
    for (const auto& r : reps) append_fit_rows(rows, c.scenario, "n=" + std::to_string(o.n) + "/", r.replication, r.fit, o);
    const auto summary = summarize(rows, search_truth());
    add_cost_rows(t, cell(o.n), rows, summary, o);
    res.rows.insert(res.rows.end(), rows.begin(), rows.end());
    res.summary.insert(res.summary.end(), summary.begin(), summary.end());
  }
  res.tables.push_back(std::move(t));
}

void run_theta_misspec(const ExperimentConfig& c, ExperimentResult& res) {
  Table t{"misspec",
          {"delta0_lower", "delta0_upper", "parameter", "truth", "mean_estimate", "mc_sd", "share_inside"},
          {}};
  const auto truth = search_truth();
  for (const auto& [lo, hi] : c.delta0_ranges) {
    SearchStudyOptions o = search_options(c);
    o.R_sizes.clear();
    o.space = search::default_space().with_bounds("delta0", lo, hi);
    // every range sees the same Monte Carlo datasets
    o.family = {4};
    const auto reps = run_search_study(o, c.seed);
    std::vector<io::EstimateRow> rows;
    for (const auto& r : reps) append_fit_rows(rows, c.scenario, range_label(lo, hi) + "/", r.replication, r.fit, o);
    const auto summary = summarize(rows, truth);
    for (const auto& rec : summary)
      for (const auto& p : rec.parameters) {
        const std::size_t k = o.space.index_of(p.parameter);
        std::size_t inside = 0;
        for (const auto& r : reps)
          for (const auto& f : r.fit.nne) inside += f.report.inside_theta[k] ? 1 : 0;
        t.add({cell(lo), cell(hi), p.parameter, cell(truth.at(p.parameter)), cell(p.mean), cell(p.sd),
               cell(static_cast<double>(inside) / static_cast<double>(reps.size() * o.specs.size()))});
      }
    res.rows.insert(res.rows.end(), rows.begin(), rows.end());
    res.summary.insert(res.summary.end(), summary.begin(), summary.end());
  }
  res.tables.push_back(std::move(t));
}

void run_real_data(const ExperimentConfig& c, ExperimentResult& res) {
  const RngStream root(c.seed, {5});
  io::SearchData data;
  if (c.data.empty()) {
    data = synthetic_search_data(c.n, c.J, root.substream(0));
    std::ostringstream csv;
    io::write_search_csv(csv, data.grid, data.outcomes, data.session_ids);
    res.files.push_back({"synthetic_search_data.csv", csv.str()});
  } else {
    data = io::read_search_csv(c.data);
  }
  SearchStudyOptions o = search_options(c);
  o.fit_stats = true;
  const auto grid = std::make_shared<const search::ConsumerGrid>(data.grid);

  std::vector<DatasetFit> runs(c.replications);
  parallel_for(c.replications, [&](std::size_t r) {
    runs[r] = fit_search_dataset(grid, data.outcomes, o, root.substream(1).substream(r));
  });
  std::vector<DatasetFit> boots(c.bootstrap);
  parallel_for(c.bootstrap, [&](std::size_t b) {
    const RngStream s = root.substream(2).substream(b);
    RngStream pick = s.substream(0);
    std::vector<std::size_t> idx(grid->n());
    for (auto& i : idx) i = static_cast<std::size_t>(pick.below(grid->n()));
    std::vector<search::SearchOutcome> outcomes;
    for (auto i : idx) outcomes.push_back(data.outcomes[i]);
    auto g = std::make_shared<const search::ConsumerGrid>(select_sessions(*grid, idx));
    boots[b] = fit_search_dataset(g, outcomes, o, s);
  });

  Table fit = fit_table();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    append_fit_rows(res.rows, c.scenario, "", r, runs[r], o);
    append_fit_stats(fit, "run", r, runs[r], o);
  }
  // bootstrap predictions are compared with the statistics of the original data
  for (std::size_t b = 0; b < boots.size(); ++b) {
    append_fit_rows(res.rows, c.scenario, "bootstrap/", b, boots[b], o);
    DatasetFit shown = boots[b];
    shown.observed = search::key_stats(*grid, data.outcomes);
    append_fit_stats(fit, "bootstrap", b, shown, o, "bootstrap/");
  }
  res.summary = summarize(res.rows);
  res.tables.push_back(std::move(fit));
}

// -- AR(1) ------------------------------------------------------------------------------

constexpr double kAr1Truth = 0.6;

std::vector<ar1::MomentSpec> ar1_specs(const ExperimentConfig& c) {
  std::vector<ar1::MomentSpec> specs;
  for (const auto& s : c.specs) specs.push_back(ar1::MomentSpec::parse(s));
  return specs;
}

io::EstimateRow ar1_row(const std::string& scenario, const std::string& method, const std::string& spec,
                        std::size_t rep, double estimate, std::size_t burden, const std::string& seed) {
  io::EstimateRow r;
  r.scenario = scenario;
  r.method = method;
  r.spec = spec;
  r.replication = rep;
  r.parameter = "beta";
  r.estimate = estimate;
  r.sim_burden = burden;
  r.seed_path = seed;
  return r;
}

void run_ar1_table2(const ExperimentConfig& c, ExperimentResult& res) {
  const RngStream root(c.seed, {1});
  const auto specs = ar1_specs(c);
  Ar1Binding model(specs, c.n);
  const auto sets = generate_training_sets(model, c.L_star, root.substream(1));

  const auto t0 = Clock::now();
  std::vector<net::TrainedNet> nets(specs.size());
  parallel_for(specs.size(), [&](std::size_t k) {
    net::NetConfig cfg;
    cfg.input_dim = specs[k].count();
    cfg.output_dim = 1;
    cfg.hidden_units = c.hidden_units;
    net::TrainSpec ts = train_spec(c);
    cfg.head = net::head_for(ts.loss);
    nets[k] = net::train(sets[k], cfg, ts, root.substream(2).substream(k));
  });
  std::vector<std::vector<baselines::LassoModel>> lassos(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k)
    for (int d : c.lasso_degrees) lassos[k].push_back(baselines::lasso_poly_train(sets[k], d));
  // one training pass serves every replication; its cost is spread evenly
  const double fixed_seconds = seconds_since(t0) / static_cast<double>(c.replications);

  std::vector<std::vector<io::EstimateRow>> per_rep(c.replications);
  parallel_for(c.replications, [&](std::size_t rep) {
    RngStream data = root.substream(0).substream(rep);
    const std::string data_seed = data.path_string();
    const auto series = ar1::simulate(kAr1Truth, c.n, data);
    auto& rows = per_rep[rep];
    for (std::size_t k = 0; k < specs.size(); ++k) {
      const auto& spec = specs[k];
      const std::string id = spec.id();
      const auto m = ar1::moments(series, spec);

      auto t = Clock::now();
      const auto gmm = baselines::gmm_ar1(series, baselines::GmmSpec{spec, baselines::Weighting::two_step_hac});
      rows.push_back(ar1_row(c.scenario, "gmm", id, rep, gmm.value, 0, data_seed));
      if (c.timing) rows.back().runtime_s = seconds_since(t);

      t = Clock::now();
      const RngStream smm_stream = root.substream(3).substream(rep);
      const auto smm = baselines::smm_ar1(series, baselines::GmmSpec{spec, baselines::Weighting::two_step_hac}, c.smm_R,
                                          smm_stream);
      rows.push_back(ar1_row(c.scenario, "smm", id, rep, smm.value, c.smm_R * smm.evaluations, smm_stream.path_string()));
      if (c.timing) rows.back().runtime_s = seconds_since(t);

      t = Clock::now();
      const auto pred = net::forward(nets[k], m);
      rows.push_back(ar1_row(c.scenario, "nne", id, rep, pred.mu(0), c.L_star,
                             root.substream(2).substream(k).path_string()));
      if (pred.cov.size() > 0) rows.back().accuracy = std::sqrt(pred.cov(0, 0));
      if (c.timing) rows.back().runtime_s = seconds_since(t) + fixed_seconds;

      for (std::size_t d = 0; d < c.lasso_degrees.size(); ++d) {
        t = Clock::now();
        const double v = baselines::lasso_predict(lassos[k][d], m.values)(0);
        rows.push_back(ar1_row(c.scenario, "lasso_deg" + std::to_string(c.lasso_degrees[d]), id, rep, v, c.L_star,
                               root.substream(1).path_string()));
        if (c.timing) rows.back().runtime_s = seconds_since(t) + fixed_seconds;
      }
    }
  });
  for (auto& rows : per_rep)
    for (auto& r : rows) res.rows.push_back(std::move(r));
  // summary order: spec-major like the table, methods in a fixed order
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const io::EstimateRow& a, const io::EstimateRow& b) {
    return std::tie(a.spec, a.method) < std::tie(b.spec, b.method);
  });
  res.summary = summarize(res.rows, {{"beta", kAr1Truth}});
}

void run_ar1_fig3(const ExperimentConfig& c, ExperimentResult& res) {
  const RngStream root(c.seed, {6});
  const ar1::MomentSpec spec(1);
  const RngStream r1 = root.substream(0), r5 = root.substream(1);
  const auto& space = Ar1Binding::default_space();
  const double lo = space.lower()(0), hi = space.upper()(0);

  Table curves{"curves", {"beta", "g", "ghat_R1", "ghat_R5"}, {}};
  for (int b = 0; b <= 90; ++b) {
    const double beta = lo + (hi - lo) * b / 90.0;
    curves.add({cell(beta), cell(ar1::population_moment(beta, 1)),
                cell(baselines::simulated_moments(beta, spec, c.n, 1, r1)(0)),
                cell(baselines::simulated_moments(beta, spec, c.n, 5, r5)(0))});
  }

  // training points lie on the R = 1 curve
  std::vector<TrainExample> examples;
  RngStream draw = root.substream(2);
  Table points{"training_points", {"beta", "m"}, {}};
  for (std::size_t l = 0; l < c.L_star; ++l) {
    const double beta = draw.uniform(lo, hi);
    const double m = baselines::simulated_moments(beta, spec, c.n, 1, r1)(0);
    examples.push_back({ParamVector(Eigen::VectorXd::Constant(1, beta)),
                        MomentVector{spec.id(), Eigen::VectorXd::Constant(1, m)}});
    points.add({cell(beta), cell(m)});
  }

  double mb = 0.0, mm = 0.0;
  for (const auto& e : examples) {
    mb += e.theta[0];
    mm += e.moments.values(0);
  }
  mb /= static_cast<double>(examples.size());
  mm /= static_cast<double>(examples.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& e : examples) {
    sxy += (e.moments.values(0) - mm) * (e.theta[0] - mb);
    sxx += (e.moments.values(0) - mm) * (e.moments.values(0) - mm);
  }
  const double slope = sxy / sxx, intercept = mb - slope * mm;

  net::TrainSpec ts = train_spec(c);
  ts.loss = net::LossKind::c1;
  std::array<net::TrainedNet, 2> nets;
  const std::array<net::Activation, 2> acts = {net::Activation::relu, net::Activation::sigmoid};
  for (std::size_t a = 0; a < 2; ++a) {
    net::NetConfig cfg;
    cfg.input_dim = 1;
    cfg.output_dim = 1;
    cfg.hidden_units = c.hidden_units;
    cfg.activation = acts[a];
    cfg.head = net::Head::point;
    nets[a] = net::train(examples, cfg, ts, root.substream(3 + a));
  }

  Table fits{"fits", {"m", "linear", "nne_relu", "nne_sigmoid"}, {}};
  double m_lo = examples.front().moments.values(0), m_hi = m_lo;
  for (const auto& e : examples) {
    m_lo = std::min(m_lo, e.moments.values(0));
    m_hi = std::max(m_hi, e.moments.values(0));
  }
  for (int k = 0; k <= 100; ++k) {
    const double m = m_lo + (m_hi - m_lo) * k / 100.0;
    const Eigen::VectorXd v = Eigen::VectorXd::Constant(1, m);
    fits.add({cell(m), cell(intercept + slope * m), cell(net::forward(nets[0], v).mu(0)),
              cell(net::forward(nets[1], v).mu(0))});
  }

  RngStream obs = root.substream(5);
  const std::string obs_seed = obs.path_string();
  const auto series = ar1::simulate(kAr1Truth, c.n, obs);
  const double m_obs = ar1::moments(series, spec).values(0);
  const Eigen::VectorXd v = Eigen::VectorXd::Constant(1, m_obs);
  const baselines::GmmSpec one{spec, baselines::Weighting::identity};
  const auto smm1 = baselines::smm_ar1(series, one, 1, r1);
  const auto smm5 = baselines::smm_ar1(series, one, 5, r5);
  res.rows.push_back(ar1_row(c.scenario, "gmm", spec.id(), 0, baselines::gmm_ar1(series, one).value, 0, obs_seed));
  res.rows.push_back(ar1_row(c.scenario, "smm_R1", spec.id(), 0, smm1.value, smm1.evaluations, r1.path_string()));
  res.rows.push_back(ar1_row(c.scenario, "smm_R5", spec.id(), 0, smm5.value, 5 * smm5.evaluations, r5.path_string()));
  res.rows.push_back(ar1_row(c.scenario, "linear", spec.id(), 0, intercept + slope * m_obs, c.L_star,
                             root.substream(2).path_string()));
  res.rows.push_back(ar1_row(c.scenario, "nne_relu", spec.id(), 0, net::forward(nets[0], v).mu(0), c.L_star,
                             root.substream(3).path_string()));
  res.rows.push_back(ar1_row(c.scenario, "nne_sigmoid", spec.id(), 0, net::forward(nets[1], v).mu(0), c.L_star,
                             root.substream(4).path_string()));
  res.summary = summarize(res.rows, {{"beta", kAr1Truth}});

  Table observed{"observed", {"m_observed", "beta_true"}, {}};
  observed.add({cell(m_obs), cell(kAr1Truth)});
  res.tables = {std::move(curves), std::move(points), std::move(fits), std::move(observed)};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  ExperimentResult res;
  res.config = config;
  const auto& s = config.scenario;
  if (s == "ar1_table2")
    run_ar1_table2(config, res);
  else if (s == "ar1_fig3_curves")
    run_ar1_fig3(config, res);
  else if (s == "search_mc")
    run_search_mc(config, res);
  else if (s == "search_rmse_vs_cost")
    run_rmse_vs_cost(config, res);
  else if (s == "search_moment_sweep")
    run_moment_sweep(config, res);
  else if (s == "search_data_size")
    run_data_size(config, res);
  else if (s == "smoothing_grid")
    run_smoothing_grid(config, res);
  else if (s == "theta_misspec")
    run_theta_misspec(config, res);
  else if (s == "accuracy_calibration")
    run_accuracy_calibration(config, res);
  else if (s == "counterfactual")
    run_counterfactual(config, res);
  else if (s == "real_data")
    run_real_data(config, res);
  else
    throw ConfigError("unknown scenario '" + s + "'");
  return res;
}

void ensure_writable(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  const fs::path probe = fs::path(dir) / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok")) throw ConfigError("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) throw ConfigError("cannot write '" + path.string() + "'");
}

std::string table_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t k = 0; k < t.header.size(); ++k) os << (k ? "," : "") << t.header[k];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k];
    os << '\n';
  }
  return os.str();
}

}  // namespace

void write_experiment(const ExperimentResult& result, const std::string& dir) {
  ensure_writable(dir);
  const fs::path base(dir);
  std::ostringstream est;
  io::write_estimates_csv(est, result.rows);
  write_file(base / "estimates.csv", est.str());
  std::ostringstream sum;
  write_summary_csv(sum, result.summary);
  write_file(base / "summary.csv", sum.str());
  for (const auto& t : result.tables) write_file(base / (t.name + ".csv"), table_csv(t));
  for (const auto& [name, content] : result.files) write_file(base / name, content);
  write_file(base / "config.json", to_json(result.config).dump(2) + "\n");
}

}  // namespace nne::experiments
