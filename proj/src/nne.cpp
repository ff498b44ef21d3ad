#include "nne/nne.hpp"

#include <atomic>
#include <map>
#include <mutex>
#include <sstream>

#include "nne/errors.hpp"
#include "nne/parallel.hpp"

namespace nne {

// -- bindings -------------------------------------------------------------------

ParamSpace Ar1Binding::default_space() {
  return ParamSpace({"beta"}, Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 0.9));
}

Ar1Binding::Ar1Binding(std::vector<ar1::MomentSpec> specs, std::size_t n)
    : Ar1Binding(std::move(specs), n, default_space()) {}

Ar1Binding::Ar1Binding(std::vector<ar1::MomentSpec> specs, std::size_t n, ParamSpace space)
    : specs_(std::move(specs)), n_(n), space_(std::move(space)) {
  if (specs_.empty()) throw ConfigError("AR(1) binding needs at least one moment spec");
  if (space_.dim() != 1) throw ConfigError("AR(1) parameter space must be one-dimensional");
  for (const auto& s : specs_)
    if (static_cast<std::size_t>(s.max_lag()) >= n_)
      throw ConfigError("series length " + std::to_string(n_) + " too short for " + s.id());
}

std::vector<std::string> Ar1Binding::spec_ids() const {
  std::vector<std::string> ids;
  for (const auto& s : specs_) ids.push_back(s.id());
  return ids;
}

SimulationDraw Ar1Binding::simulate(const ParamVector& theta, RngStream& rng) const {
  const ar1::Series y = ar1::simulate(theta[0], n_, rng);
  SimulationDraw d;
  for (const auto& s : specs_) d.moments.push_back(ar1::moments(y, s));
  return d;
}

SearchBinding::SearchBinding(std::shared_ptr<const search::ConsumerGrid> grid,
                             std::vector<search::MomentSpec> specs, ParamSpace space, bool trim)
    : grid_(std::move(grid)), specs_(std::move(specs)), space_(std::move(space)), trim_(trim) {
  if (!grid_ || grid_->n() == 0) throw ConfigError("search binding needs a non-empty covariate grid");
  if (specs_.empty()) throw ConfigError("search binding needs at least one moment spec");
  if (space_.dim() != search::kParams) throw ConfigError("search parameter space must have 9 dimensions");
}

std::vector<std::string> SearchBinding::spec_ids() const {
  std::vector<std::string> ids;
  for (auto s : specs_) ids.push_back(search::moment_spec_id(s));
  return ids;
}

SimulationDraw SearchBinding::simulate(const ParamVector& theta, RngStream& rng) const {
  const auto params = search::SearchParams::from_vector(theta.values);
  const auto outcomes = search::simulate_search(params, *grid_, rng);
  SimulationDraw d;
  if (trim_) {
    const auto reason = search::trim_reason(*grid_, outcomes);
    if (reason != search::TrimReason::none) {
      d.kept = false;
      d.trim_reason = search::trim_reason_name(reason);
      return d;
    }
  }
  for (auto s : specs_) d.moments.push_back(search::search_moments(*grid_, outcomes, s));
  return d;
}

ConjugateToyBinding::ConjugateToyBinding(std::size_t n)
    : n_(n), space_({"theta"}, Eigen::VectorXd::Constant(1, -5.0), Eigen::VectorXd::Constant(1, 5.0)) {
  if (n_ < 1) throw ConfigError("toy model needs n >= 1");
}

SimulationDraw ConjugateToyBinding::simulate(const ParamVector& theta, RngStream& rng) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < n_; ++i) sum += rng.normal(theta[0], 1.0);
  SimulationDraw d;
  d.moments.push_back({"mean", Eigen::VectorXd::Constant(1, sum / static_cast<double>(n_))});
  return d;
}

// -- training sets ----------------------------------------------------------------

std::vector<std::vector<TrainExample>> generate_training_sets(const SimulationModel& model,
                                                              std::size_t L_star, const RngStream& rng) {
  if (L_star < 10) throw ConfigError("L_star must be at least 10");
  const std::size_t n_specs = model.spec_ids().size();
  const std::size_t budget = 10 * L_star;

  std::vector<std::vector<TrainExample>> sets(n_specs, std::vector<TrainExample>(L_star));
  std::atomic<std::size_t> attempts{0};
  std::atomic<bool> exhausted{false};
  std::mutex reasons_mutex;
  std::map<std::string, std::size_t> reasons;

  parallel_for(L_star, [&](std::size_t l) {
    const RngStream example_stream = rng.substream(l);
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (exhausted.load()) return;
      if (attempts.fetch_add(1) >= budget) {
        exhausted.store(true);
        return;
      }
      RngStream s = example_stream.substream(attempt);
      const ParamVector theta = sample_theta(model.space(), s);
      SimulationDraw d = model.simulate(theta, s);
      if (d.kept) {
        for (std::size_t k = 0; k < n_specs; ++k) sets[k][l] = {theta, std::move(d.moments[k])};
        return;
      }
      std::lock_guard<std::mutex> lock(reasons_mutex);
      ++reasons[d.trim_reason];
    }
  });

  if (exhausted.load()) {
    std::string worst = "unknown";
    std::size_t worst_count = 0;
    for (const auto& [name, count] : reasons)
      if (count > worst_count) {
        worst = name;
        worst_count = count;
      }
    throw ConfigError("training-set redraw budget of " + std::to_string(budget) +
                      " attempts exhausted; most rejections by the filter '" + worst + "'");
  }
  return sets;
}

std::vector<TrainExample> generate_training_set(const SimulationModel& model, std::size_t L_star,
                                                const RngStream& rng) {
  return std::move(generate_training_sets(model, L_star, rng).front());
}

// -- estimation -------------------------------------------------------------------

EstimateReport estimate_from_examples(const ParamSpace& space, std::span<const TrainExample> examples,
                                      const MomentVector& observed, const NneOptions& options,
                                      const RngStream& rng, net::TrainedNet* trained) {
  if (examples.empty()) throw ConfigError("no training examples");
  if (observed.size() != examples.front().moments.size())
    throw DomainError("observed moments have length " + std::to_string(observed.size()) +
                      ", training moments have length " + std::to_string(examples.front().moments.size()));
  net::NetConfig cfg;
  cfg.input_dim = observed.size();
  cfg.output_dim = space.dim();
  cfg.hidden_units = options.hidden_units;
  cfg.activation = options.activation;
  cfg.head = net::head_for(options.train.loss);
  net::TrainedNet fitted = net::train(examples, cfg, options.train, rng);
  const net::Prediction pred = net::forward(fitted, observed);

  EstimateReport rep;
  rep.names = space.names();
  rep.lower = space.lower();
  rep.upper = space.upper();
  rep.theta_hat = ParamVector(pred.mu);
  rep.sd = pred.sd();
  rep.cov = pred.cov;
  for (std::size_t k = 0; k < space.dim(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    rep.inside_theta.push_back(pred.mu(i) >= rep.lower(i) && pred.mu(i) <= rep.upper(i));
  }
  rep.validation_loss = fitted.meta.validation_loss;
  rep.L_star = examples.size();
  rep.seed = rng.path_string();
  if (trained) *trained = std::move(fitted);
  return rep;
}

EstimateReport nne_estimate(const SimulationModel& model, const MomentVector& observed, std::size_t L_star,
                            const NneOptions& options, const RngStream& rng) {
  const auto examples = generate_training_set(model, L_star, rng.substream(0));
  EstimateReport rep = estimate_from_examples(model.space(), examples, observed, options, rng.substream(1));
  rep.seed = rng.path_string();
  return rep;
}

// -- range check ----------------------------------------------------------------------

RangeAdvisory check_theta_range(const EstimateReport& report) {
  RangeAdvisory adv;
  for (std::size_t k = 0; k < report.names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double v = report.theta_hat.values(i), lo = report.lower(i), hi = report.upper(i);
    const bool boundary = v == lo || v == hi;
    if (boundary || v < lo || v > hi) adv.flags.push_back({report.names[k], v, lo, hi, boundary});
  }
  return adv;
}

std::string RangeAdvisory::message() const {
  if (flags.empty()) return "";
  std::ostringstream os;
  for (const auto& f : flags) {
    os << f.name << " = " << f.estimate << (f.on_boundary ? " is on the boundary of [" : " is outside [")
       << f.lower << ", " << f.upper << "]\n";
  }
  os << "The parameter space likely does not contain the truth and needs to be adjusted.";
  return os.str();
}

}  // namespace nne
