#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "nne/ar1.hpp"
#include "nne/core_types.hpp"
#include "nne/rng.hpp"
#include "nne/search_model.hpp"
#include "nne/shallow_net.hpp"

namespace nne {

/// Result of simulating one dataset: moments under every spec the model
/// carries, or a trim reason when the dataset is excluded from training.
struct SimulationDraw {
  bool kept = true;
  std::string trim_reason;
  std::vector<MomentVector> moments;
};

/// A structural model y = q(x, eps; theta) together with its fixed covariates
/// and one or more moment specifications computed from the same outcomes.
class SimulationModel {
 public:
  virtual ~SimulationModel() = default;
  virtual std::string model_id() const = 0;
  virtual const ParamSpace& space() const = 0;
  virtual std::vector<std::string> spec_ids() const = 0;
  virtual SimulationDraw simulate(const ParamVector& theta, RngStream& rng) const = 0;
};

class Ar1Binding final : public SimulationModel {
 public:
  /// beta in [0, 0.9] unless another space is given.
  explicit Ar1Binding(std::vector<ar1::MomentSpec> specs, std::size_t n = ar1::kDefaultLength);
  Ar1Binding(std::vector<ar1::MomentSpec> specs, std::size_t n, ParamSpace space);

  static ParamSpace default_space();

  std::string model_id() const override { return "ar1"; }
  const ParamSpace& space() const override { return space_; }
  std::vector<std::string> spec_ids() const override;
  SimulationDraw simulate(const ParamVector& theta, RngStream& rng) const override;

 private:
  std::vector<ar1::MomentSpec> specs_;
  std::size_t n_;
  ParamSpace space_;
};

/// Search model conditional on one observed covariate grid; every simulated
/// dataset reuses the same grid object.
class SearchBinding final : public SimulationModel {
 public:
  SearchBinding(std::shared_ptr<const search::ConsumerGrid> grid, std::vector<search::MomentSpec> specs,
                ParamSpace space = search::default_space(), bool trim = true);

  std::string model_id() const override { return "search"; }
  const ParamSpace& space() const override { return space_; }
  std::vector<std::string> spec_ids() const override;
  SimulationDraw simulate(const ParamVector& theta, RngStream& rng) const override;

  const std::shared_ptr<const search::ConsumerGrid>& grid() const noexcept { return grid_; }

 private:
  std::shared_ptr<const search::ConsumerGrid> grid_;
  std::vector<search::MomentSpec> specs_;
  ParamSpace space_;
  bool trim_;
};

/// y_i ~ N(theta, 1), i = 1..n, theta uniform on [-5, 5]; the moment is the sample mean.
class ConjugateToyBinding final : public SimulationModel {
 public:
  explicit ConjugateToyBinding(std::size_t n = 100);

  std::string model_id() const override { return "conjugate_toy"; }
  const ParamSpace& space() const override { return space_; }
  std::vector<std::string> spec_ids() const override { return {"mean"}; }
  SimulationDraw simulate(const ParamVector& theta, RngStream& rng) const override;

  std::size_t n() const noexcept { return n_; }

 private:
  std::size_t n_;
  ParamSpace space_;
};

/// Training sets for every spec of the model, index-aligned with spec_ids().
/// Example l uses stream rng/l/attempt; trimmed draws are redrawn. More than
/// 10 * L_star attempts in total raises ConfigError naming the dominant filter.
std::vector<std::vector<TrainExample>> generate_training_sets(const SimulationModel& model,
                                                              std::size_t L_star, const RngStream& rng);

/// Training set of the model's first spec.
std::vector<TrainExample> generate_training_set(const SimulationModel& model, std::size_t L_star,
                                                const RngStream& rng);

struct NneOptions {
  std::size_t hidden_units = 32;
  net::Activation activation = net::Activation::relu;
  net::TrainSpec train;  ///< loss c2_diag by default
};

struct EstimateReport {
  std::vector<std::string> names;
  Eigen::VectorXd lower, upper;
  ParamVector theta_hat;
  /// Per-parameter SD; empty for the point head.
  Eigen::VectorXd sd;
  /// Full covariance for the full head, diag(sd^2) for the diag head.
  Eigen::MatrixXd cov;
  std::vector<bool> inside_theta;
  double validation_loss = 0.0;
  std::size_t L_star = 0;
  std::string seed;
};

/// Trains on `examples` (stream rng) and applies the net to `observed`.
EstimateReport estimate_from_examples(const ParamSpace& space, std::span<const TrainExample> examples,
                                      const MomentVector& observed, const NneOptions& options,
                                      const RngStream& rng, net::TrainedNet* trained = nullptr);

/// Full pipeline: training set from rng/0, training from rng/1, then the net at the observed moments.
EstimateReport nne_estimate(const SimulationModel& model, const MomentVector& observed, std::size_t L_star,
                            const NneOptions& options, const RngStream& rng);

struct RangeFlag {
  std::string name;
  double estimate;
  double lower;
  double upper;
  bool on_boundary;  ///< exactly equal to a bound
};

struct RangeAdvisory {
  std::vector<RangeFlag> flags;
  bool ok() const noexcept { return flags.empty(); }
  std::string message() const;
};

/// Parameters whose estimate lies outside or on the boundary of the box.
RangeAdvisory check_theta_range(const EstimateReport& report);

}  // namespace nne
