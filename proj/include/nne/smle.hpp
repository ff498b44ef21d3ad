#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "nne/core_types.hpp"
#include "nne/optimize.hpp"
#include "nne/rng.hpp"
#include "nne/search_model.hpp"

namespace nne::baselines {

/// Per-consumer likelihood floor.
inline constexpr double kLikelihoodFloor = 1e-12;

/// Simulation draws held fixed across parameter values. For consumer i and
/// draw r the option shocks are option[offset(i) * R + r * J_i + j] and the
/// outside shock is outside[i * R + r].
struct SmleDraws {
  std::size_t R = 0;
  std::vector<double> option;
  std::vector<double> outside;
};

/// Consumer by consumer, draw by draw: eps_i1..eps_iJ then eps_i0.
SmleDraws draw_smle_shocks(const search::ConsumerGrid& grid, std::size_t R, RngStream& rng);

/// log sigma(lambda * s); lambda = 0 gives log(1/2).
double log_logistic(double lambda, double slack);

/// Sum over consumers of log max(floor, mean_r prod_c sigma(lambda * slack_c)),
/// the product running over the optimality conditions of the observed outcome.
double smoothed_loglik(const search::SearchParams& params, const search::ConsumerGrid& grid,
                       const std::vector<search::SearchOutcome>& outcomes, double lambda,
                       const SmleDraws& draws);

/// Draws R sets of shocks from `rng` and evaluates.
double smoothed_loglik(const search::SearchParams& params, const search::ConsumerGrid& grid,
                       const std::vector<search::SearchOutcome>& outcomes, double lambda, std::size_t R,
                       RngStream& rng);

/// Per-consumer simulated likelihoods (before the floor).
std::vector<double> smoothed_likelihoods(const search::SearchParams& params, const search::ConsumerGrid& grid,
                                         const std::vector<search::SearchOutcome>& outcomes, double lambda,
                                         const SmleDraws& draws);

struct SmleSpec {
  double lambda = 7.0;
  std::size_t R = 50;
  /// Defaults to the center of the parameter space.
  std::optional<Eigen::VectorXd> start;
  std::size_t max_evaluations = 2000;
};

struct SmleResult {
  ParamVector theta;
  /// Square roots of the diagonal of the inverse negative Hessian; NaN when it is not positive definite.
  Eigen::VectorXd se;
  bool se_valid = false;
  double loglik = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
  /// R times the number of likelihood evaluations, Hessian included.
  std::size_t sim_burden = 0;
};

/// Maximizes the smoothed log-likelihood by Nelder-Mead with common random numbers.
SmleResult smle_search(const search::ConsumerGrid& grid, const std::vector<search::SearchOutcome>& outcomes,
                       const SmleSpec& spec, const RngStream& rng,
                       const ParamSpace& space = search::default_space());

}  // namespace nne::baselines
