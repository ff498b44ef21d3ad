#pragma once

#include <Eigen/Dense>

#include <functional>

#include "nne/ar1.hpp"
#include "nne/rng.hpp"

namespace nne::baselines {

/// Admissible range for AR(1) method-of-moments estimates.
inline constexpr double kBetaLower = 0.0;
inline constexpr double kBetaUpper = 0.999;

enum class Weighting { identity, two_step_hac };

struct GmmSpec {
  ar1::MomentSpec moments{1};
  Weighting weighting = Weighting::two_step_hac;
};

struct ScalarEstimate {
  double value = 0.0;
  /// Objective value at `value`.
  double objective = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};

/// beta solving beta / (1 - beta^2) = m on [0, 1); 0 for m <= 0. Clamped to the admissible range.
double invert_lag1_moment(double m);

/// Newey-West (Bartlett kernel) long-run covariance of the rows of `contributions`,
/// demeaned column by column, with `lags` autocovariance terms.
Eigen::MatrixXd newey_west(const Eigen::MatrixXd& contributions, int lags);

/// Lag truncation used for the optimal weighting matrix: max lag of the spec plus 2.
int hac_lags(const ar1::MomentSpec& spec);

/// Inverse of the HAC covariance of the series' moment contributions.
Eigen::MatrixXd optimal_weighting(const Eigen::VectorXd& y, const ar1::MomentSpec& spec);

/// GMM with population moments. A single lag-1 moment is inverted in closed
/// form; otherwise identity-weighted first step, then HAC-weighted second step.
ScalarEstimate gmm_ar1(const ar1::Series& series, const GmmSpec& spec);

/// Same estimator but the single-moment case minimized numerically.
ScalarEstimate gmm_ar1_numeric(const ar1::Series& series, const GmmSpec& spec);

/// Minimizes (s - sbar(beta))' W (s - sbar(beta)) over the admissible range, where
/// sbar(beta) averages `statistic` over R series simulated from fixed shocks.
/// The shocks are drawn once from `rng` (R series of n standard normals).
ScalarEstimate match_simulated_statistic(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& statistic,
                                         const Eigen::VectorXd& observed, const Eigen::MatrixXd& weight,
                                         std::size_t n, std::size_t R, const RngStream& rng);

/// SMM: simulated moments with common random numbers across beta.
ScalarEstimate smm_ar1(const ar1::Series& series, const GmmSpec& spec, std::size_t R, const RngStream& rng);

/// Simulated moment function at beta (exposed for plots and determinism checks).
Eigen::VectorXd simulated_moments(double beta, const ar1::MomentSpec& spec, std::size_t n, std::size_t R,
                                  const RngStream& rng);

enum class AuxModel { ma1_ac, ma1_ls };

/// Lag-one sample autocovariance (n-1)^-1 sum y_i y_{i-1}, the MA(1) coefficient by moments.
double ma1_autocovariance(const Eigen::VectorXd& y);

/// Residual sum of squares of y_i = e_i + alpha e_{i-1} with e_0 = 0.
double ma1_sse(const Eigen::VectorXd& y, double alpha);

/// Least-squares MA(1) coefficient on (-0.99, 0.99).
double ma1_least_squares(const Eigen::VectorXd& y);

/// Indirect inference with an MA(1) auxiliary model.
ScalarEstimate indirect_inference_ar1(const ar1::Series& series, AuxModel aux, std::size_t R,
                                      const RngStream& rng);

}  // namespace nne::baselines
