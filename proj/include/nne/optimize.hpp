#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace nne {

struct NelderMeadOptions {
  std::size_t max_evaluations = 2000;
  /// Stop when the spread of simplex values falls below this.
  double f_tol = 1e-8;
  /// Stop when every vertex is within this distance (max-norm) of the best one.
  double x_tol = 1e-8;
  /// Per-coordinate offsets of the initial simplex; defaults to 0.1 * max(1, |x0_k|).
  Eigen::VectorXd initial_step;
};

struct OptimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization (standard reflection, expansion,
/// contraction and shrink coefficients 1, 2, 1/2, 1/2). Non-finite values are treated as +inf.
OptimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x0, const NelderMeadOptions& options = {});

struct ScalarResult {
  double x = 0.0;
  double f = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Global grid scan of [lo, hi] followed by Brent refinement between the
/// neighbours of the best grid point. Ties on the grid go to the smaller x.
ScalarResult minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                             std::size_t grid_points = 101);

/// Central-difference Hessian with per-coordinate steps.
Eigen::MatrixXd numerical_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& x, const Eigen::VectorXd& step);

}  // namespace nne
