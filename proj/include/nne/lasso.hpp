#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "nne/core_types.hpp"

namespace nne::baselines {

/// Number of non-constant monomials of total degree 1..degree in d variables.
std::size_t polynomial_feature_count(std::size_t d, int degree);

/// Monomials of the columns of x (rows are observations), graded by degree and
/// lexicographic within a degree; no constant column.
Eigen::MatrixXd polynomial_features(const Eigen::MatrixXd& x, int degree);

/// Minimizes (2N)^-1 |y - X b|^2 + penalty |b|_1 by cyclic coordinate descent.
/// X columns should be centered; zero-variance columns keep coefficient 0.
/// Starts from `warm` when it has the right size.
Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double penalty,
                                         const Eigen::VectorXd& warm = {}, double tol = 1e-10,
                                         std::size_t max_sweeps = 100000);

struct LassoModel {
  int degree = 2;
  Eigen::VectorXd input_mean, input_sd;
  Eigen::VectorXd feature_mean, feature_sd;
  /// features x outputs, on standardized features.
  Eigen::MatrixXd coef;
  Eigen::VectorXd intercept;
  /// Selected penalty per output.
  Eigen::VectorXd penalty;
};

/// Fits one lasso per parameter on the first (1 - validation_fraction) of the
/// examples and picks each penalty by validation MSE. An empty grid means 50
/// log-spaced values from the smallest all-zero penalty down by a factor 1e4.
LassoModel lasso_poly_train(std::span<const TrainExample> examples, int degree,
                            std::vector<double> penalties = {}, double validation_fraction = 0.10);

Eigen::VectorXd lasso_predict(const LassoModel& model, const Eigen::VectorXd& moments);

}  // namespace nne::baselines
