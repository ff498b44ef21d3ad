#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "nne/core_types.hpp"
#include "nne/rng.hpp"

namespace nne::ar1 {

inline constexpr std::size_t kDefaultLength = 100;

/// y_1..y_n of a stationary Gaussian AR(1).
struct Series {
  Eigen::VectorXd values;
  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
};

/// Product y_i^current_power * y_{i-lag}^lagged_power averaged over i = lag+1..n.
struct MomentTerm {
  int current_power;
  int lagged_power;
  int lag;
};

/// The six moment sets of the redundant-moment study:
///   1: y_i y_{i-1}
///   2: y_i y_{i-1}, y_i^2
///   3: y_i y_{i-k}, k = 1..3
///   4: y_i y_{i-k}, k = 1..10
///   5: y_i y_{i-1}, y_i^2 y_{i-1}, y_i y_{i-1}^2
///   6: for k = 1..3: y_i y_{i-k}, y_i^2 y_{i-k}, y_i y_{i-k}^2
class MomentSpec {
 public:
  explicit MomentSpec(int row);
  static MomentSpec parse(const std::string& id);  // "row1".."row6" or "1".."6"

  int row() const noexcept { return row_; }
  std::string id() const { return "ar1_row" + std::to_string(row_); }
  const std::vector<MomentTerm>& terms() const noexcept { return terms_; }
  std::size_t count() const noexcept { return terms_.size(); }
  int max_lag() const noexcept { return max_lag_; }

 private:
  int row_;
  std::vector<MomentTerm> terms_;
  int max_lag_ = 0;
};

/// y_1 from the stationary law N(0, 1/(1-beta^2)), then y_i = beta y_{i-1} + e_i.
/// Throws DomainError unless 0 <= beta < 1 and n >= 2.
Series simulate(double beta, std::size_t n, RngStream& rng);

/// Same recursion driven by supplied standard-normal draws (initial draw first).
/// Used for common random numbers across beta.
void simulate_from_shocks(double beta, std::span<const double> shocks, Eigen::VectorXd& out);

/// Sample moments, each normalized by its own count of terms (n - lag).
MomentVector moments(const Series& series, const MomentSpec& spec);
double sample_term(const Eigen::VectorXd& y, const MomentTerm& term);

/// E(y_i y_{i-lag}) = beta^lag / (1 - beta^2).
double population_moment(double beta, int lag);

/// Population value of one moment term under the AR(1) law.
double population_term(double beta, const MomentTerm& term);
Eigen::VectorXd population_moments(double beta, const MomentSpec& spec);

/// Per-period contributions of every term on the common index range
/// i = max_lag+1..n; rows are periods, columns are terms.
Eigen::MatrixXd term_contributions(const Eigen::VectorXd& y, const MomentSpec& spec);

}  // namespace nne::ar1
