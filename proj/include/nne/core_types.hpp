#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "nne/rng.hpp"

namespace nne {

/// Box-shaped parameter space: ordered labels with lower/upper bounds.
class ParamSpace {
 public:
  ParamSpace(std::vector<std::string> names, Eigen::VectorXd lower, Eigen::VectorXd upper);

  std::size_t dim() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const Eigen::VectorXd& lower() const noexcept { return lower_; }
  const Eigen::VectorXd& upper() const noexcept { return upper_; }

  Eigen::VectorXd center() const { return 0.5 * (lower_ + upper_); }
  Eigen::VectorXd width() const { return upper_ - lower_; }
  bool contains(const Eigen::VectorXd& x) const;

  /// Position of `name`; throws std::out_of_range when absent.
  std::size_t index_of(const std::string& name) const;

  /// Copy with one coordinate's bounds replaced.
  ParamSpace with_bounds(const std::string& name, double lower, double upper) const;

 private:
  std::vector<std::string> names_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

/// A point of a ParamSpace, coordinates in the space's order. Entries are finite.
struct ParamVector {
  ParamVector() = default;
  explicit ParamVector(Eigen::VectorXd v);
  Eigen::VectorXd values;

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
  double operator[](std::size_t k) const { return values(static_cast<Eigen::Index>(k)); }
};

/// Moment summary of one dataset. The length is fixed by `spec_id`.
struct MomentVector {
  std::string spec_id;
  Eigen::VectorXd values;

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
};

/// One (theta, moments) training pair; the moments come from a dataset simulated under theta.
struct TrainExample {
  ParamVector theta;
  MomentVector moments;
};

/// Independent uniform draw on each coordinate of the box.
ParamVector sample_theta(const ParamSpace& space, RngStream& rng);

}  // namespace nne
