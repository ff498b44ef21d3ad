#include "nne/core_types.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "nne/errors.hpp"

namespace nne {

ParamSpace::ParamSpace(std::vector<std::string> names, Eigen::VectorXd lower,
                       Eigen::VectorXd upper)
    : names_(std::move(names)), lower_(std::move(lower)), upper_(std::move(upper)) {
  const auto p = static_cast<Eigen::Index>(names_.size());
  if (p == 0) throw DomainError("parameter space must have at least one dimension");
  if (lower_.size() != p || upper_.size() != p)
    throw DomainError("parameter space bounds do not match the number of names");
  std::set<std::string> seen;
  for (Eigen::Index k = 0; k < p; ++k) {
    const auto& name = names_[static_cast<std::size_t>(k)];
    if (!seen.insert(name).second) throw DomainError("duplicate parameter name '" + name + "'");
    if (!std::isfinite(lower_(k)) || !std::isfinite(upper_(k)) || !(lower_(k) < upper_(k)))
      throw DomainError("parameter '" + name + "' needs finite lower < upper");
  }
}

bool ParamSpace::contains(const Eigen::VectorXd& x) const {
  if (x.size() != lower_.size()) return false;
  return ((x.array() >= lower_.array()) && (x.array() <= upper_.array())).all();
}

std::size_t ParamSpace::index_of(const std::string& name) const {
  for (std::size_t k = 0; k < names_.size(); ++k)
    if (names_[k] == name) return k;
  throw std::out_of_range("no parameter named '" + name + "'");
}

ParamSpace ParamSpace::with_bounds(const std::string& name, double lower, double upper) const {
  Eigen::VectorXd lo = lower_, hi = upper_;
  const auto k = static_cast<Eigen::Index>(index_of(name));
  lo(k) = lower;
  hi(k) = upper;
  return ParamSpace(names_, lo, hi);
}

ParamVector::ParamVector(Eigen::VectorXd v) : values(std::move(v)) {
  if (!values.allFinite()) throw DomainError("parameter vector has non-finite entries");
}

ParamVector sample_theta(const ParamSpace& space, RngStream& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(space.dim()));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = rng.uniform(space.lower()(k), space.upper()(k));
  return ParamVector(std::move(v));
}

}  // namespace nne
