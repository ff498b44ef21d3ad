#include "nne/ar1.hpp"

#include <cmath>

#include "nne/errors.hpp"

namespace nne::ar1 {

MomentSpec::MomentSpec(int row) : row_(row) {
  switch (row) {
    case 1:
      terms_ = {{1, 1, 1}};
      break;
    case 2:
      terms_ = {{1, 1, 1}, {2, 0, 0}};
      break;
    case 3:
      for (int k = 1; k <= 3; ++k) terms_.push_back({1, 1, k});
      break;
    case 4:
      for (int k = 1; k <= 10; ++k) terms_.push_back({1, 1, k});
      break;
    case 5:
      terms_ = {{1, 1, 1}, {2, 1, 1}, {1, 2, 1}};
      break;
    case 6:
      for (int k = 1; k <= 3; ++k) {
        terms_.push_back({1, 1, k});
        terms_.push_back({2, 1, k});
        terms_.push_back({1, 2, k});
      }
      break;
    default:
      throw DomainError("AR(1) moment row must be 1..6, got " + std::to_string(row));
  }
  for (const auto& t : terms_) max_lag_ = std::max(max_lag_, t.lag);
}

MomentSpec MomentSpec::parse(const std::string& id) {
  std::string digits = id;
  for (const char* prefix : {"ar1_row", "row"}) {
    const std::string p = prefix;
    if (digits.rfind(p, 0) == 0) {
      digits = digits.substr(p.size());
      break;
    }
  }
  if (digits.size() != 1 || digits[0] < '1' || digits[0] > '6')
    throw DomainError("unknown AR(1) moment spec '" + id + "'");
  return MomentSpec(digits[0] - '0');
}

namespace {

void check_beta(double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw DomainError("AR(1) beta must lie in [0, 1)");
}

}  // namespace

void simulate_from_shocks(double beta, std::span<const double> shocks, Eigen::VectorXd& out) {
  check_beta(beta);
  const auto n = static_cast<Eigen::Index>(shocks.size());
  out.resize(n);
  out(0) = shocks[0] / std::sqrt(1.0 - beta * beta);
  for (Eigen::Index i = 1; i < n; ++i) out(i) = beta * out(i - 1) + shocks[static_cast<std::size_t>(i)];
}

Series simulate(double beta, std::size_t n, RngStream& rng) {
  check_beta(beta);
  if (n < 2) throw DomainError("AR(1) series needs n >= 2");
  std::vector<double> shocks(n);
  for (auto& e : shocks) e = rng.normal();
  Series s;
  simulate_from_shocks(beta, shocks, s.values);
  return s;
}

double sample_term(const Eigen::VectorXd& y, const MomentTerm& term) {
  const Eigen::Index n = y.size();
  double sum = 0.0;
  for (Eigen::Index i = term.lag; i < n; ++i)
    sum += std::pow(y(i), term.current_power) * std::pow(y(i - term.lag), term.lagged_power);
  return sum / static_cast<double>(n - term.lag);
}

MomentVector moments(const Series& series, const MomentSpec& spec) {
  if (series.values.size() <= spec.max_lag())
    throw DomainError("series of length " + std::to_string(series.size()) +
                      " is too short for lag " + std::to_string(spec.max_lag()));
  MomentVector m{spec.id(), Eigen::VectorXd(static_cast<Eigen::Index>(spec.count()))};
  for (std::size_t k = 0; k < spec.count(); ++k)
    m.values(static_cast<Eigen::Index>(k)) = sample_term(series.values, spec.terms()[k]);
  return m;
}

double population_moment(double beta, int lag) {
  check_beta(beta);
  if (lag < 0) throw DomainError("lag must be non-negative");
  return std::pow(beta, lag) / (1.0 - beta * beta);
}

double population_term(double beta, const MomentTerm& term) {
  const int order = term.current_power + (term.lag == 0 ? 0 : term.lagged_power);
  if (term.lag == 0) {
    // y_i^a with a = current + lagged power collapsed onto one period.
    const int a = term.current_power + term.lagged_power;
    if (a == 2) return population_moment(beta, 0);
    if (a % 2 == 1) return 0.0;
    throw DomainError("unsupported AR(1) moment term");
  }
  if (order == 2) return population_moment(beta, term.lag);
  if (order % 2 == 1) return 0.0;  // odd moments of a symmetric Gaussian process
  throw DomainError("unsupported AR(1) moment term");
}

Eigen::VectorXd population_moments(double beta, const MomentSpec& spec) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(spec.count()));
  for (std::size_t k = 0; k < spec.count(); ++k)
    g(static_cast<Eigen::Index>(k)) = population_term(beta, spec.terms()[k]);
  return g;
}

Eigen::MatrixXd term_contributions(const Eigen::VectorXd& y, const MomentSpec& spec) {
  const Eigen::Index start = spec.max_lag();
  const Eigen::Index rows = y.size() - start;
  Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(spec.count()));
  for (std::size_t k = 0; k < spec.count(); ++k) {
    const auto& t = spec.terms()[k];
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index i = start + r;
      out(r, static_cast<Eigen::Index>(k)) =
          std::pow(y(i), t.current_power) * std::pow(y(i - t.lag), t.lagged_power);
    }
  }
  return out;
}

}  // namespace nne::ar1
