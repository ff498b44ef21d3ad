#include "nne/smle.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "nne/errors.hpp"

namespace nne::baselines {

using search::Condition;

SmleDraws draw_smle_shocks(const search::ConsumerGrid& grid, std::size_t R, RngStream& rng) {
  if (R < 1) throw DomainError("SMLE needs at least one draw per consumer");
  SmleDraws d;
  d.R = R;
  d.option.resize(grid.total_options() * R);
  d.outside.resize(grid.n() * R);
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const std::size_t J = grid.options(i);
    double* block = d.option.data() + grid.offset(i) * R;
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t j = 0; j < J; ++j) block[r * J + j] = rng.normal();
      d.outside[i * R + r] = rng.normal();
    }
  }
  return d;
}

double log_logistic(double lambda, double slack) {
  if (lambda == 0.0) return -std::numbers::ln2;
  const double x = lambda * slack;
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

std::vector<double> smoothed_likelihoods(const search::SearchParams& params, const search::ConsumerGrid& grid,
                                         const std::vector<search::SearchOutcome>& outcomes, double lambda,
                                         const SmleDraws& draws) {
  if (!(lambda >= 0.0)) throw DomainError("smoothing factor must be non-negative");
  if (outcomes.size() != grid.n()) throw DomainError("one outcome per consumer is required");
  const std::size_t R = draws.R;
  if (R < 1 || draws.option.size() != grid.total_options() * R || draws.outside.size() != grid.n() * R)
    throw DomainError("SMLE draws do not match the consumer grid");

  std::vector<double> reservation, mean;
  search::reservation_utilities(params, grid, reservation);
  search::mean_utilities(params, grid, mean);

  std::vector<double> like(grid.n());
  std::vector<double> utility;
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const auto& o = outcomes[i];
    const std::size_t off = grid.offset(i), J = grid.options(i);
    const std::span<const double> r(reservation.data() + off, J);
    const auto bound = search::unsearched_bound(r, o);

    double fixed = 0.0;
    search::visit_fixed_conditions(r, o, bound, [&](Condition, double s) { fixed += log_logistic(lambda, s); });

    const double* eps = draws.option.data() + off * R;
    utility.resize(o.search_order.size());
    double total = 0.0;
    for (std::size_t d = 0; d < R; ++d) {
      for (std::size_t t = 0; t < o.search_order.size(); ++t) {
        const auto j = static_cast<std::size_t>(o.search_order[t]);
        utility[t] = mean[off + j] + eps[d * J + j];
      }
      const double u0 = params.eta + draws.outside[i * R + d];
      double log_score = fixed;
      search::visit_shock_conditions(r, utility, u0, o, bound,
                                     [&](Condition, double s) { log_score += log_logistic(lambda, s); });
      total += std::exp(log_score);
    }
    like[i] = total / static_cast<double>(R);
  }
  return like;
}

double smoothed_loglik(const search::SearchParams& params, const search::ConsumerGrid& grid,
                       const std::vector<search::SearchOutcome>& outcomes, double lambda,
                       const SmleDraws& draws) {
  double ll = 0.0;
  for (double l : smoothed_likelihoods(params, grid, outcomes, lambda, draws))
    ll += std::log(std::max(l, kLikelihoodFloor));
  return ll;
}

double smoothed_loglik(const search::SearchParams& params, const search::ConsumerGrid& grid,
                       const std::vector<search::SearchOutcome>& outcomes, double lambda, std::size_t R,
                       RngStream& rng) {
  return smoothed_loglik(params, grid, outcomes, lambda, draw_smle_shocks(grid, R, rng));
}

SmleResult smle_search(const search::ConsumerGrid& grid, const std::vector<search::SearchOutcome>& outcomes,
                       const SmleSpec& spec, const RngStream& rng, const ParamSpace& space) {
  if (!(spec.lambda > 0.0)) throw ConfigError("SMLE smoothing factor must be positive");
  if (spec.R < 1) throw ConfigError("SMLE needs R >= 1");
  if (space.dim() != search::kParams) throw ConfigError("SMLE parameter space must have 9 dimensions");

  RngStream draw_stream = rng;
  const SmleDraws draws = draw_smle_shocks(grid, spec.R, draw_stream);
  std::size_t evaluations = 0;
  auto negative_ll = [&](const Eigen::VectorXd& x) {
    ++evaluations;
    return -smoothed_loglik(search::SearchParams::from_vector(x), grid, outcomes, spec.lambda, draws);
  };

  const Eigen::VectorXd start = spec.start.value_or(space.center());
  if (start.size() != search::kParams) throw ConfigError("SMLE start must have 9 entries");
  NelderMeadOptions nm;
  nm.max_evaluations = spec.max_evaluations;
  nm.f_tol = 1e-4;
  nm.x_tol = 1e-4;
  nm.initial_step = 0.1 * space.width();
  const OptimizeResult opt = nelder_mead(negative_ll, start, nm);

  SmleResult res;
  res.theta = ParamVector(opt.x);
  res.loglik = -opt.f;
  res.evaluations = opt.evaluations;
  res.converged = opt.converged;

  const Eigen::VectorXd step = 1e-3 * opt.x.cwiseAbs().cwiseMax(1.0);
  const Eigen::MatrixXd hess = numerical_hessian(negative_ll, opt.x, step);
  Eigen::LLT<Eigen::MatrixXd> llt(hess);
  res.se = Eigen::VectorXd::Constant(search::kParams, std::numeric_limits<double>::quiet_NaN());
  if (llt.info() == Eigen::Success) {
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(search::kParams, search::kParams));
    if ((cov.diagonal().array() > 0.0).all()) {
      res.se = cov.diagonal().cwiseSqrt();
      res.se_valid = true;
    }
  }
  res.sim_burden = spec.R * evaluations;
  return res;
}

}  // namespace nne::baselines
