#include "nne/gmm.hpp"

#include <algorithm>
#include <cmath>

#include "nne/errors.hpp"
#include "nne/optimize.hpp"

namespace nne::baselines {

namespace {

constexpr std::size_t kGridPoints = 201;

Eigen::VectorXd observed_moments(const ar1::Series& s, const ar1::MomentSpec& spec) {
  return ar1::moments(s, spec).values;
}

double quadratic(const Eigen::VectorXd& d, const Eigen::MatrixXd& w) { return d.dot(w * d); }

ScalarEstimate from(const ScalarResult& r) { return {r.x, r.f, r.converged, r.evaluations}; }

/// Identity step, then optimal weighting from the data.
ScalarEstimate two_step(const std::function<Eigen::VectorXd(double)>& g, const Eigen::VectorXd& m,
                        const Eigen::MatrixXd& w2, Weighting weighting) {
  const auto k = m.size();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);
  auto objective = [&](const Eigen::MatrixXd& w) {
    return [&g, &m, &w](double b) { return quadratic(m - g(b), w); };
  };
  ScalarResult first = minimize_scalar(objective(eye), kBetaLower, kBetaUpper, kGridPoints);
  if (weighting == Weighting::identity) return from(first);
  ScalarResult second = minimize_scalar(objective(w2), kBetaLower, kBetaUpper, kGridPoints);
  second.evaluations += first.evaluations;
  return from(second);
}

}  // namespace

double invert_lag1_moment(double m) {
  if (!(m > 0.0)) return 0.0;
  const double beta = (-1.0 + std::sqrt(1.0 + 4.0 * m * m)) / (2.0 * m);
  return std::clamp(beta, kBetaLower, kBetaUpper);
}

Eigen::MatrixXd newey_west(const Eigen::MatrixXd& contributions, int lags) {
  const Eigen::Index t = contributions.rows();
  if (t < 2) throw DomainError("HAC estimate needs at least two periods");
  const Eigen::MatrixXd f = contributions.rowwise() - contributions.colwise().mean();
  Eigen::MatrixXd s = f.transpose() * f / static_cast<double>(t);
  for (int l = 1; l <= lags && l < t; ++l) {
    const Eigen::MatrixXd gamma =
        f.bottomRows(t - l).transpose() * f.topRows(t - l) / static_cast<double>(t);
    const double weight = 1.0 - static_cast<double>(l) / static_cast<double>(lags + 1);
    s += weight * (gamma + gamma.transpose());
  }
  return 0.5 * (s + s.transpose());
}

int hac_lags(const ar1::MomentSpec& spec) { return spec.max_lag() + 2; }

Eigen::MatrixXd optimal_weighting(const Eigen::VectorXd& y, const ar1::MomentSpec& spec) {
  const Eigen::MatrixXd s = newey_west(ar1::term_contributions(y, spec), hac_lags(spec));
  // Pseudo-inverse guards against a singular long-run covariance.
  return s.completeOrthogonalDecomposition().pseudoInverse();
}

ScalarEstimate gmm_ar1(const ar1::Series& series, const GmmSpec& spec) {
  const auto& ms = spec.moments;
  const Eigen::VectorXd m = observed_moments(series, ms);
  if (ms.count() == 1 && ms.terms()[0].current_power == 1 && ms.terms()[0].lagged_power == 1 &&
      ms.terms()[0].lag == 1) {
    const double b = invert_lag1_moment(m(0));
    const double gap = m(0) - ar1::population_moment(b, 1);
    return {b, gap * gap, true, 1};
  }
  return gmm_ar1_numeric(series, spec);
}

ScalarEstimate gmm_ar1_numeric(const ar1::Series& series, const GmmSpec& spec) {
  const auto& ms = spec.moments;
  const Eigen::VectorXd m = observed_moments(series, ms);
  const Eigen::MatrixXd w2 = spec.weighting == Weighting::two_step_hac && ms.count() > 1
                                 ? optimal_weighting(series.values, ms)
                                 : Eigen::MatrixXd::Identity(m.size(), m.size());
  auto g = [&ms](double b) { return ar1::population_moments(b, ms); };
  return two_step(g, m, w2, spec.weighting);
}

ScalarEstimate match_simulated_statistic(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& statistic, const Eigen::VectorXd& observed,
    const Eigen::MatrixXd& weight, std::size_t n, std::size_t R, const RngStream& rng) {
  if (R < 1) throw DomainError("simulation count R must be at least 1");
  if (n < 2) throw DomainError("series length must be at least 2");
  RngStream draws = rng;
  std::vector<std::vector<double>> shocks(R, std::vector<double>(n));
  for (auto& series : shocks)
    for (auto& e : series) e = draws.normal();

  Eigen::VectorXd y;
  auto sbar = [&](double beta) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(observed.size());
    for (const auto& e : shocks) {
      ar1::simulate_from_shocks(beta, e, y);
      acc += statistic(y);
    }
    return Eigen::VectorXd(acc / static_cast<double>(R));
  };
  auto objective = [&](double beta) { return quadratic(observed - sbar(beta), weight); };
  return from(minimize_scalar(objective, kBetaLower, kBetaUpper, kGridPoints));
}

Eigen::VectorXd simulated_moments(double beta, const ar1::MomentSpec& spec, std::size_t n, std::size_t R,
                                  const RngStream& rng) {
  RngStream draws = rng;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.count()));
  Eigen::VectorXd y;
  std::vector<std::vector<double>> shocks(R, std::vector<double>(n));
  for (auto& series : shocks)
    for (auto& v : series) v = draws.normal();
  for (const auto& s : shocks) {
    ar1::simulate_from_shocks(beta, s, y);
    acc += ar1::moments(ar1::Series{y}, spec).values;
  }
  return acc / static_cast<double>(R);
}

ScalarEstimate smm_ar1(const ar1::Series& series, const GmmSpec& spec, std::size_t R, const RngStream& rng) {
  const auto& ms = spec.moments;
  const Eigen::VectorXd m = observed_moments(series, ms);
  auto stat = [&ms](const Eigen::VectorXd& y) { return ar1::moments(ar1::Series{y}, ms).values; };
  const auto k = m.size();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);
  ScalarEstimate first = match_simulated_statistic(stat, m, eye, series.size(), R, rng);
  if (spec.weighting == Weighting::identity || k == 1) return first;
  ScalarEstimate second =
      match_simulated_statistic(stat, m, optimal_weighting(series.values, ms), series.size(), R, rng);
  second.evaluations += first.evaluations;
  return second;
}

double ma1_autocovariance(const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  if (n < 2) throw DomainError("autocovariance needs at least two observations");
  double sum = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) sum += y(i) * y(i - 1);
  return sum / static_cast<double>(n - 1);
}

double ma1_sse(const Eigen::VectorXd& y, double alpha) {
  double e_prev = 0.0, sse = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double e = y(i) - alpha * e_prev;
    sse += e * e;
    e_prev = e;
  }
  return sse;
}

double ma1_least_squares(const Eigen::VectorXd& y) {
  return minimize_scalar([&y](double a) { return ma1_sse(y, a); }, -0.99, 0.99, 41).x;
}

ScalarEstimate indirect_inference_ar1(const ar1::Series& series, AuxModel aux, std::size_t R,
                                      const RngStream& rng) {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> stat;
  if (aux == AuxModel::ma1_ac)
    stat = [](const Eigen::VectorXd& y) { return Eigen::VectorXd::Constant(1, ma1_autocovariance(y)); };
  else
    stat = [](const Eigen::VectorXd& y) { return Eigen::VectorXd::Constant(1, ma1_least_squares(y)); };
  const Eigen::VectorXd observed = stat(series.values);
  return match_simulated_statistic(stat, observed, Eigen::MatrixXd::Identity(1, 1), series.size(), R, rng);
}

}  // namespace nne::baselines
