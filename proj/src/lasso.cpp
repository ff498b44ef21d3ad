#include "nne/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nne/errors.hpp"

namespace nne::baselines {

namespace {

/// Exponent tuples as index lists with repetition, i1 <= i2 <= ... <= ik.
std::vector<std::vector<int>> monomials(std::size_t d, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start, int remaining) -> void {
    if (remaining == 0) {
      out.push_back(cur);
      return;
    }
    for (int v = start; v < static_cast<int>(d); ++v) {
      cur.push_back(v);
      self(self, v, remaining - 1);
      cur.pop_back();
    }
  };
  for (int k = 1; k <= degree; ++k) rec(rec, 0, k);
  return out;
}

double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

}  // namespace

std::size_t polynomial_feature_count(std::size_t d, int degree) {
  if (degree < 1) throw DomainError("polynomial degree must be at least 1");
  // C(d + degree, degree) - 1
  double c = 1.0;
  for (int k = 1; k <= degree; ++k) c = c * static_cast<double>(d + static_cast<std::size_t>(k)) / k;
  return static_cast<std::size_t>(std::llround(c)) - 1;
}

Eigen::MatrixXd polynomial_features(const Eigen::MatrixXd& x, int degree) {
  if (degree < 1 || degree > 3) throw DomainError("polynomial degree must be 1, 2 or 3");
  const auto terms = monomials(static_cast<std::size_t>(x.cols()), degree);
  Eigen::MatrixXd f(x.rows(), static_cast<Eigen::Index>(terms.size()));
  for (std::size_t t = 0; t < terms.size(); ++t) {
    Eigen::VectorXd col = Eigen::VectorXd::Ones(x.rows());
    for (int v : terms[t]) col = col.cwiseProduct(x.col(v));
    f.col(static_cast<Eigen::Index>(t)) = col;
  }
  return f;
}

Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double penalty,
                                         const Eigen::VectorXd& warm, double tol, std::size_t max_sweeps) {
  if (penalty < 0.0) throw DomainError("lasso penalty must be non-negative");
  if (x.rows() != y.size()) throw DomainError("lasso design and response sizes differ");
  const Eigen::Index n = x.rows(), p = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd b = warm.size() == p ? warm : Eigen::VectorXd::Zero(p);
  const Eigen::VectorXd col_sq = x.colwise().squaredNorm().transpose() * inv_n;
  Eigen::VectorXd resid = y - x * b;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_sq(j) <= 0.0) {
        b(j) = 0.0;
        continue;
      }
      const double rho = x.col(j).dot(resid) * inv_n + col_sq(j) * b(j);
      const double nb = soft_threshold(rho, penalty) / col_sq(j);
      const double delta = nb - b(j);
      if (delta != 0.0) {
        resid -= delta * x.col(j);
        b(j) = nb;
        max_change = std::max(max_change, std::abs(delta) * std::sqrt(col_sq(j)));
      }
    }
    if (max_change < tol) break;
  }
  return b;
}

LassoModel lasso_poly_train(std::span<const TrainExample> examples, int degree, std::vector<double> penalties,
                            double validation_fraction) {
  if (examples.size() < 4) throw ConfigError("lasso needs at least four examples");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw ConfigError("validation fraction must lie in (0, 1)");
  const std::size_t total = examples.size();
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(total))));
  const auto n_train = static_cast<Eigen::Index>(total - n_val);
  const auto d = static_cast<Eigen::Index>(examples[0].moments.size());
  const auto p = static_cast<Eigen::Index>(examples[0].theta.size());

  Eigen::MatrixXd m(static_cast<Eigen::Index>(total), d), theta(static_cast<Eigen::Index>(total), p);
  for (std::size_t l = 0; l < total; ++l) {
    if (examples[l].moments.values.size() != d || examples[l].theta.values.size() != p)
      throw ConfigError("inconsistent example dimensions");
    m.row(static_cast<Eigen::Index>(l)) = examples[l].moments.values.transpose();
    theta.row(static_cast<Eigen::Index>(l)) = examples[l].theta.values.transpose();
  }

  LassoModel model;
  model.degree = degree;
  model.input_mean = m.topRows(n_train).colwise().mean().transpose();
  model.input_sd = ((m.topRows(n_train).rowwise() - model.input_mean.transpose()).array().square().colwise().mean())
                       .sqrt()
                       .max(1e-12)
                       .transpose();
  const Eigen::MatrixXd z =
      (m.rowwise() - model.input_mean.transpose()).array().rowwise() / model.input_sd.transpose().array();
  const Eigen::MatrixXd f = polynomial_features(z, degree);
  model.feature_mean = f.topRows(n_train).colwise().mean().transpose();
  model.feature_sd = ((f.topRows(n_train).rowwise() - model.feature_mean.transpose()).array().square().colwise().mean())
                         .sqrt()
                         .transpose();
  Eigen::MatrixXd fs = f.rowwise() - model.feature_mean.transpose();
  for (Eigen::Index k = 0; k < fs.cols(); ++k) {
    if (model.feature_sd(k) > 1e-12)
      fs.col(k) /= model.feature_sd(k);
    else
      fs.col(k).setZero();
  }
  const Eigen::MatrixXd x_tr = fs.topRows(n_train), x_va = fs.bottomRows(static_cast<Eigen::Index>(n_val));

  model.coef = Eigen::MatrixXd::Zero(fs.cols(), p);
  model.intercept = theta.topRows(n_train).colwise().mean().transpose();
  model.penalty = Eigen::VectorXd::Zero(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const Eigen::VectorXd y_tr = theta.col(k).head(n_train).array() - model.intercept(k);
    const Eigen::VectorXd y_va = theta.col(k).tail(static_cast<Eigen::Index>(n_val)).array() - model.intercept(k);
    std::vector<double> grid = penalties;
    if (grid.empty()) {
      const double top = (x_tr.transpose() * y_tr).cwiseAbs().maxCoeff() / static_cast<double>(n_train);
      for (int g = 0; g < 50; ++g) grid.push_back(top * std::pow(1e-4, g / 49.0));
    }
    std::sort(grid.begin(), grid.end(), std::greater<>());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(fs.cols());
    double best = std::numeric_limits<double>::infinity();
    for (double lam : grid) {
      b = lasso_coordinate_descent(x_tr, y_tr, lam, b, 1e-8, 10000);
      const double mse = (y_va - x_va * b).squaredNorm();
      if (mse < best) {
        best = mse;
        model.coef.col(k) = b;
        model.penalty(k) = lam;
      }
    }
  }
  return model;
}

Eigen::VectorXd lasso_predict(const LassoModel& model, const Eigen::VectorXd& moments) {
  if (moments.size() != model.input_mean.size()) throw DomainError("moment vector length does not match the lasso model");
  const Eigen::MatrixXd z = ((moments - model.input_mean).cwiseQuotient(model.input_sd)).transpose();
  Eigen::RowVectorXd f = polynomial_features(z, model.degree).row(0) - model.feature_mean.transpose();
  for (Eigen::Index k = 0; k < f.size(); ++k) f(k) = model.feature_sd(k) > 1e-12 ? f(k) / model.feature_sd(k) : 0.0;
  return model.intercept + (f * model.coef).transpose();
}

}  // namespace nne::baselines
