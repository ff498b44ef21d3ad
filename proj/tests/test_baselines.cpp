#include <doctest.h>

#include <cmath>

#include "nne/ar1.hpp"
#include "nne/gmm.hpp"
#include "nne/lasso.hpp"
#include "nne/optimize.hpp"

using namespace nne;
using namespace nne::baselines;

namespace {

ar1::Series series_at(double beta, std::uint64_t seed) {
  RngStream r(seed);
  return ar1::simulate(beta, 100, r);
}

}  // namespace

TEST_SUITE("gmm") {
  TEST_CASE("lag-one inversion") {
    CHECK(invert_lag1_moment(0.6 / 0.64) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(invert_lag1_moment(-0.3) == 0.0);
    CHECK(invert_lag1_moment(1e9) <= kBetaUpper);
  }

  TEST_CASE("closed form and numerical minimization agree") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      const auto s = series_at(0.6, seed);
      const double a = gmm_ar1(s, {}).value, b = gmm_ar1_numeric(s, {}).value;
      CAPTURE(seed);
      CHECK(std::abs(a - b) <= 1e-8);
    }
  }

  TEST_CASE("HAC covariance is symmetric positive semidefinite") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const auto s = series_at(0.8, seed);
      for (int row : {2, 4, 6}) {
        const ar1::MomentSpec spec(row);
        const Eigen::MatrixXd S = newey_west(ar1::term_contributions(s.values, spec), hac_lags(spec));
        CHECK((S - S.transpose()).norm() <= 1e-12 * S.norm());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * eig.eigenvalues().maxCoeff());
      }
    }
  }

  TEST_CASE("Newey-West with zero lags is the demeaned second moment") {
    Eigen::MatrixXd c(4, 2);
    c << 1, 2, 3, 0, -1, 1, 1, 1;
    const Eigen::MatrixXd d = c.rowwise() - c.colwise().mean();
    CHECK((newey_west(c, 0) - d.transpose() * d / 4.0).norm() <= 1e-14);
  }

  TEST_CASE("indirect inference by lag-one autocovariance equals SMM on the lag-one moment") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto s = series_at(0.6, seed);
      const RngStream rng(9, {seed});
      const auto ii = indirect_inference_ar1(s, AuxModel::ma1_ac, 10, rng);
      const auto smm = smm_ar1(s, {ar1::MomentSpec(1), Weighting::identity}, 10, rng);
      CHECK(ii.value == smm.value);
    }
  }

  TEST_CASE("MA(1) least squares recovers a moving-average coefficient") {
    RngStream r(7);
    Eigen::VectorXd y(5000);
    double prev = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double e = r.normal();
      y(i) = e + 0.5 * prev;
      prev = e;
    }
    CHECK(std::abs(ma1_least_squares(y) - 0.5) < 0.05);
    CHECK(ma1_sse(y, 0.0) == doctest::Approx(y.squaredNorm()));
  }

  TEST_CASE("estimators land near the truth on long series") {
    RngStream r(8);
    const auto s = ar1::simulate(0.6, 20000, r);
    CHECK(std::abs(gmm_ar1(s, {ar1::MomentSpec(3)}).value - 0.6) < 0.03);
    CHECK(std::abs(smm_ar1(s, {ar1::MomentSpec(1)}, 5, RngStream(3)).value - 0.6) < 0.03);
  }
}

TEST_SUITE("optimize") {
  TEST_CASE("Nelder-Mead finds the Rosenbrock minimum") {
    auto rosen = [](const Eigen::VectorXd& x) {
      return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2);
    };
    NelderMeadOptions o;
    o.max_evaluations = 5000;
    o.f_tol = 1e-14;
    o.x_tol = 1e-10;
    const auto r = nelder_mead(rosen, Eigen::Vector2d(-1.2, 1.0), o);
    CHECK(r.converged);
    CHECK(std::abs(r.x(0) - 1) < 1e-4);
    CHECK(std::abs(r.x(1) - 1) < 1e-4);
  }

  TEST_CASE("Nelder-Mead treats non-finite values as +inf") {
    auto f = [](const Eigen::VectorXd& x) { return x(0) < 0 ? std::nan("") : (x(0) - 1) * (x(0) - 1); };
    const auto r = nelder_mead(f, Eigen::VectorXd::Constant(1, 0.2));
    CHECK(std::abs(r.x(0) - 1) < 1e-4);
  }

  TEST_CASE("scalar minimization scans globally before refining") {
    // two local minima; the global one at x = 2
    auto f = [](double x) { return std::min((x + 1) * (x + 1) + 0.5, (x - 2) * (x - 2)); };
    const auto r = minimize_scalar(f, -3, 3);
    CHECK(std::abs(r.x - 2) < 1e-6);
  }

  TEST_CASE("numerical Hessian of a quadratic") {
    Eigen::Matrix2d A;
    A << 2, 0.5, 0.5, 1;
    auto f = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(A * x); };
    const auto H = numerical_hessian(f, Eigen::Vector2d(0.3, -0.2), Eigen::Vector2d(1e-3, 1e-3));
    CHECK((H - A).norm() < 1e-6);
  }
}

TEST_SUITE("lasso") {
  TEST_CASE("feature counts") {
    CHECK(polynomial_feature_count(10, 2) == 65);
    CHECK(polynomial_feature_count(10, 3) == 285);
    CHECK(polynomial_feature_count(1, 1) == 1);
    RngStream r(60);
    Eigen::MatrixXd x(5, 10);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = r.normal();
    CHECK(polynomial_features(x, 3).cols() == 285);
  }

  TEST_CASE("graded lexicographic features") {
    Eigen::MatrixXd x(1, 2);
    x << 2, 3;
    const auto f = polynomial_features(x, 2);
    REQUIRE(f.cols() == 5);
    CHECK(f(0, 0) == 2);
    CHECK(f(0, 1) == 3);
    CHECK(f(0, 2) == 4);
    CHECK(f(0, 3) == 6);
    CHECK(f(0, 4) == 9);
  }

  TEST_CASE("zero penalty reproduces least squares") {
    RngStream r(61);
    const Eigen::Index N = 200, k = 6;
    Eigen::MatrixXd x(N, k);
    Eigen::VectorXd y(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) x(i, j) = r.normal();
      y(i) = 0.5 * x(i, 0) - x(i, 3) + 0.3 * r.normal();
    }
    x = x.rowwise() - x.colwise().mean();
    const Eigen::VectorXd yc = y.array() - y.mean();
    const Eigen::VectorXd b = lasso_coordinate_descent(x, yc, 0.0, {}, 1e-14);
    const Eigen::VectorXd ols = x.colPivHouseholderQr().solve(yc);
    CHECK(std::abs((yc - x * b).norm() - (yc - x * ols).norm()) <= 1e-8);
    CHECK((b - ols).norm() < 1e-6);
  }

  TEST_CASE("large penalty zeroes every coefficient and the path is sparse") {
    RngStream r(62);
    Eigen::MatrixXd x(300, 8);
    Eigen::VectorXd y(300);
    for (Eigen::Index i = 0; i < 300; ++i) {
      for (Eigen::Index j = 0; j < 8; ++j) x(i, j) = r.normal();
      y(i) = 2 * x(i, 1) + 0.1 * r.normal();
    }
    x = x.rowwise() - x.colwise().mean();
    const Eigen::VectorXd yc = y.array() - y.mean();
    const double lmax = (x.transpose() * yc).cwiseAbs().maxCoeff() / 300.0;
    CHECK(lasso_coordinate_descent(x, yc, lmax * 1.0001).isZero());
    const auto b = lasso_coordinate_descent(x, yc, 0.1);
    CHECK(b(1) > 1.5);
    int nonzero = 0;
    for (Eigen::Index j = 0; j < 8; ++j) nonzero += b(j) != 0.0;
    CHECK(nonzero <= 3);
  }

  TEST_CASE("polynomial lasso learns a quadratic map") {
    RngStream r(63);
    std::vector<TrainExample> ex;
    for (int l = 0; l < 1000; ++l) {
      const double t = r.uniform(0, 1);
      Eigen::VectorXd m(2);
      m << t + 0.01 * r.normal(), r.normal();
      ex.push_back({ParamVector(Eigen::VectorXd::Constant(1, t * t)), {"q", m}});
    }
    const auto model = lasso_poly_train(ex, 2);
    CHECK(std::abs(lasso_predict(model, Eigen::Vector2d(0.5, 0.0))(0) - 0.25) < 0.02);
  }
}
