#include <doctest.h>

#include <cmath>

#include "nne/search_model.hpp"

using namespace nne;
using namespace nne::search;

namespace {

// Centered cross-products via matrices, population divisor.
Eigen::MatrixXd cross_cov(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd yc = y.rowwise() - y.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
  return yc.transpose() * xc / static_cast<double>(y.rows());
}

struct Dataset {
  ConsumerGrid grid;
  std::vector<SearchOutcome> outcomes;
};

Dataset small_dataset() {
  RngStream r(31);
  Dataset d;
  d.grid = generate_covariates(60, 6, r);
  d.outcomes = simulate_search(true_params(), d.grid, r);
  return d;
}

}  // namespace

TEST_SUITE("search_moments") {
  TEST_CASE("moment counts") {
    CHECK(moment_count(MomentSpec::m16) == 16);
    CHECK(moment_count(MomentSpec::m32) == 32);
    CHECK(moment_count(MomentSpec::m40) == 40);
    CHECK(moment_count(MomentSpec::m46) == 46);
    CHECK(moment_count(MomentSpec::m60) == 60);
    CHECK(moment_count(MomentSpec::m81) == 81);
    const auto d = small_dataset();
    for (auto s : all_moment_specs()) CHECK(search_moments(d.grid, d.outcomes, s).size() == moment_count(s));
    CHECK(parse_moment_spec("std46") == MomentSpec::m46);
  }

  TEST_CASE("moment blocks against a matrix computation") {
    const auto d = small_dataset();
    const auto& g = d.grid;
    const std::size_t N = g.total_options(), n = g.n();
    Eigen::MatrixXd y(N, 2), x(N, kCovariates), yt(n, 3), xbar = Eigen::MatrixXd::Zero(n, kCovariates);
    std::size_t row = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& o = d.outcomes[i];
      for (std::size_t j = 0; j < g.options(i); ++j, ++row) {
        y(row, 0) = o.searched(static_cast<int>(j)) ? 1 : 0;
        y(row, 1) = o.bought == static_cast<int>(j) ? 1 : 0;
        std::array<double, kCovariates> c{};
        g.covariates(i, j, c);
        for (int k = 0; k < kCovariates; ++k) {
          x(row, k) = c[k];
          xbar(i, k) += c[k] / static_cast<double>(g.options(i));
        }
      }
      yt(i, 0) = o.search_count() > 1 ? 1 : 0;
      yt(i, 1) = static_cast<double>(o.search_count());
      yt(i, 2) = o.purchased() ? 1 : 0;
    }
    const Eigen::VectorXd m = search_moments(g, d.outcomes, MomentSpec::m46).values;
    CHECK(m(0) == doctest::Approx(y.col(0).mean()).epsilon(1e-12));
    CHECK(m(1) == doctest::Approx(y.col(1).mean()).epsilon(1e-12));
    const Eigen::MatrixXd cyx = cross_cov(y, x);
    for (int a = 0; a < 2; ++a)
      for (int k = 0; k < kCovariates; ++k) CHECK(m(2 + 7 * a + k) == doctest::Approx(cyx(a, k)).scale(1).epsilon(1e-10));
    for (int a = 0; a < 3; ++a) CHECK(m(16 + a) == doctest::Approx(yt.col(a).mean()).epsilon(1e-12));
    const Eigen::MatrixXd cyt = cross_cov(yt, xbar);
    for (int a = 0; a < 3; ++a)
      for (int k = 0; k < kCovariates; ++k) CHECK(m(19 + 7 * a + k) == doctest::Approx(cyt(a, k)).scale(1).epsilon(1e-10));
    const Eigen::MatrixXd vy = cross_cov(yt, yt);
    int pos = 40;
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) CHECK(m(pos++) == doctest::Approx(vy(a, b)).scale(1).epsilon(1e-10));

    const Eigen::VectorXd m81 = search_moments(g, d.outcomes, MomentSpec::m81).values;
    const Eigen::MatrixXd cyx2 = cross_cov(y, x.array().square().matrix());
    const Eigen::MatrixXd cyt2 = [&] {
      Eigen::MatrixXd x2bar = Eigen::MatrixXd::Zero(n, kCovariates);
      std::size_t r = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < g.options(i); ++j, ++r)
          x2bar.row(i) += x.row(r).array().square().matrix() / static_cast<double>(g.options(i));
      return cross_cov(yt, x2bar);
    }();
    for (int a = 0; a < 2; ++a)
      for (int k = 0; k < kCovariates; ++k) CHECK(m81(46 + 7 * a + k) == doctest::Approx(cyx2(a, k)).scale(1).epsilon(1e-9));
    for (int a = 0; a < 3; ++a)
      for (int k = 0; k < kCovariates; ++k) CHECK(m81(60 + 7 * a + k) == doctest::Approx(cyt2(a, k)).scale(1).epsilon(1e-9));
  }

  TEST_CASE("nested specifications share their common blocks") {
    const auto d = small_dataset();
    auto get = [&](MomentSpec s) { return search_moments(d.grid, d.outcomes, s).values; };
    const auto m16 = get(MomentSpec::m16), m32 = get(MomentSpec::m32), m40 = get(MomentSpec::m40),
               m46 = get(MomentSpec::m46), m60 = get(MomentSpec::m60), m81 = get(MomentSpec::m81);
    CHECK(m46.head(16) == m16);
    CHECK(m46.head(40) == m40);
    CHECK(m60.head(46) == m46);
    CHECK(m81.head(60) == m60);
    // m32 drops the non-free dummy from the consumer blocks
    CHECK(m32.head(16) == m16);
    CHECK(m32.segment(16, 2) == m40.segment(17, 2));
    CHECK(m32.segment(18, 14) == m40.segment(26, 14));
  }
}
