#include <doctest.h>

#include <cmath>

#include "nne/ar1.hpp"
#include "nne/errors.hpp"

using namespace nne;

TEST_SUITE("ar1") {
  TEST_CASE("moment set sizes") {
    const std::size_t sizes[] = {1, 2, 3, 10, 3, 9};
    for (int row = 1; row <= 6; ++row) CHECK(ar1::MomentSpec(row).count() == sizes[row - 1]);
    CHECK(ar1::MomentSpec::parse("ar1_row4").row() == 4);
    CHECK(ar1::MomentSpec::parse("row2").row() == 2);
    CHECK_THROWS_AS(ar1::MomentSpec::parse("row7"), DomainError);
  }

  TEST_CASE("population lag moment") {
    CHECK(ar1::population_moment(0.6, 1) == doctest::Approx(0.6 / 0.64).epsilon(1e-14));
    CHECK(ar1::population_moment(0.6, 3) == doctest::Approx(0.216 / 0.64).epsilon(1e-14));
    // third-order terms vanish for a Gaussian process
    CHECK(ar1::population_term(0.6, {2, 1, 1}) == doctest::Approx(0.0));
  }

  TEST_CASE("stationary variance matches 1 / (1 - beta^2)") {
    RngStream r(11);
    const double beta = 0.6;
    double s = 0;
    const int R = 4000;
    for (int k = 0; k < R; ++k) {
      const auto y = ar1::simulate(beta, 100, r);
      s += y.values(0) * y.values(0) + y.values(99) * y.values(99);
    }
    const double v = s / (2 * R), target = 1.0 / (1 - beta * beta);
    CHECK(std::abs(v - target) < 5 * target * std::sqrt(2.0 / (2 * R)));
  }

  TEST_CASE("hand-computed sample moment") {
    ar1::Series s{Eigen::Vector4d(1, 2, -1, 3)};
    // lag 1: (2*1 + -1*2 + 3*-1) / 3
    CHECK(ar1::moments(s, ar1::MomentSpec(1)).values(0) == doctest::Approx(-1.0));
    const auto m2 = ar1::moments(s, ar1::MomentSpec(2)).values;
    CHECK(m2(1) == doctest::Approx((1 + 4 + 1 + 9) / 4.0));
  }

  TEST_CASE("shocks route reproduces the direct simulation") {
    RngStream a(3, {1}), b(3, {1});
    const auto y = ar1::simulate(0.4, 50, a);
    std::vector<double> e(50);
    for (auto& v : e) v = b.normal();
    Eigen::VectorXd z;
    ar1::simulate_from_shocks(0.4, e, z);
    CHECK(z == y.values);
    CHECK(z(0) == doctest::Approx(e[0] / std::sqrt(1 - 0.16)));
  }

  TEST_CASE("domain errors") {
    RngStream r(1);
    CHECK_THROWS_AS(ar1::simulate(1.0, 10, r), DomainError);
    CHECK_THROWS_AS(ar1::simulate(0.5, 1, r), DomainError);
    ar1::Series tiny{Eigen::Vector2d(1, 2)};
    CHECK_THROWS_AS(ar1::moments(tiny, ar1::MomentSpec(4)), DomainError);
  }
}
