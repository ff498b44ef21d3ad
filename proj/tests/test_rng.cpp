#include <doctest.h>

#include <cmath>
#include <vector>

#include "nne/core_types.hpp"
#include "nne/errors.hpp"
#include "nne/parallel.hpp"
#include "nne/rng.hpp"

using nne::RngStream;

TEST_SUITE("rng") {
  TEST_CASE("same seed and path give the same draws") {
    RngStream a(1, {2, 3}), b(1, {2, 3});
    for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("substream is built from the path, not from the parent's state") {
    RngStream parent(7, {1});
    const RngStream before = parent.substream(4);
    for (int k = 0; k < 10; ++k) parent.normal();
    RngStream after = parent.substream(4);
    RngStream direct(7, {1, 4});
    RngStream b2 = before;
    for (int k = 0; k < 20; ++k) {
      const auto v = direct.next_u64();
      CHECK(after.next_u64() == v);
      CHECK(b2.next_u64() == v);
    }
    CHECK(direct.path_string() == "7/1/4");
  }

  TEST_CASE("neighbouring paths and seeds are decorrelated") {
    RngStream a(1, {0}), b(1, {1}), c(2, {0});
    int same_ab = 0, same_ac = 0;
    for (int k = 0; k < 1000; ++k) {
      const auto x = a.uniform(), y = b.uniform(), z = c.uniform();
      same_ab += (x < 0.5) == (y < 0.5);
      same_ac += (x < 0.5) == (z < 0.5);
    }
    // binomial(1000, 1/2): 5 SD band
    CHECK(std::abs(same_ab - 500) < 80);
    CHECK(std::abs(same_ac - 500) < 80);
  }

  TEST_CASE("normal draws have unit variance and zero mean") {
    RngStream r(3);
    const int n = 200000;
    double s = 0, ss = 0;
    for (int k = 0; k < n; ++k) {
      const double x = r.normal();
      s += x;
      ss += x * x;
    }
    CHECK(std::abs(s / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(ss / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  }

  TEST_CASE("categorical and below stay in range with the right frequencies") {
    RngStream r(4);
    const std::vector<double> p = {0.1, 0.6, 0.3};
    std::vector<int> counts(3, 0);
    const int n = 100000;
    for (int k = 0; k < n; ++k) ++counts[r.categorical(p)];
    for (int j = 0; j < 3; ++j) CHECK(std::abs(counts[j] / double(n) - p[j]) < 0.01);
    for (int k = 0; k < 1000; ++k) CHECK(r.below(7) < 7);
  }

  TEST_CASE("parallel_for covers every index once for any worker count") {
    for (std::size_t threads : {1u, 3u, 8u}) {
      std::vector<int> hits(57, 0);
      nne::parallel_for(hits.size(), [&](std::size_t k) { hits[k] += 1; }, threads);
      for (int h : hits) CHECK(h == 1);
    }
  }

  TEST_CASE("parallel_for rethrows the lowest failing index") {
    auto body = [](std::size_t k) {
      if (k == 5 || k == 9) throw nne::DomainError("index " + std::to_string(k));
    };
    try {
      nne::parallel_for(12, body, 4);
      FAIL("no exception");
    } catch (const nne::DomainError& e) {
      CHECK(std::string(e.what()) == "index 5");
    }
  }
}

TEST_SUITE("core_types") {
  TEST_CASE("param space bounds and sampling") {
    nne::ParamSpace s({"a", "b"}, Eigen::Vector2d(0, -1), Eigen::Vector2d(1, 1));
    CHECK(s.dim() == 2);
    CHECK(s.index_of("b") == 1);
    CHECK_THROWS_AS(s.index_of("zz"), std::out_of_range);
    RngStream r(5);
    for (int k = 0; k < 200; ++k) CHECK(s.contains(nne::sample_theta(s, r).values));
    const auto t = s.with_bounds("b", -3, -2);
    CHECK(t.lower()(1) == -3);
    CHECK(t.upper()(1) == -2);
    CHECK(t.lower()(0) == 0);
  }
}
