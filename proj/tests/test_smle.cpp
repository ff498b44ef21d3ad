#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nne/smle.hpp"
#include "oracles.hpp"

using namespace nne;
using namespace nne::search;
using namespace nne::baselines;

namespace {

double normal_quantile(double p) {
  // bisection on the oracle CDF; accuracy far beyond what the grid needs
  double lo = -10, hi = 10;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (oracle::Phi(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("smle") {
  TEST_CASE("log logistic") {
    CHECK(log_logistic(0.0, 3.0) == doctest::Approx(std::log(0.5)));
    CHECK(log_logistic(2.0, 0.5) == doctest::Approx(-std::log1p(std::exp(-1.0))).epsilon(1e-14));
    CHECK(log_logistic(1.0, -800.0) == doctest::Approx(-800.0));
    CHECK(log_logistic(1.0, 800.0) == doctest::Approx(0.0));
  }

  TEST_CASE("two options: brute-force enumeration matches the smoothed likelihood at large lambda") {
    ConsumerGrid g;
    const std::vector<Attributes> attrs = {Attributes{4, 4, 4, 1, 1, 0.3}, Attributes{3, 4.5, 3.8, 0, 1, -0.2}};
    const std::vector<int> ranks = {1, 2};
    g.add_consumer(attrs, ranks);
    SearchParams p = true_params();
    p.delta0 = -1.5;  // costly enough that stopping after one search is common

    // equally likely grid points for (eps_1, eps_2, eps_0)
    const int K = 40;
    std::vector<double> q(K);
    for (int k = 0; k < K; ++k) q[k] = normal_quantile((k + 0.5) / K);
    SmleDraws d;
    d.R = static_cast<std::size_t>(K * K * K);
    for (int a = 0; a < K; ++a)
      for (int b = 0; b < K; ++b)
        for (int c = 0; c < K; ++c) {
          d.option.push_back(q[a]);
          d.option.push_back(q[b]);
          d.outside.push_back(q[c]);
        }

    std::vector<double> res;
    reservation_utilities(p, g, res);
    const int top = res[0] >= res[1] ? 0 : 1, other = 1 - top;
    const std::vector<SearchOutcome> patterns = {
        {{top}, -1}, {{top}, top}, {{top, other}, -1}, {{top, other}, top}, {{top, other}, other}};

    // enumerate: simulate every grid point and count outcomes
    std::vector<double> freq(patterns.size(), 0.0);
    for (std::size_t r = 0; r < d.R; ++r) {
      Shocks s{{d.option[2 * r], d.option[2 * r + 1]}, {d.outside[r]}};
      const auto o = simulate_search(p, g, s)[0];
      for (std::size_t k = 0; k < patterns.size(); ++k)
        if (o.search_order == patterns[k].search_order && o.bought == patterns[k].bought) freq[k] += 1.0 / d.R;
    }
    CHECK(std::accumulate(freq.begin(), freq.end(), 0.0) == doctest::Approx(1.0));

    double total = 0.0;
    int nonzero = 0;
    for (std::size_t k = 0; k < patterns.size(); ++k) {
      const double lik = smoothed_likelihoods(p, g, {patterns[k]}, 1e6, d)[0];
      CAPTURE(k);
      CHECK(std::abs(lik - freq[k]) <= 1e-3);
      total += lik;
      nonzero += freq[k] > 0.01;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(nonzero >= 4);
  }

  TEST_CASE("log-likelihood ignores consumer order and is deterministic") {
    RngStream r(70);
    const auto g = generate_covariates(40, 5, r);
    const auto out = simulate_search(true_params(), g, r);
    RngStream dr(71);
    const auto d = draw_smle_shocks(g, 7, dr);

    // reverse the consumers and move their draws along
    ConsumerGrid rg;
    std::vector<SearchOutcome> rout;
    SmleDraws rd;
    rd.R = d.R;
    for (std::size_t i = g.n(); i-- > 0;) {
      std::vector<Attributes> a;
      std::vector<int> rk;
      for (std::size_t j = 0; j < g.options(i); ++j) {
        a.push_back(g.attributes(i, j));
        rk.push_back(g.rank(i, j));
      }
      rg.add_consumer(a, rk);
      rout.push_back(out[i]);
      const auto begin = d.option.begin() + static_cast<std::ptrdiff_t>(g.offset(i) * d.R);
      rd.option.insert(rd.option.end(), begin, begin + static_cast<std::ptrdiff_t>(g.options(i) * d.R));
      const auto ob = d.outside.begin() + static_cast<std::ptrdiff_t>(i * d.R);
      rd.outside.insert(rd.outside.end(), ob, ob + static_cast<std::ptrdiff_t>(d.R));
    }
    const double a = smoothed_loglik(true_params(), g, out, 7.0, d);
    const double b = smoothed_loglik(true_params(), rg, rout, 7.0, rd);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
    CHECK(smoothed_loglik(true_params(), g, out, 7.0, d) == a);
    const auto lik = smoothed_likelihoods(true_params(), g, out, 7.0, d);
    const auto rlik = smoothed_likelihoods(true_params(), rg, rout, 7.0, rd);
    for (std::size_t i = 0; i < g.n(); ++i) CHECK(lik[i] == rlik[g.n() - 1 - i]);

    RngStream s1(72), s2(72);
    CHECK(smoothed_loglik(true_params(), g, out, 3.0, 5, s1) == smoothed_loglik(true_params(), g, out, 3.0, 5, s2));
  }

  TEST_CASE("likelihood is higher near the truth than far from it") {
    RngStream r(73);
    const auto g = generate_covariates(300, 10, r);
    const auto out = simulate_search(true_params(), g, r);
    RngStream dr(74);
    const auto d = draw_smle_shocks(g, 20, dr);
    SearchParams far = true_params();
    far.eta = 4.5;
    far.delta0 = -2.5;
    CHECK(smoothed_loglik(true_params(), g, out, 7.0, d) > smoothed_loglik(far, g, out, 7.0, d));
  }

  TEST_CASE("SMLE run reports its simulation burden") {
    RngStream r(75);
    const auto g = generate_covariates(60, 5, r);
    const auto out = simulate_search(true_params(), g, r);
    SmleSpec spec;
    spec.R = 4;
    spec.max_evaluations = 60;
    const auto res = smle_search(g, out, spec, RngStream(76));
    CHECK(res.theta.size() == 9);
    CHECK(res.sim_burden >= spec.R * res.evaluations);
    CHECK(res.sim_burden % spec.R == 0);
    CHECK(std::isfinite(res.loglik));
  }
}
