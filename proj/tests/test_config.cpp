#include <doctest.h>

#include "nne/config.hpp"
#include "nne/errors.hpp"

using namespace nne;

TEST_SUITE("config") {
  TEST_CASE("hidden units grow with the square root of the training size") {
    CHECK(hidden_units_for(2500) == 32);
    CHECK(hidden_units_for(10000) == 64);
    CHECK(hidden_units_for(50000) == 128);
    CHECK(hidden_units_for(200000) == 256);
    CHECK(hidden_units_for(1000) == 16);
  }

  TEST_CASE("every scenario has valid defaults at both scales") {
    for (const auto& id : scenario_ids())
      for (Scale s : {Scale::desk, Scale::paper}) {
        CAPTURE(id);
        const auto c = default_config(id, s);
        CHECK(c.scenario == id);
        CHECK_NOTHROW(validate(c));
      }
    CHECK(default_config("smoothing_grid", Scale::desk).lambdas.size() == 7);
    CHECK(default_config("ar1_table2", Scale::desk).specs.size() == 6);
  }

  TEST_CASE("unknown scenario and unknown keys are errors") {
    CHECK_FALSE(is_scenario("nope"));
    CHECK_THROWS_AS(default_config("nope", Scale::desk), ConfigError);
    auto c = default_config("search_mc", Scale::desk);
    CHECK_THROWS_AS(apply_json(c, nlohmann::json{{"L_stra", 5}}), ConfigError);
    CHECK_THROWS_AS(parse_scale("huge"), ConfigError);
  }

  TEST_CASE("json overrides and round trip") {
    auto c = default_config("search_mc", Scale::desk);
    apply_json(c, nlohmann::json{{"L_star", 2500}, {"lambda", {3, 7}}, {"spec_id", {"m16"}}, {"seed", 5}});
    CHECK(c.L_star == 2500);
    CHECK(c.lambdas == std::vector<double>{3, 7});
    CHECK(c.seed == 5);
    auto d = default_config("search_mc", Scale::desk);
    apply_json(d, to_json(c));
    CHECK(to_json(d) == to_json(c));
  }

  TEST_CASE("out-of-range knobs are rejected") {
    auto c = default_config("search_mc", Scale::desk);
    c.L_star = 5;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = default_config("search_mc", Scale::desk);
    c.lambdas = {0.0};
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = default_config("search_data_size", Scale::desk);
    c.R_grid.push_back(5);
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = default_config("ar1_table2", Scale::desk);
    c.lasso_degrees = {4};
    CHECK_THROWS_AS(validate(c), ConfigError);
  }
}
