#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nne/errors.hpp"
#include "nne/experiments.hpp"
#include "nne/parallel.hpp"

using namespace nne;
using namespace nne::experiments;

namespace {

std::string estimates_text(const ExperimentResult& r) {
  std::ostringstream os;
  io::write_estimates_csv(os, r.rows);
  for (const auto& t : r.tables)
    for (const auto& row : t.rows)
      for (const auto& c : row) os << c << ',';
  return os.str();
}

std::string run_at(const ExperimentConfig& c, std::size_t threads) {
  const std::size_t saved = thread_count();
  set_thread_count(threads);
  const auto text = estimates_text(run_experiment(c));
  set_thread_count(saved);
  return text;
}

ExperimentConfig tiny_search() {
  auto c = default_config("search_mc", Scale::desk);
  c.replications = 2;
  c.n = 80;
  c.J = 5;
  c.L_star = 60;
  c.hidden_units = 4;
  c.max_epochs = 5;
  c.R = 3;
  c.lambdas = {7};
  c.smle_max_evaluations = 30;
  return c;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("search study output is identical at one and three workers") {
    const auto c = tiny_search();
    const auto a = run_at(c, 1), b = run_at(c, 3);
    CHECK(a == b);
    CHECK(a.find("smle") != std::string::npos);
  }

  TEST_CASE("AR(1) table output is identical at one and three workers") {
    auto c = default_config("ar1_table2", Scale::desk);
    c.replications = 3;
    c.L_star = 40;
    c.hidden_units = 4;
    c.max_epochs = 5;
    c.specs = {"ar1_row1", "ar1_row5"};
    c.lasso_degrees = {1};
    c.smm_R = 2;
    const auto a = run_at(c, 1), b = run_at(c, 3);
    CHECK(a == b);
    for (const char* m : {"gmm", "smm", "nne", "lasso_deg1"}) CHECK(a.find(m) != std::string::npos);
  }

  TEST_CASE("results are written and an unwritable path is an error") {
    auto c = tiny_search();
    c.replications = 1;
    c.lambdas.clear();
    const auto r = run_experiment(c);
    const auto dir = std::filesystem::temp_directory_path() / "nne_experiment_test";
    std::filesystem::remove_all(dir);
    write_experiment(r, dir.string());
    CHECK(std::filesystem::exists(dir / "estimates.csv"));
    CHECK(std::filesystem::exists(dir / "summary.csv"));
    CHECK(std::filesystem::exists(dir / "config.json"));
    std::filesystem::remove_all(dir);

    const auto blocker = std::filesystem::temp_directory_path() / "nne_blocking_file";
    std::ofstream(blocker) << "x";
    CHECK_THROWS_AS(ensure_writable((blocker / "sub").string()), ConfigError);
    std::filesystem::remove(blocker);
  }

  TEST_CASE("synthetic data alternates session sizes and survives the CSV format") {
    const auto d = synthetic_search_data(10, 33, RngStream(90));
    CHECK(d.grid.n() == 10);
    CHECK(d.grid.options(0) != d.grid.options(1));
    CHECK(d.grid.options(0) + d.grid.options(1) == 67);
  }

  TEST_CASE("unknown scenario is rejected") {
    ExperimentConfig c;
    c.scenario = "warp_drive";
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
  }
}
