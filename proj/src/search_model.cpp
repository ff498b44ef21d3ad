#include "nne/search_model.hpp"

#include <cmath>
#include <numbers>

#include "nne/errors.hpp"

namespace nne::search {

SearchParams SearchParams::from_vector(const Eigen::VectorXd& v) {
  if (v.size() != kParams) throw DomainError("search parameter vector must have 9 entries");
  SearchParams p;
  for (int k = 0; k < kAttributes; ++k) p.beta[static_cast<std::size_t>(k)] = v(k);
  p.eta = v(6);
  p.delta0 = v(7);
  p.delta1 = v(8);
  return p;
}

Eigen::VectorXd SearchParams::to_vector() const {
  Eigen::VectorXd v(kParams);
  for (int k = 0; k < kAttributes; ++k) v(k) = beta[static_cast<std::size_t>(k)];
  v(6) = eta;
  v(7) = delta0;
  v(8) = delta1;
  return v;
}

const std::array<std::string, kParams>& param_names() {
  static const std::array<std::string, kParams> names = {
      "beta_stars", "beta_review", "beta_location", "beta_chain", "beta_promotion",
      "beta_log_price", "eta", "delta0", "delta1"};
  return names;
}

ParamSpace default_space() {
  Eigen::VectorXd lo(kParams), hi(kParams);
  lo << -0.5, -0.5, -0.5, -0.5, -0.5, -0.5, 2.0, -5.0, -0.25;
  hi << 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 5.0, -2.0, 0.25;
  return ParamSpace({param_names().begin(), param_names().end()}, lo, hi);
}

SearchParams true_params() {
  SearchParams p;
  p.beta = {0.1, 0.0, 0.2, -0.2, 0.2, -0.2};
  p.eta = 3.0;
  p.delta0 = -4.0;
  p.delta1 = 0.1;
  return p;
}

// -- ConsumerGrid -------------------------------------------------------------

void ConsumerGrid::add_consumer(std::span<const Attributes> attrs, std::span<const int> ranks) {
  const std::size_t J = attrs.size();
  if (J == 0) throw DomainError("a consumer needs at least one option");
  if (ranks.size() != J) throw DomainError("one rank per option is required");
  std::vector<bool> seen(J, false);
  for (int r : ranks) {
    if (r < 1 || static_cast<std::size_t>(r) > J || seen[static_cast<std::size_t>(r - 1)])
      throw DomainError("option ranks must be a permutation of 1..J");
    seen[static_cast<std::size_t>(r - 1)] = true;
  }
  attrs_.insert(attrs_.end(), attrs.begin(), attrs.end());
  ranks_.insert(ranks_.end(), ranks.begin(), ranks.end());
  offsets_.push_back(attrs_.size());
  max_options_ = std::max(max_options_, J);
}

void ConsumerGrid::covariates(std::size_t i, std::size_t j, std::span<double, kCovariates> out) const {
  const auto& a = attributes(i, j);
  for (int k = 0; k < kAttributes; ++k) out[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)];
  out[kAttributes] = std::log(static_cast<double>(rank(i, j)));
}

ConsumerGrid generate_covariates(std::size_t n, std::size_t options, RngStream& rng) {
  if (n < 1 || options < 2) throw DomainError("covariate grid needs n >= 1 and J >= 2");
  static constexpr std::array<double, 4> star_values{2, 3, 4, 5};
  static constexpr std::array<double, 4> star_probs{0.05, 0.25, 0.4, 0.3};
  static constexpr std::array<double, 5> review_values{3, 3.5, 4, 4.5, 5};
  static constexpr std::array<double, 5> review_probs{0.08, 0.17, 0.4, 0.3, 0.05};

  ConsumerGrid grid;
  std::vector<Attributes> attrs(options);
  std::vector<int> ranks(options);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < options; ++j) {
      Attributes& a = attrs[j];
      a[0] = star_values[rng.categorical(star_probs)];
      a[1] = review_values[rng.categorical(review_probs)];
      a[2] = rng.normal(4.0, 0.3);
      a[3] = rng.bernoulli(0.8) ? 1.0 : 0.0;
      a[4] = rng.bernoulli(0.6) ? 1.0 : 0.0;
      a[5] = rng.normal(0.15, 0.6);
      ranks[j] = static_cast<int>(j) + 1;
    }
    grid.add_consumer(attrs, ranks);
  }
  return grid;
}

// -- outcomes -----------------------------------------------------------------

bool SearchOutcome::searched(int j) const {
  return std::find(search_order.begin(), search_order.end(), j) != search_order.end();
}

std::vector<bool> SearchOutcome::searched_mask(std::size_t options) const {
  std::vector<bool> mask(options, false);
  for (int j : search_order) mask[static_cast<std::size_t>(j)] = true;
  return mask;
}

std::vector<bool> SearchOutcome::bought_mask(std::size_t options) const {
  std::vector<bool> mask(options, false);
  if (bought >= 0) mask[static_cast<std::size_t>(bought)] = true;
  return mask;
}

Shocks draw_shocks(const ConsumerGrid& grid, RngStream& rng) {
  Shocks s;
  s.option.resize(grid.total_options());
  s.outside.resize(grid.n());
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const std::size_t off = grid.offset(i);
    for (std::size_t j = 0; j < grid.options(i); ++j) s.option[off + j] = rng.normal();
    s.outside[i] = rng.normal();
  }
  return s;
}

// -- reservation utility -------------------------------------------------------

double expected_gain(double x) {
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
  return x * cdf + pdf;
}

double reservation_gap(double cost) {
  if (!(cost > 0.0)) throw DomainError("search cost must be positive");
  if (std::isinf(cost)) return std::numeric_limits<double>::infinity();
  // h is strictly increasing with h(-inf) = 0 and h(x) ~ x for large x.
  double lo = -1.0, hi = 1.0;
  while (expected_gain(lo) > cost) lo *= 2.0;
  while (expected_gain(hi) < cost) hi *= 2.0;
  while (hi - lo > 1e-11) {
    const double mid = 0.5 * (lo + hi);
    if (expected_gain(mid) < cost)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double reservation_utility(double mean_utility, double cost) {
  return mean_utility - reservation_gap(cost);
}

double search_cost(const SearchParams& params, int rank) {
  return std::exp(params.delta0 + params.delta1 * std::log(static_cast<double>(rank)));
}

namespace {

/// reservation_gap for ranks 1..max_rank, index 0 unused.
std::vector<double> gap_table(const SearchParams& params, std::size_t max_rank) {
  std::vector<double> gaps(max_rank + 1, 0.0);
  for (std::size_t r = 1; r <= max_rank; ++r)
    gaps[r] = reservation_gap(search_cost(params, static_cast<int>(r)));
  return gaps;
}

double dot_beta(const SearchParams& params, const Attributes& a) {
  double v = 0.0;
  for (std::size_t k = 0; k < static_cast<std::size_t>(kAttributes); ++k) v += params.beta[k] * a[k];
  return v;
}

/// True when option a precedes option b in the search order.
inline bool precedes(double ra, int rank_a, int a, double rb, int rank_b, int b) {
  if (ra != rb) return ra > rb;
  if (rank_a != rank_b) return rank_a < rank_b;
  return a < b;
}

}  // namespace

void mean_utilities(const SearchParams& params, const ConsumerGrid& grid, std::vector<double>& out) {
  const auto& attrs = grid.flat_attributes();
  out.resize(attrs.size());
  for (std::size_t q = 0; q < attrs.size(); ++q) out[q] = dot_beta(params, attrs[q]);
}

void reservation_utilities(const SearchParams& params, const ConsumerGrid& grid,
                           std::vector<double>& out) {
  const auto gaps = gap_table(params, grid.max_options());
  mean_utilities(params, grid, out);
  const auto& ranks = grid.flat_ranks();
  for (std::size_t q = 0; q < out.size(); ++q) out[q] -= gaps[static_cast<std::size_t>(ranks[q])];
}

std::vector<SearchOutcome> simulate_search(const SearchParams& params, const ConsumerGrid& grid,
                                           const Shocks& shocks, CostRegime regime) {
  if (shocks.option.size() != grid.total_options() || shocks.outside.size() != grid.n())
    throw DomainError("shock arrays do not match the consumer grid");

  std::vector<double> reservation;
  if (regime == CostRegime::actual) {
    reservation_utilities(params, grid, reservation);
  } else {
    reservation.assign(grid.total_options(), std::numeric_limits<double>::infinity());
  }
  const auto& attrs = grid.flat_attributes();
  const auto& ranks = grid.flat_ranks();

  std::vector<SearchOutcome> outcomes(grid.n());
  std::vector<char> done;
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const std::size_t off = grid.offset(i);
    const int J = static_cast<int>(grid.options(i));
    const double u0 = params.eta + shocks.outside[i];
    auto r = [&](int j) { return reservation[off + static_cast<std::size_t>(j)]; };
    auto rk = [&](int j) { return ranks[off + static_cast<std::size_t>(j)]; };
    auto utility = [&](int j) {
      return dot_beta(params, attrs[off + static_cast<std::size_t>(j)]) +
             shocks.option[off + static_cast<std::size_t>(j)];
    };

    done.assign(static_cast<std::size_t>(J), 0);
    auto next_option = [&]() {
      int best = -1;
      for (int j = 0; j < J; ++j) {
        if (done[static_cast<std::size_t>(j)]) continue;
        if (best < 0 || precedes(r(j), rk(j), j, r(best), rk(best), best)) best = j;
      }
      return best;
    };

    SearchOutcome& out = outcomes[i];
    // The top option is inspected for free.
    int j = next_option();
    done[static_cast<std::size_t>(j)] = 1;
    out.search_order.push_back(j);
    double best_searched = utility(j);
    int best_option = j;
    double best_known = std::max(u0, best_searched);
    while (true) {
      j = next_option();
      if (j < 0 || !(best_known < r(j))) break;
      done[static_cast<std::size_t>(j)] = 1;
      out.search_order.push_back(j);
      const double u = utility(j);
      if (u > best_searched) {
        best_searched = u;
        best_option = j;
      }
      best_known = std::max(best_known, u);
    }
    out.bought = best_searched > u0 ? best_option : -1;
  }
  return outcomes;
}

std::vector<SearchOutcome> simulate_search(const SearchParams& params, const ConsumerGrid& grid,
                                           RngStream& rng) {
  const Shocks shocks = draw_shocks(grid, rng);
  return simulate_search(params, grid, shocks);
}

// -- optimality conditions ------------------------------------------------------

const char* condition_name(Condition c) {
  switch (c) {
    case Condition::order: return "order";
    case Condition::order_vs_unsearched: return "order_vs_unsearched";
    case Condition::continuation: return "continuation";
    case Condition::stopping: return "stopping";
    case Condition::purchase: return "purchase";
  }
  return "unknown";
}

UnsearchedBound unsearched_bound(std::span<const double> reservation, const SearchOutcome& outcome) {
  UnsearchedBound b;
  b.max_reservation = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < reservation.size(); ++j) {
    if (outcome.searched(static_cast<int>(j))) continue;
    b.any = true;
    b.max_reservation = std::max(b.max_reservation, reservation[j]);
  }
  return b;
}

ViolationReport validate_optimality(const SearchParams& params, const ConsumerGrid& grid,
                                    const Shocks& shocks,
                                    const std::vector<SearchOutcome>& outcomes) {
  if (outcomes.size() != grid.n()) throw DomainError("one outcome per consumer is required");
  if (shocks.option.size() != grid.total_options() || shocks.outside.size() != grid.n())
    throw DomainError("shock arrays do not match the consumer grid");

  std::vector<double> reservation, mean;
  reservation_utilities(params, grid, reservation);
  mean_utilities(params, grid, mean);

  ViolationReport report;
  std::vector<double> utility_in_order;
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const auto& o = outcomes[i];
    const std::size_t off = grid.offset(i);
    const std::size_t J = grid.options(i);
    auto record = [&](Condition c, double slack) {
      if (slack < 0.0) {
        ++report.count;
        report.violations.push_back({i, c, slack});
      }
    };
    bool well_formed = !o.search_order.empty() && o.search_order.size() <= J;
    for (int j : o.search_order) well_formed = well_formed && j >= 0 && static_cast<std::size_t>(j) < J;
    if (o.bought >= 0) well_formed = well_formed && o.searched(o.bought);
    if (!well_formed) {
      // An empty search list or a purchase of an unsearched option breaks the purchase rule outright.
      record(Condition::purchase, -std::numeric_limits<double>::infinity());
      continue;
    }

    const std::span<const double> r(reservation.data() + off, J);
    const auto bound = unsearched_bound(r, o);
    visit_fixed_conditions(r, o, bound, record);
    utility_in_order.clear();
    for (int j : o.search_order)
      utility_in_order.push_back(mean[off + static_cast<std::size_t>(j)] +
                                 shocks.option[off + static_cast<std::size_t>(j)]);
    visit_shock_conditions(r, utility_in_order, params.eta + shocks.outside[i], o, bound, record);
  }
  return report;
}

// -- summaries --------------------------------------------------------------------

KeyStats key_stats(const ConsumerGrid& grid, const std::vector<SearchOutcome>& outcomes) {
  if (outcomes.empty()) throw DomainError("key statistics need at least one consumer");
  if (outcomes.size() != grid.n()) throw DomainError("one outcome per consumer is required");
  double buys = 0.0, searches = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    buys += o.purchased() ? 1.0 : 0.0;
    searches += static_cast<double>(o.search_count());
    for (int j : o.search_order) rank_sum += grid.rank(i, static_cast<std::size_t>(j));
  }
  KeyStats s;
  s.buy_rate = buys / static_cast<double>(outcomes.size());
  s.searches_per_consumer = searches / static_cast<double>(outcomes.size());
  s.mean_search_rank = searches > 0 ? rank_sum / searches : 0.0;
  return s;
}

const char* trim_reason_name(TrimReason r) {
  switch (r) {
    case TrimReason::none: return "none";
    case TrimReason::nobody_buys: return "nobody makes a purchase";
    case TrimReason::everyone_buys: return "everyone makes a purchase";
    case TrimReason::no_paid_search: return "nobody makes non-free searches";
    case TrimReason::everyone_searches_all: return "everyone searches all options";
  }
  return "unknown";
}

TrimReason trim_reason(const ConsumerGrid& grid, const std::vector<SearchOutcome>& outcomes) {
  std::size_t buyers = 0, paid_searchers = 0, exhaustive = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    buyers += o.purchased() ? 1 : 0;
    paid_searchers += o.search_count() > 1 ? 1 : 0;
    exhaustive += o.search_count() == grid.options(i) ? 1 : 0;
  }
  const std::size_t n = outcomes.size();
  if (buyers == 0) return TrimReason::nobody_buys;
  if (buyers == n) return TrimReason::everyone_buys;
  if (paid_searchers == 0) return TrimReason::no_paid_search;
  if (exhaustive == n) return TrimReason::everyone_searches_all;
  return TrimReason::none;
}

CounterfactualResult counterfactual_zero_cost(const SearchParams& params, const ConsumerGrid& grid,
                                              RngStream& rng) {
  const Shocks shocks = draw_shocks(grid, rng);
  const auto base = simulate_search(params, grid, shocks, CostRegime::actual);
  const auto free = simulate_search(params, grid, shocks, CostRegime::zero);
  CounterfactualResult res;
  res.buy_rate = key_stats(grid, base).buy_rate;
  res.zero_cost_buy_rate = key_stats(grid, free).buy_rate;
  return res;
}

}  // namespace nne::search
