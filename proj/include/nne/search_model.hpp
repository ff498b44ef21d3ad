#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nne/core_types.hpp"
#include "nne/rng.hpp"

namespace nne::search {

/// stars, review, location, chain, promotion, log price.
inline constexpr int kAttributes = 6;
/// The attributes plus log rank.
inline constexpr int kCovariates = 7;
/// beta (6), eta, delta0, delta1.
inline constexpr int kParams = 9;

using Attributes = std::array<double, kAttributes>;

struct SearchParams {
  Attributes beta{};
  double eta = 0.0;
  double delta0 = 0.0;
  double delta1 = 0.0;

  static SearchParams from_vector(const Eigen::VectorXd& v);
  Eigen::VectorXd to_vector() const;
};

const std::array<std::string, kParams>& param_names();

/// eta in [2,5], delta0 in [-5,-2], delta1 in [-0.25,0.25], each beta in [-0.5,0.5].
ParamSpace default_space();

/// beta = (0.1, 0, 0.2, -0.2, 0.2, -0.2), eta = 3, delta = (-4, 0.1).
SearchParams true_params();

/// Observed option lists. Consumer i owns options [offset(i), offset(i+1)) in
/// flat storage; option counts may differ between consumers.
class ConsumerGrid {
 public:
  /// Throws DomainError unless `ranks` is a permutation of 1..attrs.size().
  void add_consumer(std::span<const Attributes> attrs, std::span<const int> ranks);

  std::size_t n() const noexcept { return offsets_.size() - 1; }
  std::size_t options(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  std::size_t offset(std::size_t i) const { return offsets_[i]; }
  std::size_t total_options() const noexcept { return attrs_.size(); }
  std::size_t max_options() const noexcept { return max_options_; }

  const Attributes& attributes(std::size_t i, std::size_t j) const { return attrs_[offsets_[i] + j]; }
  int rank(std::size_t i, std::size_t j) const { return ranks_[offsets_[i] + j]; }

  /// x_ij = (z_ij, log s_ij) written into `out`.
  void covariates(std::size_t i, std::size_t j, std::span<double, kCovariates> out) const;

  /// Rows of the flat storage, same order as offsets.
  const std::vector<Attributes>& flat_attributes() const noexcept { return attrs_; }
  const std::vector<int>& flat_ranks() const noexcept { return ranks_; }

  bool operator==(const ConsumerGrid&) const = default;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<Attributes> attrs_;
  std::vector<int> ranks_;
  std::size_t max_options_ = 0;
};

/// Attribute draws resembling the hotel data: stars {2,3,4,5} w.p. (.05,.25,.4,.3);
/// review {3,3.5,4,4.5,5} w.p. (.08,.17,.4,.3,.05); location N(4, sd .3);
/// chain Bernoulli(.8); promotion Bernoulli(.6); log price N(.15, sd .6);
/// option j of every consumer sits at rank j+1.
ConsumerGrid generate_covariates(std::size_t n, std::size_t options, RngStream& rng);

/// One consumer's searches and purchase.
struct SearchOutcome {
  /// Option indices in the order searched; the first entry is the free search.
  std::vector<int> search_order;
  /// Purchased option index, or -1 when the outside option is kept.
  int bought = -1;

  std::size_t search_count() const noexcept { return search_order.size(); }
  bool purchased() const noexcept { return bought >= 0; }
  bool searched(int j) const;
  std::vector<bool> searched_mask(std::size_t options) const;
  std::vector<bool> bought_mask(std::size_t options) const;
};

/// Utility shocks: eps_ij in grid flat order, plus eps_i0 per consumer.
struct Shocks {
  std::vector<double> option;
  std::vector<double> outside;
};

/// Draws consumer by consumer: eps_i1..eps_iJ then eps_i0.
Shocks draw_shocks(const ConsumerGrid& grid, RngStream& rng);

/// h(x) = x Phi(x) + phi(x) = E[max(e + x, 0)], e ~ N(0,1).
double expected_gain(double x);

/// x = v - z solving c = h(x); z = v - x is the reservation utility. c > 0.
double reservation_gap(double cost);

/// z solving c = E[max(u - z, 0)] with u ~ N(v, 1). Throws DomainError for c <= 0.
double reservation_utility(double mean_utility, double cost);

/// c = exp(delta0 + delta1 log rank).
double search_cost(const SearchParams& params, int rank);

enum class CostRegime {
  actual,  ///< c_ij = exp(delta0 + delta1 log s_ij)
  zero,    ///< every option is inspected for free
};

std::vector<SearchOutcome> simulate_search(const SearchParams& params, const ConsumerGrid& grid,
                                           const Shocks& shocks,
                                           CostRegime regime = CostRegime::actual);

/// Draws shocks from `rng` and simulates.
std::vector<SearchOutcome> simulate_search(const SearchParams& params, const ConsumerGrid& grid,
                                           RngStream& rng);

/// Mean utilities v_ij = z_ij' beta in grid flat order.
void mean_utilities(const SearchParams& params, const ConsumerGrid& grid, std::vector<double>& out);

/// Reservation utilities z_ij in grid flat order.
void reservation_utilities(const SearchParams& params, const ConsumerGrid& grid,
                           std::vector<double>& out);

// -- optimality conditions --------------------------------------------------

enum class Condition {
  order,               ///< consecutive searches follow decreasing reservation utility
  order_vs_unsearched, ///< last searched option ranks above every unsearched one
  continuation,        ///< before each paid search, the best utility so far is below its reservation utility
  stopping,            ///< the best utility found exceeds every unsearched reservation utility
  purchase,            ///< the chosen alternative has the highest utility among searched + outside
};

const char* condition_name(Condition c);

/// Largest reservation utility among options the consumer did not search.
struct UnsearchedBound {
  bool any = false;
  double max_reservation = 0.0;
};

UnsearchedBound unsearched_bound(std::span<const double> reservation, const SearchOutcome& outcome);

/// Calls visit(Condition, slack) for each shock-free condition. Slack < 0 means violated.
template <class Visit>
void visit_fixed_conditions(std::span<const double> reservation, const SearchOutcome& outcome,
                            const UnsearchedBound& bound, Visit&& visit) {
  const auto& order = outcome.search_order;
  for (std::size_t t = 0; t + 1 < order.size(); ++t)
    visit(Condition::order, reservation[order[t]] - reservation[order[t + 1]]);
  if (bound.any && !order.empty())
    visit(Condition::order_vs_unsearched, reservation[order.back()] - bound.max_reservation);
}

/// Calls visit(Condition, slack) for each condition that involves utilities.
/// `searched_utility[t]` is the realized utility of the t-th searched option.
template <class Visit>
void visit_shock_conditions(std::span<const double> reservation,
                            std::span<const double> searched_utility, double outside_utility,
                            const SearchOutcome& outcome, const UnsearchedBound& bound,
                            Visit&& visit) {
  const auto& order = outcome.search_order;
  const std::size_t k = order.size();
  double best = outside_utility;
  for (std::size_t t = 0; t < k; ++t) {
    if (t > 0) visit(Condition::continuation, reservation[order[t]] - best);
    best = std::max(best, searched_utility[t]);
  }
  if (bound.any) visit(Condition::stopping, best - bound.max_reservation);

  double chosen = outside_utility;
  double rival = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < k; ++t) {
    if (order[t] == outcome.bought)
      chosen = searched_utility[t];
    else
      rival = std::max(rival, searched_utility[t]);
  }
  if (outcome.bought >= 0) rival = std::max(rival, outside_utility);
  visit(Condition::purchase, chosen - rival);
}

struct Violation {
  std::size_t consumer;
  Condition condition;
  double slack;
};

struct ViolationReport {
  std::size_t count = 0;
  std::vector<Violation> violations;
  bool ok() const noexcept { return count == 0; }
};

/// Checks every optimality condition against the shocks that generated (or
/// are claimed to explain) the outcomes.
ViolationReport validate_optimality(const SearchParams& params, const ConsumerGrid& grid,
                                    const Shocks& shocks,
                                    const std::vector<SearchOutcome>& outcomes);

// -- data summaries ---------------------------------------------------------

enum class MomentSpec { m16, m32, m40, m46, m60, m81 };

std::string moment_spec_id(MomentSpec spec);
MomentSpec parse_moment_spec(const std::string& id);
std::size_t moment_count(MomentSpec spec);
const std::array<MomentSpec, 6>& all_moment_specs();

/// Moment vector of a dataset. Blocks, in order:
///   mean of y_ij = (search, buy)                               2
///   cross-cov of y_ij with x_ij                                2 x 7
///   mean of ytilde_i = (non-free search, #searches, purchase)  3
///   cross-cov of ytilde_i with J^-1 sum_j x_ij                 3 x 7
///   cov of ytilde_i (upper triangle)                           6
/// m40 drops the last block, m32 also drops the non-free search dummy,
/// m16 keeps the first two blocks. m60 appends cross-cov of y_ij with x_ij^2
/// (14) and m81 further appends cross-cov of ytilde_i with J^-1 sum_j x_ij^2 (21).
/// Covariances divide by the number of terms.
MomentVector search_moments(const ConsumerGrid& grid, const std::vector<SearchOutcome>& outcomes,
                            MomentSpec spec);

struct KeyStats {
  double buy_rate = 0.0;
  double searches_per_consumer = 0.0;
  double mean_search_rank = 0.0;
};

KeyStats key_stats(const ConsumerGrid& grid, const std::vector<SearchOutcome>& outcomes);

/// Degenerate outcome patterns excluded from training sets.
enum class TrimReason { none, nobody_buys, everyone_buys, no_paid_search, everyone_searches_all };
const char* trim_reason_name(TrimReason r);
TrimReason trim_reason(const ConsumerGrid& grid, const std::vector<SearchOutcome>& outcomes);

struct CounterfactualResult {
  double buy_rate = 0.0;
  double zero_cost_buy_rate = 0.0;
  double increment() const noexcept { return zero_cost_buy_rate - buy_rate; }
};

/// Buy rate with and without search costs under the same shocks.
CounterfactualResult counterfactual_zero_cost(const SearchParams& params, const ConsumerGrid& grid,
                                              RngStream& rng);

}  // namespace nne::search
