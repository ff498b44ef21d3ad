#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nne/search_model.hpp"

namespace nne::io {

/// Search data as read from or written to
/// `session_id,option_rank,stars,review,location,chain,promotion,log_price,searched,bought`.
/// Options keep their row order within a session; sessions keep the order of
/// their first row. The file does not record search order, so searched options
/// are taken as searched in rank order.
struct SearchData {
  search::ConsumerGrid grid;
  std::vector<search::SearchOutcome> outcomes;
  std::vector<std::string> session_ids;
};

inline constexpr const char* kSearchHeader =
    "session_id,option_rank,stars,review,location,chain,promotion,log_price,searched,bought";

/// Throws ParseError on schema violations and ValidationError on invariant
/// violations (rank permutation, purchase without search, no search, two purchases).
SearchData read_search_csv(std::istream& in);
SearchData read_search_csv(const std::string& path);

/// Session ids default to 1..n when `session_ids` is empty.
void write_search_csv(std::ostream& out, const search::ConsumerGrid& grid,
                      const std::vector<search::SearchOutcome>& outcomes,
                      const std::vector<std::string>& session_ids = {});

/// Searched options ordered by rank, the order assumed for ingested data.
search::SearchOutcome rank_ordered(const search::ConsumerGrid& grid, std::size_t consumer,
                                   const search::SearchOutcome& outcome);

struct EstimateRow {
  std::string scenario;
  std::string method;
  std::string spec;
  std::size_t replication = 0;
  std::string parameter;
  double estimate = 0.0;
  /// Reported SD; absent for methods without one.
  std::optional<double> accuracy;
  /// Wall time; only filled when timing is enabled so reruns stay byte-identical.
  std::optional<double> runtime_s;
  std::size_t sim_burden = 0;
  std::string seed_path;
};

inline constexpr const char* kEstimatesHeader =
    "scenario,method,spec,replication,parameter,estimate,accuracy,runtime_s,sim_burden,seed_path";

void write_estimates_csv(std::ostream& out, const std::vector<EstimateRow>& rows);
std::vector<EstimateRow> read_estimates_csv(std::istream& in);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

/// Splits one CSV line on commas (no quoting).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace nne::io
