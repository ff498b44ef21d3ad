#include "nne/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "nne/errors.hpp"

namespace nne::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

namespace {

double parse_double(const std::string& s, std::size_t line, const char* column) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v))
    throw ParseError(line, std::string("column ") + column + ": '" + s + "' is not a finite number");
  return v;
}

long long parse_int(const std::string& s, std::size_t line, const char* column) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(line, std::string("column ") + column + ": '" + s + "' is not an integer");
  return v;
}

bool parse_flag(const std::string& s, std::size_t line, const char* column) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw ParseError(line, std::string("column ") + column + ": expected 0 or 1, got '" + s + "'");
}

struct SessionRows {
  std::size_t first_line = 0;
  std::vector<search::Attributes> attrs;
  std::vector<int> ranks;
  std::vector<bool> searched;
  std::vector<bool> bought;
  std::vector<std::size_t> lines;
};

}  // namespace

search::SearchOutcome rank_ordered(const search::ConsumerGrid& grid, std::size_t consumer,
                                   const search::SearchOutcome& outcome) {
  search::SearchOutcome o = outcome;
  std::stable_sort(o.search_order.begin(), o.search_order.end(), [&](int a, int b) {
    return grid.rank(consumer, static_cast<std::size_t>(a)) < grid.rank(consumer, static_cast<std::size_t>(b));
  });
  return o;
}

SearchData read_search_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "empty file, header required");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSearchHeader) throw ParseError(1, std::string("header must be '") + kSearchHeader + "'");

  std::vector<std::string> order;
  std::map<std::string, SessionRows> sessions;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10)
      throw ParseError(line_no, "expected 10 columns, found " + std::to_string(f.size()));
    if (f[0].empty()) throw ParseError(line_no, "empty session_id");
    auto [it, inserted] = sessions.try_emplace(f[0]);
    if (inserted) {
      order.push_back(f[0]);
      it->second.first_line = line_no;
    }
    auto& s = it->second;
    const long long rank = parse_int(f[1], line_no, "option_rank");
    search::Attributes a{parse_double(f[2], line_no, "stars"),    parse_double(f[3], line_no, "review"),
                         parse_double(f[4], line_no, "location"), parse_double(f[5], line_no, "chain"),
                         parse_double(f[6], line_no, "promotion"), parse_double(f[7], line_no, "log_price")};
    const bool searched = parse_flag(f[8], line_no, "searched");
    const bool bought = parse_flag(f[9], line_no, "bought");
    if (bought && !searched)
      throw ValidationError(line_no, "session " + f[0] + ": option bought without being searched");
    s.attrs.push_back(a);
    s.ranks.push_back(static_cast<int>(rank));
    s.searched.push_back(searched);
    s.bought.push_back(bought);
    s.lines.push_back(line_no);
  }
  if (order.empty()) throw ParseError(line_no, "no data rows");

  SearchData data;
  for (const auto& id : order) {
    const auto& s = sessions.at(id);
    const std::size_t J = s.ranks.size();
    std::vector<bool> seen(J, false);
    for (std::size_t j = 0; j < J; ++j) {
      const int r = s.ranks[j];
      if (r < 1 || static_cast<std::size_t>(r) > J || seen[static_cast<std::size_t>(r - 1)])
        throw ValidationError(s.lines[j], "session " + id + ": option ranks must be a permutation of 1.." +
                                              std::to_string(J));
      seen[static_cast<std::size_t>(r - 1)] = true;
    }
    search::SearchOutcome o;
    for (std::size_t j = 0; j < J; ++j) {
      if (s.searched[j]) o.search_order.push_back(static_cast<int>(j));
      if (s.bought[j]) {
        if (o.bought >= 0) throw ValidationError(s.lines[j], "session " + id + ": more than one purchase");
        o.bought = static_cast<int>(j);
      }
    }
    if (o.search_order.empty()) throw ValidationError(s.first_line, "session " + id + ": no searched option");
    data.grid.add_consumer(s.attrs, s.ranks);
    data.outcomes.push_back(rank_ordered(data.grid, data.grid.n() - 1, o));
    data.session_ids.push_back(id);
  }
  return data;
}

SearchData read_search_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open search data '" + path + "'");
  return read_search_csv(in);
}

void write_search_csv(std::ostream& out, const search::ConsumerGrid& grid,
                      const std::vector<search::SearchOutcome>& outcomes, const std::vector<std::string>& session_ids) {
  if (outcomes.size() != grid.n()) throw DomainError("one outcome per consumer is required");
  if (!session_ids.empty() && session_ids.size() != grid.n()) throw DomainError("one session id per consumer is required");
  out << kSearchHeader << '\n';
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const std::string id = session_ids.empty() ? std::to_string(i + 1) : session_ids[i];
    const auto searched = outcomes[i].searched_mask(grid.options(i));
    for (std::size_t j = 0; j < grid.options(i); ++j) {
      const auto& a = grid.attributes(i, j);
      out << id << ',' << grid.rank(i, j);
      for (double v : a) out << ',' << format_double(v);
      out << ',' << (searched[j] ? 1 : 0) << ',' << (outcomes[i].bought == static_cast<int>(j) ? 1 : 0) << '\n';
    }
  }
}

void write_estimates_csv(std::ostream& out, const std::vector<EstimateRow>& rows) {
  out << kEstimatesHeader << '\n';
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.method << ',' << r.spec << ',' << r.replication << ',' << r.parameter << ','
        << format_double(r.estimate) << ',' << (r.accuracy && std::isfinite(*r.accuracy) ? format_double(*r.accuracy) : "") << ','
        << (r.runtime_s ? format_double(*r.runtime_s) : "") << ',' << r.sim_burden << ',' << r.seed_path << '\n';
  }
}

std::vector<EstimateRow> read_estimates_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || (line != kEstimatesHeader && line != std::string(kEstimatesHeader) + "\r"))
    throw ParseError(1, std::string("header must be '") + kEstimatesHeader + "'");
  std::vector<EstimateRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10) throw ParseError(line_no, "expected 10 columns, found " + std::to_string(f.size()));
    EstimateRow r;
    r.scenario = f[0];
    r.method = f[1];
    r.spec = f[2];
    r.replication = static_cast<std::size_t>(parse_int(f[3], line_no, "replication"));
    r.parameter = f[4];
    r.estimate = parse_double(f[5], line_no, "estimate");
    if (!f[6].empty()) r.accuracy = parse_double(f[6], line_no, "accuracy");
    if (!f[7].empty()) r.runtime_s = parse_double(f[7], line_no, "runtime_s");
    r.sim_burden = static_cast<std::size_t>(parse_int(f[8], line_no, "sim_burden"));
    r.seed_path = f[9];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace nne::io
