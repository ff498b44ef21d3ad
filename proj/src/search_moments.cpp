#include <cmath>

#include "nne/errors.hpp"
#include "nne/search_model.hpp"

namespace nne::search {

std::string moment_spec_id(MomentSpec spec) {
  switch (spec) {
    case MomentSpec::m16: return "m16";
    case MomentSpec::m32: return "m32";
    case MomentSpec::m40: return "m40";
    case MomentSpec::m46: return "m46";
    case MomentSpec::m60: return "m60";
    case MomentSpec::m81: return "m81";
  }
  return "unknown";
}

MomentSpec parse_moment_spec(const std::string& id) {
  for (MomentSpec s : all_moment_specs())
    if (moment_spec_id(s) == id) return s;
  if (id == "std46") return MomentSpec::m46;
  throw DomainError("unknown search moment spec '" + id + "'");
}

std::size_t moment_count(MomentSpec spec) {
  switch (spec) {
    case MomentSpec::m16: return 16;
    case MomentSpec::m32: return 32;
    case MomentSpec::m40: return 40;
    case MomentSpec::m46: return 46;
    case MomentSpec::m60: return 60;
    case MomentSpec::m81: return 81;
  }
  return 0;
}

const std::array<MomentSpec, 6>& all_moment_specs() {
  static const std::array<MomentSpec, 6> specs = {MomentSpec::m16, MomentSpec::m32, MomentSpec::m40,
                                                   MomentSpec::m46, MomentSpec::m60, MomentSpec::m81};
  return specs;
}

namespace {

constexpr int kX = kCovariates;

/// Running sums for cross-covariances of a small outcome vector with covariates.
template <int Y>
struct CrossAccumulator {
  std::array<double, Y> sy{};
  std::array<double, kX> sx{};
  std::array<std::array<double, kX>, Y> syx{};
  double count = 0.0;

  void add(const std::array<double, Y>& y, const std::array<double, kX>& x) {
    count += 1.0;
    for (int a = 0; a < Y; ++a) sy[a] += y[a];
    for (int k = 0; k < kX; ++k) sx[k] += x[k];
    for (int a = 0; a < Y; ++a)
      for (int k = 0; k < kX; ++k) syx[a][k] += y[a] * x[k];
  }

  /// Appends cov(y_a, x_k) for a in `rows`, k = 0..6, outcome-major.
  void emit(std::vector<double>& out, std::span<const int> rows) const {
    for (int a : rows)
      for (int k = 0; k < kX; ++k)
        out.push_back(syx[a][k] / count - (sy[a] / count) * (sx[k] / count));
  }
};

}  // namespace

MomentVector search_moments(const ConsumerGrid& grid, const std::vector<SearchOutcome>& outcomes,
                            MomentSpec spec) {
  if (outcomes.size() != grid.n()) throw DomainError("one outcome per consumer is required");
  if (grid.n() == 0) throw DomainError("moments need at least one consumer");

  const bool with_squares = spec == MomentSpec::m60 || spec == MomentSpec::m81;
  const bool with_consumer_squares = spec == MomentSpec::m81;

  // Option level: y_ij = (searched, bought).
  CrossAccumulator<2> opt, opt_sq;
  // Consumer level: ytilde_i = (non-free search, #searches, purchase).
  CrossAccumulator<3> con, con_sq;
  std::array<std::array<double, 3>, 3> syy{};

  std::array<double, kX> x{}, x2{}, xbar{}, x2bar{};
  std::vector<bool> searched;
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const auto& o = outcomes[i];
    const std::size_t J = grid.options(i);
    searched.assign(J, false);
    for (int j : o.search_order) {
      if (j < 0 || static_cast<std::size_t>(j) >= J)
        throw DomainError("search order refers to a missing option");
      searched[static_cast<std::size_t>(j)] = true;
    }
    xbar.fill(0.0);
    x2bar.fill(0.0);
    for (std::size_t j = 0; j < J; ++j) {
      grid.covariates(i, j, x);
      for (int k = 0; k < kX; ++k) {
        x2[k] = x[k] * x[k];
        xbar[k] += x[k];
        x2bar[k] += x2[k];
      }
      const std::array<double, 2> y{searched[j] ? 1.0 : 0.0,
                                    o.bought == static_cast<int>(j) ? 1.0 : 0.0};
      opt.add(y, x);
      if (with_squares) opt_sq.add(y, x2);
    }
    for (int k = 0; k < kX; ++k) {
      xbar[k] /= static_cast<double>(J);
      x2bar[k] /= static_cast<double>(J);
    }
    const double k_searches = static_cast<double>(o.search_count());
    const std::array<double, 3> yt{k_searches > 1.0 ? 1.0 : 0.0, k_searches,
                                   o.purchased() ? 1.0 : 0.0};
    con.add(yt, xbar);
    if (with_consumer_squares) con_sq.add(yt, x2bar);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) syy[a][b] += yt[a] * yt[b];
  }

  static constexpr std::array<int, 2> both{0, 1};
  static constexpr std::array<int, 3> all3{0, 1, 2};
  static constexpr std::array<int, 2> drop_nonfree{1, 2};
  const std::span<const int> consumer_rows =
      spec == MomentSpec::m32 ? std::span<const int>(drop_nonfree) : std::span<const int>(all3);

  std::vector<double> m;
  m.reserve(moment_count(spec));
  for (int a : both) m.push_back(opt.sy[a] / opt.count);
  opt.emit(m, both);
  if (spec != MomentSpec::m16) {
    for (int a : consumer_rows) m.push_back(con.sy[a] / con.count);
    con.emit(m, consumer_rows);
  }
  if (spec == MomentSpec::m46 || spec == MomentSpec::m60 || spec == MomentSpec::m81) {
    const double nn = con.count;
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b)
        m.push_back(syy[a][b] / nn - (con.sy[a] / nn) * (con.sy[b] / nn));
  }
  if (with_squares) opt_sq.emit(m, both);
  if (with_consumer_squares) con_sq.emit(m, all3);

  MomentVector out{moment_spec_id(spec), Eigen::VectorXd(static_cast<Eigen::Index>(m.size()))};
  for (std::size_t k = 0; k < m.size(); ++k) out.values(static_cast<Eigen::Index>(k)) = m[k];
  return out;
}

}  // namespace nne::search
