#include "nne/summary.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <tuple>
#include <algorithm>

#include "nne/errors.hpp"

namespace nne {

namespace {

struct Group {
  SummaryRecord record;
  std::vector<std::string> params;
  /// parameter -> replication -> (estimate, accuracy)
  std::map<std::string, std::map<std::size_t, std::pair<double, std::optional<double>>>> values;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<SummaryRecord> summarize(const std::vector<io::EstimateRow>& rows,
                                     const std::map<std::string, double>& truth) {
  if (rows.empty()) throw DomainError("nothing to summarize");
  std::vector<Group> groups;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.scenario, r.method, r.spec);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      Group g;
      g.record.scenario = r.scenario;
      g.record.method = r.method;
      g.record.spec = r.spec;
      groups.push_back(std::move(g));
    }
    Group& g = groups[it->second];
    auto& per_param = g.values[r.parameter];
    if (per_param.empty()) g.params.push_back(r.parameter);
    per_param[r.replication] = {r.estimate, r.accuracy};
  }

  std::vector<SummaryRecord> out;
  for (auto& g : groups) {
    SummaryRecord& rec = g.record;
    bool all_truth = true;
    std::map<std::size_t, double> sq_dist;
    std::vector<double> biases;
    for (const auto& name : g.params) {
      const auto& reps = g.values.at(name);
      ParameterSummary ps;
      ps.parameter = name;
      ps.replications = reps.size();
      std::vector<double> est, acc;
      for (const auto& [rep, v] : reps) {
        est.push_back(v.first);
        if (v.second && std::isfinite(*v.second)) acc.push_back(*v.second);
      }
      ps.mean = mean_of(est);
      ps.sd = sd_of(est);
      ps.mean_accuracy = acc.empty() ? std::numeric_limits<double>::quiet_NaN() : mean_of(acc);
      const auto t = truth.find(name);
      if (t != truth.end()) {
        ps.bias = ps.mean - t->second;
        ps.bias_se = ps.sd / std::sqrt(static_cast<double>(est.size()));
        double mse = 0.0;
        for (const auto& [rep, v] : reps) {
          const double e = v.first - t->second;
          mse += e * e;
          sq_dist[rep] += e * e;
        }
        ps.rmse = std::sqrt(mse / static_cast<double>(est.size()));
        biases.push_back(*ps.bias);
      } else {
        all_truth = false;
      }
      rec.replications = std::max(rec.replications, ps.replications);
      rec.parameters.push_back(ps);
    }
    if (all_truth && !g.params.empty()) {
      std::vector<double> d2;
      for (const auto& [rep, v] : sq_dist) d2.push_back(v);
      const double mse = mean_of(d2);
      rec.rmse = std::sqrt(mse);
      const double se_mse = sd_of(d2) / std::sqrt(static_cast<double>(d2.size()));
      rec.rmse_se = *rec.rmse > 0.0 ? se_mse / (2.0 * *rec.rmse) : 0.0;
      double total = 0.0, norm2 = 0.0;
      for (double b : biases) {
        total += std::abs(b);
        norm2 += b * b;
      }
      rec.total_abs_bias = total;
      if (rec.parameters.size() == 1) {
        rec.bias = rec.parameters[0].bias;
        rec.bias_se = rec.parameters[0].bias_se;
      } else {
        rec.bias = std::sqrt(norm2);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRecord>& records) {
  auto opt = [](const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); };
  out << "scenario,method,spec,parameter,replications,mean,sd,mean_accuracy,bias,bias_se,rmse,rmse_se,total_abs_bias\n";
  for (const auto& r : records) {
    for (const auto& p : r.parameters) {
      out << r.scenario << ',' << r.method << ',' << r.spec << ',' << p.parameter << ',' << p.replications << ','
          << io::format_double(p.mean) << ',' << io::format_double(p.sd) << ','
          << (std::isfinite(p.mean_accuracy) ? io::format_double(p.mean_accuracy) : "") << ',' << opt(p.bias)
          << ',' << opt(p.bias_se) << ',' << opt(p.rmse) << ",,\n";
    }
    if (r.parameters.size() > 1 || r.rmse_se) {
      out << r.scenario << ',' << r.method << ',' << r.spec << ",ALL," << r.replications << ",,,," << opt(r.bias)
          << ',' << opt(r.bias_se) << ',' << opt(r.rmse) << ',' << opt(r.rmse_se) << ',' << opt(r.total_abs_bias)
          << '\n';
    }
  }
}

}  // namespace nne
