#include "nne/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "nne/errors.hpp"

namespace nne {

OptimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x0, const NelderMeadOptions& options) {
  const Eigen::Index n = x0.size();
  if (n == 0) throw DomainError("Nelder-Mead needs at least one dimension");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  OptimizeResult res;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  };

  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> values(static_cast<std::size_t>(n + 1));
  for (Eigen::Index k = 0; k < n; ++k) {
    double step = options.initial_step.size() == n ? options.initial_step(k)
                                                   : 0.1 * std::max(1.0, std::abs(x0(k)));
    simplex[static_cast<std::size_t>(k + 1)](k) += step;
  }
  for (std::size_t v = 0; v < simplex.size(); ++v) values[v] = eval(simplex[v]);

  std::vector<std::size_t> idx(simplex.size());
  auto sort_simplex = [&]() {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<Eigen::VectorXd> s(simplex.size());
    std::vector<double> fv(simplex.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      s[k] = simplex[idx[k]];
      fv[k] = values[idx[k]];
    }
    simplex.swap(s);
    values.swap(fv);
  };

  const std::size_t last = static_cast<std::size_t>(n);
  while (true) {
    sort_simplex();
    double x_spread = 0.0, f_spread = 0.0;
    for (std::size_t k = 1; k <= last; ++k) {
      x_spread = std::max(x_spread, (simplex[k] - simplex[0]).cwiseAbs().maxCoeff());
      f_spread = std::max(f_spread, std::abs(values[k] - values[0]));
    }
    if (x_spread <= options.x_tol && f_spread <= options.f_tol) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= options.max_evaluations) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < last; ++k) centroid += simplex[k];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - simplex[last]);
    const double fr = eval(xr);
    if (fr < values[0]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - simplex[last]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[last] = xe;
        values[last] = fe;
      } else {
        simplex[last] = xr;
        values[last] = fr;
      }
      continue;
    }
    if (fr < values[last - 1]) {
      simplex[last] = xr;
      values[last] = fr;
      continue;
    }
    // Contraction, outside when the reflected point beats the worst vertex.
    const bool outside = fr < values[last];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                       : Eigen::VectorXd(centroid + 0.5 * (simplex[last] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : values[last])) {
      simplex[last] = xc;
      values[last] = fc;
      continue;
    }
    for (std::size_t k = 1; k <= last; ++k) {
      simplex[k] = simplex[0] + 0.5 * (simplex[k] - simplex[0]);
      values[k] = eval(simplex[k]);
    }
  }
  res.x = simplex[0];
  res.f = values[0];
  return res;
}

ScalarResult minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                             std::size_t grid_points) {
  if (!(lo < hi)) throw DomainError("minimize_scalar needs lo < hi");
  grid_points = std::max<std::size_t>(grid_points, 3);
  ScalarResult res;
  auto eval = [&](double x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  const double h = (hi - lo) / static_cast<double>(grid_points - 1);
  std::size_t best = 0;
  double best_f = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double x = k + 1 == grid_points ? hi : lo + h * static_cast<double>(k);
    const double v = eval(x);
    if (v < best_f) {
      best_f = v;
      best = k;
    }
  }
  const double a = best == 0 ? lo : lo + h * static_cast<double>(best - 1);
  const double b = best + 1 >= grid_points ? hi : lo + h * static_cast<double>(best + 1);
  const double x_best = best + 1 == grid_points ? hi : lo + h * static_cast<double>(best);

  std::uintmax_t max_iter = 200;
  const auto [x, fx] = boost::math::tools::brent_find_minima(eval, a, b, 40, max_iter);
  res.converged = max_iter < 200;
  // Boost caps Brent at half the mantissa; a golden-section pass inside a few
  // of its tolerances recovers the digits a zero-residual minimum allows.
  double gx = x, gf = fx;
  {
    const double span = 64.0 * std::ldexp(1.0, -26) * std::max(1.0, std::abs(x));
    double l = std::max(a, x - span), r = std::min(b, x + span);
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = r - inv_phi * (r - l), d = l + inv_phi * (r - l);
    double fc = eval(c), fd = eval(d);
    for (int it = 0; it < 80 && r - l > 1e-15 * std::max(1.0, std::abs(x)); ++it) {
      if (fc <= fd) {
        r = d;
        d = c;
        fd = fc;
        c = r - inv_phi * (r - l);
        fc = eval(c);
      } else {
        l = c;
        c = d;
        fc = fd;
        d = l + inv_phi * (r - l);
        fd = eval(d);
      }
    }
    if (fc < gf) gx = c, gf = fc;
    if (fd < gf) gx = d, gf = fd;
  }
  const double x_ref = gx, fx_ref = gf;
  if (fx_ref <= best_f) {
    res.x = x_ref;
    res.f = fx_ref;
  } else {
    res.x = x_best;
    res.f = best_f;
  }
  return res;
}

Eigen::MatrixXd numerical_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& x, const Eigen::VectorXd& step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd hess(n, n);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += step(i);
    xm(i) -= step(i);
    hess(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (step(i) * step(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
      pp(i) += step(i); pp(j) += step(j);
      pm(i) += step(i); pm(j) -= step(j);
      mp(i) -= step(i); mp(j) += step(j);
      mm(i) -= step(i); mm(j) -= step(j);
      hess(i, j) = hess(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step(i) * step(j));
    }
  }
  return hess;
}

}  // namespace nne
