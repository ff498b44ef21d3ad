#pragma once

// Closed-form and quadrature references computed independently of the library.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
inline double Phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Posterior of theta for y_i ~ N(theta, 1), i = 1..n, theta ~ U[lo, hi], given the sample mean:
/// N(ybar, 1/n) truncated to [lo, hi].
struct Posterior {
  double mean;
  double sd;
};

inline Posterior truncated_normal_posterior(double ybar, std::size_t n, double lo, double hi) {
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  const double a = (lo - ybar) / s, b = (hi - ybar) / s;
  const double z = Phi(b) - Phi(a);
  const double mean = ybar + s * (phi(a) - phi(b)) / z;
  const double var = s * s * (1.0 + (a * phi(a) - b * phi(b)) / z - std::pow((phi(a) - phi(b)) / z, 2));
  return {mean, std::sqrt(var)};
}

/// Composite Simpson rule with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int k = 1; k < panels; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// E[max(u - z, 0)] for u ~ N(v, 1) by quadrature over u in [z, v + 12].
inline double expected_excess(double v, double z) {
  const double upper = std::max(z, v) + 12.0;
  return simpson([&](double u) { return (u - z) * phi(u - v); }, z, upper);
}

}  // namespace oracle
