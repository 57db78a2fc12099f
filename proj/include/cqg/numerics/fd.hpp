#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "cqg/error.hpp"

namespace cqg::num {

// Step size / extrapolation depth used by every derivative in the library.
// One Richardson level on a second-order central stencil gives O(h^4), which
// with h = 1e-3 puts truncation near 1e-13 for O(1) smooth fields.
struct FdOptions {
  double step = 1e-3;
  int richardson_levels = 1;
};

struct FdResult {
  double value = 0.0;
  // |T_L - T_{L-1}| from the extrapolation table; crude but honest.
  double error_estimate = 0.0;
};

// Central difference of f at x0, derivative order 1 or 2, with
// `levels` Richardson extrapolation steps (error series in h^2).
FdResult fd_derivative_1d(const std::function<double(double)>& f, double x0,
                          int order, double h, int levels);

// Multivariate wrapper: partial derivative along `axis` at point q.
FdResult fd_derivative(const std::function<double(std::span<const double>)>& f,
                       std::span<const double> q, int axis, int order,
                       const FdOptions& opt);

inline FdResult fd_derivative_1d(const std::function<double(double)>& f,
                                 double x0, int order, double h, int levels) {
  if (order != 1 && order != 2)
    fail(ErrorKind::ValidationError, "fd_derivative: order must be 1 or 2");
  if (!(h > 0.0))
    fail(ErrorKind::ValidationError, "fd_derivative: step must be positive");
  if (levels < 0 || levels > 6)
    fail(ErrorKind::ValidationError,
         "fd_derivative: richardson_levels outside [0, 6]");

  auto stencil = [&](double hh) {
    const double fp = f(x0 + hh), fm = f(x0 - hh);
    double v;
    if (order == 1) {
      v = (fp - fm) / (2.0 * hh);
    } else {
      const double f0 = f(x0);
      v = (fp - 2.0 * f0 + fm) / (hh * hh);
    }
    if (!std::isfinite(v))
      fail(ErrorKind::NonFiniteEvaluation,
           "fd_derivative: stencil produced a non-finite value");
    return v;
  };

  // Romberg-style table: T[k][0] = stencil(h / 2^k), both stencils have
  // pure h^2 error series so the 4^m weights apply to either order.
  std::vector<std::vector<double>> T(levels + 1);
  for (int k = 0; k <= levels; ++k) {
    T[k].resize(k + 1);
    T[k][0] = stencil(h / double(1 << k));
    for (int m = 1; m <= k; ++m) {
      const double p = double(1 << (2 * m));  // 4^m
      T[k][m] = (p * T[k][m - 1] - T[k - 1][m - 1]) / (p - 1.0);
    }
  }
  FdResult r;
  r.value = T[levels][levels];
  r.error_estimate = levels == 0
                         ? std::abs(T[0][0]) * 1e-8  // no table to compare
                         : std::abs(T[levels][levels] - T[levels - 1][levels - 1]);
  return r;
}

inline FdResult fd_derivative(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> q, int axis, int order, const FdOptions& opt) {
  if (axis < 0 || axis >= int(q.size()))
    fail(ErrorKind::ValidationError, "fd_derivative: axis out of range");
  std::vector<double> p(q.begin(), q.end());
  const double q0 = p[axis];
  auto g = [&](double x) {
    p[axis] = x;
    return f(p);
  };
  return fd_derivative_1d(g, q0, order, opt.step, opt.richardson_levels);
}

}  // namespace cqg::num
