#include "cqg/numerics/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cqg/numerics/linalg.hpp"

namespace cqg::num {

void gauss_legendre(int n, std::span<double> x, std::span<double> w) {
  if (n < 1)
    fail(ErrorKind::ValidationError, "gauss_legendre: need at least one node");
  if (int(x.size()) < n || int(w.size()) < n)
    fail(ErrorKind::ValidationError, "gauss_legendre: output spans too small");
  for (int i = 0; i < n; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      if (n == 1) { p1 = t; }
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? t : p1;
      const double pm = (n == 1) ? 1.0 : p0;
      pp = n * (t * pn - pm) / (t * t - 1.0);
      const double dt = pn / pp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * pp * pp);
  }
}

namespace {

struct Grid1D {
  std::vector<double> x, w;
};

Grid1D build_grid(const Rule1D& r) {
  if (r.nodes < 1)
    fail(ErrorKind::ValidationError, "quadrature: rule with no nodes");
  if (!(r.hi > r.lo))
    fail(ErrorKind::ValidationError, "quadrature: empty interval");
  Grid1D g;
  g.x.resize(r.nodes);
  g.w.resize(r.nodes);
  const double len = r.hi - r.lo;
  if (r.kind == Rule1D::Kind::Periodic) {
    for (int i = 0; i < r.nodes; ++i) {
      g.x[i] = r.lo + len * i / r.nodes;
      g.w[i] = len / r.nodes;
    }
  } else {
    gauss_legendre(r.nodes, g.x, g.w);
    for (int i = 0; i < r.nodes; ++i) {
      g.x[i] = r.lo + 0.5 * len * (g.x[i] + 1.0);
      g.w[i] *= 0.5 * len;
    }
  }
  return g;
}

}  // namespace

std::vector<double> tensor_quadrature_multi(
    const QuadratureSpec& spec, int m,
    const std::function<void(std::span<const double>, std::span<double>)>& f) {
  const int d = int(spec.dims.size());
  if (d == 0) fail(ErrorKind::ValidationError, "quadrature: no dimensions");
  if (m < 1) fail(ErrorKind::ValidationError, "quadrature: no integrands");

  std::vector<Grid1D> grids;
  grids.reserve(d);
  for (const auto& r : spec.dims) grids.push_back(build_grid(r));

  std::vector<int> idx(d, 0);
  std::vector<double> point(d);
  std::vector<double> vals(m);
  std::vector<KahanSum> acc(m);

  // Mixed-radix odometer, last axis fastest: a fixed evaluation order keeps
  // the compensated sums byte-reproducible run to run.
  for (;;) {
    double weight = 1.0;
    for (int k = 0; k < d; ++k) {
      point[k] = grids[k].x[idx[k]];
      weight *= grids[k].w[idx[k]];
    }
    f(point, vals);
    for (int j = 0; j < m; ++j) {
      if (!std::isfinite(vals[j])) {
        std::string where = "(";
        for (int k = 0; k < d; ++k)
          where += std::to_string(point[k]) + (k + 1 < d ? ", " : ")");
        fail(ErrorKind::NonFiniteEvaluation,
             "tensor_quadrature: integrand " + std::to_string(j) +
                 " non-finite at node " + where);
      }
      acc[j].add(weight * vals[j]);
    }
    int k = d - 1;
    while (k >= 0 && ++idx[k] == int(grids[k].x.size())) idx[k--] = 0;
    if (k < 0) break;
  }

  std::vector<double> out(m);
  for (int j = 0; j < m; ++j) out[j] = acc[j].value();
  return out;
}

double tensor_quadrature(
    const QuadratureSpec& spec,
    const std::function<double(std::span<const double>)>& f) {
  auto r = tensor_quadrature_multi(
      spec, 1, [&](std::span<const double> q, std::span<double> out) {
        out[0] = f(q);
      });
  return r[0];
}

}  // namespace cqg::num
