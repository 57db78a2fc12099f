#include "cqg/geometry/weyl.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace cqg::geom {

namespace {

using num::Mat;
using num::Tensor3;

// Richardson-extrapolated central difference of a matrix-valued function of
// one coordinate, evaluated entry-by-entry from shared metric evaluations.
Mat mat_partial(const std::function<Mat(std::span<const double>)>& f,
                std::span<const double> q, int axis, const FdOptions& opt) {
  std::vector<double> p(q.begin(), q.end());
  const double q0 = p[axis];
  const int L = opt.richardson_levels;
  std::vector<Mat> table(L + 1);
  for (int k = 0; k <= L; ++k) {
    const double h = opt.step / double(1 << k);
    p[axis] = q0 + h;
    Mat d = f(p);
    p[axis] = q0 - h;
    d -= f(p);
    d *= 1.0 / (2.0 * h);
    table[k] = d;
  }
  p[axis] = q0;
  // Fold the Romberg table in place: after pass m, table[k] holds T[k][m].
  for (int m = 1; m <= L; ++m) {
    const double w = double(1 << (2 * m));  // 4^m
    for (int k = L; k >= m; --k) {
      Mat t = table[k];
      t *= w;
      t -= table[k - 1];
      t *= 1.0 / (w - 1.0);
      table[k] = t;
    }
  }
  return table[L];
}

Tensor3 tensor_partial(const std::function<Tensor3(std::span<const double>)>& f,
                       std::span<const double> q, int axis,
                       const FdOptions& opt) {
  std::vector<double> p(q.begin(), q.end());
  const double q0 = p[axis];
  const int L = opt.richardson_levels;
  const int n = int(q.size());
  std::vector<Tensor3> table(L + 1);
  for (int k = 0; k <= L; ++k) {
    const double h = opt.step / double(1 << k);
    p[axis] = q0 + h;
    Tensor3 plus = f(p);
    p[axis] = q0 - h;
    Tensor3 minus = f(p);
    Tensor3 d(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int kk = 0; kk < n; ++kk)
          d.at(i, j, kk) =
              (plus.at(i, j, kk) - minus.at(i, j, kk)) / (2.0 * h);
    table[k] = d;
  }
  for (int m = 1; m <= L; ++m) {
    const double w = double(1 << (2 * m));
    for (int k = L; k >= m; --k) {
      Tensor3 t(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int kk = 0; kk < n; ++kk)
            t.at(i, j, kk) = (w * table[k].at(i, j, kk) -
                              table[k - 1].at(i, j, kk)) /
                             (w - 1.0);
      table[k] = t;
    }
  }
  return table[L];
}

double scalar_partial(const std::function<double(std::span<const double>)>& f,
                      std::span<const double> q, int axis,
                      const FdOptions& opt) {
  return num::fd_derivative(f, q, axis, 1, opt).value;
}

}  // namespace

GaugeWeights canonical_weights(int n) {
  if (n <= 2)
    fail(ErrorKind::UnsupportedDimension,
         "canonical_weights: defined for n > 2");
  GaugeWeights w;
  w.metric = 1.0;
  w.rho = density_weight(n);
  w.psi = wavefunction_weight(n);
  w.sqrt_det = 0.5 * n;
  w.scalar_curvature = -1.0;
  w.current = 0.0;
  return w;
}

num::Tensor3 christoffel(const MetricChart& chart, std::span<const double> q,
                         const FdOptions& opt) {
  chart.require_interior(q);
  const int n = chart.dim();
  const Mat ginv = chart.inverse_metric(q);  // throws DegenerateChart

  auto metric_at = [&](std::span<const double> p) { return chart.metric(p); };
  std::vector<Mat> dg(n);
  for (int d = 0; d < n; ++d) dg[d] = mat_partial(metric_at, q, d, opt);

  Tensor3 gamma(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double s = 0.0;
        for (int m = 0; m < n; ++m)
          s += ginv(i, m) * (dg[j](m, k) + dg[k](m, j) - dg[m](j, k));
        s *= 0.5;
        gamma.at(i, j, k) = s;
        gamma.at(i, k, j) = s;
      }
  return gamma;
}

std::vector<double> weyl_vector(const DensityField& rho,
                                std::span<const double> q, int n,
                                const FdOptions& opt) {
  if (n <= 2)
    fail(ErrorKind::UnsupportedDimension,
         "weyl_vector: requires chart dimension n > 2");
  const double r0 = rho.rho_at(q);
  if (!(r0 > rho.node_tol))
    fail(ErrorKind::NodeError,
         "weyl_vector: density " + std::to_string(r0) +
             " at or below node tolerance");
  std::vector<double> phi(q.size());
  const double c = -1.0 / double(n - 2);
  for (int d = 0; d < int(q.size()); ++d)
    phi[d] = c * scalar_partial(rho.rho_at, q, d, opt) / r0;
  return phi;
}

WeylFrame frame_from_density(const DensityField& rho, int n,
                             const FdOptions& opt) {
  WeylFrame f;
  f.phi_at = [rho, n, opt](std::span<const double> q) {
    return weyl_vector(rho, q, n, opt);
  };
  return f;
}

num::Tensor3 weyl_connection(const MetricChart& chart, const WeylFrame& frame,
                             std::span<const double> q, const FdOptions& opt) {
  const int n = chart.dim();
  Tensor3 gamma = christoffel(chart, q, opt);
  const std::vector<double> phi = frame.phi_at(q);
  if (int(phi.size()) != n)
    fail(ErrorKind::ValidationError,
         "weyl_connection: frame covector has wrong dimension");
  const Mat g = chart.metric(q);
  const Mat ginv = chart.inverse_metric(q);
  std::vector<double> phi_up(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) phi_up[i] += ginv(i, j) * phi[j];

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = gamma.at(i, j, k);
        if (i == j) v -= phi[k];
        if (i == k) v -= phi[j];
        v += g(j, k) * phi_up[i];
        gamma.at(i, j, k) = v;
      }
  return gamma;
}

double scalar_curvature_of_connection(
    const MetricChart& chart,
    const std::function<num::Tensor3(std::span<const double>)>& connection,
    std::span<const double> q, const FdOptions& opt) {
  chart.require_interior(q);
  const int n = chart.dim();
  const Mat ginv = chart.inverse_metric(q);
  const Tensor3 gamma = connection(q);

  std::vector<Tensor3> dgamma(n);
  for (int d = 0; d < n; ++d) dgamma[d] = tensor_partial(connection, q, d, opt);

  // Ricci_{jl} = d_k Gamma^k_{lj} - d_l Gamma^k_{kj}
  //            + Gamma^k_{km} Gamma^m_{lj} - Gamma^k_{lm} Gamma^m_{kj}
  double r = 0.0;
  std::vector<double> trace(n, 0.0);  // Gamma^k_{km}
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) trace[m] += gamma.at(k, k, m);

  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      double ric = 0.0;
      for (int k = 0; k < n; ++k) {
        ric += dgamma[k].at(k, l, j) - dgamma[l].at(k, k, j);
        for (int m = 0; m < n; ++m)
          ric -= gamma.at(k, l, m) * gamma.at(m, k, j);
      }
      for (int m = 0; m < n; ++m) ric += trace[m] * gamma.at(m, l, j);
      r += ginv(j, l) * ric;
    }
  return r;
}

double riemann_scalar(const MetricChart& chart, std::span<const double> q,
                      const FdOptions& opt) {
  return scalar_curvature_of_connection(
      chart,
      [&chart, &opt](std::span<const double> p) {
        return christoffel(chart, p, opt);
      },
      q, opt);
}

double weyl_scalar(const MetricChart& chart, const DensityField& rho,
                   std::span<const double> q, const FdOptions& opt) {
  chart.require_interior(q);
  const int n = chart.dim();
  if (n <= 2)
    fail(ErrorKind::UnsupportedDimension, "weyl_scalar: requires n > 2");
  const double r0 = rho.rho_at(q);
  if (!(r0 > rho.node_tol))
    fail(ErrorKind::NodeError, "weyl_scalar: density at or below node tolerance");

  const double rbar = riemann_scalar(chart, q, opt);

  const Mat ginv = chart.inverse_metric(q);
  std::vector<double> drho(n);
  for (int d = 0; d < n; ++d) drho[d] = scalar_partial(rho.rho_at, q, d, opt);
  double grad2 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grad2 += ginv(i, j) * drho[i] * drho[j];

  // Divergence of the density flux F^i = sqrt(g) g^{ij} d_j rho.
  auto flux_component = [&](std::span<const double> p, int i) {
    const Mat gi = chart.inverse_metric(p);
    const double sg = chart.sqrt_det(p);
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      s += gi(i, j) * scalar_partial(rho.rho_at, p, j, opt);
    return sg * s;
  };
  double div = 0.0;
  for (int i = 0; i < n; ++i) {
    auto fi = [&](std::span<const double> p) { return flux_component(p, i); };
    div += scalar_partial(fi, q, i, opt);
  }

  const double sg = chart.sqrt_det(q);
  const double c = double(n - 1) / double(n - 2);
  return rbar + c * (grad2 / (r0 * r0) - 2.0 * div / (r0 * sg));
}

num::Mat riemann_gauge_metric(
    const MetricChart& chart,
    const std::function<std::complex<double>(std::span<const double>, double)>&
        psi,
    std::span<const double> q, double t, double node_tol) {
  const int n = chart.dim();
  if (n <= 2)
    fail(ErrorKind::UnsupportedDimension, "riemann_gauge_metric: requires n > 2");
  const double mod = std::abs(psi(q, t));
  if (!(mod > node_tol))
    fail(ErrorKind::NodeError,
         "riemann_gauge_metric: |psi| at or below node tolerance");
  Mat g = chart.metric(q);
  g *= std::pow(mod, 4.0 / double(n - 2));
  return g;
}

GaugeBundle gauge_transform(
    const GaugeBundle& in,
    const std::function<double(std::span<const double>)>& lambda,
    const FdOptions& opt) {
  const int n = in.chart.dim();
  if (n <= 2)
    fail(ErrorKind::UnsupportedDimension, "gauge_transform: requires n > 2");

  auto lam = [lambda](std::span<const double> q) {
    const double l = lambda(q);
    if (!(l > 0.0))
      fail(ErrorKind::InvalidGauge,
           "gauge_transform: lambda = " + std::to_string(l) +
               " not strictly positive");
    return l;
  };

  GaugeBundle out;
  auto base_metric = in.chart;
  out.chart = MetricChart(
      in.chart.name() + "'", in.chart.ranges(),
      [base_metric, lam](std::span<const double> q, Mat& g) {
        g = base_metric.metric(q);
        g *= lam(q);
      });
  out.chart.spatial_axes = in.chart.spatial_axes;
  out.chart.polar_axes = in.chart.polar_axes;
  out.chart.polar_guard = in.chart.polar_guard;

  const double wr = density_weight(n);
  auto rho_in = in.rho;
  out.rho.rho_at = [rho_in, lam, wr](std::span<const double> q) {
    return std::pow(lam(q), wr) * rho_in.rho_at(q);
  };
  out.rho.weight = in.rho.weight;
  out.rho.node_tol = in.rho.node_tol;

  const double wp = wavefunction_weight(n);
  auto psi_in = in.psi;
  if (psi_in) {
    out.psi = [psi_in, lam, wp](std::span<const double> q, double t) {
      return std::pow(lam(q), wp) * psi_in(q, t);
    };
  }
  out.psi_weight = in.psi_weight;

  // phi' = phi + d lambda / (2 lambda); the shift is computed from lambda
  // directly, so the transformed frame works even when the source frame was
  // not density-derived.
  auto phi_in = in.frame.phi_at;
  out.frame.phi_at = [phi_in, lam, opt](std::span<const double> q) {
    std::vector<double> phi =
        phi_in ? phi_in(q) : std::vector<double>(q.size(), 0.0);
    const double l = lam(q);
    for (int d = 0; d < int(q.size()); ++d)
      phi[d] += scalar_partial(lam, q, d, opt) / (2.0 * l);
    return phi;
  };
  return out;
}

}  // namespace cqg::geom
