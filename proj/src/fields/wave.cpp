#include "cqg/fields/wave.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace cqg::fields {

namespace {

using num::Mat;

// Complex partial derivative of psi along one axis (Re and Im differenced
// separately; never goes through arg(psi), so phase branches cannot bite).
Complex complex_partial(const PsiFn& psi, std::span<const double> q, double t,
                        int axis, const FdOptions& opt) {
  auto re = [&psi, t](std::span<const double> p) { return psi(p, t).real(); };
  auto im = [&psi, t](std::span<const double> p) { return psi(p, t).imag(); };
  return {num::fd_derivative(re, q, axis, 1, opt).value,
          num::fd_derivative(im, q, axis, 1, opt).value};
}

double scalar_partial(const ScalarFn& f, std::span<const double> q, int axis,
                      const FdOptions& opt) {
  return num::fd_derivative(f, q, axis, 1, opt).value;
}

}  // namespace

double xi(int n) {
  if (n <= 2)
    fail(ErrorKind::UnsupportedDimension, "xi: defined for chart dimension > 2");
  return std::sqrt(double(n - 2) / (4.0 * double(n - 1)));
}

WaveField::WaveField(std::shared_ptr<const geom::MetricChart> c, PsiFn f)
    : chart(std::move(c)), psi_at(std::move(f)) {
  if (!chart) fail(ErrorKind::ValidationError, "WaveField: null chart");
  weight = geom::wavefunction_weight(chart->dim());
}

PolarDecomposition decompose(const WaveField& w, std::span<const double> q,
                             double t, double node_tol, double hbar) {
  const Complex psi = w.psi_at(q, t);
  const double mod = std::abs(psi);
  if (!(mod > node_tol))
    fail(ErrorKind::NodeError,
         "decompose: |psi| = " + std::to_string(mod) + " at a node");
  PolarDecomposition p;
  p.rho = std::norm(psi);
  p.S = hbar * std::arg(psi);
  p.sigma = p.S / (xi(w.chart->dim()) * hbar);
  return p;
}

std::vector<PolarDecomposition> decompose_along(
    const WaveField& w, std::span<const std::vector<double>> path, double t,
    double node_tol, double hbar) {
  std::vector<PolarDecomposition> out;
  out.reserve(path.size());
  const double period = 2.0 * std::numbers::pi * hbar;
  const double xin = xi(w.chart->dim());
  for (const auto& q : path) {
    PolarDecomposition p = decompose(w, q, t, node_tol, hbar);
    if (!out.empty()) {
      const double prev = out.back().S;
      p.S += period * std::round((prev - p.S) / period);
      p.sigma = p.S / (xin * hbar);
    }
    out.push_back(p);
  }
  return out;
}

Complex compose(double rho, double S, double hbar) {
  if (!(rho >= 0.0))
    fail(ErrorKind::ValidationError, "compose: negative density");
  return std::polar(std::sqrt(rho), S / hbar);
}

std::vector<double> sigma_gradient(const WaveField& w,
                                   std::span<const double> q, double t,
                                   const FdOptions& opt, double hbar) {
  (void)hbar;  // sigma = S/(xi hbar) makes the gradient hbar-free
  const Complex psi0 = w.psi_at(q, t);
  if (!(std::abs(psi0) > 1e-12))
    fail(ErrorKind::NodeError, "sigma_gradient: evaluated at a node");
  const double xin = xi(w.chart->dim());
  std::vector<double> grad(w.chart->dim());
  for (int d = 0; d < w.chart->dim(); ++d) {
    const Complex dpsi = complex_partial(w.psi_at, q, t, d, opt);
    grad[d] = (dpsi / psi0).imag() / xin;
  }
  return grad;
}

double hje_residual(const WaveField& w, std::span<const double> q, double t,
                    const FdOptions& opt) {
  const auto& chart = *w.chart;
  chart.require_interior(q);
  const std::vector<double> ds = sigma_gradient(w, q, t, opt);
  const Mat ginv = chart.inverse_metric(q);
  double kin = 0.0;
  for (int i = 0; i < chart.dim(); ++i)
    for (int j = 0; j < chart.dim(); ++j) kin += ginv(i, j) * ds[i] * ds[j];

  geom::DensityField rho;
  auto psi = w.psi_at;
  rho.rho_at = [psi, t](std::span<const double> p) {
    return std::norm(psi(p, t));
  };
  rho.weight = geom::density_weight(chart.dim());
  return kin + geom::weyl_scalar(chart, rho, q, opt);
}

namespace {

// rho d_j sigma = Im(conj(psi) d_j psi) / xi: the node-safe current core.
std::vector<double> momentum_density(const WaveField& w,
                                     std::span<const double> q, double t,
                                     const FdOptions& opt) {
  const Complex psi0 = w.psi_at(q, t);
  const double xin = xi(w.chart->dim());
  std::vector<double> m(w.chart->dim());
  for (int d = 0; d < w.chart->dim(); ++d) {
    const Complex dpsi = complex_partial(w.psi_at, q, t, d, opt);
    m[d] = (std::conj(psi0) * dpsi).imag() / xin;
  }
  return m;
}

}  // namespace

double continuity_residual(const WaveField& w, std::span<const double> q,
                           double t, const FdOptions& opt) {
  const auto& chart = *w.chart;
  chart.require_interior(q);
  const int n = chart.dim();
  WaveField local = w;
  auto flux_component = [&](std::span<const double> p, int i) {
    const Mat gi = chart.inverse_metric(p);
    const std::vector<double> m = momentum_density(local, p, t, opt);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += gi(i, j) * m[j];
    return chart.sqrt_det(p) * s;
  };
  double div = 0.0;
  for (int i = 0; i < n; ++i) {
    auto fi = [&](std::span<const double> p) { return flux_component(p, i); };
    div += scalar_partial(fi, q, i, opt);
  }
  return div / chart.sqrt_det(q);
}

double continuity_residual(const geom::MetricChart& chart, const ScalarFn& rho,
                           const ScalarFn& sigma, std::span<const double> q,
                           const FdOptions& opt) {
  chart.require_interior(q);
  const int n = chart.dim();
  auto flux_component = [&](std::span<const double> p, int i) {
    const Mat gi = chart.inverse_metric(p);
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      s += gi(i, j) * scalar_partial(sigma, p, j, opt);
    return chart.sqrt_det(p) * rho(p) * s;
  };
  double div = 0.0;
  for (int i = 0; i < n; ++i) {
    auto fi = [&](std::span<const double> p) { return flux_component(p, i); };
    div += scalar_partial(fi, q, i, opt);
  }
  return div / chart.sqrt_det(q);
}

std::vector<double> current_density(const geom::MetricChart& chart,
                                    const ScalarFn& rho, const ScalarFn& sigma,
                                    std::span<const double> q,
                                    const FdOptions& opt) {
  chart.require_interior(q);
  const int n = chart.dim();
  const Mat ginv = chart.inverse_metric(q);
  const double sg = chart.sqrt_det(q);
  const double r0 = rho(q);
  std::vector<double> j(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      j[i] += sg * r0 * ginv(i, k) * scalar_partial(sigma, q, k, opt);
  return j;
}

std::vector<double> current_density(const WaveField& w,
                                    std::span<const double> q, double t,
                                    const FdOptions& opt) {
  const auto& chart = *w.chart;
  chart.require_interior(q);
  const int n = chart.dim();
  const Mat ginv = chart.inverse_metric(q);
  const double sg = chart.sqrt_det(q);
  const std::vector<double> m = momentum_density(w, q, t, opt);
  std::vector<double> j(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) j[i] += sg * ginv(i, k) * m[k];
  return j;
}

std::vector<double> velocity_field(const geom::MetricChart& chart,
                                   const ScalarFn& sigma,
                                   std::span<const double> q,
                                   const FdOptions& opt) {
  chart.require_interior(q);
  const int n = chart.dim();
  const Mat ginv = chart.inverse_metric(q);
  std::vector<double> v(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      v[i] += ginv(i, k) * scalar_partial(sigma, q, k, opt);
  return v;
}

std::vector<double> velocity_field(const WaveField& w,
                                   std::span<const double> q, double t,
                                   const FdOptions& opt) {
  const auto& chart = *w.chart;
  chart.require_interior(q);
  const int n = chart.dim();
  const Mat ginv = chart.inverse_metric(q);
  const std::vector<double> ds = sigma_gradient(w, q, t, opt);
  std::vector<double> v(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) v[i] += ginv(i, k) * ds[k];
  return v;
}

Complex conformal_wave_residual(const WaveField& w, std::span<const double> q,
                                double t, const FdOptions& opt) {
  const auto& chart = *w.chart;
  chart.require_interior(q);
  const int n = chart.dim();
  auto psi = w.psi_at;
  // G^i = sqrt(g) g^{ij} d_j psi, then (1/sqrt g) d_i G^i.
  auto flux_re = [&](std::span<const double> p, int i) {
    const Mat gi = chart.inverse_metric(p);
    Complex s = 0.0;
    for (int j = 0; j < n; ++j) s += gi(i, j) * complex_partial(psi, p, t, j, opt);
    return chart.sqrt_det(p) * s;
  };
  Complex div = 0.0;
  for (int i = 0; i < n; ++i) {
    auto fre = [&](std::span<const double> p) { return flux_re(p, i).real(); };
    auto fim = [&](std::span<const double> p) { return flux_re(p, i).imag(); };
    div += Complex(num::fd_derivative(fre, q, i, 1, opt).value,
                   num::fd_derivative(fim, q, i, 1, opt).value);
  }
  const double xin = xi(n);
  const double rbar = geom::riemann_scalar(chart, q, opt);
  return div / chart.sqrt_det(q) - xin * xin * rbar * psi(q, t);
}

TrajectoryResult integrate_trajectory(
    const geom::MetricChart& chart,
    const std::function<std::vector<double>(std::span<const double>)>& velocity,
    std::span<const double> q0, int steps, double dt) {
  if (steps < 0 || !(dt > 0.0))
    fail(ErrorKind::ValidationError,
         "integrate_trajectory: steps must be >= 0 and dt > 0");
  const int n = chart.dim();
  TrajectoryResult out;
  std::vector<double> q(q0.begin(), q0.end());
  chart.require_interior(q);
  out.points.push_back(q);

  auto eval = [&](const std::vector<double>& p) { return velocity(p); };
  std::vector<double> k1, k2, k3, k4, tmp(n);
  for (int s = 0; s < steps; ++s) {
    try {
      k1 = eval(q);
      for (int i = 0; i < n; ++i) tmp[i] = q[i] + 0.5 * dt * k1[i];
      k2 = eval(tmp);
      for (int i = 0; i < n; ++i) tmp[i] = q[i] + 0.5 * dt * k2[i];
      k3 = eval(tmp);
      for (int i = 0; i < n; ++i) tmp[i] = q[i] + dt * k3[i];
      k4 = eval(tmp);
      for (int i = 0; i < n; ++i)
        q[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    } catch (const Error& e) {
      out.status = e.kind() == ErrorKind::DomainError
                       ? TrajectoryResult::Status::LeftDomain
                       : TrajectoryResult::Status::SingularityEncountered;
      return out;
    }
    bool finite = true;
    for (double x : q) finite = finite && std::isfinite(x);
    if (!finite) {
      out.status = TrajectoryResult::Status::SingularityEncountered;
      return out;
    }
    chart.wrap(q);
    try {
      chart.require_interior(q);
    } catch (const Error& e) {
      out.status = e.kind() == ErrorKind::CoordinateSingularity
                       ? TrajectoryResult::Status::SingularityEncountered
                       : TrajectoryResult::Status::LeftDomain;
      return out;
    }
    out.points.push_back(q);
  }
  return out;
}

double detector_flux(
    const geom::MetricChart& chart,
    const std::function<std::vector<double>(std::span<const double>)>& current,
    const SurfaceSpec& surface) {
  const int n = chart.dim();
  bool spatial = false;
  for (int a : chart.spatial_axes) spatial = spatial || (a == surface.normal_axis);
  if (!spatial)
    fail(ErrorKind::InvalidSurface,
         "detector_flux: axis " + std::to_string(surface.normal_axis) +
             " is not a flat spatial axis of chart " + chart.name());
  if (int(surface.section.size()) != n - 1)
    fail(ErrorKind::ValidationError,
         "detector_flux: section must carry one rule per non-normal axis");

  num::QuadratureSpec spec;
  spec.dims = surface.section;
  std::vector<double> full(n);
  return num::tensor_quadrature(spec, [&](std::span<const double> sec) {
    int k = 0;
    for (int i = 0; i < n; ++i)
      full[i] = (i == surface.normal_axis) ? surface.offset : sec[k++];
    return current(full)[surface.normal_axis];
  });
}

}  // namespace cqg::fields
