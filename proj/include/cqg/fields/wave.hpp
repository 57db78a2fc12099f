#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "cqg/geometry/chart.hpp"
#include "cqg/geometry/weyl.hpp"
#include "cqg/numerics/fd.hpp"
#include "cqg/numerics/quadrature.hpp"

namespace cqg::fields {

using Complex = std::complex<double>;
using geom::FdOptions;
using PsiFn = std::function<Complex(std::span<const double>, double)>;
using ScalarFn = std::function<double(std::span<const double>)>;

// Conformal coupling constant: xi^2 = (n-2)/(4(n-1)).
double xi(int n);

// A wavefunction living on a chart. `weight` is its conformal weight,
// -(n-2)/4 for the canonical normalization (checked on construction).
struct WaveField {
  std::shared_ptr<const geom::MetricChart> chart;
  PsiFn psi_at;
  double weight = 0.0;

  WaveField() = default;
  WaveField(std::shared_ptr<const geom::MetricChart> c, PsiFn f);
};

struct PolarDecomposition {
  double rho = 0.0;    // |psi|^2
  double S = 0.0;      // hbar * arg(psi), principal branch unless continued
  double sigma = 0.0;  // S / (xi * hbar)
};

// Pointwise polar split; NodeError when |psi| <= node_tol.
PolarDecomposition decompose(const WaveField& w, std::span<const double> q,
                             double t = 0.0, double node_tol = 1e-12,
                             double hbar = 1.0);

// Polar split along a path with the phase unwrapped by nearest-branch
// continuation from point to point.
std::vector<PolarDecomposition> decompose_along(
    const WaveField& w, std::span<const std::vector<double>> path,
    double t = 0.0, double node_tol = 1e-12, double hbar = 1.0);

Complex compose(double rho, double S, double hbar = 1.0);

// Gradient of the scaled phase sigma, computed branch-free as
// Im(d_i psi / psi) / (xi hbar); never differentiates arg(psi) numerically.
std::vector<double> sigma_gradient(const WaveField& w,
                                   std::span<const double> q, double t = 0.0,
                                   const FdOptions& opt = {},
                                   double hbar = 1.0);

// Hamilton-Jacobi residual g^{ij} d_i sigma d_j sigma + R[g, |psi|^2].
// Solutions make this a constant (the stationary eigenvalue), not zero;
// callers assert the centered residual.
double hje_residual(const WaveField& w, std::span<const double> q,
                    double t = 0.0, const FdOptions& opt = {});

// Continuity residual (1/sqrt g) d_i (sqrt g rho g^{ij} d_j sigma).
double continuity_residual(const WaveField& w, std::span<const double> q,
                           double t = 0.0, const FdOptions& opt = {});
// Same, for explicitly given rho and sigma fields.
double continuity_residual(const geom::MetricChart& chart, const ScalarFn& rho,
                           const ScalarFn& sigma, std::span<const double> q,
                           const FdOptions& opt = {});

// Contravariant current density j^i = sqrt(g) rho g^{ij} d_j sigma.
std::vector<double> current_density(const geom::MetricChart& chart,
                                    const ScalarFn& rho, const ScalarFn& sigma,
                                    std::span<const double> q,
                                    const FdOptions& opt = {});
std::vector<double> current_density(const WaveField& w,
                                    std::span<const double> q, double t = 0.0,
                                    const FdOptions& opt = {});

// Configuration-space velocity g^{ij} d_j sigma (trajectory tangent up to
// parametrization).
std::vector<double> velocity_field(const geom::MetricChart& chart,
                                   const ScalarFn& sigma,
                                   std::span<const double> q,
                                   const FdOptions& opt = {});
std::vector<double> velocity_field(const WaveField& w,
                                   std::span<const double> q, double t = 0.0,
                                   const FdOptions& opt = {});

// Conformally coupled wave operator applied to psi:
//   (1/sqrt g) d_i (sqrt g g^{ij} d_j psi) - xi^2 Rbar psi.
Complex conformal_wave_residual(const WaveField& w, std::span<const double> q,
                                double t = 0.0, const FdOptions& opt = {});

struct TrajectoryResult {
  enum class Status { Completed, SingularityEncountered, LeftDomain };
  Status status = Status::Completed;
  std::vector<std::vector<double>> points;  // includes the start point
};

// Fixed-step RK4 streamline of a velocity evaluator. Periodic coordinates
// are wrapped each step; hitting a chart singularity or leaving the domain
// halts integration with the corresponding status (no throw).
TrajectoryResult integrate_trajectory(
    const geom::MetricChart& chart,
    const std::function<std::vector<double>(std::span<const double>)>& velocity,
    std::span<const double> q0, int steps, double dt);

// Detector surface: the level set q[normal_axis] = offset, integrated over
// the remaining coordinates with the given per-axis rules (listed in chart
// axis order, skipping the normal axis).
struct SurfaceSpec {
  int normal_axis = 0;
  double offset = 0.0;
  std::vector<num::Rule1D> section;
};

// Flux of a current evaluator through the surface: integral of j^{normal}.
// The normal axis must be one of the chart's flat spatial axes.
double detector_flux(
    const geom::MetricChart& chart,
    const std::function<std::vector<double>(std::span<const double>)>& current,
    const SurfaceSpec& surface);

}  // namespace cqg::fields
