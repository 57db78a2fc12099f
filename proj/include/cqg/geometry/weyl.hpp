#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "cqg/geometry/chart.hpp"
#include "cqg/numerics/fd.hpp"
#include "cqg/numerics/linalg.hpp"

namespace cqg::geom {

using num::FdOptions;

// A positive scalar density with a declared conformal weight: under
// g -> lambda g the field rescales as rho -> lambda^weight rho. The
// canonical particle density carries weight -(n-2)/2.
struct DensityField {
  std::function<double(std::span<const double>)> rho_at;
  double weight = 0.0;
  double node_tol = 1e-12;
};

// Covariant Weyl vector as an evaluator (so gauge-transformed frames can be
// represented without re-deriving from a density).
struct WeylFrame {
  std::function<std::vector<double>(std::span<const double>)> phi_at;
};

inline double density_weight(int n) { return -0.5 * (n - 2); }
inline double wavefunction_weight(int n) { return -0.25 * (n - 2); }

// Expected scaling exponents under g -> lambda g (measured by the gauge
// test-suite; `current` refers to the contravariant current density).
struct GaugeWeights {
  double metric = 1.0;
  double rho = 0.0;
  double psi = 0.0;
  double sqrt_det = 0.0;
  double scalar_curvature = -1.0;
  double current = 0.0;
};
GaugeWeights canonical_weights(int n);

// Christoffel symbols of the chart metric at q, by central finite
// differences of the metric components: Gamma^i_jk = (1/2) g^{im}
// (d_j g_mk + d_k g_mj - d_m g_jk). Symmetric in (j,k) by construction.
num::Tensor3 christoffel(const MetricChart& chart, std::span<const double> q,
                         const FdOptions& opt = {});

// Weyl vector of a density: phi_i = -(1/(n-2)) d_i rho / rho.
std::vector<double> weyl_vector(const DensityField& rho,
                                std::span<const double> q, int n,
                                const FdOptions& opt = {});

// Frame whose phi is derived from the density on every call.
WeylFrame frame_from_density(const DensityField& rho, int n,
                             const FdOptions& opt = {});

// Weyl-invariant connection
//   Gamma^i_jk = {i,jk} - delta^i_j phi_k - delta^i_k phi_j + g_jk phi^i,
// i.e. the Levi-Civita connection of the conformally rescaled metric
// rho^{2/(n-2)} g; invariant under the gauge transformation below.
num::Tensor3 weyl_connection(const MetricChart& chart, const WeylFrame& frame,
                             std::span<const double> q,
                             const FdOptions& opt = {});

// Scalar curvature g^{jl} R^k_{jkl} of an arbitrary connection evaluator on
// the chart (the contraction uses the chart metric, not a rescaled one).
double scalar_curvature_of_connection(
    const MetricChart& chart,
    const std::function<num::Tensor3(std::span<const double>)>& connection,
    std::span<const double> q, const FdOptions& opt = {});

// Riemannian scalar curvature of the chart metric itself.
double riemann_scalar(const MetricChart& chart, std::span<const double> q,
                      const FdOptions& opt = {});

// Weyl scalar curvature of (g, rho):
//   R = Rbar + (n-1)/(n-2) [ g^{ij} d_i rho d_j rho / rho^2
//                            - 2 d_i(sqrt(g) g^{ij} d_j rho) / (rho sqrt(g)) ].
double weyl_scalar(const MetricChart& chart, const DensityField& rho,
                   std::span<const double> q, const FdOptions& opt = {});

// The conformal class member singled out by a wavefunction: |psi|^{4/(n-2)} g.
num::Mat riemann_gauge_metric(
    const MetricChart& chart,
    const std::function<std::complex<double>(std::span<const double>, double)>&
        psi,
    std::span<const double> q, double t = 0.0, double node_tol = 1e-12);

// Everything that transforms together under a change of gauge.
struct GaugeBundle {
  MetricChart chart;
  DensityField rho;
  std::function<std::complex<double>(std::span<const double>, double)> psi;
  double psi_weight = 0.0;
  WeylFrame frame;
};

// Applies g -> lambda g, rho -> lambda^{-(n-2)/2} rho,
// psi -> lambda^{-(n-2)/4} psi, phi -> phi + d lambda / (2 lambda).
// lambda must be strictly positive wherever it is evaluated (InvalidGauge).
GaugeBundle gauge_transform(
    const GaugeBundle& in,
    const std::function<double(std::span<const double>)>& lambda,
    const FdOptions& opt = {});

}  // namespace cqg::geom
