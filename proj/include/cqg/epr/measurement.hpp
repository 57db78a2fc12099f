#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cqg/spin/states.hpp"

namespace cqg::epr {

using Complex = std::complex<double>;

// Spin-analyzer rotation applied to a unit spinor (a, b): the transmitted
// up/down channel amplitudes for an apparatus at angle theta.
struct SGAChannels {
  Complex up, down;
};

// ValidationError unless |a|^2 + |b|^2 = 1 within 1e-12.
SGAChannels sga_transform(Complex a, Complex b, double theta);

// Orientation-resolved channel factors of a single particle meeting an
// analyzer at theta:
//   up   = d_up cos(theta/2) + d_down sin(theta/2)
//   down = d_up sin(theta/2) - d_down cos(theta/2)
Complex analyzer_up_factor(const spin::EulerTriple& z, double theta);
Complex analyzer_down_factor(const spin::EulerTriple& z, double theta);

// |up|^2 - |down|^2 splitter bracket:
// b = cos(beta) cos(theta) + cos(alpha) sin(beta) sin(theta);
// channel densities are (1 +- b)/2.
double polarization_bracket(const spin::EulerTriple& z, double theta);

// Singlet coincidence amplitudes {uu, ud, du, dd} at the orientation pair,
// for analyzers theta_a (particle A) and theta_b (particle B).
std::array<Complex, 4> amplitude_coefficients(const spin::TwoParticleAngles& z,
                                              double theta_a, double theta_b);

// |amplitude|^2 via the bracket form (the fast route; agrees with
// amplitude_coefficients to rounding).
std::array<double, 4> joint_weights(const spin::TwoParticleAngles& z,
                                    double theta_a, double theta_b);

// Per-particle-block Haar quadrature orders. The flux integrands are
// trigonometric polynomials of degree <= 1 in alpha/gamma and <= 2 in
// cos(beta); rules below (5, 3, 5) nodes cannot be exact -> QuadratureOrder.
struct QuadSpec {
  int alpha = 8;
  int beta = 8;
  int gamma = 8;
};

struct FluxTable {
  double uu = 0.0, ud = 0.0, du = 0.0, dd = 0.0;  // renormalized, sum = 1
  double raw_total = 0.0;                         // pre-normalization sum
  double channel(int i) const {
    return i == 0 ? uu : i == 1 ? ud : i == 2 ? du : dd;
  }
};

// Coincidence fluxes by factorized one-particle quadratures (the two-sided
// integral splits exactly for the singlet weights).
FluxTable coincidence_fluxes(double theta_a, double theta_b,
                             const QuadSpec& q = {});
// The same by direct two-particle (6-dimensional) quadrature; slower,
// used to cross-check the factorized route.
FluxTable coincidence_fluxes_direct(double theta_a, double theta_b,
                                    const QuadSpec& q = {});

// E = phi_uu + phi_dd - phi_ud - phi_du (renormalized table).
double correlation(double theta_a, double theta_b, const QuadSpec& q = {});
double correlation(const FluxTable& t);

enum class Side { A, B };

struct MarginalTable {
  std::array<double, 2> raw;         // integral over the remote orientation
  std::array<double, 2> normalized;  // raw / raw_total of the full table
  double bracket = 0.0;              // local polarization bracket
  // max |raw - (1 +- b)/4| relative to the raw side total 1/2.
  double proportionality_residual = 0.0;
};

// Single-side detection densities at a pinned local orientation, remote
// particle integrated out.
MarginalTable marginal_densities(Side side, const spin::EulerTriple& local,
                                 double theta_a, double theta_b,
                                 const QuadSpec& q = {});

// Bell quantity from fluxes at separations 0, 2*delta, 4*delta:
// F = |-E(0) - 2 E(2 delta) + E(4 delta)|; local realism caps it at 2.
double bell_redhead(double delta, const QuadSpec& q = {});

struct BellRow {
  double delta = 0.0;
  double f_value = 0.0;
  double correlation_2delta = 0.0;
  bool violated = false;
};
std::vector<BellRow> bell_scan(std::span<const double> deltas,
                               const QuadSpec& q = {});

// CHSH combination E(a,b) - E(a,b') + E(a',b) + E(a',b') for settings
// {a, a', b, b'} (signed; |S| reaches 2 sqrt 2 at the standard settings).
double chsh(const std::array<double, 4>& settings, const QuadSpec& q = {});

struct MCConfig {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 42;
  int workers = 0;            // 0 = library default; never affects results
  std::string kernel = "auto";
};

struct MCResult {
  FluxTable fluxes;                     // renormalized estimates
  std::array<double, 4> stderrs{};      // batch-means standard errors
  double corr = 0.0;
  double corr_stderr = 0.0;
  std::uint64_t samples = 0;
  std::string kernel_used;
};

// Monte-Carlo coincidence fluxes: orientations drawn Haar-uniformly by
// counter-based RNG, channel weights accumulated in fixed-size blocks whose
// partial sums are combined in block order -- bitwise independent of the
// worker count.
MCResult mc_run(double theta_a, double theta_b, const MCConfig& cfg = {});

struct ChshMcResult {
  double value = 0.0;
  double stderr_ = 0.0;
  std::array<MCResult, 4> pairs;
};

// CHSH from four Monte-Carlo runs (per-pair seeds derived as seed + index).
ChshMcResult chsh_mc(const std::array<double, 4>& settings,
                     const MCConfig& cfg = {});

}  // namespace cqg::epr
