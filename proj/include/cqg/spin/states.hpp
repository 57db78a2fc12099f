#pragma once

#include <array>
#include <complex>
#include <functional>
#include <span>

#include "cqg/fields/wave.hpp"
#include "cqg/geometry/chart.hpp"

namespace cqg::spin {

using Complex = std::complex<double>;

// Orientational coordinates of a spinning frame; gamma runs twice around
// (double cover), so a 2pi shift of gamma flips the wavefunction sign.
struct EulerTriple {
  double alpha = 0.0;  // [0, 2pi)
  double beta = 0.0;   // [0, pi]
  double gamma = 0.0;  // [0, 4pi)
};

bool in_canonical_ranges(const EulerTriple& z);

// Spin-1/2 orientation amplitudes:
//   d_up   = e^{i gamma/2} e^{+i alpha/2} cos(beta/2)
//   d_down = e^{i gamma/2} e^{-i alpha/2} sin(beta/2)
// |d_up|^2 + |d_down|^2 = 1 identically.
Complex d_up(const EulerTriple& z);
Complex d_down(const EulerTriple& z);

// Invariant measure density sin(beta) in (alpha, beta, gamma); total volume
// over the canonical box is 16 pi^2.
double haar_weight(const EulerTriple& z);
double haar_normalization();

// Normalized Haar integral by tensor quadrature: periodic rules in alpha and
// gamma, Gauss-Legendre in u = cos(beta) (the substitution absorbs the
// sin(beta) weight, so polynomial integrands in cos(beta) are integrated
// exactly).
double integrate_haar(const std::function<double(const EulerTriple&)>& f,
                      int n_alpha = 8, int n_beta = 8, int n_gamma = 8);

struct TwoParticleAngles {
  EulerTriple a, b;
};

// Product Haar integral over both particles' orientations.
double integrate_haar2(
    const std::function<double(const TwoParticleAngles&)>& f, int n_alpha = 8,
    int n_beta = 8, int n_gamma = 8);

// Gyration radius parameter of the rotational metric blocks.
struct GyrationScale {
  double a = 1.0;
};

// Rotational block ds^2 = a^2 (dbeta^2 + dalpha^2 + dgamma^2
//                               + 2 cos(beta) dalpha dgamma),
// coordinates ordered (alpha, beta, gamma); det = a^6 sin^2(beta).
geom::MetricChart so3_chart(GyrationScale s = {});
// Flat spatial block (x, y, z) + one rotational block.
geom::MetricChart v6_chart(GyrationScale s = {});
// Two particles: (r_A, z_A, r_B, z_B) = axes [0..2], [3..5], [6..8], [9..11].
geom::MetricChart v12_chart(GyrationScale s = {});

// Spatial envelope: complex amplitude over (x, y, z) and time.
using SpatialFn = std::function<Complex(std::span<const double>, double)>;

SpatialFn plane_wave(std::array<double, 3> k);
SpatialFn unit_envelope();

// Two-component spinor envelope.
struct SpinorEnvelope {
  SpatialFn up, down;
};

// psi = up(r,t) d_up(z) + down(r,t) d_down(z).
Complex psi_single(const EulerTriple& z, const SpinorEnvelope& env,
                   std::span<const double> r, double t = 0.0);

// Envelopes attached to the up/down arms of a two-particle state.
struct PairEnvelopes {
  SpatialFn up, down;
};

// psi_product = [d_up(z_A) d_down(z_B)] [up(r_A) down(r_B)];
// the grouping (orientation product first) is fixed so that the singlet's
// exchange antisymmetry below holds to the last bit.
Complex psi_product(const TwoParticleAngles& z, const PairEnvelopes& env,
                    std::span<const double> r_a, std::span<const double> r_b,
                    double t = 0.0);

// psi_singlet = (psi_updown - psi_downup) / sqrt(2); exactly antisymmetric
// under simultaneous exchange of orientations and positions, exactly zero at
// z_A = z_B when both arms share the same envelope.
Complex psi_singlet(const TwoParticleAngles& z, const PairEnvelopes& env,
                    std::span<const double> r_a, std::span<const double> r_b,
                    double t = 0.0);

// Closed-form phase of the pure spin-up state: S = hbar (gamma + alpha)/2
// + envelope phase. NodeError at beta = pi (state vanishes).
double action_spin_up(const EulerTriple& z, double envelope_phase = 0.0,
                      double hbar = 1.0);

// Closed-form variable part of the Weyl curvature of the spin-up state:
// -5 / (2 a^2 (1 + cos beta)). PoleError at beta = pi.
double curvature_spin_up(double beta, double a);

// Node factor of the singlet angular density:
// D = 1 - cos bA cos bB - cos(aA - aB) sin bA sin bB; density ~ D/4,
// vanishing exactly at z_A = z_B (up to gamma).
double singlet_denominator(const TwoParticleAngles& z);

// Closed-form pole part of the singlet Weyl curvature: 22 / (5 a^2 D).
// PoleError when D is at or below pole_tol.
double curvature_singlet(const TwoParticleAngles& z, double a,
                         double pole_tol = 1e-9);

// Singlet phase, branch-resolved via atan2 (matches hbar arg psi mod 2pi):
// S/hbar = (gamma_A + gamma_B)/2
//        + atan2(sin D' sin((bA+bB)/2), -cos D' sin((bA-bB)/2)),
// D' = (alpha_A - alpha_B)/2. NodeError at the density node.
double action_singlet(const TwoParticleAngles& z, double hbar = 1.0);
// Principal-branch arctan variant of the same closed form (differs from the
// above by multiples of pi on the far branch).
double action_singlet_principal(const TwoParticleAngles& z, double hbar = 1.0);

// Assembled wavefunctions on their charts.
fields::WaveField spin_up_wavefield(GyrationScale s, SpatialFn envelope);
fields::WaveField product_wavefield(GyrationScale s, PairEnvelopes env);
fields::WaveField singlet_wavefield(GyrationScale s, PairEnvelopes env);

}  // namespace cqg::spin
