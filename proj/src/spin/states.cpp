#include "cqg/spin/states.hpp"

#include <cmath>
#include <memory>
#include <numbers>

#include "cqg/numerics/quadrature.hpp"

namespace cqg::spin {

namespace {
constexpr double kPi = std::numbers::pi;
}

bool in_canonical_ranges(const EulerTriple& z) {
  return z.alpha >= 0.0 && z.alpha < 2.0 * kPi && z.beta >= 0.0 &&
         z.beta <= kPi && z.gamma >= 0.0 && z.gamma < 4.0 * kPi;
}

Complex d_up(const EulerTriple& z) {
  return std::polar(std::cos(0.5 * z.beta), 0.5 * (z.gamma + z.alpha));
}

Complex d_down(const EulerTriple& z) {
  return std::polar(std::sin(0.5 * z.beta), 0.5 * (z.gamma - z.alpha));
}

double haar_weight(const EulerTriple& z) { return std::sin(z.beta); }

double haar_normalization() { return 16.0 * kPi * kPi; }

double integrate_haar(const std::function<double(const EulerTriple&)>& f,
                      int n_alpha, int n_beta, int n_gamma) {
  num::QuadratureSpec spec;
  spec.dims = {
      {num::Rule1D::Kind::Periodic, n_alpha, 0.0, 2.0 * kPi},
      {num::Rule1D::Kind::Legendre, n_beta, -1.0, 1.0},  // u = cos(beta)
      {num::Rule1D::Kind::Periodic, n_gamma, 0.0, 4.0 * kPi},
  };
  const double raw =
      num::tensor_quadrature(spec, [&](std::span<const double> p) {
        return f({p[0], std::acos(p[1]), p[2]});
      });
  return raw / (2.0 * kPi * 2.0 * 4.0 * kPi);  // normalized measure
}

double integrate_haar2(const std::function<double(const TwoParticleAngles&)>& f,
                       int n_alpha, int n_beta, int n_gamma) {
  num::QuadratureSpec spec;
  const num::Rule1D ra{num::Rule1D::Kind::Periodic, n_alpha, 0.0, 2.0 * kPi};
  const num::Rule1D ru{num::Rule1D::Kind::Legendre, n_beta, -1.0, 1.0};
  const num::Rule1D rg{num::Rule1D::Kind::Periodic, n_gamma, 0.0, 4.0 * kPi};
  spec.dims = {ra, ru, rg, ra, ru, rg};
  const double raw =
      num::tensor_quadrature(spec, [&](std::span<const double> p) {
        return f({{p[0], std::acos(p[1]), p[2]},
                  {p[3], std::acos(p[4]), p[5]}});
      });
  const double vol = 2.0 * kPi * 2.0 * 4.0 * kPi;
  return raw / (vol * vol);
}

namespace {

// Fills the (alpha, beta, gamma) block of g starting at `off`.
void so3_block(double a2, double beta, int off, num::Mat& g) {
  const double c = std::cos(beta);
  g(off + 0, off + 0) = a2;      // alpha
  g(off + 1, off + 1) = a2;      // beta
  g(off + 2, off + 2) = a2;      // gamma
  g(off + 0, off + 2) = a2 * c;  // alpha-gamma coupling
  g(off + 2, off + 0) = a2 * c;
}

geom::CoordRange alpha_range() { return {0.0, 2.0 * kPi, true}; }
geom::CoordRange beta_range() { return {0.0, kPi, false}; }
geom::CoordRange gamma_range() { return {0.0, 4.0 * kPi, true}; }
geom::CoordRange space_range() { return {-50.0, 50.0, false}; }

}  // namespace

geom::MetricChart so3_chart(GyrationScale s) {
  const double a2 = s.a * s.a;
  geom::MetricChart c(
      "so3", {alpha_range(), beta_range(), gamma_range()},
      [a2](std::span<const double> q, num::Mat& g) {
        g = num::Mat(3);
        so3_block(a2, q[1], 0, g);
      });
  c.polar_axes = {1};
  return c;
}

geom::MetricChart v6_chart(GyrationScale s) {
  const double a2 = s.a * s.a;
  geom::MetricChart c(
      "v6",
      {space_range(), space_range(), space_range(), alpha_range(),
       beta_range(), gamma_range()},
      [a2](std::span<const double> q, num::Mat& g) {
        g = num::Mat(6);
        for (int i = 0; i < 3; ++i) g(i, i) = 1.0;
        so3_block(a2, q[4], 3, g);
      });
  c.spatial_axes = {0, 1, 2};
  c.polar_axes = {4};
  return c;
}

geom::MetricChart v12_chart(GyrationScale s) {
  const double a2 = s.a * s.a;
  std::vector<geom::CoordRange> ranges;
  for (int p = 0; p < 2; ++p) {
    for (int i = 0; i < 3; ++i) ranges.push_back(space_range());
    ranges.push_back(alpha_range());
    ranges.push_back(beta_range());
    ranges.push_back(gamma_range());
  }
  geom::MetricChart c("v12", std::move(ranges),
                      [a2](std::span<const double> q, num::Mat& g) {
                        g = num::Mat(12);
                        for (int i = 0; i < 3; ++i) g(i, i) = 1.0;
                        so3_block(a2, q[4], 3, g);
                        for (int i = 6; i < 9; ++i) g(i, i) = 1.0;
                        so3_block(a2, q[10], 9, g);
                      });
  c.spatial_axes = {0, 1, 2, 6, 7, 8};
  c.polar_axes = {4, 10};
  return c;
}

SpatialFn plane_wave(std::array<double, 3> k) {
  return [k](std::span<const double> r, double) {
    return std::polar(1.0, k[0] * r[0] + k[1] * r[1] + k[2] * r[2]);
  };
}

SpatialFn unit_envelope() {
  return [](std::span<const double>, double) { return Complex(1.0, 0.0); };
}

Complex psi_single(const EulerTriple& z, const SpinorEnvelope& env,
                   std::span<const double> r, double t) {
  Complex v = 0.0;
  if (env.up) v += env.up(r, t) * d_up(z);
  if (env.down) v += env.down(r, t) * d_down(z);
  return v;
}

Complex psi_product(const TwoParticleAngles& z, const PairEnvelopes& env,
                    std::span<const double> r_a, std::span<const double> r_b,
                    double t) {
  return (d_up(z.a) * d_down(z.b)) * (env.up(r_a, t) * env.down(r_b, t));
}

Complex psi_singlet(const TwoParticleAngles& z, const PairEnvelopes& env,
                    std::span<const double> r_a, std::span<const double> r_b,
                    double t) {
  // Keep both terms in the exact grouping of psi_product: exchanging
  // (z_a, r_a) <-> (z_b, r_b) then swaps the factors inside each complex
  // product, which IEEE multiplication and addition commute bit-exactly,
  // so psi picks up exactly -1.
  const Complex updown =
      (d_up(z.a) * d_down(z.b)) * (env.up(r_a, t) * env.down(r_b, t));
  const Complex downup =
      (d_down(z.a) * d_up(z.b)) * (env.down(r_a, t) * env.up(r_b, t));
  return (updown - downup) * std::numbers::sqrt2 * 0.5;
}

double action_spin_up(const EulerTriple& z, double envelope_phase,
                      double hbar) {
  if (std::abs(std::cos(0.5 * z.beta)) <= 1e-12)
    fail(ErrorKind::NodeError,
         "action_spin_up: state vanishes at beta = pi");
  return hbar * 0.5 * (z.gamma + z.alpha) + envelope_phase;
}

double curvature_spin_up(double beta, double a) {
  if (!(a > 0.0))
    fail(ErrorKind::ValidationError, "curvature_spin_up: scale must be > 0");
  const double den = 1.0 + std::cos(beta);
  if (den <= 1e-12)
    fail(ErrorKind::PoleError,
         "curvature_spin_up: pole at beta = pi");
  return -5.0 / (2.0 * a * a * den);
}

double singlet_denominator(const TwoParticleAngles& z) {
  return 1.0 - std::cos(z.a.beta) * std::cos(z.b.beta) -
         std::cos(z.a.alpha - z.b.alpha) * std::sin(z.a.beta) *
             std::sin(z.b.beta);
}

double curvature_singlet(const TwoParticleAngles& z, double a,
                         double pole_tol) {
  if (!(a > 0.0))
    fail(ErrorKind::ValidationError, "curvature_singlet: scale must be > 0");
  const double d = singlet_denominator(z);
  if (d <= pole_tol)
    fail(ErrorKind::PoleError,
         "curvature_singlet: configuration at or too near the density node");
  return 22.0 / (5.0 * a * a * d);
}

namespace {

// Cartesian components of the singlet's orientational phase factor.
void singlet_phasor(const TwoParticleAngles& z, double& x, double& y) {
  const double dp = 0.5 * (z.a.alpha - z.b.alpha);
  x = -std::cos(dp) * std::sin(0.5 * (z.a.beta - z.b.beta));
  y = std::sin(dp) * std::sin(0.5 * (z.a.beta + z.b.beta));
}

}  // namespace

double action_singlet(const TwoParticleAngles& z, double hbar) {
  double x, y;
  singlet_phasor(z, x, y);
  if (x * x + y * y <= 1e-24)
    fail(ErrorKind::NodeError, "action_singlet: phase undefined at the node");
  return hbar * (0.5 * (z.a.gamma + z.b.gamma) + std::atan2(y, x));
}

double action_singlet_principal(const TwoParticleAngles& z, double hbar) {
  double x, y;
  singlet_phasor(z, x, y);
  if (x * x + y * y <= 1e-24)
    fail(ErrorKind::NodeError,
         "action_singlet_principal: phase undefined at the node");
  return hbar * (0.5 * (z.a.gamma + z.b.gamma) + std::atan(y / x));
}

fields::WaveField spin_up_wavefield(GyrationScale s, SpatialFn envelope) {
  auto chart = std::make_shared<geom::MetricChart>(v6_chart(s));
  SpinorEnvelope env{std::move(envelope), nullptr};
  return fields::WaveField(
      chart, [env](std::span<const double> q, double t) {
        return psi_single({q[3], q[4], q[5]}, env, q.first(3), t);
      });
}

fields::WaveField product_wavefield(GyrationScale s, PairEnvelopes env) {
  auto chart = std::make_shared<geom::MetricChart>(v12_chart(s));
  return fields::WaveField(
      chart, [env](std::span<const double> q, double t) {
        return psi_product({{q[3], q[4], q[5]}, {q[9], q[10], q[11]}}, env,
                           q.subspan(0, 3), q.subspan(6, 3), t);
      });
}

fields::WaveField singlet_wavefield(GyrationScale s, PairEnvelopes env) {
  auto chart = std::make_shared<geom::MetricChart>(v12_chart(s));
  return fields::WaveField(
      chart, [env](std::span<const double> q, double t) {
        return psi_singlet({{q[3], q[4], q[5]}, {q[9], q[10], q[11]}}, env,
                           q.subspan(0, 3), q.subspan(6, 3), t);
      });
}

}  // namespace cqg::spin
