#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "cqg/error.hpp"
#include "cqg/fields/wave.hpp"
#include "cqg/numerics/philox.hpp"
#include "cqg/spin/states.hpp"

using namespace cqg;
using spin::Complex;
using spin::EulerTriple;
using spin::TwoParticleAngles;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<EulerTriple> random_triples(int count, std::uint64_t seed) {
  num::RandomStream s{seed, 0, 0};
  std::vector<EulerTriple> out;
  for (int i = 0; i < count; ++i) {
    std::array<double, 3> u{};
    num::random_uniform(s, u);
    out.push_back({2.0 * kPi * u[0], kPi * u[1], 4.0 * kPi * u[2]});
  }
  return out;
}

}  // namespace

TEST_CASE("orientation amplitudes: closed-form values") {
  CHECK(spin::d_up({0.0, 0.0, 0.0}) == Complex(1.0, 0.0));
  CHECK(spin::d_down({0.0, 0.0, 0.0}) == Complex(0.0, 0.0));
  // beta = pi: all weight on the down component
  CHECK(std::abs(spin::d_up({0.3, kPi, 1.0})) < 1e-15);
  CHECK(std::abs(spin::d_down({0.0, kPi, 0.0}) - Complex(1.0, 0.0)) < 1e-15);
  // general point against the explicit formula
  const EulerTriple z{1.1, 0.8, 5.0};
  const Complex up = std::cos(0.4) * std::exp(Complex(0, 0.5 * (5.0 + 1.1)));
  const Complex dn = std::sin(0.4) * std::exp(Complex(0, 0.5 * (5.0 - 1.1)));
  CHECK(std::abs(spin::d_up(z) - up) < 1e-15);
  CHECK(std::abs(spin::d_down(z) - dn) < 1e-15);
}

TEST_CASE("orientation amplitudes: unit norm and double cover") {
  for (const auto& z : random_triples(1000, 3)) {
    const double n = std::norm(spin::d_up(z)) + std::norm(spin::d_down(z));
    CHECK(std::abs(n - 1.0) < 1e-15);
    // gamma -> gamma + 2pi flips the sign of both components
    const EulerTriple zs{z.alpha, z.beta, z.gamma + 2.0 * kPi};
    CHECK(std::abs(spin::d_up(zs) + spin::d_up(z)) < 1e-14);
    CHECK(std::abs(spin::d_down(zs) + spin::d_down(z)) < 1e-14);
  }
}

TEST_CASE("canonical ranges") {
  CHECK(spin::in_canonical_ranges({1.0, 1.0, 1.0}));
  CHECK(spin::in_canonical_ranges({0.0, kPi, 0.0}));
  CHECK_FALSE(spin::in_canonical_ranges({2.0 * kPi, 1.0, 1.0}));
  CHECK_FALSE(spin::in_canonical_ranges({1.0, kPi + 0.1, 1.0}));
  CHECK_FALSE(spin::in_canonical_ranges({1.0, 1.0, 4.0 * kPi}));
  CHECK_FALSE(spin::in_canonical_ranges({-0.1, 1.0, 1.0}));
}

TEST_CASE("haar integration: weight, volume, component halves") {
  CHECK(spin::haar_weight({0.0, kPi / 2, 0.0}) == 1.0);
  CHECK(spin::haar_normalization() ==
        doctest::Approx(16.0 * kPi * kPi).epsilon(1e-15));
  CHECK(spin::integrate_haar([](const EulerTriple&) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-13));
  // |d_up|^2 = (1 + cos beta)/2, polynomial in u = cos beta: exact
  CHECK(spin::integrate_haar([](const EulerTriple& z) {
          return std::norm(spin::d_up(z));
        }) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(spin::integrate_haar([](const EulerTriple& z) {
          return std::norm(spin::d_down(z));
        }) == doctest::Approx(0.5).epsilon(1e-13));
  // cross term killed by the alpha average
  CHECK(std::abs(spin::integrate_haar([](const EulerTriple& z) {
          return (spin::d_up(z) * std::conj(spin::d_down(z))).real();
        })) < 1e-14);
}

TEST_CASE("two-particle haar norms") {
  const spin::PairEnvelopes unit{spin::unit_envelope(), spin::unit_envelope()};
  const double r[3] = {0.0, 0.0, 0.0};
  const auto norm_product = spin::integrate_haar2([&](const TwoParticleAngles& z) {
    return std::norm(spin::psi_product(z, unit, {r, 3}, {r, 3}));
  });
  CHECK(norm_product == doctest::Approx(0.25).epsilon(1e-12));
  const auto norm_singlet = spin::integrate_haar2([&](const TwoParticleAngles& z) {
    return std::norm(spin::psi_singlet(z, unit, {r, 3}, {r, 3}));
  });
  CHECK(norm_singlet == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("singlet density: equals the node factor over four") {
  const spin::PairEnvelopes unit{spin::unit_envelope(), spin::unit_envelope()};
  const double r[3] = {0.0, 0.0, 0.0};
  const auto za = random_triples(40, 7);
  const auto zb = random_triples(40, 8);
  for (int i = 0; i < 40; ++i) {
    const TwoParticleAngles z{za[i], zb[i]};
    const double d = spin::singlet_denominator(z);
    const double rho = std::norm(spin::psi_singlet(z, unit, {r, 3}, {r, 3}));
    CHECK(std::abs(rho - 0.25 * d) < 1e-14);
  }
}

TEST_CASE("singlet: exchange antisymmetry is bit-exact") {
  const spin::PairEnvelopes env{spin::plane_wave({0.3, -0.7, 1.1}),
                                spin::plane_wave({-0.2, 0.5, 0.9})};
  const auto za = random_triples(50, 9);
  const auto zb = random_triples(50, 10);
  num::RandomStream s{11, 0, 0};
  for (int i = 0; i < 50; ++i) {
    std::array<double, 6> u{};
    num::random_uniform(s, u);
    const double ra[3] = {u[0], u[1], u[2]};
    const double rb[3] = {u[3], u[4], u[5]};
    const Complex direct =
        spin::psi_singlet({za[i], zb[i]}, env, {ra, 3}, {rb, 3});
    const Complex swapped =
        spin::psi_singlet({zb[i], za[i]}, env, {rb, 3}, {ra, 3});
    CHECK(swapped.real() == -direct.real());
    CHECK(swapped.imag() == -direct.imag());
  }
}

TEST_CASE("singlet: exact zero at coincident orientations") {
  const spin::PairEnvelopes shared{spin::plane_wave({0.4, 0.2, -0.9}),
                                   spin::plane_wave({0.4, 0.2, -0.9})};
  const double ra[3] = {1.0, 2.0, 3.0};
  const double rb[3] = {-1.0, 0.5, 0.2};
  for (const auto& z : random_triples(20, 12)) {
    const Complex v = spin::psi_singlet({z, z}, shared, {ra, 3}, {rb, 3});
    CHECK(v.real() == 0.0);
    CHECK(v.imag() == 0.0);
  }
  // gammas decouple from the node: amplitudes cancel to rounding even when
  // the gamma angles differ
  const EulerTriple z1{1.0, 1.2, 2.0};
  const EulerTriple z2{1.0, 1.2, 9.0};
  const spin::PairEnvelopes unit{spin::unit_envelope(), spin::unit_envelope()};
  CHECK(std::abs(spin::psi_singlet({z1, z2}, unit, {ra, 3}, {rb, 3})) < 1e-15);
}

TEST_CASE("spin-up action: closed form and node") {
  const EulerTriple z{1.2, 0.7, 3.0};
  CHECK(spin::action_spin_up(z) == doctest::Approx(0.5 * (3.0 + 1.2)));
  CHECK(spin::action_spin_up(z, 0.25) ==
        doctest::Approx(0.5 * (3.0 + 1.2) + 0.25));
  CHECK(spin::action_spin_up(z, 0.0, 2.0) == doctest::Approx(3.0 + 1.2));
  try {
    spin::action_spin_up({0.0, kPi, 0.0});
    FAIL("expected NodeError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NodeError);
  }
}

TEST_CASE("spin-up curvature: closed form, pole, validation") {
  CHECK(spin::curvature_spin_up(kPi / 2, 1.0) ==
        doctest::Approx(-2.5).epsilon(1e-12));
  CHECK(spin::curvature_spin_up(0.0, 1.0) == doctest::Approx(-1.25));
  CHECK(spin::curvature_spin_up(kPi / 2, 2.0) ==
        doctest::Approx(-0.625).epsilon(1e-12));
  try {
    spin::curvature_spin_up(kPi, 1.0);
    FAIL("expected PoleError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PoleError);
  }
  try {
    spin::curvature_spin_up(1.0, 0.0);
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
  }
}

TEST_CASE("singlet curvature: closed form and pole at the node") {
  // anti-aligned: D = 2, R = 22/(5 a^2 2) = 2.2 at a = 1
  const TwoParticleAngles anti{{0.0, 0.0, 0.0}, {0.0, kPi, 0.0}};
  CHECK(spin::singlet_denominator(anti) == doctest::Approx(2.0));
  CHECK(spin::curvature_singlet(anti, 1.0) == doctest::Approx(2.2));
  CHECK(spin::curvature_singlet(anti, 2.0) == doctest::Approx(0.55));
  const auto za = random_triples(10, 13);
  const auto zb = random_triples(10, 14);
  for (int i = 0; i < 10; ++i) {
    const TwoParticleAngles z{za[i], zb[i]};
    const double d = spin::singlet_denominator(z);
    if (d < 1e-6) continue;
    CHECK(spin::curvature_singlet(z, 1.3) ==
          doctest::Approx(22.0 / (5.0 * 1.3 * 1.3 * d)).epsilon(1e-12));
  }
  const TwoParticleAngles node{{1.0, 1.2, 0.0}, {1.0, 1.2, 5.0}};
  try {
    spin::curvature_singlet(node, 1.0);
    FAIL("expected PoleError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PoleError);
  }
}

TEST_CASE("singlet action: phase agrees with arg(psi) as phasors") {
  const spin::PairEnvelopes unit{spin::unit_envelope(), spin::unit_envelope()};
  const double r[3] = {0.0, 0.0, 0.0};
  const auto za = random_triples(1000, 15);
  const auto zb = random_triples(1000, 16);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const TwoParticleAngles z{za[i], zb[i]};
    const Complex psi = spin::psi_singlet(z, unit, {r, 3}, {r, 3});
    if (std::abs(psi) < 1e-6) continue;  // too near the node for a phase
    const double s = spin::action_singlet(z);
    const Complex expected = std::polar(1.0, s);
    CHECK(std::abs(expected - psi / std::abs(psi)) < 1e-9);
    ++checked;
  }
  CHECK(checked > 900);
}

TEST_CASE("singlet action: principal branch differs by a multiple of pi") {
  const auto za = random_triples(200, 17);
  const auto zb = random_triples(200, 18);
  for (int i = 0; i < 200; ++i) {
    const TwoParticleAngles z{za[i], zb[i]};
    if (spin::singlet_denominator(z) < 1e-6) continue;
    const double s = spin::action_singlet(z);
    const double sp = spin::action_singlet_principal(z);
    CHECK(std::abs(std::remainder(s - sp, kPi)) < 1e-9);
  }
  const TwoParticleAngles node{{1.0, 1.2, 0.0}, {1.0, 1.2, 5.0}};
  try {
    spin::action_singlet(node);
    FAIL("expected NodeError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NodeError);
  }
}

TEST_CASE("envelopes") {
  const double r[3] = {1.0, -2.0, 0.5};
  const auto pw = spin::plane_wave({0.3, 0.1, -0.6});
  const double phase = 0.3 * 1.0 + 0.1 * (-2.0) + (-0.6) * 0.5;
  CHECK(std::abs(pw({r, 3}, 0.0) - std::polar(1.0, phase)) < 1e-15);
  CHECK(spin::unit_envelope()({r, 3}, 0.0) == Complex(1.0, 0.0));
}

TEST_CASE("assembled wavefields: charts and conformal weights") {
  auto up = spin::spin_up_wavefield({1.0}, spin::unit_envelope());
  CHECK(up.chart->dim() == 6);
  CHECK(up.chart->spatial_axes == std::vector<int>{0, 1, 2});
  CHECK(up.chart->polar_axes == std::vector<int>{4});
  CHECK(up.weight == doctest::Approx(geom::wavefunction_weight(6)));
  std::vector<double> q = {0.0, 0.0, 0.0, 1.1, 0.8, 5.0};
  CHECK(std::abs(up.psi_at(q, 0.0) - spin::d_up({1.1, 0.8, 5.0})) < 1e-15);

  auto singlet = spin::singlet_wavefield(
      {1.0}, {spin::unit_envelope(), spin::unit_envelope()});
  CHECK(singlet.chart->dim() == 12);
  CHECK(singlet.chart->spatial_axes == std::vector<int>{0, 1, 2, 6, 7, 8});
  CHECK(singlet.chart->polar_axes == std::vector<int>{4, 10});
  CHECK(singlet.weight == doctest::Approx(geom::wavefunction_weight(12)));
  // chart-level volume element of the rotational block: a^3 |sin beta| each
  const auto so3 = spin::so3_chart({1.5});
  std::vector<double> zq = {1.0, 0.9, 2.0};
  CHECK(so3.sqrt_det(zq) ==
        doctest::Approx(std::pow(1.5, 3) * std::sin(0.9)).epsilon(1e-12));
}
