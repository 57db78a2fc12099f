#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>

#include "cqg/fields/wave.hpp"
#include "cqg/spin/states.hpp"

using namespace cqg;
using fields::Complex;
using fields::WaveField;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<geom::MetricChart> flat3() {
  return std::make_shared<geom::MetricChart>(
      "flat3",
      std::vector<geom::CoordRange>{
          {-10.0, 10.0, false}, {-10.0, 10.0, false}, {-10.0, 10.0, false}},
      [](std::span<const double>, num::Mat& g) { g = num::Mat::identity(3); });
}

}  // namespace

TEST_CASE("xi: conformal coupling values") {
  CHECK(fields::xi(6) == doctest::Approx(std::sqrt(0.2)).epsilon(1e-15));
  CHECK(fields::xi(4) == doctest::Approx(std::sqrt(1.0 / 6.0)).epsilon(1e-15));
  CHECK(fields::xi(3) == doctest::Approx(std::sqrt(0.125)).epsilon(1e-15));
  CHECK(fields::xi(12) ==
        doctest::Approx(std::sqrt(10.0 / 44.0)).epsilon(1e-15));
  try {
    fields::xi(2);
    FAIL("expected UnsupportedDimension");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedDimension);
  }
}

TEST_CASE("decompose / compose: polar round trip") {
  WaveField w(flat3(), [](std::span<const double>, double) {
    return std::polar(0.8, 0.6);
  });
  CHECK(w.weight == doctest::Approx(geom::wavefunction_weight(3)));
  std::vector<double> q = {0.0, 0.0, 0.0};
  const auto p = fields::decompose(w, q);
  CHECK(p.rho == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(p.S == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(p.sigma == doctest::Approx(0.6 / fields::xi(3)).epsilon(1e-14));
  CHECK(std::abs(fields::compose(p.rho, p.S) - std::polar(0.8, 0.6)) < 1e-14);
  // hbar rescales S but not sigma
  const auto p2 = fields::decompose(w, q, 0.0, 1e-12, 2.0);
  CHECK(p2.S == doctest::Approx(1.2).epsilon(1e-14));
  CHECK(p2.sigma == doctest::Approx(p.sigma).epsilon(1e-14));

  WaveField zero(flat3(),
                 [](std::span<const double>, double) { return Complex(0.0); });
  try {
    fields::decompose(zero, q);
    FAIL("expected NodeError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NodeError);
  }
  try {
    fields::compose(-1.0, 0.0);
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
  }
}

TEST_CASE("decompose_along: unwraps the phase across branch cuts") {
  WaveField w(flat3(), [](std::span<const double> q, double) {
    return std::polar(1.0, q[0]);
  });
  std::vector<std::vector<double>> path;
  for (int i = 0; i <= 100; ++i) path.push_back({0.1 * i, 0.0, 0.0});
  const auto dec = fields::decompose_along(w, path);
  REQUIRE(dec.size() == 101);
  for (int i = 0; i <= 100; ++i)
    CHECK(dec[i].S == doctest::Approx(0.1 * i).epsilon(1e-12));
  // with hbar = 2 the action doubles, branch period 4 pi
  const auto dec2 = fields::decompose_along(w, path, 0.0, 1e-12, 2.0);
  CHECK(dec2.back().S == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("sigma_gradient: plane-wave spin-up closed form") {
  const std::array<double, 3> k = {0.3, -0.2, 0.4};
  auto w = spin::spin_up_wavefield({1.0}, spin::plane_wave(k));
  const double xin = fields::xi(6);
  std::vector<double> q = {0.2, 0.1, -0.3, 1.1, 0.9, 3.0};
  const auto g = fields::sigma_gradient(w, q);
  for (int i = 0; i < 3; ++i)
    CHECK(g[i] == doctest::Approx(k[i] / xin).epsilon(1e-10));
  CHECK(g[3] == doctest::Approx(0.5 / xin).epsilon(1e-10));  // alpha
  CHECK(std::abs(g[4]) < 1e-10);                             // beta
  CHECK(g[5] == doctest::Approx(0.5 / xin).epsilon(1e-10));  // gamma
}

TEST_CASE("velocity_field: metric inverse applied to the phase gradient") {
  const std::array<double, 3> k = {0.3, -0.2, 0.4};
  const double a = 1.3;
  auto w = spin::spin_up_wavefield({a}, spin::plane_wave(k));
  const double xin = fields::xi(6);
  std::vector<double> q = {0.0, 0.0, 0.0, 1.1, 0.9, 3.0};
  const auto v = fields::velocity_field(w, q);
  for (int i = 0; i < 3; ++i)
    CHECK(v[i] == doctest::Approx(k[i] / xin).epsilon(1e-9));
  const double want_ang = 1.0 / (2.0 * xin * a * a * (1.0 + std::cos(0.9)));
  CHECK(v[3] == doctest::Approx(want_ang).epsilon(1e-9));
  CHECK(std::abs(v[4]) < 1e-9);
  CHECK(v[5] == doctest::Approx(want_ang).epsilon(1e-9));

  // explicit-sigma overload on a flat chart: v = grad sigma
  auto chart = flat3();
  auto sigma = [](std::span<const double> p) {
    return 0.7 * p[0] - 0.1 * p[1];
  };
  std::vector<double> q3 = {1.0, 2.0, 3.0};
  const auto v3 = fields::velocity_field(*chart, sigma, q3);
  CHECK(v3[0] == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(v3[1] == doctest::Approx(-0.1).epsilon(1e-10));
  CHECK(std::abs(v3[2]) < 1e-10);
}

TEST_CASE("current_density: explicit fields and wavefunction agree") {
  auto chart = flat3();
  auto rho = [](std::span<const double>) { return 2.0; };
  auto sigma = [](std::span<const double> p) { return 3.0 * p[0]; };
  std::vector<double> q3 = {0.0, 0.0, 0.0};
  const auto j3 = fields::current_density(*chart, rho, sigma, q3);
  CHECK(j3[0] == doctest::Approx(6.0).epsilon(1e-10));
  CHECK(std::abs(j3[1]) < 1e-10);
  CHECK(std::abs(j3[2]) < 1e-10);

  // j^i = sqrt(g) rho v^i for the wavefunction route
  auto w = spin::spin_up_wavefield({1.0}, spin::plane_wave({0.3, -0.2, 0.4}));
  std::vector<double> q = {0.2, 0.1, -0.3, 1.1, 0.9, 3.0};
  const auto j = fields::current_density(w, q);
  const auto v = fields::velocity_field(w, q);
  const double sg = w.chart->sqrt_det(q);
  const double r0 = fields::decompose(w, q).rho;
  for (int i = 0; i < 6; ++i)
    CHECK(j[i] == doctest::Approx(sg * r0 * v[i]).epsilon(1e-8));
}

TEST_CASE("hje_residual: stationary plane-wave spin-up gives a constant") {
  // kinetic term + Weyl curvature = 5 k^2 + 21/(4 a^2), beta-independent.
  const std::array<double, 3> k = {0.3, -0.2, 0.4};
  const double k2 = 0.3 * 0.3 + 0.2 * 0.2 + 0.4 * 0.4;
  for (double a : {1.0, 2.0}) {
    auto w = spin::spin_up_wavefield({a}, spin::plane_wave(k));
    const double want = 5.0 * k2 + 21.0 / (4.0 * a * a);
    std::vector<double> q1 = {0.2, 0.1, -0.3, 1.1, 0.7, 3.0};
    std::vector<double> q2 = {-1.0, 0.5, 2.0, 4.0, 1.9, 9.0};
    std::vector<double> q3 = {0.0, 0.0, 0.0, 2.5, 2.6, 0.5};
    const double r1 = fields::hje_residual(w, q1);
    const double r2 = fields::hje_residual(w, q2);
    const double r3 = fields::hje_residual(w, q3);
    CHECK(r1 == doctest::Approx(want).epsilon(1e-5));
    CHECK(std::abs(r1 - r2) < 1e-4);
    CHECK(std::abs(r1 - r3) < 1e-4);
  }
}

TEST_CASE("continuity_residual: stationary states are divergence-free") {
  auto w = spin::spin_up_wavefield({1.0}, spin::plane_wave({0.3, -0.2, 0.4}));
  std::vector<double> q = {0.2, 0.1, -0.3, 1.1, 0.9, 3.0};
  CHECK(std::abs(fields::continuity_residual(w, q)) < 1e-7);

  // explicit fields on a flat chart: residual = d_x (rho d_x sigma)
  auto chart = flat3();
  auto rho = [](std::span<const double> p) {
    return 1.0 + 0.3 * std::sin(p[0]);
  };
  auto sigma = [](std::span<const double> p) { return p[0]; };
  std::vector<double> q3 = {0.7, 0.0, 0.0};
  const double res = fields::continuity_residual(*chart, rho, sigma, q3);
  CHECK(res == doctest::Approx(0.3 * std::cos(0.7)).epsilon(1e-8));
}

TEST_CASE("conformal_wave_residual: plane-wave spin-up is an eigenfunction") {
  // (Delta - xi^2 Rbar) psi = -(k^2 + 21/(20 a^2)) psi: the 3/(4a^2)
  // rotational Casimir plus xi^2 Rbar = 3/(10 a^2).
  const std::array<double, 3> k = {0.3, -0.2, 0.4};
  const double k2 = 0.29;
  const double a = 1.0;
  auto w = spin::spin_up_wavefield({a}, spin::plane_wave(k));
  const double want = -(k2 + 21.0 / (20.0 * a * a));
  std::vector<double> q1 = {0.2, 0.1, -0.3, 1.1, 0.9, 3.0};
  std::vector<double> q2 = {1.0, -0.5, 0.0, 4.0, 2.0, 8.0};
  for (const auto& q : {q1, q2}) {
    const Complex res = fields::conformal_wave_residual(w, q);
    const Complex psi = w.psi_at(q, 0.0);
    const Complex ratio = res / psi;
    CHECK(ratio.real() == doctest::Approx(want).epsilon(1e-6));
    CHECK(std::abs(ratio.imag()) < 1e-7);
  }
}

TEST_CASE("integrate_trajectory: straight line on a flat chart") {
  auto chart = flat3();
  auto vel = [](std::span<const double>) {
    return std::vector<double>{1.0, 0.5, 0.0};
  };
  std::vector<double> q0 = {0.0, 0.0, 0.0};
  const auto res = fields::integrate_trajectory(*chart, vel, q0, 10, 0.1);
  CHECK(res.status == fields::TrajectoryResult::Status::Completed);
  REQUIRE(res.points.size() == 11);
  CHECK(res.points.back()[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(res.points.back()[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(res.points.back()[2] == 0.0);
}

TEST_CASE("integrate_trajectory: domain exit reported, partial path kept") {
  auto chart = flat3();
  auto vel = [](std::span<const double>) {
    return std::vector<double>{1.0, 0.0, 0.0};
  };
  std::vector<double> q0 = {9.5, 0.0, 0.0};
  const auto res = fields::integrate_trajectory(*chart, vel, q0, 10, 0.1);
  CHECK(res.status == fields::TrajectoryResult::Status::LeftDomain);
  CHECK(res.points.size() == 6);  // start plus the steps that stayed inside
  CHECK(res.points.back()[0] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("integrate_trajectory: polar singularity halts integration") {
  const auto so3 = spin::so3_chart({1.0});
  auto vel = [](std::span<const double>) {
    return std::vector<double>{0.0, -1.0, 0.0};
  };
  std::vector<double> q0 = {1.0, 0.5, 2.0};
  const auto res = fields::integrate_trajectory(so3, vel, q0, 20, 0.05);
  CHECK(res.status ==
        fields::TrajectoryResult::Status::SingularityEncountered);
  CHECK(res.points.size() < 21);
  CHECK(res.points.back()[1] > 0.0);
}

TEST_CASE("integrate_trajectory: periodic coordinates wrap") {
  const auto so3 = spin::so3_chart({1.0});
  auto vel = [](std::span<const double>) {
    return std::vector<double>{1.0, 0.0, 0.0};
  };
  std::vector<double> q0 = {6.0, 1.0, 2.0};
  const auto res = fields::integrate_trajectory(so3, vel, q0, 5, 0.1);
  CHECK(res.status == fields::TrajectoryResult::Status::Completed);
  REQUIRE(res.points.size() == 6);
  for (const auto& p : res.points) {
    CHECK(p[0] >= 0.0);
    CHECK(p[0] < 2.0 * kPi);
  }
  CHECK(res.points.back()[0] ==
        doctest::Approx(6.5 - 2.0 * kPi).epsilon(1e-12));
  try {
    fields::integrate_trajectory(so3, vel, q0, 5, 0.0);
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
  }
}

TEST_CASE("detector_flux: closed form for the plane-wave spin-up state") {
  // j^x = a^3 sin(beta) cos^2(beta/2) k_x / xi; integrating over
  // (y, z) in [-1,1]^2, alpha, beta, gamma over their full ranges gives
  // 4 * 2pi * 4pi * a^3 * (k_x / xi) * 1.
  const std::array<double, 3> k = {0.3, -0.2, 0.4};
  const double a = 1.0;
  auto w = spin::spin_up_wavefield({a}, spin::plane_wave(k));
  auto current = [&w](std::span<const double> q) {
    return fields::current_density(w, q);
  };
  fields::SurfaceSpec surf;
  surf.normal_axis = 0;
  surf.offset = 0.0;
  surf.section = {
      {num::Rule1D::Kind::Legendre, 4, -1.0, 1.0},        // y
      {num::Rule1D::Kind::Legendre, 4, -1.0, 1.0},        // z
      {num::Rule1D::Kind::Periodic, 8, 0.0, 2.0 * kPi},   // alpha
      {num::Rule1D::Kind::Legendre, 16, 0.0, kPi},        // beta
      {num::Rule1D::Kind::Periodic, 8, 0.0, 4.0 * kPi},   // gamma
  };
  const double flux = fields::detector_flux(*w.chart, current, surf);
  const double want = 4.0 * 2.0 * kPi * 4.0 * kPi * a * a * a * k[0] /
                      fields::xi(6);
  CHECK(flux == doctest::Approx(want).epsilon(1e-8));

  // the state is x-independent, so the flux cannot depend on the offset
  surf.offset = 0.5;
  CHECK(fields::detector_flux(*w.chart, current, surf) ==
        doctest::Approx(flux).epsilon(1e-10));
}

TEST_CASE("detector_flux: surface validation") {
  auto w = spin::spin_up_wavefield({1.0}, spin::unit_envelope());
  auto current = [&w](std::span<const double> q) {
    return fields::current_density(w, q);
  };
  fields::SurfaceSpec surf;
  surf.normal_axis = 4;  // a polar angle, not a spatial axis
  surf.section = std::vector<num::Rule1D>(
      5, {num::Rule1D::Kind::Legendre, 4, -1.0, 1.0});
  try {
    fields::detector_flux(*w.chart, current, surf);
    FAIL("expected InvalidSurface");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidSurface);
  }
  surf.normal_axis = 0;
  surf.section.pop_back();
  try {
    fields::detector_flux(*w.chart, current, surf);
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
  }
}

TEST_CASE("wavefield construction: null chart rejected") {
  try {
    WaveField w(nullptr,
                [](std::span<const double>, double) { return Complex(1.0); });
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
  }
}
