// Command-line front end: quadrature fluxes, Bell/CHSH scans, no-signalling
// checks, curvature and field-equation residual instruments, gauge-weight
// measurements, and Monte-Carlo estimation.
//
// Exit codes: 0 success, 1 a requested verification failed, 2 usage or
// configuration error, 3 computation error. All output is byte-reproducible:
// no timestamps, no host information, fixed float formatting.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cqg/epr/measurement.hpp"
#include "cqg/fields/wave.hpp"
#include "cqg/geometry/weyl.hpp"
#include "cqg/kernels/weights.hpp"
#include "cqg/numerics/philox.hpp"
#include "cqg/spin/states.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace cqg;

constexpr double kPi = std::numbers::pi;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitComputeError = 3;

struct CliError {
  int code;
  std::string message;
};

double deg2rad(double d) { return d * kPi / 180.0; }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- config ---

json load_config(const std::string& path,
                 const std::vector<std::string>& allowed) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in)
    throw CliError{kExitUsage, "cannot open config file: " + path};
  json cfg;
  try {
    in >> cfg;
  } catch (const json::parse_error& e) {
    throw CliError{kExitUsage,
                   "config " + path + " is not valid JSON: " + e.what()};
  }
  if (!cfg.is_object())
    throw CliError{kExitUsage, "config " + path + ": top level must be an object"};
  for (const auto& [key, value] : cfg.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw CliError{kExitUsage,
                     "config " + path + ": unknown key \"" + key + "\""};
  }
  return cfg;
}

double cfg_num(const json& cfg, const std::string& key, double def) {
  if (!cfg.contains(key)) return def;
  if (!cfg[key].is_number())
    throw CliError{kExitUsage, "config key \"" + key + "\" must be a number"};
  return cfg[key].get<double>();
}

std::int64_t cfg_int(const json& cfg, const std::string& key,
                     std::int64_t def) {
  if (!cfg.contains(key)) return def;
  if (!cfg[key].is_number_integer())
    throw CliError{kExitUsage, "config key \"" + key + "\" must be an integer"};
  return cfg[key].get<std::int64_t>();
}

bool cfg_bool(const json& cfg, const std::string& key, bool def) {
  if (!cfg.contains(key)) return def;
  if (!cfg[key].is_boolean())
    throw CliError{kExitUsage, "config key \"" + key + "\" must be a boolean"};
  return cfg[key].get<bool>();
}

std::string cfg_str(const json& cfg, const std::string& key,
                    const std::string& def) {
  if (!cfg.contains(key)) return def;
  if (!cfg[key].is_string())
    throw CliError{kExitUsage, "config key \"" + key + "\" must be a string"};
  return cfg[key].get<std::string>();
}

epr::QuadSpec cfg_quad(const json& cfg) {
  epr::QuadSpec q;
  q.alpha = int(cfg_int(cfg, "quad_alpha", q.alpha));
  q.beta = int(cfg_int(cfg, "quad_beta", q.beta));
  q.gamma = int(cfg_int(cfg, "quad_gamma", q.gamma));
  return q;
}

// ---------------------------------------------------------------- output ---

struct OutputPaths {
  std::string csv = "-";   // "-" = stdout
  std::string json_path;   // empty = no JSON summary
};

void write_text(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{kExitUsage, "cannot open output file: " + path};
  out << content;
}

void emit(const OutputPaths& out, const std::string& csv, const json& summary) {
  write_text(out.csv, csv);
  if (!out.json_path.empty())
    write_text(out.json_path, summary.dump(2) + "\n");
}

// ------------------------------------------------------------ subcommands ---

int run_fluxes(const json& cfg, const OutputPaths& out) {
  const auto quad = cfg_quad(cfg);
  const bool grid = cfg_bool(cfg, "grid", false);
  const bool direct = cfg_bool(cfg, "direct", false);
  const double tol = cfg_num(cfg, "check_tolerance", 1e-8);

  std::vector<std::pair<double, double>> cells;  // degrees
  if (grid) {
    const double start = cfg_num(cfg, "grid_start_deg", 0.0);
    const double stop = cfg_num(cfg, "grid_stop_deg", 180.0);
    const std::int64_t count = cfg_int(cfg, "grid_count", 19);
    if (count < 2)
      throw CliError{kExitUsage, "grid_count must be at least 2"};
    const double step = (stop - start) / double(count - 1);
    for (std::int64_t i = 0; i < count; ++i)
      for (std::int64_t j = 0; j < count; ++j)
        cells.emplace_back(start + step * double(i),
                           start + step * double(j));
  } else {
    cells.emplace_back(cfg_num(cfg, "theta_a_deg", 0.0),
                       cfg_num(cfg, "theta_b_deg", 90.0));
  }

  std::string csv =
      "theta_a_deg,theta_b_deg,phi_uu,phi_ud,phi_du,phi_dd,raw_total,"
      "correlation,closed_correlation,abs_err\n";
  double max_err = 0.0;
  for (const auto& [ta_deg, tb_deg] : cells) {
    const double ta = deg2rad(ta_deg), tb = deg2rad(tb_deg);
    const epr::FluxTable t = direct
                                 ? epr::coincidence_fluxes_direct(ta, tb, quad)
                                 : epr::coincidence_fluxes(ta, tb, quad);
    const double corr = epr::correlation(t);
    const double closed = -std::cos(tb - ta);
    const double err = std::abs(corr - closed);
    max_err = std::max(max_err, err);
    csv += fmt(ta_deg) + "," + fmt(tb_deg) + "," + fmt(t.uu) + "," +
           fmt(t.ud) + "," + fmt(t.du) + "," + fmt(t.dd) + "," +
           fmt(t.raw_total) + "," + fmt(corr) + "," + fmt(closed) + "," +
           fmt(err) + "\n";
  }

  const bool pass = max_err <= tol;
  json summary = {{"schema_version", 1},
                  {"command", "fluxes"},
                  {"cells", cells.size()},
                  {"direct_quadrature", direct},
                  {"max_abs_err", max_err},
                  {"check_tolerance", tol},
                  {"pass", pass}};
  emit(out, csv, summary);
  return pass ? 0 : kExitCheckFailed;
}

int run_bell(const json& cfg, const OutputPaths& out) {
  const auto quad = cfg_quad(cfg);
  const double start = cfg_num(cfg, "start_deg", 5.0);
  const double stop = cfg_num(cfg, "stop_deg", 40.0);
  const double step = cfg_num(cfg, "step_deg", 5.0);
  const double tol = cfg_num(cfg, "check_tolerance", 1e-9);
  if (!(step > 0.0)) throw CliError{kExitUsage, "step_deg must be positive"};

  std::vector<double> deltas;
  for (double d = start; d <= stop + 1e-9; d += step)
    deltas.push_back(deg2rad(d));
  const auto rows = epr::bell_scan(deltas, quad);

  std::string csv = "delta_deg,f_value,e_2delta,violated,closed_f,abs_err\n";
  double max_err = 0.0, max_f = 0.0, max_f_delta = 0.0;
  bool all_violated = true;
  for (const auto& r : rows) {
    const double closed =
        std::abs(1.0 + 2.0 * std::cos(2.0 * r.delta) - std::cos(4.0 * r.delta));
    const double err = std::abs(r.f_value - closed);
    max_err = std::max(max_err, err);
    if (r.f_value > max_f) {
      max_f = r.f_value;
      max_f_delta = r.delta * 180.0 / kPi;
    }
    all_violated = all_violated && r.violated;
    csv += fmt(r.delta * 180.0 / kPi) + "," + fmt(r.f_value) + "," +
           fmt(r.correlation_2delta) + "," + (r.violated ? "1" : "0") + "," +
           fmt(closed) + "," + fmt(err) + "\n";
  }

  const bool pass = max_err <= tol && all_violated;
  json summary = {{"schema_version", 1},
                  {"command", "bell-scan"},
                  {"rows", rows.size()},
                  {"max_f", max_f},
                  {"max_f_delta_deg", max_f_delta},
                  {"all_violated", all_violated},
                  {"max_abs_err", max_err},
                  {"check_tolerance", tol},
                  {"pass", pass}};
  emit(out, csv, summary);
  return pass ? 0 : kExitCheckFailed;
}

int run_chsh(const json& cfg, const OutputPaths& out) {
  const auto quad = cfg_quad(cfg);
  const double a = cfg_num(cfg, "a_deg", 0.0);
  const double ap = cfg_num(cfg, "ap_deg", 90.0);
  const double b = cfg_num(cfg, "b_deg", 45.0);
  const double bp = cfg_num(cfg, "bp_deg", 135.0);
  const double tol = cfg_num(cfg, "check_tolerance", 1e-9);

  const std::array<double, 4> s = {deg2rad(a), deg2rad(ap), deg2rad(b),
                                   deg2rad(bp)};
  const double value = epr::chsh(s, quad);
  const double closed = -std::cos(s[2] - s[0]) + std::cos(s[3] - s[0]) -
                        std::cos(s[2] - s[1]) - std::cos(s[3] - s[1]);
  const double err = std::abs(value - closed);

  std::string csv = "a_deg,ap_deg,b_deg,bp_deg,s_value,closed_s,abs_err\n";
  csv += fmt(a) + "," + fmt(ap) + "," + fmt(b) + "," + fmt(bp) + "," +
         fmt(value) + "," + fmt(closed) + "," + fmt(err) + "\n";

  const bool pass = err <= tol;
  json summary = {{"schema_version", 1}, {"command", "chsh"},
                  {"s_value", value},   {"closed_s", closed},
                  {"abs_err", err},     {"check_tolerance", tol},
                  {"pass", pass}};
  emit(out, csv, summary);
  return pass ? 0 : kExitCheckFailed;
}

int run_nosignal(const json& cfg, const OutputPaths& out) {
  const auto quad = cfg_quad(cfg);
  const double ta = deg2rad(cfg_num(cfg, "theta_a_deg", 0.0));
  const double tb = deg2rad(cfg_num(cfg, "theta_b_deg", 60.0));
  const double ta_alt = deg2rad(cfg_num(cfg, "theta_a_alt_deg", 120.0));
  const double tb_alt = deg2rad(cfg_num(cfg, "theta_b_alt_deg", 150.0));
  const std::int64_t n_orient = cfg_int(cfg, "orientations", 16);
  const std::uint64_t seed = std::uint64_t(cfg_int(cfg, "seed", 2024));
  const double shift_tol = cfg_num(cfg, "shift_tolerance", 1e-8);
  const double prop_tol = cfg_num(cfg, "proportionality_tolerance", 1e-8);
  const double total_tol = cfg_num(cfg, "side_total_tolerance", 1e-10);
  if (n_orient < 1) throw CliError{kExitUsage, "orientations must be >= 1"};

  num::RandomStream stream{seed, 0, 0};
  std::string csv =
      "side,alpha,beta,gamma,raw_up,raw_down,remote_shift,"
      "proportionality_residual\n";
  double max_shift = 0.0, max_prop = 0.0;
  for (std::int64_t i = 0; i < n_orient; ++i) {
    std::array<double, 3> u{};
    num::random_uniform(stream, u);
    const spin::EulerTriple z{2.0 * kPi * u[0], std::acos(1.0 - 2.0 * u[1]),
                              4.0 * kPi * u[2]};
    for (int side = 0; side < 2; ++side) {
      const epr::Side s = side == 0 ? epr::Side::A : epr::Side::B;
      const auto m_ref = epr::marginal_densities(s, z, ta, tb, quad);
      const auto m_alt = side == 0
                             ? epr::marginal_densities(s, z, ta, tb_alt, quad)
                             : epr::marginal_densities(s, z, ta_alt, tb, quad);
      const double shift =
          std::max(std::abs(m_ref.raw[0] - m_alt.raw[0]),
                   std::abs(m_ref.raw[1] - m_alt.raw[1]));
      max_shift = std::max(max_shift, shift);
      max_prop = std::max(max_prop, m_ref.proportionality_residual);
      csv += std::string(side == 0 ? "A" : "B") + "," + fmt(z.alpha) + "," +
             fmt(z.beta) + "," + fmt(z.gamma) + "," + fmt(m_ref.raw[0]) + "," +
             fmt(m_ref.raw[1]) + "," + fmt(shift) + "," +
             fmt(m_ref.proportionality_residual) + "\n";
    }
  }

  // Haar-averaged renormalized up-channel fraction per side: 1/2 each.
  const auto side_total = [&](epr::Side s) {
    return spin::integrate_haar(
        [&](const spin::EulerTriple& z) {
          return epr::marginal_densities(s, z, ta, tb, quad).normalized[0];
        },
        quad.alpha, quad.beta, quad.gamma);
  };
  const double total_a = side_total(epr::Side::A);
  const double total_b = side_total(epr::Side::B);
  const double total_dev =
      std::max(std::abs(total_a - 0.5), std::abs(total_b - 0.5));

  const bool pass =
      max_shift <= shift_tol && max_prop <= prop_tol && total_dev <= total_tol;
  json summary = {{"schema_version", 1},
                  {"command", "nosignal"},
                  {"orientations", n_orient},
                  {"max_remote_shift", max_shift},
                  {"shift_tolerance", shift_tol},
                  {"max_proportionality_residual", max_prop},
                  {"proportionality_tolerance", prop_tol},
                  {"side_mean_up_a", total_a},
                  {"side_mean_up_b", total_b},
                  {"side_total_tolerance", total_tol},
                  {"pass", pass}};
  emit(out, csv, summary);
  return pass ? 0 : kExitCheckFailed;
}

int run_curvature(const json& cfg, const OutputPaths& out) {
  const std::string state = cfg_str(cfg, "state", "spin-up");
  const double a = cfg_num(cfg, "scale_a", 1.0);
  const std::int64_t pairs = cfg_int(cfg, "pairs", 10);
  const std::uint64_t seed = std::uint64_t(cfg_int(cfg, "seed", 31));
  const double tol = cfg_num(cfg, "check_tolerance",
                             state == "spin-up" ? 1e-5 : 1e-4);
  const double factor_tol = cfg_num(cfg, "factor_tolerance", 0.05);
  if (!(a > 0.0)) throw CliError{kExitUsage, "scale_a must be positive"};
  if (pairs < 2) throw CliError{kExitUsage, "pairs must be >= 2"};
  if (state != "spin-up" && state != "singlet")
    throw CliError{kExitUsage, "state must be \"spin-up\" or \"singlet\""};

  num::RandomStream stream{seed, 0, 0};
  std::vector<double> fd_diffs, closed_diffs;
  std::string csv;

  if (state == "spin-up") {
    auto field = spin::spin_up_wavefield({a}, spin::unit_envelope());
    geom::DensityField rho;
    rho.rho_at = [psi = field.psi_at](std::span<const double> q) {
      return std::norm(psi(q, 0.0));
    };
    rho.weight = geom::density_weight(6);
    const auto& chart = *field.chart;
    csv = "beta_1,beta_2,fd_diff,closed_diff\n";
    for (std::int64_t i = 0; i < pairs; ++i) {
      std::array<double, 2> u{};
      num::random_uniform(stream, u);
      const double b1 = 0.4 + 2.2 * u[0];
      const double b2 = 0.4 + 2.2 * u[1];
      std::vector<double> q1 = {0.0, 0.0, 0.0, 1.0, b1, 2.0};
      std::vector<double> q2 = {0.0, 0.0, 0.0, 1.0, b2, 2.0};
      const double fd =
          geom::weyl_scalar(chart, rho, q1) - geom::weyl_scalar(chart, rho, q2);
      const double closed =
          spin::curvature_spin_up(b1, a) - spin::curvature_spin_up(b2, a);
      fd_diffs.push_back(fd);
      closed_diffs.push_back(closed);
      csv += fmt(b1) + "," + fmt(b2) + "," + fmt(fd) + "," + fmt(closed) + "\n";
    }
  } else {
    auto field = spin::singlet_wavefield(
        {a}, {spin::unit_envelope(), spin::unit_envelope()});
    geom::DensityField rho;
    rho.rho_at = [psi = field.psi_at](std::span<const double> q) {
      return std::norm(psi(q, 0.0));
    };
    rho.weight = geom::density_weight(12);
    const auto& chart = *field.chart;
    auto draw_config = [&]() {
      while (true) {
        std::array<double, 4> u{};
        num::random_uniform(stream, u);
        const spin::TwoParticleAngles z{
            {2.0 * kPi * u[0], 0.4 + 2.2 * u[1], 2.0},
            {2.0 * kPi * u[2], 0.4 + 2.2 * u[3], 5.0}};
        if (spin::singlet_denominator(z) > 0.3) return z;
      }
    };
    auto point = [](const spin::TwoParticleAngles& z) {
      return std::vector<double>{0.0,       0.0,      0.0,       z.a.alpha,
                                 z.a.beta,  z.a.gamma, 0.0,      0.0,
                                 0.0,       z.b.alpha, z.b.beta, z.b.gamma};
    };
    csv = "d_1,d_2,fd_diff,closed_diff\n";
    for (std::int64_t i = 0; i < pairs; ++i) {
      const auto z1 = draw_config();
      const auto z2 = draw_config();
      const double fd =
          geom::weyl_scalar(chart, rho, point(z1)) -
          geom::weyl_scalar(chart, rho, point(z2));
      const double closed =
          spin::curvature_singlet(z1, a) - spin::curvature_singlet(z2, a);
      fd_diffs.push_back(fd);
      closed_diffs.push_back(closed);
      csv += fmt(spin::singlet_denominator(z1)) + "," +
             fmt(spin::singlet_denominator(z2)) + "," + fmt(fd) + "," +
             fmt(closed) + "\n";
    }
  }

  // Least-squares scale between measured and closed-form differences.
  double num = 0.0, den = 0.0, max_direct = 0.0;
  for (size_t i = 0; i < fd_diffs.size(); ++i) {
    num += fd_diffs[i] * closed_diffs[i];
    den += closed_diffs[i] * closed_diffs[i];
    max_direct = std::max(max_direct, std::abs(fd_diffs[i] - closed_diffs[i]));
  }
  if (!(den > 0.0))
    throw CliError{kExitUsage,
                   "curvature: degenerate sample (no closed-form variation)"};
  const double factor = num / den;
  double max_fit_residual = 0.0;
  for (size_t i = 0; i < fd_diffs.size(); ++i)
    max_fit_residual = std::max(
        max_fit_residual, std::abs(fd_diffs[i] - factor * closed_diffs[i]));

  const bool direct_ok = max_direct <= tol;
  const bool fitted_ok =
      std::abs(std::abs(factor) - 1.0) <= factor_tol && max_fit_residual <= tol;
  const bool pass = direct_ok || fitted_ok;
  json summary = {{"schema_version", 1},
                  {"command", "curvature"},
                  {"state", state},
                  {"scale_a", a},
                  {"pairs", pairs},
                  {"fitted_factor", factor},
                  {"max_direct_err", max_direct},
                  {"max_fit_residual", max_fit_residual},
                  {"check_tolerance", tol},
                  {"factor_tolerance", factor_tol},
                  {"direct_match", direct_ok},
                  {"pass", pass}};
  emit(out, csv, summary);
  return pass ? 0 : kExitCheckFailed;
}

int run_gauge(const json& cfg, const OutputPaths& out) {
  const std::int64_t trials = cfg_int(cfg, "trials", 10);
  const std::uint64_t seed = std::uint64_t(cfg_int(cfg, "seed", 5));
  const double tol = cfg_num(cfg, "tolerance", 1e-6);
  const double a = cfg_num(cfg, "scale_a", 1.0);
  if (trials < 1) throw CliError{kExitUsage, "trials must be >= 1"};

  const geom::MetricChart chart = spin::v6_chart({a});
  const int n = 6;

  // Smooth strictly positive density and a matching phase field.
  auto rho_fn = [](std::span<const double> q) {
    return std::exp(0.2 * std::sin(0.3 * q[0]) + 0.15 * std::cos(q[4]) +
                    0.1 * std::sin(q[3] + 0.2) + 0.08 * std::sin(0.5 * q[5]));
  };
  auto sigma_fn = [](std::span<const double> q) {
    return 0.1 * q[0] + 0.05 * std::sin(q[3]);
  };

  geom::GaugeBundle base;
  base.chart = chart;
  base.rho = {rho_fn, geom::density_weight(n), 1e-12};
  base.psi = [rho_fn, sigma_fn](std::span<const double> q, double) {
    return std::polar(std::sqrt(rho_fn(q)), sigma_fn(q));
  };
  base.psi_weight = geom::wavefunction_weight(n);
  base.frame = geom::frame_from_density(base.rho, n);

  const std::vector<double> q = {0.3, -0.2, 0.5, 1.1, 1.2, 3.0};
  const double g00 = chart.metric(q)(0, 0);
  const double rho0 = base.rho.rho_at(q);
  const double psi0 = std::abs(base.psi(q, 0.0));
  const double sg0 = chart.sqrt_det(q);
  const double r0 = geom::weyl_scalar(chart, base.rho, q);

  const geom::GaugeWeights expected = geom::canonical_weights(n);
  num::RandomStream stream{seed, 0, 0};
  std::string csv =
      "lambda,exp_metric,exp_rho,exp_psi,exp_sqrt_det,exp_curvature,"
      "connection_invariance,current_invariance\n";
  double worst_exp = 0.0, worst_conn = 0.0, worst_curr = 0.0;

  for (std::int64_t i = 0; i < trials; ++i) {
    std::array<double, 6> u{};
    num::random_uniform(stream, u);
    // |ln lambda| in [0.3, 0.7] keeps the measured exponents well-conditioned
    const double loglam = (u[0] < 0.5 ? -1.0 : 1.0) * (0.3 + 0.4 * u[1]);
    const double lam = std::exp(loglam);

    const auto primed = geom::gauge_transform(
        base, [lam](std::span<const double>) { return lam; });
    const double eg = std::log(primed.chart.metric(q)(0, 0) / g00) / loglam;
    const double er = std::log(primed.rho.rho_at(q) / rho0) / loglam;
    const double ep = std::log(std::abs(primed.psi(q, 0.0)) / psi0) / loglam;
    const double es = std::log(primed.chart.sqrt_det(q) / sg0) / loglam;
    const double ec =
        std::log(geom::weyl_scalar(primed.chart, primed.rho, q) / r0) / loglam;

    worst_exp = std::max({worst_exp, std::abs(eg - expected.metric),
                          std::abs(er - expected.rho),
                          std::abs(ep - expected.psi),
                          std::abs(es - expected.sqrt_det),
                          std::abs(ec - expected.scalar_curvature)});

    // Non-constant gauge factor: connection and current must not move.
    const double c1 = 0.05 + 0.2 * u[2], c2 = 0.05 + 0.2 * u[3];
    const double c3 = 0.05 + 0.2 * u[4], c4 = 0.05 + 0.2 * u[5];
    auto lam_fn = [=](std::span<const double> p) {
      return std::exp(c1 * std::cos(p[3] - 0.4) + c2 * std::cos(p[4]) +
                      c3 * std::cos(0.5 * p[5] + 0.3) +
                      c4 * std::sin(0.4 * p[0]));
    };
    const auto varied = geom::gauge_transform(base, lam_fn);
    const auto conn_before = geom::weyl_connection(chart, base.frame, q);
    const auto conn_after =
        geom::weyl_connection(varied.chart, varied.frame, q);
    const double conn_dev = conn_before.max_abs_diff(conn_after);
    worst_conn = std::max(worst_conn, conn_dev);

    const auto j_before = fields::current_density(chart, rho_fn, sigma_fn, q);
    auto rho_varied = varied.rho.rho_at;
    const auto j_after =
        fields::current_density(varied.chart, rho_varied, sigma_fn, q);
    double curr_dev = 0.0;
    for (int d = 0; d < n; ++d)
      curr_dev = std::max(curr_dev, std::abs(j_after[d] - j_before[d]));
    worst_curr = std::max(worst_curr, curr_dev);

    csv += fmt(lam) + "," + fmt(eg) + "," + fmt(er) + "," + fmt(ep) + "," +
           fmt(es) + "," + fmt(ec) + "," + fmt(conn_dev) + "," +
           fmt(curr_dev) + "\n";
  }

  const bool pass = worst_exp <= tol && worst_conn <= tol && worst_curr <= tol;
  json summary = {{"schema_version", 1},
                  {"command", "gauge-check"},
                  {"trials", trials},
                  {"expected_exponents",
                   {{"metric", expected.metric},
                    {"rho", expected.rho},
                    {"psi", expected.psi},
                    {"sqrt_det", expected.sqrt_det},
                    {"curvature", expected.scalar_curvature}}},
                  {"max_exponent_deviation", worst_exp},
                  {"max_connection_deviation", worst_conn},
                  {"max_current_deviation", worst_curr},
                  {"tolerance", tol},
                  {"pass", pass}};
  emit(out, csv, summary);
  return pass ? 0 : kExitCheckFailed;
}

int run_residuals(const json& cfg, const OutputPaths& out) {
  const double a = cfg_num(cfg, "scale_a", 1.0);
  const double kx = cfg_num(cfg, "k_x", 0.3);
  const double ky = cfg_num(cfg, "k_y", -0.2);
  const double kz = cfg_num(cfg, "k_z", 0.4);
  const std::int64_t points = cfg_int(cfg, "points", 12);
  const std::uint64_t seed = std::uint64_t(cfg_int(cfg, "seed", 17));
  const double hje_tol = cfg_num(cfg, "hje_tolerance", 1e-4);
  const double cont_tol = cfg_num(cfg, "continuity_tolerance", 1e-6);
  const double equiv_tol = cfg_num(cfg, "equivalence_tolerance", 1e-4);
  if (points < 2) throw CliError{kExitUsage, "points must be >= 2"};

  auto field = spin::spin_up_wavefield({a}, spin::plane_wave({kx, ky, kz}));
  const double xin = fields::xi(6);
  const double k2 = kx * kx + ky * ky + kz * kz;
  const double expected_hje = 5.0 * k2 + 21.0 / (4.0 * a * a);

  num::RandomStream stream{seed, 0, 0};
  std::string csv =
      "x,y,z,alpha,beta,gamma,hje,continuity,wave_ratio_re,wave_ratio_im,"
      "equivalence_residual\n";
  std::vector<double> hjes;
  double max_cont = 0.0, max_equiv = 0.0;
  for (std::int64_t i = 0; i < points; ++i) {
    std::array<double, 6> u{};
    num::random_uniform(stream, u);
    const std::vector<double> q = {4.0 * u[0] - 2.0,      4.0 * u[1] - 2.0,
                                   4.0 * u[2] - 2.0,      2.0 * kPi * u[3],
                                   0.4 + 2.2 * u[4],      4.0 * kPi * u[5]};
    const double hje = fields::hje_residual(field, q);
    const double cont = fields::continuity_residual(field, q);
    const auto wave = fields::conformal_wave_residual(field, q);
    const auto psi = field.psi_at(q, 0.0);
    const std::complex<double> ratio = wave / psi;
    const double equiv = std::abs(hje + ratio.real() / (xin * xin));
    hjes.push_back(hje);
    max_cont = std::max(max_cont, std::abs(cont));
    max_equiv = std::max(max_equiv, equiv);
    csv += fmt(q[0]) + "," + fmt(q[1]) + "," + fmt(q[2]) + "," + fmt(q[3]) +
           "," + fmt(q[4]) + "," + fmt(q[5]) + "," + fmt(hje) + "," +
           fmt(cont) + "," + fmt(ratio.real()) + "," + fmt(ratio.imag()) +
           "," + fmt(equiv) + "\n";
  }

  double mean = 0.0;
  for (double h : hjes) mean += h;
  mean /= double(hjes.size());
  double max_dev = 0.0;
  for (double h : hjes) max_dev = std::max(max_dev, std::abs(h - mean));

  const bool pass = max_dev <= hje_tol && max_cont <= cont_tol &&
                    max_equiv <= equiv_tol &&
                    std::abs(mean - expected_hje) <= hje_tol;
  json summary = {{"schema_version", 1},
                  {"command", "residuals"},
                  {"points", points},
                  {"hje_mean", mean},
                  {"hje_expected", expected_hje},
                  {"hje_max_deviation", max_dev},
                  {"hje_tolerance", hje_tol},
                  {"max_continuity_residual", max_cont},
                  {"continuity_tolerance", cont_tol},
                  {"max_equivalence_residual", max_equiv},
                  {"equivalence_tolerance", equiv_tol},
                  {"pass", pass}};
  emit(out, csv, summary);
  return pass ? 0 : kExitCheckFailed;
}

int run_mc(const json& cfg, const OutputPaths& out) {
  epr::MCConfig mc;
  mc.samples = std::uint64_t(cfg_int(cfg, "samples", 1'000'000));
  mc.seed = std::uint64_t(cfg_int(cfg, "seed", 42));
  mc.workers = int(cfg_int(cfg, "workers", 0));
  mc.kernel = cfg_str(cfg, "kernel", "auto");
  const double sigmas = cfg_num(cfg, "check_sigmas", 5.0);
  const double floor = cfg_num(cfg, "check_floor", 1e-4);
  const bool do_chsh = cfg_bool(cfg, "chsh", false);

  json summary = {{"schema_version", 1},
                  {"command", "mc"},
                  {"samples", mc.samples},
                  {"seed", mc.seed},
                  {"kernel_requested", mc.kernel},
                  {"kernels_available", kern::available_kernels()}};
  std::string csv;
  bool pass = true;

  if (!do_chsh) {
    const double ta = deg2rad(cfg_num(cfg, "theta_a_deg", 0.0));
    const double tb = deg2rad(cfg_num(cfg, "theta_b_deg", 60.0));
    const auto r = epr::mc_run(ta, tb, mc);
    const auto exact = epr::coincidence_fluxes(ta, tb);
    csv = "channel,estimate,stderr,closed,abs_err\n";
    const char* names[4] = {"uu", "ud", "du", "dd"};
    for (int ch = 0; ch < 4; ++ch) {
      const double est = r.fluxes.channel(ch);
      const double err = std::abs(est - exact.channel(ch));
      pass = pass && err <= sigmas * r.stderrs[ch] + floor;
      csv += std::string(names[ch]) + "," + fmt(est) + "," +
             fmt(r.stderrs[ch]) + "," + fmt(exact.channel(ch)) + "," +
             fmt(err) + "\n";
    }
    const double corr_err = std::abs(r.corr - epr::correlation(exact));
    pass = pass && corr_err <= sigmas * r.corr_stderr + floor;
    csv += "correlation," + fmt(r.corr) + "," + fmt(r.corr_stderr) + "," +
           fmt(epr::correlation(exact)) + "," + fmt(corr_err) + "\n";
    summary["kernel_used"] = r.kernel_used;
    summary["correlation"] = r.corr;
    summary["correlation_stderr"] = r.corr_stderr;
    summary["closed_correlation"] = epr::correlation(exact);
  } else {
    const std::array<double, 4> s = {deg2rad(cfg_num(cfg, "a_deg", 0.0)),
                                     deg2rad(cfg_num(cfg, "ap_deg", 90.0)),
                                     deg2rad(cfg_num(cfg, "b_deg", 45.0)),
                                     deg2rad(cfg_num(cfg, "bp_deg", 135.0))};
    const auto r = epr::chsh_mc(s, mc);
    const double closed = epr::chsh(s);
    const double err = std::abs(r.value - closed);
    pass = err <= sigmas * r.stderr_ + floor;
    csv = "quantity,estimate,stderr,closed,abs_err\n";
    csv += "chsh," + fmt(r.value) + "," + fmt(r.stderr_) + "," + fmt(closed) +
           "," + fmt(err) + "\n";
    for (int i = 0; i < 4; ++i)
      csv += "pair_" + std::to_string(i) + "_correlation," +
             fmt(r.pairs[i].corr) + "," + fmt(r.pairs[i].corr_stderr) +
             ",," + "\n";
    summary["kernel_used"] = r.pairs[0].kernel_used;
    summary["chsh"] = r.value;
    summary["chsh_stderr"] = r.stderr_;
    summary["closed_chsh"] = closed;
  }

  summary["check_sigmas"] = sigmas;
  summary["check_floor"] = floor;
  summary["pass"] = pass;
  emit(out, csv, summary);
  return pass ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Configuration-space measurement laboratory: coincidence fluxes, "
      "Bell/CHSH quantities, no-signalling checks, curvature and residual "
      "instruments, gauge-weight measurements, Monte-Carlo estimation."};
  app.require_subcommand(1);

  struct SubSpec {
    std::string name, help;
    std::vector<std::string> keys;
    int (*run)(const json&, const OutputPaths&);
  };
  const std::vector<std::string> quad_keys = {"quad_alpha", "quad_beta",
                                              "quad_gamma"};
  auto with_quad = [&](std::vector<std::string> keys) {
    keys.insert(keys.end(), quad_keys.begin(), quad_keys.end());
    return keys;
  };

  const std::vector<SubSpec> specs = {
      {"fluxes",
       "Coincidence detection fluxes for an analyzer pair or settings grid",
       with_quad({"theta_a_deg", "theta_b_deg", "grid", "grid_start_deg",
                  "grid_stop_deg", "grid_count", "direct", "check_tolerance"}),
       &run_fluxes},
      {"bell-scan",
       "Bell quantity F over a range of angular separations",
       with_quad({"start_deg", "stop_deg", "step_deg", "check_tolerance"}),
       &run_bell},
      {"chsh", "CHSH combination for four analyzer settings",
       with_quad({"a_deg", "ap_deg", "b_deg", "bp_deg", "check_tolerance"}),
       &run_chsh},
      {"nosignal",
       "Single-side marginals under remote setting changes",
       with_quad({"theta_a_deg", "theta_b_deg", "theta_a_alt_deg",
                  "theta_b_alt_deg", "orientations", "seed", "shift_tolerance",
                  "proportionality_tolerance", "side_total_tolerance"}),
       &run_nosignal},
      {"curvature",
       "Scalar-curvature differences of state densities against closed forms",
       {"state", "scale_a", "pairs", "seed", "check_tolerance",
        "factor_tolerance"},
       &run_curvature},
      {"gauge-check",
       "Measured scaling exponents and invariances under gauge changes",
       {"trials", "seed", "tolerance", "scale_a"},
       &run_gauge},
      {"residuals",
       "Hamilton-Jacobi, continuity, and wave-equation residuals",
       {"scale_a", "k_x", "k_y", "k_z", "points", "seed", "hje_tolerance",
        "continuity_tolerance", "equivalence_tolerance"},
       &run_residuals},
      {"mc",
       "Monte-Carlo coincidence fluxes or CHSH estimate",
       {"theta_a_deg", "theta_b_deg", "samples", "seed", "workers", "kernel",
        "check_sigmas", "check_floor", "chsh", "a_deg", "ap_deg", "b_deg",
        "bp_deg"},
       &run_mc},
  };

  struct SubState {
    std::string config;
    OutputPaths out;
    const SubSpec* spec = nullptr;
  };
  std::vector<SubState> states(specs.size());
  SubState* selected = nullptr;

  for (size_t i = 0; i < specs.size(); ++i) {
    auto* sub = app.add_subcommand(specs[i].name, specs[i].help);
    states[i].spec = &specs[i];
    sub->add_option("--config", states[i].config,
                    "JSON configuration file (unknown keys are rejected)");
    sub->add_option("--out", states[i].out.csv,
                    "CSV output path ('-' = stdout, default)");
    sub->add_option("--json", states[i].out.json_path,
                    "JSON summary path ('-' = stdout)");
    sub->callback([&states, i, &selected]() { selected = &states[i]; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (selected == nullptr) return kExitUsage;
  try {
    const json cfg = load_config(selected->config, selected->spec->keys);
    return selected->spec->run(cfg, selected->out);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitComputeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitComputeError;
  }
}
