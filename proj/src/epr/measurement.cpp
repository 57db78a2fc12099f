#include "cqg/epr/measurement.hpp"

#include <cmath>

#include "cqg/kernels/weights.hpp"
#include "cqg/numerics/linalg.hpp"
#include "cqg/numerics/parallel.hpp"

namespace cqg::epr {

SGAChannels sga_transform(Complex a, Complex b, double theta) {
  const double norm2 = std::norm(a) + std::norm(b);
  if (std::abs(norm2 - 1.0) > 1e-12)
    fail(ErrorKind::ValidationError,
         "sga_transform: spinor norm^2 = " + std::to_string(norm2) +
             " differs from 1 beyond 1e-12");
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  return {a * c + b * s, a * s - b * c};
}

Complex analyzer_up_factor(const spin::EulerTriple& z, double theta) {
  return spin::d_up(z) * std::cos(0.5 * theta) +
         spin::d_down(z) * std::sin(0.5 * theta);
}

Complex analyzer_down_factor(const spin::EulerTriple& z, double theta) {
  return spin::d_up(z) * std::sin(0.5 * theta) -
         spin::d_down(z) * std::cos(0.5 * theta);
}

double polarization_bracket(const spin::EulerTriple& z, double theta) {
  return std::cos(z.beta) * std::cos(theta) +
         std::cos(z.alpha) * std::sin(z.beta) * std::sin(theta);
}

std::array<Complex, 4> amplitude_coefficients(const spin::TwoParticleAngles& z,
                                              double theta_a, double theta_b) {
  // Rewriting the singlet in the analyzers' channel factors leaves
  // coefficients that depend only on the half separation.
  const double half = 0.5 * (theta_b - theta_a);
  const double sd = std::sin(half), cd = std::cos(half);
  const Complex fu_a = analyzer_up_factor(z.a, theta_a);
  const Complex fd_a = analyzer_down_factor(z.a, theta_a);
  const Complex fu_b = analyzer_up_factor(z.b, theta_b);
  const Complex fd_b = analyzer_down_factor(z.b, theta_b);
  return {sd * fu_a * fu_b, -cd * fu_a * fd_b, cd * fd_a * fu_b,
          sd * fd_a * fd_b};
}

std::array<double, 4> joint_weights(const spin::TwoParticleAngles& z,
                                    double theta_a, double theta_b) {
  const double half = 0.5 * (theta_b - theta_a);
  const double s = std::sin(half), c = std::cos(half);
  const double qs = 0.25 * s * s, qc = 0.25 * c * c;
  const double b1 = polarization_bracket(z.a, theta_a);
  const double b2 = polarization_bracket(z.b, theta_b);
  return {(1.0 + b1) * (1.0 + b2) * qs, (1.0 + b1) * (1.0 - b2) * qc,
          (1.0 - b1) * (1.0 + b2) * qc, (1.0 - b1) * (1.0 - b2) * qs};
}

namespace {

void check_quad(const QuadSpec& q) {
  // The channel-density integrands have trig degree 1 in alpha and gamma and
  // polynomial degree 1 in cos(beta); the thresholds below keep a safety
  // margin of one degree.
  if (q.alpha < 5 || q.gamma < 5)
    fail(ErrorKind::QuadratureOrder,
         "coincidence quadrature: periodic rules need >= 5 nodes for "
         "trig-polynomial exactness");
  if (q.beta < 3)
    fail(ErrorKind::QuadratureOrder,
         "coincidence quadrature: Gauss-Legendre rule needs >= 3 nodes");
}

// One-particle transmitted fractions through an analyzer at theta.
void channel_fractions(double theta, const QuadSpec& q, double& up,
                       double& down) {
  up = spin::integrate_haar(
      [theta](const spin::EulerTriple& z) {
        return 0.5 * (1.0 + polarization_bracket(z, theta));
      },
      q.alpha, q.beta, q.gamma);
  down = spin::integrate_haar(
      [theta](const spin::EulerTriple& z) {
        return 0.5 * (1.0 - polarization_bracket(z, theta));
      },
      q.alpha, q.beta, q.gamma);
}

FluxTable normalize(double uu, double ud, double du, double dd) {
  FluxTable t;
  t.raw_total = uu + ud + du + dd;
  if (!(t.raw_total > 0.0))
    fail(ErrorKind::InternalConsistency,
         "coincidence fluxes: non-positive raw total");
  t.uu = uu / t.raw_total;
  t.ud = ud / t.raw_total;
  t.du = du / t.raw_total;
  t.dd = dd / t.raw_total;
  return t;
}

}  // namespace

FluxTable coincidence_fluxes(double theta_a, double theta_b,
                             const QuadSpec& q) {
  check_quad(q);
  const double half = 0.5 * (theta_b - theta_a);
  const double s2 = std::sin(half) * std::sin(half);
  const double c2 = std::cos(half) * std::cos(half);
  double iu_a, id_a, iu_b, id_b;
  channel_fractions(theta_a, q, iu_a, id_a);
  channel_fractions(theta_b, q, iu_b, id_b);
  return normalize(s2 * iu_a * iu_b, c2 * iu_a * id_b, c2 * id_a * iu_b,
                   s2 * id_a * id_b);
}

FluxTable coincidence_fluxes_direct(double theta_a, double theta_b,
                                    const QuadSpec& q) {
  check_quad(q);
  double raw[4];
  for (int ch = 0; ch < 4; ++ch) {
    raw[ch] = spin::integrate_haar2(
        [&](const spin::TwoParticleAngles& z) {
          return joint_weights(z, theta_a, theta_b)[ch];
        },
        q.alpha, q.beta, q.gamma);
  }
  return normalize(raw[0], raw[1], raw[2], raw[3]);
}

double correlation(const FluxTable& t) { return t.uu + t.dd - t.ud - t.du; }

double correlation(double theta_a, double theta_b, const QuadSpec& q) {
  return correlation(coincidence_fluxes(theta_a, theta_b, q));
}

MarginalTable marginal_densities(Side side, const spin::EulerTriple& local,
                                 double theta_a, double theta_b,
                                 const QuadSpec& q) {
  check_quad(q);
  const double theta_local = side == Side::A ? theta_a : theta_b;
  MarginalTable m;
  for (int ch = 0; ch < 2; ++ch) {
    m.raw[ch] = spin::integrate_haar(
        [&](const spin::EulerTriple& remote) {
          const spin::TwoParticleAngles z = side == Side::A
                                                ? spin::TwoParticleAngles{local, remote}
                                                : spin::TwoParticleAngles{remote, local};
          const auto w = joint_weights(z, theta_a, theta_b);
          // Sum over the remote channel: {uu, ud} for side A up, etc.
          if (side == Side::A) return ch == 0 ? w[0] + w[1] : w[2] + w[3];
          return ch == 0 ? w[0] + w[2] : w[1] + w[3];
        },
        q.alpha, q.beta, q.gamma);
  }
  const double raw_total =
      coincidence_fluxes(theta_a, theta_b, q).raw_total;
  m.normalized = {m.raw[0] / raw_total, m.raw[1] / raw_total};
  m.bracket = polarization_bracket(local, theta_local);
  const double exp_u = 0.25 * (1.0 + m.bracket);
  const double exp_d = 0.25 * (1.0 - m.bracket);
  m.proportionality_residual =
      std::max(std::abs(m.raw[0] - exp_u), std::abs(m.raw[1] - exp_d)) / 0.5;
  return m;
}

double bell_redhead(double delta, const QuadSpec& q) {
  const double e0 = correlation(0.0, 0.0, q);
  const double e1 = correlation(0.0, 2.0 * delta, q);
  const double e2 = correlation(0.0, 4.0 * delta, q);
  return std::abs(-e0 - 2.0 * e1 + e2);
}

std::vector<BellRow> bell_scan(std::span<const double> deltas,
                               const QuadSpec& q) {
  std::vector<BellRow> rows;
  rows.reserve(deltas.size());
  for (double d : deltas) {
    BellRow r;
    r.delta = d;
    r.f_value = bell_redhead(d, q);
    r.correlation_2delta = correlation(0.0, 2.0 * d, q);
    r.violated = r.f_value > 2.0 + 1e-9;
    rows.push_back(r);
  }
  return rows;
}

double chsh(const std::array<double, 4>& settings, const QuadSpec& q) {
  const double a = settings[0], ap = settings[1];
  const double b = settings[2], bp = settings[3];
  return correlation(a, b, q) - correlation(a, bp, q) +
         correlation(ap, b, q) + correlation(ap, bp, q);
}

namespace {

std::uint64_t block_size_for(std::uint64_t samples) {
  if (samples >= 4096) return 4096;
  return std::max<std::uint64_t>(1, samples / 16);
}

}  // namespace

MCResult mc_run(double theta_a, double theta_b, const MCConfig& cfg) {
  if (cfg.samples < 1)
    fail(ErrorKind::ValidationError, "mc_run: need at least one sample");
  const kern::WeightKernel& kernel = kern::select_kernel(cfg.kernel);

  const std::uint64_t bs = block_size_for(cfg.samples);
  const std::int64_t nblocks = std::int64_t((cfg.samples + bs - 1) / bs);
  std::vector<kern::WeightSums> partial(nblocks);
  num::parallel_blocks(
      nblocks,
      [&](std::int64_t b) {
        const std::uint64_t first = std::uint64_t(b) * bs;
        const std::uint32_t count =
            std::uint32_t(std::min<std::uint64_t>(bs, cfg.samples - first));
        partial[b] = kernel.accumulate(cfg.seed, first, count, theta_a,
                                       theta_b);
      },
      cfg.workers);

  // Block-ordered compensated reduction: identical no matter how many
  // workers produced the partials.
  num::KahanSum suu, sud, sdu, sdd;
  for (const auto& p : partial) {
    suu.add(p.uu);
    sud.add(p.ud);
    sdu.add(p.du);
    sdd.add(p.dd);
  }
  const double tot =
      suu.value() + sud.value() + sdu.value() + sdd.value();
  if (!(tot > 0.0))
    fail(ErrorKind::InternalConsistency, "mc_run: non-positive weight total");

  MCResult r;
  r.samples = cfg.samples;
  r.kernel_used = kernel.name();
  r.fluxes.uu = suu.value() / tot;
  r.fluxes.ud = sud.value() / tot;
  r.fluxes.du = sdu.value() / tot;
  r.fluxes.dd = sdd.value() / tot;
  r.fluxes.raw_total = tot / double(cfg.samples);
  r.corr = r.fluxes.uu + r.fluxes.dd - r.fluxes.ud - r.fluxes.du;

  // Batch-means standard errors over the full-size blocks.
  std::int64_t full = 0;
  for (std::int64_t b = 0; b < nblocks; ++b)
    if (std::uint64_t(b) * bs + bs <= cfg.samples) ++full;
  if (full >= 2) {
    std::array<num::KahanSum, 5> var;  // four channels + correlation
    for (std::int64_t b = 0; b < full; ++b) {
      const auto& p = partial[b];
      const double t = p.uu + p.ud + p.du + p.dd;
      const double ratio[4] = {p.uu / t, p.ud / t, p.du / t, p.dd / t};
      const double est[4] = {r.fluxes.uu, r.fluxes.ud, r.fluxes.du,
                             r.fluxes.dd};
      for (int ch = 0; ch < 4; ++ch) {
        const double d = ratio[ch] - est[ch];
        var[ch].add(d * d);
      }
      const double e = ratio[0] + ratio[3] - ratio[1] - ratio[2];
      var[4].add((e - r.corr) * (e - r.corr));
    }
    for (int ch = 0; ch < 4; ++ch)
      r.stderrs[ch] =
          std::sqrt(var[ch].value() / double(full - 1) / double(full));
    r.corr_stderr =
        std::sqrt(var[4].value() / double(full - 1) / double(full));
  }
  return r;
}

ChshMcResult chsh_mc(const std::array<double, 4>& settings,
                     const MCConfig& cfg) {
  const double a = settings[0], ap = settings[1];
  const double b = settings[2], bp = settings[3];
  const std::array<std::array<double, 2>, 4> pairs = {
      {{a, b}, {a, bp}, {ap, b}, {ap, bp}}};
  ChshMcResult out;
  double var = 0.0;
  for (int i = 0; i < 4; ++i) {
    MCConfig c = cfg;
    c.seed = cfg.seed + std::uint64_t(i);  // independent per-pair streams
    out.pairs[i] = mc_run(pairs[i][0], pairs[i][1], c);
    var += out.pairs[i].corr_stderr * out.pairs[i].corr_stderr;
  }
  out.value = out.pairs[0].corr - out.pairs[1].corr + out.pairs[2].corr +
              out.pairs[3].corr;
  out.stderr_ = std::sqrt(var);
  return out;
}

}  // namespace cqg::epr
