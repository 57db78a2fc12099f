#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "cqg/kernels/weights.hpp"
#include "cqg/numerics/philox.hpp"

namespace cqg::kern::detail {

// Trig of the analyzer settings, computed once per accumulate() call. The
// quarter factors fold the 1/4 normalization of the coincidence weights into
// sin^2 / cos^2 of the half separation.
struct Settings {
  double cos_ta, sin_ta, cos_tb, sin_tb;
  double qs, qc;  // sin^2((tb-ta)/2)/4, cos^2((tb-ta)/2)/4
  Settings(double theta_a, double theta_b) {
    cos_ta = std::cos(theta_a);
    sin_ta = std::sin(theta_a);
    cos_tb = std::cos(theta_b);
    sin_tb = std::sin(theta_b);
    const double half = 0.5 * (theta_b - theta_a);
    const double s = std::sin(half), c = std::cos(half);
    qs = 0.25 * s * s;
    qc = 0.25 * c * c;
  }
};

// Stream layout: sample s owns Philox counters (lo = s, hi = 0, 1, 2), two
// uniforms per block, slots (alpha_1, u_beta1, gamma_1, alpha_2, u_beta2,
// gamma_2). The gammas are part of the drawn orientation but drop out of the
// channel weights.
inline std::array<double, 6> draw_sample(std::uint64_t seed, std::uint64_t s) {
  const auto b0 = num::philox4x32(seed, s, 0);
  const auto b1 = num::philox4x32(seed, s, 1);
  const auto b2 = num::philox4x32(seed, s, 2);
  return {num::uniform_from_words(b0[0], b0[1]),
          num::uniform_from_words(b0[2], b0[3]),
          num::uniform_from_words(b1[0], b1[1]),
          num::uniform_from_words(b1[2], b1[3]),
          num::uniform_from_words(b2[0], b2[1]),
          num::uniform_from_words(b2[2], b2[3])};
}

// One sample's channel weights; the exact operation sequence here is
// mirrored by the vector kernel so the two agree to rounding of cos/sqrt.
inline void one_sample(std::uint64_t seed, std::uint64_t s, const Settings& st,
                       WeightSums& acc) {
  const auto u = draw_sample(seed, s);
  constexpr double two_pi = 2.0 * std::numbers::pi;

  const double alpha1 = two_pi * u[0];
  const double cb1 = 1.0 - 2.0 * u[1];
  const double sb1 = std::sqrt(1.0 - cb1 * cb1);
  const double b_1 = cb1 * st.cos_ta + std::cos(alpha1) * sb1 * st.sin_ta;

  const double alpha2 = two_pi * u[3];
  const double cb2 = 1.0 - 2.0 * u[4];
  const double sb2 = std::sqrt(1.0 - cb2 * cb2);
  const double b_2 = cb2 * st.cos_tb + std::cos(alpha2) * sb2 * st.sin_tb;

  const double pu1 = 1.0 + b_1, pd1 = 1.0 - b_1;
  const double pu2 = 1.0 + b_2, pd2 = 1.0 - b_2;
  acc.uu += pu1 * pu2 * st.qs;
  acc.ud += pu1 * pd2 * st.qc;
  acc.du += pd1 * pu2 * st.qc;
  acc.dd += pd1 * pd2 * st.qs;
}

}  // namespace cqg::kern::detail
