// Vector variant of the coincidence-weight kernel. This translation unit is
// compiled with the target vector ISA enabled (see CMakeLists); everything
// vector-typed stays local to this file and the kernel is only reachable
// through the runtime dispatch in weights_dispatch.cpp.

#include "weights_detail.hpp"

#if defined(CQG_SIMD_VARIANT)

#include <experimental/simd>

namespace cqg::kern {

namespace {

namespace stdx = std::experimental;

using VD = stdx::native_simd<double>;
constexpr int kLanes = int(VD::size());
using VU = stdx::fixed_size_simd<std::uint64_t, kLanes>;
using VDf = stdx::fixed_size_simd<double, kLanes>;

constexpr std::uint64_t kMask32 = 0xffffffffull;

// Philox4x32-10 with each lane's four 32-bit counter words held in the low
// half of a 64-bit lane: the 32x32 products stay exact and hi/lo splits are
// shifts. Identical round structure to the scalar num::philox4x32.
struct PhiloxLanes {
  VU c0, c1, c2, c3;
};

inline PhiloxLanes philox_block(std::uint64_t seed, VU sample_lo,
                                VU sample_hi, std::uint64_t call) {
  PhiloxLanes p;
  p.c0 = sample_lo & VU(kMask32);
  p.c1 = sample_hi;
  p.c2 = VU(call & kMask32);
  p.c3 = VU(call >> 32);
  VU k0 = VU(std::uint64_t(std::uint32_t(seed)));
  VU k1 = VU(std::uint64_t(std::uint32_t(seed >> 32)));
  for (int r = 0; r < num::philox::kRounds; ++r) {
    const VU p0 = p.c0 * VU(std::uint64_t(num::philox::kMul0));
    const VU p1 = p.c2 * VU(std::uint64_t(num::philox::kMul1));
    const VU hi0 = p0 >> 32, lo0 = p0 & VU(kMask32);
    const VU hi1 = p1 >> 32, lo1 = p1 & VU(kMask32);
    p.c0 = hi1 ^ p.c1 ^ k0;
    p.c1 = lo1;
    p.c2 = hi0 ^ p.c3 ^ k1;
    p.c3 = lo0;
    if (r + 1 < num::philox::kRounds) {
      k0 = (k0 + VU(std::uint64_t(num::philox::kBump0))) & VU(kMask32);
      k1 = (k1 + VU(std::uint64_t(num::philox::kBump1))) & VU(kMask32);
    }
  }
  return p;
}

inline VDf uniform_lanes(VU w_hi, VU w_lo) {
  const VU u = ((w_hi << 32) | w_lo) >> 11;
  return stdx::static_simd_cast<VDf>(u) * VDf(0x1.0p-53);
}

class SimdKernel final : public WeightKernel {
 public:
  const char* name() const override { return "simd"; }

  WeightSums accumulate(std::uint64_t seed, std::uint64_t first,
                        std::uint32_t count, double theta_a,
                        double theta_b) const override {
    const detail::Settings st(theta_a, theta_b);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    VDf acc_uu(0.0), acc_ud(0.0), acc_du(0.0), acc_dd(0.0);
    std::uint32_t i = 0;
    for (; i + kLanes <= count; i += kLanes) {
      VU s_lo, s_hi;
      for (int l = 0; l < kLanes; ++l) {
        const std::uint64_t s = first + i + l;
        s_lo[l] = s & kMask32;
        s_hi[l] = s >> 32;
      }
      // Slot layout matches detail::draw_sample; the gamma slots (block 1
      // words 0,1 and block 2 words 2,3) never reach the weights, so they
      // are not converted to doubles here.
      const PhiloxLanes b0 = philox_block(seed, s_lo, s_hi, 0);
      const PhiloxLanes b1 = philox_block(seed, s_lo, s_hi, 1);
      const PhiloxLanes b2 = philox_block(seed, s_lo, s_hi, 2);

      const VDf u_a1 = uniform_lanes(b0.c0, b0.c1);
      const VDf u_c1 = uniform_lanes(b0.c2, b0.c3);
      const VDf u_a2 = uniform_lanes(b1.c2, b1.c3);
      const VDf u_c2 = uniform_lanes(b2.c0, b2.c1);

      const VDf alpha1 = VDf(two_pi) * u_a1;
      const VDf cb1 = VDf(1.0) - VDf(2.0) * u_c1;
      const VDf sb1 = stdx::sqrt(VDf(1.0) - cb1 * cb1);
      const VDf b_1 =
          cb1 * VDf(st.cos_ta) + stdx::cos(alpha1) * sb1 * VDf(st.sin_ta);

      const VDf alpha2 = VDf(two_pi) * u_a2;
      const VDf cb2 = VDf(1.0) - VDf(2.0) * u_c2;
      const VDf sb2 = stdx::sqrt(VDf(1.0) - cb2 * cb2);
      const VDf b_2 =
          cb2 * VDf(st.cos_tb) + stdx::cos(alpha2) * sb2 * VDf(st.sin_tb);

      const VDf pu1 = VDf(1.0) + b_1, pd1 = VDf(1.0) - b_1;
      const VDf pu2 = VDf(1.0) + b_2, pd2 = VDf(1.0) - b_2;
      acc_uu += pu1 * pu2 * VDf(st.qs);
      acc_ud += pu1 * pd2 * VDf(st.qc);
      acc_du += pd1 * pu2 * VDf(st.qc);
      acc_dd += pd1 * pd2 * VDf(st.qs);
    }

    WeightSums out;
    out.uu = stdx::reduce(acc_uu);
    out.ud = stdx::reduce(acc_ud);
    out.du = stdx::reduce(acc_du);
    out.dd = stdx::reduce(acc_dd);
    for (; i < count; ++i) detail::one_sample(seed, first + i, st, out);
    return out;
  }
};

}  // namespace

const WeightKernel* simd_kernel_impl() {
#if defined(__x86_64__) || defined(_M_X64)
  if (!__builtin_cpu_supports("avx2")) return nullptr;
#endif
  static const SimdKernel k;
  return &k;
}

}  // namespace cqg::kern

#else  // !CQG_SIMD_VARIANT

namespace cqg::kern {
const WeightKernel* simd_kernel_impl() { return nullptr; }
}  // namespace cqg::kern

#endif
