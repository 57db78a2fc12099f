#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cqg::kern {

// Partial sums of the four coincidence-channel importance weights over a
// contiguous range of sample indices.
struct WeightSums {
  double uu = 0.0, ud = 0.0, du = 0.0, dd = 0.0;
};

// A weight kernel turns (seed, sample range, analyzer settings) into
// channel-weight sums, deterministically: sample s consumes only
// counter-indexed randomness derived from (seed, s), so any partition of the
// index space produces identical totals.
class WeightKernel {
 public:
  virtual ~WeightKernel() = default;
  virtual const char* name() const = 0;
  virtual WeightSums accumulate(std::uint64_t seed, std::uint64_t first,
                                std::uint32_t count, double theta_a,
                                double theta_b) const = 0;
};

// Always-available reference implementation.
const WeightKernel& scalar_kernel();

// Vector implementation (std::experimental::simd); null when the binary was
// built without it or the CPU lacks the required instructions.
const WeightKernel* simd_kernel();

// "scalar", "simd", or "auto" (prefer simd when available).
// ValidationError for unknown names or an explicit "simd" on a host without
// vector support.
const WeightKernel& select_kernel(std::string_view which);

std::vector<std::string> available_kernels();

// The six uniforms sample s draws (alpha_1, u_beta1, gamma_1, alpha_2,
// u_beta2, gamma_2 slots). Exposed so tests can pin the stream layout.
std::array<double, 6> sample_uniforms(std::uint64_t seed, std::uint64_t s);

}  // namespace cqg::kern
