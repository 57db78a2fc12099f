#include "weights_detail.hpp"

namespace cqg::kern {

std::array<double, 6> sample_uniforms(std::uint64_t seed, std::uint64_t s) {
  return detail::draw_sample(seed, s);
}

namespace {

class ScalarKernel final : public WeightKernel {
 public:
  const char* name() const override { return "scalar"; }
  WeightSums accumulate(std::uint64_t seed, std::uint64_t first,
                        std::uint32_t count, double theta_a,
                        double theta_b) const override {
    const detail::Settings st(theta_a, theta_b);
    WeightSums acc;
    for (std::uint32_t i = 0; i < count; ++i)
      detail::one_sample(seed, first + i, st, acc);
    return acc;
  }
};

}  // namespace

const WeightKernel& scalar_kernel() {
  static const ScalarKernel k;
  return k;
}

}  // namespace cqg::kern
