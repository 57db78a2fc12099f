#include <string>

#include "cqg/error.hpp"
#include "cqg/kernels/weights.hpp"

namespace cqg::kern {

// Defined in weights_simd.cpp; returns null when the vector variant was not
// built or the CPU cannot run it.
const WeightKernel* simd_kernel_impl();

const WeightKernel* simd_kernel() { return simd_kernel_impl(); }

const WeightKernel& select_kernel(std::string_view which) {
  if (which == "scalar") return scalar_kernel();
  if (which == "simd") {
    if (const WeightKernel* k = simd_kernel()) return *k;
    fail(ErrorKind::ValidationError,
         "select_kernel: vector kernel unavailable on this host");
  }
  if (which == "auto") {
    if (const WeightKernel* k = simd_kernel()) return *k;
    return scalar_kernel();
  }
  fail(ErrorKind::ValidationError,
       "select_kernel: unknown kernel '" + std::string(which) +
           "' (expected auto, scalar, or simd)");
}

std::vector<std::string> available_kernels() {
  std::vector<std::string> v = {"scalar"};
  if (simd_kernel()) v.emplace_back("simd");
  return v;
}

}  // namespace cqg::kern
