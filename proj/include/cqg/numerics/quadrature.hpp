#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cqg/error.hpp"

namespace cqg::num {

// One-dimensional rule of a tensor-product grid.
//  Periodic: equispaced nodes on [lo, hi) with weight (hi-lo)/n; integrates
//            trigonometric polynomials of degree < n exactly.
//  Legendre: Gauss-Legendre nodes mapped to [lo, hi]; exact for polynomial
//            degree <= 2n-1.
struct Rule1D {
  enum class Kind { Periodic, Legendre };
  Kind kind = Kind::Legendre;
  int nodes = 8;
  double lo = -1.0;
  double hi = 1.0;
};

struct QuadratureSpec {
  std::vector<Rule1D> dims;
};

// Gauss-Legendre nodes/weights on [-1, 1] (Newton on the recurrence).
void gauss_legendre(int n, std::span<double> x, std::span<double> w);

// Tensor-product quadrature of m integrands evaluated together:
// f(point, out) fills out[0..m). Accumulation is compensated and runs in a
// fixed mixed-radix node order, so results are reproducible bit-for-bit.
// Throws NonFiniteEvaluation (with node coordinates) on NaN/Inf.
std::vector<double> tensor_quadrature_multi(
    const QuadratureSpec& spec, int m,
    const std::function<void(std::span<const double>, std::span<double>)>& f);

double tensor_quadrature(
    const QuadratureSpec& spec,
    const std::function<double(std::span<const double>)>& f);

}  // namespace cqg::num
