#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cqg/error.hpp"
#include "cqg/numerics/linalg.hpp"

namespace cqg::geom {

struct CoordRange {
  double lo = 0.0;
  double hi = 0.0;
  bool periodic = false;
};

// A coordinate chart carrying a metric evaluator plus the metadata the rest
// of the library needs: which axes are flat spatial directions (legal
// detector-surface normals) and which are polar angles with coordinate
// singularities at the interval ends.
class MetricChart {
 public:
  using MetricFn = std::function<void(std::span<const double>, num::Mat&)>;

  MetricChart() = default;
  MetricChart(std::string name, std::vector<CoordRange> ranges, MetricFn metric)
      : name_(std::move(name)),
        ranges_(std::move(ranges)),
        metric_(std::move(metric)) {
    if (ranges_.empty() || int(ranges_.size()) > num::kMaxDim)
      fail(ErrorKind::UnsupportedDimension,
           "MetricChart: dimension outside [1, 12]");
  }

  int dim() const { return int(ranges_.size()); }
  const std::string& name() const { return name_; }
  const std::vector<CoordRange>& ranges() const { return ranges_; }

  // Raw metric evaluation; no range checks, so finite-difference stencils may
  // poke slightly past non-periodic interval ends.
  num::Mat metric(std::span<const double> q) const {
    num::Mat g(dim());
    metric_(q, g);
    return g;
  }

  num::Mat inverse_metric(std::span<const double> q) const {
    num::Mat g = metric(q);
    check_not_degenerate(g, q);
    return num::inverse(g);
  }

  double sqrt_det(std::span<const double> q) const {
    num::Mat g = metric(q);
    const double d = num::determinant(g);
    if (!(d > 1e-14 * std::max(1.0, g.max_abs())))
      fail(ErrorKind::DegenerateChart,
           "sqrt_det: det g = " + std::to_string(d) + " not positive on chart " +
               name_);
    return std::sqrt(d);
  }

  // Interior check for operation entry points: non-periodic coordinates must
  // sit inside their ranges, polar angles clear of their singular ends.
  void require_interior(std::span<const double> q) const {
    if (int(q.size()) != dim())
      fail(ErrorKind::ValidationError,
           "point dimension " + std::to_string(q.size()) +
               " does not match chart " + name_);
    for (int i = 0; i < dim(); ++i) {
      const auto& r = ranges_[i];
      if (!r.periodic && (q[i] < r.lo || q[i] > r.hi))
        fail(ErrorKind::DomainError,
             "coordinate " + std::to_string(i) + " = " + std::to_string(q[i]) +
                 " outside [" + std::to_string(r.lo) + ", " +
                 std::to_string(r.hi) + "] on chart " + name_);
    }
    for (int axis : polar_axes) {
      const double b = q[axis];
      const auto& r = ranges_[axis];
      if (std::abs(b - r.lo) < polar_guard || std::abs(b - r.hi) < polar_guard)
        fail(ErrorKind::CoordinateSingularity,
             "polar angle " + std::to_string(b) + " within " +
                 std::to_string(polar_guard) + " of a coordinate singularity");
    }
  }

  bool is_interior(std::span<const double> q) const {
    try {
      require_interior(q);
      return true;
    } catch (const Error&) {
      return false;
    }
  }

  // Wraps periodic coordinates into range (trajectory integration).
  void wrap(std::span<double> q) const {
    for (int i = 0; i < dim(); ++i) {
      const auto& r = ranges_[i];
      if (!r.periodic) continue;
      const double len = r.hi - r.lo;
      q[i] -= len * std::floor((q[i] - r.lo) / len);
    }
  }

  // Axes usable as detector-surface normals (flat spatial directions).
  std::vector<int> spatial_axes;
  // Polar angles (the beta of a rotational block): guarded near interval ends.
  std::vector<int> polar_axes;
  double polar_guard = 1e-3;

 private:
  void check_not_degenerate(const num::Mat& g, std::span<const double>) const {
    const double d = num::determinant(g);
    if (std::abs(d) <= 1e-14 * std::max(1.0, g.max_abs()))
      fail(ErrorKind::DegenerateChart,
           "metric numerically singular on chart " + name_);
  }

  std::string name_;
  std::vector<CoordRange> ranges_;
  MetricFn metric_;
};

}  // namespace cqg::geom
