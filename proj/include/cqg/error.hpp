#pragma once

#include <stdexcept>
#include <string>

namespace cqg {

// Every failure mode the library reports deliberately. Anything else escaping
// is a plain std::exception and means a bug.
enum class ErrorKind {
  DomainError,            // point outside a chart's non-periodic coordinate ranges
  DegenerateChart,        // |det g| below threshold at an evaluation point
  CoordinateSingularity,  // too close to a polar angle singularity (beta ~ 0 or pi)
  NodeError,              // wavefunction / density modulus below node tolerance
  PoleError,              // closed form evaluated at (or too near) its pole
  UnsupportedDimension,   // operation undefined for this chart dimension (e.g. n <= 2)
  InvalidGauge,           // gauge factor not strictly positive where sampled
  InvalidSurface,         // detector surface normal not a spatial axis of the chart
  ValidationError,        // bad argument (non-unit spinor, unknown kernel, ...)
  QuadratureOrder,        // quadrature rule below the trig-exactness threshold
  NonFiniteEvaluation,    // integrand / derivative target returned NaN or Inf
  InternalConsistency,    // invariant the library itself maintains was broken
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DomainError: return "domain_error";
    case ErrorKind::DegenerateChart: return "degenerate_chart";
    case ErrorKind::CoordinateSingularity: return "coordinate_singularity";
    case ErrorKind::NodeError: return "node_error";
    case ErrorKind::PoleError: return "pole_error";
    case ErrorKind::UnsupportedDimension: return "unsupported_dimension";
    case ErrorKind::InvalidGauge: return "invalid_gauge";
    case ErrorKind::InvalidSurface: return "invalid_surface";
    case ErrorKind::ValidationError: return "validation_error";
    case ErrorKind::QuadratureOrder: return "quadrature_order";
    case ErrorKind::NonFiniteEvaluation: return "non_finite_evaluation";
    case ErrorKind::InternalConsistency: return "internal_consistency";
  }
  return "unknown";
}

}  // namespace cqg
