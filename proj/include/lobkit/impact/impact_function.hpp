#pragma once

#include <cmath>
#include <string>

#include "lobkit/core/error.hpp"

namespace lobkit {

/// Instantaneous impact f(v) = scale * sgn(v) |v|^exponent, exponent in (0, 1].
/// On unit volumes every exponent reduces to scale * sgn(v).
struct ImpactFunction {
  double exponent = 1.0;
  double scale = 1.0;

  static ImpactFunction linear(double scale = 1.0) { return {1.0, scale}; }
  static ImpactFunction power(double exponent, double scale = 1.0) { return {exponent, scale}; }

  bool is_linear() const { return exponent == 1.0; }

  double operator()(double v) const {
    if (v == 0.0) return 0.0;
    const double mag = exponent == 1.0 ? std::abs(v) : std::pow(std::abs(v), exponent);
    return v > 0.0 ? scale * mag : -scale * mag;
  }

  void validate() const {
    if (!(exponent > 0.0 && exponent <= 1.0)) throw InvalidArgument("impact exponent must lie in (0, 1]");
    if (!std::isfinite(scale)) throw InvalidArgument("impact scale must be finite");
  }

  bool operator==(const ImpactFunction&) const = default;
};

}  // namespace lobkit
