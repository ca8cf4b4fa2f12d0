#pragma once

#include <cmath>
#include <string>

#include "lobkit/core/error.hpp"

namespace lobkit {

/// Execution schedule of a metaorder of size Q over [0, T]:
///   constant      m(t) = Q / T
///   front-loaded  m(t) = (c + 1) Q / T (1 - t/T)^c, c > 0
/// The rate vanishes outside [0, T) and integrates to Q in closed form.
struct MetaorderSchedule {
  enum class Shape { Constant, FrontLoaded };

  double size = 0.0;
  double duration = 1.0;
  int sign = 1;
  Shape shape = Shape::Constant;
  double decay = 0.0;  ///< exponent c of the front-loaded profile

  static MetaorderSchedule constant(double size, double duration, int sign = 1) {
    return {size, duration, sign, Shape::Constant, 0.0};
  }
  static MetaorderSchedule front_loaded(double size, double duration, double decay, int sign = 1) {
    return {size, duration, sign, Shape::FrontLoaded, decay};
  }

  void validate() const {
    if (!(size >= 0.0) || !std::isfinite(size)) throw InvalidArgument("metaorder size must be finite and >= 0");
    if (!(duration > 0.0) || !std::isfinite(duration)) throw InvalidArgument("metaorder duration must be > 0");
    if (sign != 1 && sign != -1) throw InvalidArgument("metaorder sign must be +1 or -1");
    if (shape == Shape::FrontLoaded && !(decay > 0.0)) throw InvalidArgument("front-loaded decay must be > 0");
  }

  /// Dimensionless rate r(s) on s = t/T in [0, 1], integrating to 1.
  double profile(double s) const {
    if (s < 0.0 || s >= 1.0) return 0.0;
    if (shape == Shape::Constant) return 1.0;
    return (decay + 1.0) * std::pow(1.0 - s, decay);
  }

  /// Unsigned trading rate m(t).
  double rate(double t) const { return size / duration * profile(t / duration); }

  /// Unsigned volume executed over [0, t].
  double executed(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= duration) return size;
    const double s = t / duration;
    if (shape == Shape::Constant) return size * s;
    return size * -std::expm1((decay + 1.0) * std::log1p(-s));
  }

  std::string describe() const {
    return shape == Shape::Constant ? "constant" : "front-loaded(" + std::to_string(decay) + ")";
  }
};

}  // namespace lobkit
