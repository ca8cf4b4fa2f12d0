#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "lobkit/core/error.hpp"
#include "lobkit/core/kernel.hpp"
#include "lobkit/stats/curve.hpp"

namespace lobkit {

/// Sign autocorrelation C(1..N) as a dense vector (entry n-1 holds C(n)).
/// The curve must sample every lag 1..N in order.
inline std::vector<double> dense_correlation(const Curve& c) {
  std::vector<double> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.x[i] != static_cast<double>(i + 1)) throw InvalidArgument("correlation curve must cover lags 1..N");
    out.push_back(c.value[i]);
  }
  return out;
}

/// Response implied by the propagator model with unit-volume signed flow of
/// autocorrelation `corr` (C(n) = corr[n-1], zero beyond the end):
///   R(tau)  = sum_{0<=n<tau} G(tau-n) C(n) + sum_{n>=1} [G(tau+n) - G(n)] C(n),
///   R(-tau) = sum_{1<=n<=tau} G(n) C(n)   + sum_{n>tau} [G(n) - G(n-tau)] C(n),
/// with C(0) = 1 and the backward response in the R(-tau) = E[e_t (p_t - p_{t-tau})] convention.
inline double model_response(const Kernel& g, std::span<const double> corr, std::int64_t tau) {
  const auto nc = static_cast<std::int64_t>(corr.size());
  auto c = [&](std::int64_t n) { return n == 0 ? 1.0 : (n <= nc ? corr[static_cast<std::size_t>(n - 1)] : 0.0); };
  auto G = [&](std::int64_t l) { return g(static_cast<double>(l)); };
  double r = 0.0;
  if (tau > 0) {
    for (std::int64_t n = 0; n < tau; ++n) r += G(tau - n) * c(n);
    for (std::int64_t n = 1; n <= nc; ++n) r += (G(tau + n) - G(n)) * c(n);
  } else if (tau < 0) {
    const std::int64_t k = -tau;
    for (std::int64_t n = 1; n <= std::min(k, nc); ++n) r += G(n) * c(n);
    for (std::int64_t n = k + 1; n <= nc; ++n) r += (G(n) - G(n - k)) * c(n);
  }
  return r;
}

inline Curve model_response(const Kernel& g, std::span<const double> corr, std::span<const std::int64_t> lags) {
  Curve out;
  for (std::int64_t tau : lags) out.push(static_cast<double>(tau), model_response(g, corr, tau), 0.0, 1);
  return out;
}

struct CalibrationOptions {
  Kernel::Family family = Kernel::Family::PowerLaw;
  double l0 = 1.0;  ///< offset of the power-law family (held fixed)
  double shape_min = 0.02;
  double shape_max = 3.0;
  int max_iterations = 200;
};

struct PropagatorFit {
  Kernel kernel;
  /// Response estimates at neighbouring lags share price increments, so their
  /// errors are treated as fully correlated (an upper bound on the spread of g0).
  double g0_stderr = 0.0;
  double unconstrained_g0 = 0.0;  ///< least-squares amplitude before the g0 >= 0 constraint
  double shape = 0.0;  ///< gamma (power law) or beta (exponential); 0 for constant
  double objective = 0.0;
  std::size_t points = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
  Curve fitted;
};

/// Weighted least-squares fit of a kernel family to the positive-lag part of an
/// empirical response curve (weights 1/stderr^2; unit weights where stderr is 0).
/// The amplitude enters linearly and is profiled out; the shape parameter is
/// found by a coarse scan followed by Brent's method.
inline PropagatorFit calibrate_propagator(const Curve& response, std::span<const double> corr,
                                          const CalibrationOptions& opt = {}) {
  std::vector<std::int64_t> lags;
  std::vector<double> target, weight;
  for (std::size_t i = 0; i < response.size(); ++i) {
    if (!(response.x[i] > 0.0)) continue;
    lags.push_back(static_cast<std::int64_t>(std::llround(response.x[i])));
    target.push_back(response.value[i]);
    const double se = response.std_error[i];
    weight.push_back(se > 0.0 ? 1.0 / (se * se) : 1.0);
  }
  if (lags.size() < 2) throw InvalidArgument("calibration needs at least two positive-lag response points");

  auto make = [&](double g0, double shape) {
    switch (opt.family) {
      case Kernel::Family::Constant: return Kernel::constant(g0);
      case Kernel::Family::Exponential: return Kernel::exponential(g0, shape);
      case Kernel::Family::PowerLaw: return Kernel::power_law(g0, shape, opt.l0);
    }
    return Kernel::zero();
  };
  struct Profile {
    double g0, objective, info, free_g0, spread;
  };
  int evaluations = 0;
  auto profile = [&](double shape) {
    ++evaluations;
    const Kernel unit = make(1.0, shape);
    double num = 0.0, info = 0.0, spread = 0.0;
    std::vector<double> r(lags.size());
    for (std::size_t i = 0; i < lags.size(); ++i) {
      r[i] = model_response(unit, corr, lags[i]);
      num += weight[i] * target[i] * r[i];
      info += weight[i] * r[i] * r[i];
      spread += weight[i] * std::abs(r[i]) / std::sqrt(weight[i]);
    }
    // Kernels carry a non-negative amplitude: the profile is constrained to g0 >= 0.
    const double g0 = info > 0.0 ? std::max(0.0, num / info) : 0.0;
    double obj = 0.0;
    for (std::size_t i = 0; i < lags.size(); ++i) obj += weight[i] * std::pow(target[i] - g0 * r[i], 2);
    return Profile{g0, obj, info, info > 0.0 ? num / info : 0.0, spread};
  };

  PropagatorFit fit;
  fit.points = lags.size();
  double shape = 0.0;
  if (opt.family == Kernel::Family::Constant) {
    fit.converged = true;
  } else {
    // Exponential rates are searched on a log scale.
    const bool log_scale = opt.family == Kernel::Family::Exponential;
    const double lo = log_scale ? std::log(opt.shape_min) : opt.shape_min;
    const double hi = log_scale ? std::log(opt.shape_max) : opt.shape_max;
    auto to_shape = [&](double u) { return log_scale ? std::exp(u) : u; };
    auto objective = [&](double u) { return profile(to_shape(u)).objective; };
    constexpr int scan = 24;
    int best = 0;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= scan; ++i) {
      const double o = objective(lo + (hi - lo) * i / scan);
      if (o < best_obj) best_obj = o, best = i;
    }
    const double a = lo + (hi - lo) * std::max(best - 1, 0) / scan;
    const double b = lo + (hi - lo) * std::min(best + 1, scan) / scan;
    std::uintmax_t iters = static_cast<std::uintmax_t>(opt.max_iterations);
    const auto [u, obj] = boost::math::tools::brent_find_minima(objective, a, b, 40, iters);
    shape = to_shape(u);
    const double edge = 1e-6 * (hi - lo);
    fit.converged = iters < static_cast<std::uintmax_t>(opt.max_iterations) && u > lo + edge && u < hi - edge;
    if (!fit.converged)
      fit.message = iters >= static_cast<std::uintmax_t>(opt.max_iterations)
                        ? "shape search hit the iteration limit"
                        : "shape parameter at the edge of the search interval";
  }
  const Profile p = profile(shape);
  fit.kernel = make(p.g0, shape);
  fit.shape = shape;
  fit.unconstrained_g0 = p.free_g0;
  fit.objective = p.objective;
  fit.g0_stderr = p.info > 0.0 ? p.spread / p.info : std::numeric_limits<double>::infinity();
  fit.evaluations = evaluations;
  fit.fitted = model_response(fit.kernel, corr, lags);
  return fit;
}

}  // namespace lobkit
