#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lobkit/core/error.hpp"

namespace lobkit {

/// Sum of decaying exponentials sum_k weight_k * exp(-rate_k * lag).
struct ExpSum {
  std::vector<double> weights;
  std::vector<double> rates;

  double operator()(double lag) const {
    double s = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) s += weights[k] * std::exp(-rates[k] * lag);
    return s;
  }
  double integral() const {
    double s = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k)
      s += rates[k] > 0.0 ? weights[k] / rates[k] : std::numeric_limits<double>::infinity();
    return s;
  }
  std::size_t terms() const { return weights.size(); }
};

/// Parametric decay kernel (propagator) G(lag), lag >= 0.
///
///   constant     G = g0
///   exponential  G = g0 exp(-beta lag)
///   power law    G = g0 (l0 + lag)^(-gamma)
///
/// A power law with l0 = 0 is singular at lag 0 and only usable at positive
/// lags (and, for time integrals, only when gamma < 1).
class Kernel {
public:
  enum class Family { Constant, Exponential, PowerLaw };

  Kernel() = default;

  static Kernel constant(double g0) { return Kernel(Family::Constant, g0, 0.0, 0.0, 0.0); }
  static Kernel exponential(double g0, double beta) { return Kernel(Family::Exponential, g0, beta, 0.0, 0.0); }
  static Kernel power_law(double g0, double gamma, double l0 = 1.0) {
    return Kernel(Family::PowerLaw, g0, 0.0, l0, gamma);
  }
  static Kernel zero() { return constant(0.0); }

  Family family() const { return family_; }
  double g0() const { return g0_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }
  double l0() const { return l0_; }
  bool is_zero() const { return g0_ == 0.0; }

  double operator()(double lag) const {
    switch (family_) {
      case Family::Constant: return g0_;
      case Family::Exponential: return g0_ * std::exp(-beta_ * lag);
      case Family::PowerLaw:
        if (g0_ == 0.0) return 0.0;
        return g0_ * std::pow(l0_ + lag, -gamma_);
    }
    return 0.0;
  }

  /// K1(u) = integral of G over [0, u].
  double primitive(double u) const {
    if (u <= 0.0 || g0_ == 0.0) return 0.0;
    switch (family_) {
      case Family::Constant: return g0_ * u;
      case Family::Exponential:
        if (beta_ == 0.0) return g0_ * u;
        return -g0_ * std::expm1(-beta_ * u) / beta_;
      case Family::PowerLaw: {
        if (l0_ == 0.0) {
          if (gamma_ >= 1.0) throw InvalidArgument("power-law kernel with l0 = 0 is not integrable at 0");
          return g0_ * std::pow(u, 1.0 - gamma_) / (1.0 - gamma_);
        }
        const double x = u / l0_;
        if (gamma_ == 1.0) return g0_ * std::log1p(x);
        const double a = 1.0 - gamma_;
        return g0_ * std::pow(l0_, a) * std::expm1(a * std::log1p(x)) / a;
      }
    }
    return 0.0;
  }

  /// K2(u) = integral of K1 over [0, u]; the double integral used for exact
  /// piecewise-constant convolutions.
  double second_primitive(double u) const {
    if (u <= 0.0 || g0_ == 0.0) return 0.0;
    switch (family_) {
      case Family::Constant: return 0.5 * g0_ * u * u;
      case Family::Exponential: {
        if (beta_ == 0.0) return 0.5 * g0_ * u * u;
        const double z = beta_ * u;
        double core;
        if (z < 1e-3)
          core = z * z * (0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0);
        else
          core = z + std::expm1(-z);
        return g0_ * core / (beta_ * beta_);
      }
      case Family::PowerLaw: {
        if (l0_ == 0.0) {
          if (gamma_ >= 1.0) throw InvalidArgument("power-law kernel with l0 = 0 is not integrable at 0");
          return g0_ * std::pow(u, 2.0 - gamma_) / ((1.0 - gamma_) * (2.0 - gamma_));
        }
        const double x = u / l0_;
        if (gamma_ == 1.0) return g0_ * l0_ * ((1.0 + x) * std::log1p(x) - x);
        if (gamma_ == 2.0) return g0_ * (x - std::log1p(x));
        const double a = 1.0 - gamma_, b = 2.0 - gamma_;
        double core;
        if (x < 1e-3)
          core = (b - 1.0) * x * x / 2.0 + (b - 1.0) * (b - 2.0) * x * x * x / 6.0 +
                 (b - 1.0) * (b - 2.0) * (b - 3.0) * x * x * x * x / 24.0;
        else
          core = std::expm1(b * std::log1p(x)) / b - x;
        return g0_ * std::pow(l0_, b) * core / a;
      }
    }
    return 0.0;
  }

  /// Integral of G over [a, b], 0 <= a <= b.
  double integral(double a, double b) const { return primitive(b) - primitive(a); }

  /// Integral over the whole half line (infinite when not integrable).
  double total_integral() const {
    if (g0_ == 0.0) return 0.0;
    switch (family_) {
      case Family::Constant: return std::numeric_limits<double>::infinity();
      case Family::Exponential:
        return beta_ > 0.0 ? g0_ / beta_ : std::numeric_limits<double>::infinity();
      case Family::PowerLaw:
        if (gamma_ <= 1.0 || l0_ == 0.0) return std::numeric_limits<double>::infinity();
        return g0_ * std::pow(l0_, 1.0 - gamma_) / (gamma_ - 1.0);
    }
    return 0.0;
  }

  bool is_monotone_decaying() const {
    return family_ == Family::Constant || family_ == Family::Exponential || family_ == Family::PowerLaw;
  }

  /// Exponential-sum representation for O(1) recursive updates. Exact for the
  /// exponential family; for power laws the relative L1 error over
  /// [support_min, support_max] is at most `tolerance` (checked, not assumed).
  ExpSum as_exp_sum(double support_max, double support_min = 1e-3, double tolerance = 0.01) const {
    ExpSum s;
    if (g0_ == 0.0) return s;
    switch (family_) {
      case Family::Constant:
        s.weights = {g0_};
        s.rates = {0.0};
        return s;
      case Family::Exponential:
        s.weights = {g0_};
        s.rates = {beta_};
        return s;
      case Family::PowerLaw: break;
    }
    const double lo = l0_ > 0.0 ? 0.0 : support_min;
    const double x_min = l0_ + lo;
    const double x_max = l0_ + support_max;
    // x^-gamma = 1/Gamma(gamma) * int exp(gamma s - e^s x) ds, trapezoid in s.
    for (double h : {1.0, 0.5, 0.25}) {
      s.weights.clear();
      s.rates.clear();
      const double gamma_fn = std::tgamma(gamma_);
      const double eps = 1e-4;
      const double s_min = (std::log(eps * gamma_ * gamma_fn) - gamma_ * std::log(x_max)) / gamma_;
      const double s_max = std::log(45.0 / x_min);
      for (double node = s_min; node <= s_max + 1e-12; node += h) {
        const double rate = std::exp(node);
        const double w = g0_ * h * std::exp(gamma_ * node - rate * l0_) / gamma_fn;
        if (w > 0.0) {
          s.weights.push_back(w);
          s.rates.push_back(rate);
        }
      }
      if (relative_l1_error(s, lo, support_max) <= tolerance) return s;
    }
    throw Error("exponential-sum approximation of power-law kernel did not reach tolerance");
  }

  /// Relative L1 distance between this kernel and `approx` over [lo, hi],
  /// by log-spaced midpoint quadrature.
  double relative_l1_error(const ExpSum& approx, double lo, double hi, int nodes = 4000) const {
    const double a = std::log(l0_ + lo + 1e-300), b = std::log(l0_ + hi);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < nodes; ++i) {
      const double x = std::exp(a + (b - a) * (i + 0.5) / nodes);
      const double lag = x - l0_;
      if (lag < lo) continue;
      const double w = x * (b - a) / nodes;  // dx = x dlogx
      const double g = (*this)(lag);
      num += std::abs(g - approx(lag)) * w;
      den += g * w;
    }
    return den > 0.0 ? num / den : 0.0;
  }

  std::string describe() const {
    switch (family_) {
      case Family::Constant: return "constant(g0=" + std::to_string(g0_) + ")";
      case Family::Exponential:
        return "exponential(g0=" + std::to_string(g0_) + ",beta=" + std::to_string(beta_) + ")";
      case Family::PowerLaw:
        return "power_law(g0=" + std::to_string(g0_) + ",gamma=" + std::to_string(gamma_) +
               ",l0=" + std::to_string(l0_) + ")";
    }
    return "?";
  }

private:
  Kernel(Family f, double g0, double beta, double l0, double gamma)
      : family_(f), g0_(g0), beta_(beta), l0_(l0), gamma_(gamma) {
    if (!(g0 >= 0.0)) throw InvalidArgument("kernel amplitude g0 must be >= 0");
    if (!(beta >= 0.0)) throw InvalidArgument("kernel decay rate beta must be >= 0");
    if (!(gamma >= 0.0)) throw InvalidArgument("kernel exponent gamma must be >= 0");
    if (!(l0 >= 0.0)) throw InvalidArgument("kernel offset l0 must be >= 0");
  }

  Family family_ = Family::Constant;
  double g0_ = 0.0;
  double beta_ = 0.0;
  double l0_ = 0.0;
  double gamma_ = 0.0;
};

}  // namespace lobkit
