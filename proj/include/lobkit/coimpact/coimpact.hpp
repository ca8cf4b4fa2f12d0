#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "lobkit/core/error.hpp"
#include "lobkit/core/random.hpp"
#include "lobkit/core/stats.hpp"
#include "lobkit/io/csv.hpp"
#include "lobkit/stats/curve.hpp"

namespace lobkit {

/// sgn(v) |v|^delta.
inline double signed_power(double v, double delta) {
  return v == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(v), delta), v);
}

/// Law of the absolute volume fraction |phi~|: Pareto density ~ x^(-tail-1)
/// on [lower, upper]. lower == upper gives a fixed size.
struct SizeLaw {
  double tail = 1.5;
  double lower = 1e-4;
  double upper = 0.1;

  static SizeLaw fixed(double size) { return {1.5, size, size}; }

  void validate() const {
    if (!(tail > 0.0)) throw InvalidArgument("size-law tail exponent must be > 0");
    if (!(lower > 0.0) || !(upper >= lower)) throw InvalidArgument("size law needs 0 < lower <= upper");
  }
  double sample(Rng& rng) const { return lower == upper ? lower : truncated_pareto(rng, tail, lower, upper); }
};

/// Law of the number of metaorders per day, N >= 1: geometric with the given
/// mean, or fixed.
struct CountLaw {
  double mean = 5.0;
  bool is_fixed = false;

  static CountLaw geometric(double mean) { return {mean, false}; }
  static CountLaw fixed(std::size_t n) { return {static_cast<double>(n), true}; }

  void validate() const {
    if (!(mean >= 1.0)) throw InvalidArgument("metaorder count law needs mean >= 1");
    if (is_fixed && mean != std::floor(mean)) throw InvalidArgument("fixed metaorder count must be an integer");
  }
  std::size_t sample(Rng& rng) const {
    if (is_fixed || mean == 1.0) return static_cast<std::size_t>(mean);
    // P(N = n) = p (1 - p)^(n - 1), p = 1 / mean.
    const double p = 1.0 / mean;
    return 1 + static_cast<std::size_t>(std::floor(std::log(uniform_open0(rng)) / std::log1p(-p)));
  }
};

/// Signed volume fractions phi~_i = eps_i Q_i / V of the metaorders active on
/// one day, with the latent sign correlation they were drawn with.
struct DayFlows {
  std::vector<double> flows;
  double correlation = 0.0;

  std::size_t count() const { return flows.size(); }
  double net() const {
    double s = 0.0;
    for (double f : flows) s += f;
    return s;
  }

  void validate() const {
    if (flows.empty()) throw InvalidArgument("a day needs at least one metaorder");
    for (double f : flows)
      if (!(f != 0.0) || !std::isfinite(f)) throw InvalidArgument("every volume fraction must be non-zero and finite");
    if (!(correlation >= 0.0 && correlation <= 1.0)) throw InvalidArgument("sign correlation must lie in [0, 1]");
  }
};

/// Expected daily return Y f_delta(Phi~) of the aggregated flow.
inline double aggregate_impact(const DayFlows& day, double prefactor = 1.0, double exponent = 0.5) {
  return prefactor * signed_power(day.net(), exponent);
}

/// One day of flows: latent z_i = sqrt(rho) F + sqrt(1 - rho) u_i sets the
/// signs, sizes are drawn independently. Pairwise sign correlation is
/// (2 / pi) arcsin(rho).
inline DayFlows sample_day(std::size_t count, double rho, const SizeLaw& sizes, Rng& rng) {
  if (count < 1) throw InvalidArgument("a day needs at least one metaorder");
  if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidArgument("sign correlation must lie in [0, 1]");
  sizes.validate();
  DayFlows d;
  d.correlation = rho;
  const double common = std::sqrt(rho) * standard_normal(rng), idio = std::sqrt(1.0 - rho);
  for (std::size_t i = 0; i < count; ++i) {
    const double z = common + idio * standard_normal(rng);
    d.flows.push_back((z >= 0.0 ? 1.0 : -1.0) * sizes.sample(rng));
  }
  return d;
}

inline DayFlows sample_day(std::size_t count, double rho, const SizeLaw& sizes, std::uint64_t seed) {
  Rng rng(seed);
  return sample_day(count, rho, sizes, rng);
}

/// Mean pairwise sign product over days with at least two metaorders, with
/// the standard error across those days.
inline std::pair<double, double> sign_correlation(std::span<const DayFlows> days) {
  RunningStats s;
  for (const auto& d : days) {
    const std::size_t n = d.count();
    if (n < 2) continue;
    double plus = 0.0;
    for (double f : d.flows) plus += f > 0.0;
    const double sum = 2.0 * plus - static_cast<double>(n);
    s.push((sum * sum - static_cast<double>(n)) / static_cast<double>(n * (n - 1)));
  }
  if (s.count() == 0) throw InvalidArgument("sign correlation needs days with at least two metaorders");
  return {s.mean(), s.count() > 1 ? s.standard_error() : 0.0};
}

struct ImpactEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct CoImpactModel {
  double rho = 0.0;
  SizeLaw sizes;
  double prefactor = 1.0;  ///< Y
  double exponent = 0.5;   ///< delta

  void validate() const {
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidArgument("sign correlation must lie in [0, 1]");
    sizes.validate();
    if (!(exponent > 0.0)) throw InvalidArgument("impact exponent must be > 0");
  }
};

namespace detail {

/// Co-flow sum_{i != k} phi~_i given the focal latent variable z_k >= 0.
/// (F, u_k) is reflected through the origin when z_k < 0, which maps the
/// negative half-space onto the positive one with the same Gaussian weight.
inline double co_flow(std::size_t others, const CoImpactModel& m, Rng& rng) {
  const double sr = std::sqrt(m.rho), si = std::sqrt(1.0 - m.rho);
  double f = standard_normal(rng);
  const double u = standard_normal(rng);
  if (sr * f + si * u < 0.0) f = -f;
  double s = 0.0;
  for (std::size_t i = 0; i < others; ++i) {
    const double z = sr * f + si * standard_normal(rng);
    s += (z >= 0.0 ? 1.0 : -1.0) * m.sizes.sample(rng);
  }
  return s;
}

inline void check_samples(std::size_t samples) {
  if (samples < 1000) throw InvalidArgument("conditional impact needs at least 1000 Monte Carlo samples");
}

}  // namespace detail

/// I_N(phi~) = E[Y f_delta(phi~ + sum_{i != k} phi~_i) | phi~_k = phi~] by
/// Monte Carlo, with the focal sign equal to sgn(phi~). Negative phi~ reuses
/// the draws of |phi~| and flips the result.
inline ImpactEstimate conditional_impact(double focal, std::size_t count, const CoImpactModel& m, std::size_t samples,
                                         std::uint64_t seed) {
  m.validate();
  detail::check_samples(samples);
  if (count < 1) throw InvalidArgument("a day needs at least one metaorder");
  const double sign = focal < 0.0 ? -1.0 : 1.0, own = std::abs(focal);
  if (count == 1) return {sign * m.prefactor * signed_power(own, m.exponent), 0.0, samples};
  Rng rng(seed);
  RunningStats s;
  for (std::size_t j = 0; j < samples; ++j)
    s.push(m.prefactor * signed_power(own + detail::co_flow(count - 1, m, rng), m.exponent));
  return {sign * s.mean(), s.standard_error(), samples};
}

/// Same as above with N drawn per sample from `counts`.
inline ImpactEstimate conditional_impact(double focal, const CountLaw& counts, const CoImpactModel& m,
                                         std::size_t samples, std::uint64_t seed) {
  m.validate();
  counts.validate();
  detail::check_samples(samples);
  const double sign = focal < 0.0 ? -1.0 : 1.0, own = std::abs(focal);
  Rng rng(seed);
  RunningStats s;
  for (std::size_t j = 0; j < samples; ++j) {
    const std::size_t n = counts.sample(rng);
    s.push(m.prefactor * signed_power(own + detail::co_flow(n - 1, m, rng), m.exponent));
  }
  return {sign * s.mean(), s.standard_error(), samples};
}

/// I_N over a grid of focal fractions with common random numbers.
inline Curve conditional_impact_curve(std::span<const double> focal, std::size_t count, const CoImpactModel& m,
                                      std::size_t samples, std::uint64_t seed) {
  Curve c;
  for (double f : focal) {
    const ImpactEstimate e = conditional_impact(f, count, m, samples, seed);
    c.push(f, e.value, e.std_error, static_cast<std::int64_t>(e.samples));
  }
  return c;
}

/// Jointly Gaussian flows: each phi~_i ~ N(0, scale^2), pairwise correlation c.
struct GaussianFlows {
  double scale = 1e-3;
  double correlation = 0.0;

  void validate(std::size_t count) const {
    if (!(scale > 0.0)) throw InvalidArgument("Gaussian flow scale must be > 0");
    const double lo = count > 1 ? -1.0 / static_cast<double>(count - 1) : -1.0;
    if (!(correlation >= lo && correlation <= 1.0))
      throw InvalidArgument("Gaussian flow correlation must keep the covariance positive semi-definite");
  }

  /// Mean and standard deviation of sum_{i != k} phi~_i given phi~_k.
  std::pair<double, double> co_flow_given(double focal, std::size_t count) const {
    const auto m = static_cast<double>(count - 1);
    const double c = correlation;
    const double var = m * scale * scale * (1.0 + (m - 1.0) * c - m * c * c);
    return {m * c * focal, std::sqrt(std::max(var, 0.0))};
  }
};

/// I_N(phi~) for Gaussian flows: S | phi~_k is Gaussian, so the impact is the
/// one-dimensional integral Y E[f_delta(phi~ + mu + s X)], split at the kink
/// of f_delta.
inline double conditional_impact_gaussian(double focal, std::size_t count, const GaussianFlows& g,
                                          double prefactor = 1.0, double exponent = 0.5) {
  if (count < 1) throw InvalidArgument("a day needs at least one metaorder");
  g.validate(count);
  if (count == 1) return prefactor * signed_power(focal, exponent);
  const auto [mu, sd] = g.co_flow_given(focal, count);
  const double centre = focal + mu;
  if (sd == 0.0) return prefactor * signed_power(centre, exponent);
  // The Gaussian weight beyond |x| = 40 is below 1e-340.
  constexpr double reach = 40.0;
  const double kink = std::clamp(-centre / sd, -reach, reach);
  auto integrand = [&](double x) {
    return signed_power(centre + sd * x, exponent) * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double total = 0.0;
  for (auto [a, b] : {std::pair{-reach, std::min(kink, 0.0)}, std::pair{std::min(kink, 0.0), std::max(kink, 0.0)},
                      std::pair{std::max(kink, 0.0), reach}})
    if (b > a) total += GK::integrate(integrand, a, b, 15, 1e-13);
  return prefactor * total;
}

/// Monte Carlo of the Gaussian case: the factor G is drawn given phi~_k and
/// the other flows from G, independently of the closed form.
inline ImpactEstimate conditional_impact_gaussian_mc(double focal, std::size_t count, const GaussianFlows& g,
                                                     std::size_t samples, std::uint64_t seed, double prefactor = 1.0,
                                                     double exponent = 0.5) {
  if (count < 1) throw InvalidArgument("a day needs at least one metaorder");
  g.validate(count);
  detail::check_samples(samples);
  if (!(g.correlation >= 0.0)) throw InvalidArgument("factor sampling needs a non-negative correlation");
  const double c = g.correlation, x = focal / g.scale;
  Rng rng(seed);
  RunningStats s;
  for (std::size_t j = 0; j < samples; ++j) {
    // x = sqrt(c) G + sqrt(1 - c) u_k  =>  G | x ~ N(sqrt(c) x, 1 - c).
    const double factor = std::sqrt(c) * x + std::sqrt(1.0 - c) * standard_normal(rng);
    double sum = focal;
    for (std::size_t i = 1; i < count; ++i)
      sum += g.scale * (std::sqrt(c) * factor + std::sqrt(1.0 - c) * standard_normal(rng));
    s.push(prefactor * signed_power(sum, exponent));
  }
  return {s.mean(), s.standard_error(), samples};
}

struct CrossoverEstimate {
  double intercept = 0.0;        ///< I_0, small-phi~ limit of the linear branch
  double intercept_stderr = 0.0;
  double linear_slope = 0.0;
  double sqrt_prefactor = 0.0;   ///< A in the branch A sqrt(phi~)
  double crossover = 0.0;        ///< phi* where I_0 + s phi~ = A sqrt(phi~)
  bool tangent = false;          ///< branches never cross; phi* is their closest approach
  std::size_t linear_points = 0; ///< points assigned to the linear branch
};

namespace detail {

struct LineFit {
  double intercept, slope, intercept_var, sse;
};

inline LineFit weighted_line(const Curve& c, std::span<const double> w, std::size_t count, bool known_errors) {
  Eigen::Matrix2d xtwx = Eigen::Matrix2d::Zero();
  Eigen::Vector2d xtwy = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < count; ++i) {
    const Eigen::Vector2d row(1.0, c.x[i]);
    xtwx += w[i] * row * row.transpose();
    xtwy += w[i] * c.value[i] * row;
  }
  const Eigen::Vector2d beta = xtwx.ldlt().solve(xtwy);
  double sse = 0.0;
  for (std::size_t i = 0; i < count; ++i) sse += w[i] * std::pow(c.value[i] - beta(0) - beta(1) * c.x[i], 2);
  double var = xtwx.inverse()(0, 0);
  // Known errors fix the scale; otherwise use the residual variance.
  if (!known_errors) var *= count > 2 ? sse / static_cast<double>(count - 2) : 0.0;
  return {beta(0), beta(1), var, sse};
}

}  // namespace detail

/// Splits an increasing positive curve into a linear branch I_0 + s phi~ and a
/// square-root branch A sqrt(phi~), choosing the split with the smallest total
/// weighted residual (weights 1/stderr^2 when every point has one). phi* is
/// the branch intersection nearest the split. I_0 is then refitted on the
/// points with phi~ <= phi* / 10 when at least three exist, so curvature near
/// the crossover does not leak into the intercept. Points estimated with
/// common random numbers are strongly correlated at small phi~, so the
/// intercept error is never reported below the error of the first point.
/// Throws RegimeError when either branch has fewer than three points.
inline CrossoverEstimate intercept_and_crossover(const Curve& curve) {
  const std::size_t n = curve.size();
  if (n < 6) throw RegimeError("crossover needs at least three points in each regime");
  for (std::size_t i = 0; i < n; ++i)
    if (!(curve.x[i] > 0.0) || (i > 0 && !(curve.x[i] > curve.x[i - 1])))
      throw InvalidArgument("crossover curve needs positive increasing abscissae");
  bool weighted = true;
  for (double se : curve.std_error) weighted = weighted && se > 0.0;
  std::vector<double> w(n, 1.0);
  if (weighted)
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / (curve.std_error[i] * curve.std_error[i]);

  auto sqrt_branch = [&](std::size_t m) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = m; i < n; ++i) {
      num += w[i] * curve.value[i] * std::sqrt(curve.x[i]);
      den += w[i] * curve.x[i];
    }
    const double amp = num / den;
    double sse = 0.0;
    for (std::size_t i = m; i < n; ++i) sse += w[i] * std::pow(curve.value[i] - amp * std::sqrt(curve.x[i]), 2);
    return std::pair{amp, sse};
  };
  std::size_t best_m = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t m = 3; m + 3 <= n; ++m) {
    const double sse = detail::weighted_line(curve, w, m, weighted).sse + sqrt_branch(m).second;
    if (sse < best_sse) best_sse = sse, best_m = m;
  }
  const detail::LineFit line = detail::weighted_line(curve, w, best_m, weighted);
  const double amp = sqrt_branch(best_m).first;

  CrossoverEstimate out;
  out.linear_slope = line.slope;
  out.sqrt_prefactor = amp;
  // Intersection: s x^2 - A x + I_0 = 0 with x = sqrt(phi).
  const double a = line.slope, b = -amp, c = line.intercept;
  std::vector<double> roots;
  if (a == 0.0) {
    if (b != 0.0) roots.push_back(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      roots.push_back(q / a);
      if (q != 0.0) roots.push_back(c / q);
    }
  }
  const double split = std::sqrt(curve.x[best_m - 1] * curve.x[best_m]);
  double phi_star = -1.0;
  for (double r : roots)
    if (r > 0.0 && (phi_star < 0.0 || std::abs(std::log(r * r / split)) < std::abs(std::log(phi_star / split))))
      phi_star = r * r;
  if (phi_star < 0.0) {
    if (!(a > 0.0) || !(amp > 0.0)) throw RegimeError("linear and square-root branches neither cross nor approach");
    phi_star = std::pow(amp / (2.0 * a), 2);
    out.tangent = true;
  }
  out.crossover = phi_star;

  std::size_t inner = 0;
  while (inner < best_m && curve.x[inner] <= phi_star / 10.0) ++inner;
  const detail::LineFit lead = inner >= 3 ? detail::weighted_line(curve, w, inner, weighted) : line;
  out.intercept = lead.intercept;
  out.intercept_stderr = std::max(std::sqrt(std::max(lead.intercept_var, 0.0)), curve.std_error[0]);
  out.linear_points = inner >= 3 ? inner : best_m;
  return out;
}

/// I = I_0 + Y phi^e fitted over a curve: e by Brent, (I_0, Y) by weighted
/// least squares at each e.
struct OffsetPowerFit {
  double intercept = 0.0;
  double intercept_stderr = 0.0;
  double prefactor = 0.0;
  double exponent = 0.0;
  double residual = 0.0;
};

inline OffsetPowerFit fit_offset_power(const Curve& curve, double lo = 0.05, double hi = 1.5) {
  const std::size_t n = curve.size();
  if (n < 4) throw InvalidArgument("offset power fit needs at least four points");
  bool weighted = true;
  for (double se : curve.std_error) weighted = weighted && se > 0.0;
  OffsetPowerFit out;
  auto solve = [&](double e, bool keep) {
    Eigen::Matrix2d xtwx = Eigen::Matrix2d::Zero();
    Eigen::Vector2d xtwy = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = weighted ? 1.0 / (curve.std_error[i] * curve.std_error[i]) : 1.0;
      const Eigen::Vector2d row(1.0, std::pow(curve.x[i], e));
      xtwx += wi * row * row.transpose();
      xtwy += wi * curve.value[i] * row;
    }
    const Eigen::Vector2d beta = xtwx.ldlt().solve(xtwy);
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = weighted ? 1.0 / (curve.std_error[i] * curve.std_error[i]) : 1.0;
      sse += wi * std::pow(curve.value[i] - beta(0) - beta(1) * std::pow(curve.x[i], e), 2);
    }
    if (keep) {
      Eigen::Matrix2d cov = xtwx.inverse();
      if (!weighted) cov *= sse / static_cast<double>(n - 3);
      out = {beta(0), std::sqrt(std::max(cov(0, 0), 0.0)), beta(1), e, sse};
    }
    return sse;
  };
  std::uintmax_t iters = 200;
  const auto best = boost::math::tools::brent_find_minima([&](double e) { return solve(e, false); }, lo, hi, 50, iters);
  solve(best.first, true);
  return out;
}

/// Per-metaorder cost against the co-flow imbalance it faced.
struct ShortfallObservation {
  double shortfall = 0.0;
  double imbalance = 0.0;  ///< eps_k sum_{i != k} phi~_i, positive when the others trade alongside
};

/// OLS of shortfall on imbalance.
inline LinearFit shortfall_vs_imbalance(std::span<const ShortfallObservation> obs) {
  if (obs.size() < 30) throw InvalidArgument("shortfall regression needs at least 30 observations");
  std::vector<double> x, y;
  for (const auto& o : obs) {
    x.push_back(o.imbalance);
    y.push_back(o.shortfall);
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) throw InvalidArgument("imbalance has zero variance");
  return ols(x, y);
}

/// Simulated ensemble of days priced by the aggregate law plus daily noise.
struct CoImpactEnsemble {
  std::vector<DayFlows> days;
  std::vector<double> returns;  ///< Delta p per day

  /// (|phi~_k|, eps_k Delta p) per metaorder.
  std::vector<std::pair<double, double>> signed_responses() const {
    std::vector<std::pair<double, double>> out;
    for (std::size_t d = 0; d < days.size(); ++d)
      for (double f : days[d].flows) out.emplace_back(std::abs(f), (f > 0.0 ? 1.0 : -1.0) * returns[d]);
    return out;
  }

  /// Each metaorder trades at a constant rate over the day while the price
  /// follows Y f_delta(Phi~ t) plus noise, so its cost per unit is
  /// eps_k (Delta p_impact / (1 + delta) + noise).
  std::vector<ShortfallObservation> shortfalls(double prefactor, double exponent) const {
    std::vector<ShortfallObservation> out;
    for (std::size_t d = 0; d < days.size(); ++d) {
      const double net = days[d].net();
      const double drift = prefactor * signed_power(net, exponent);
      const double noise = returns[d] - drift;
      for (double f : days[d].flows) {
        const double eps = f > 0.0 ? 1.0 : -1.0;
        out.push_back({eps * (drift / (1.0 + exponent) + noise), eps * (net - f)});
      }
    }
    return out;
  }
};

inline CoImpactEnsemble simulate_coimpact(std::size_t days, const CountLaw& counts, const CoImpactModel& m,
                                          double noise, std::uint64_t seed) {
  m.validate();
  counts.validate();
  if (!(noise >= 0.0)) throw InvalidArgument("daily noise must be >= 0");
  Rng rng(seed);
  CoImpactEnsemble e;
  e.days.reserve(days);
  e.returns.reserve(days);
  for (std::size_t d = 0; d < days; ++d) {
    e.days.push_back(sample_day(counts.sample(rng), m.rho, m.sizes, rng));
    e.returns.push_back(aggregate_impact(e.days.back(), m.prefactor, m.exponent) + noise * standard_normal(rng));
  }
  return e;
}

/// Mean of eps_k Delta p in logarithmic |phi~| bins; empty bins are skipped.
inline Curve binned_response(std::span<const std::pair<double, double>> responses, std::span<const double> edges) {
  if (edges.size() < 2) throw InvalidArgument("binning needs at least two edges");
  std::vector<RunningStats> acc(edges.size() - 1);
  std::vector<double> xs(edges.size() - 1, 0.0);
  for (const auto& [x, y] : responses) {
    if (x < edges.front() || x > edges.back()) continue;
    auto i = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin());
    i = std::min(i, edges.size() - 1) - 1;
    acc[i].push(y);
    xs[i] += x;
  }
  Curve c;
  for (std::size_t i = 0; i < acc.size(); ++i)
    if (acc[i].count() > 1)
      c.push(xs[i] / static_cast<double>(acc[i].count()), acc[i].mean(), acc[i].standard_error(),
             static_cast<std::int64_t>(acc[i].count()));
  return c;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string day_flows_to_csv(std::span<const DayFlows> days) {
  io::CsvWriter w({"day", "metaorder_id", "phi_tilde"});
  for (std::size_t d = 0; d < days.size(); ++d)
    for (std::size_t i = 0; i < days[d].flows.size(); ++i)
      w.row(static_cast<std::int64_t>(d), static_cast<std::int64_t>(i), days[d].flows[i]);
  return w.str();
}

/// Rows grouped by day in order of first appearance within each day.
inline std::vector<DayFlows> day_flows_from_csv(std::string_view text) {
  const io::Table t = io::parse_csv(text);
  const auto cd = t.column("day"), ci = t.column("metaorder_id"), cf = t.column("phi_tilde");
  std::map<long long, std::map<long long, double>> byday;
  for (const auto& r : t.rows) {
    const long long d = io::parse_int(r[cd], "day"), i = io::parse_int(r[ci], "metaorder_id");
    if (!byday[d].emplace(i, io::parse_double(r[cf], "phi_tilde")).second)
      throw InvalidArgument("duplicate metaorder " + std::to_string(i) + " on day " + std::to_string(d));
  }
  std::vector<DayFlows> out;
  for (const auto& [d, rows] : byday) {
    DayFlows f;
    for (const auto& [i, v] : rows) f.flows.push_back(v);
    f.validate();
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace lobkit
