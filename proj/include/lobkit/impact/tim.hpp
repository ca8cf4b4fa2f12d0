#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "lobkit/core/error.hpp"
#include "lobkit/core/kernel.hpp"
#include "lobkit/core/random.hpp"
#include "lobkit/impact/impact_function.hpp"

namespace lobkit {

/// Order in event time: integer time stamp, event type and signed volume.
struct TimEvent {
  std::int64_t time = 0;
  std::size_t type = 0;
  double volume = 0.0;
};

/// Discrete transient impact model: one kernel and one impact function per event type.
struct ImpactSpec {
  std::vector<Kernel> kernels;
  std::vector<ImpactFunction> impact;
  double noise = 0.0;  ///< per-step volatility of the diffusive component
  double start_price = 0.0;

  static ImpactSpec single(Kernel g, ImpactFunction f = {}, double noise = 0.0) {
    return ImpactSpec{{std::move(g)}, {f}, noise, 0.0};
  }

  std::size_t types() const { return kernels.size(); }

  void validate() const {
    if (kernels.empty()) throw InvalidArgument("impact spec needs at least one event type");
    if (impact.size() != kernels.size()) throw InvalidArgument("one impact function per event type required");
    for (const auto& f : impact) f.validate();
    if (!(noise >= 0.0)) throw InvalidArgument("noise volatility must be >= 0");
  }
};

namespace detail {

/// out[t] += sum_{s<t} kernel(t - s) x[s] for t = 0..out.size()-1.
inline void causal_convolve(const Kernel& g, std::span<const double> x, std::span<double> out) {
  const std::size_t n = out.size();
  std::vector<double> lagged(n, 0.0);
  for (std::size_t l = 1; l < n; ++l) lagged[l] = g(static_cast<double>(l));
  std::size_t active = 0;
  for (double v : x) active += v != 0.0;
  if (static_cast<double>(active) * static_cast<double>(n) <= 5e7) {
    for (std::size_t s = 0; s < x.size() && s < n; ++s) {
      if (x[s] == 0.0) continue;
      for (std::size_t t = s + 1; t < n; ++t) out[t] += lagged[t - s] * x[s];
    }
    return;
  }
  std::size_t m = 1;
  while (m < 2 * n) m <<= 1;
  std::vector<double> a(m, 0.0), b(m, 0.0);
  for (std::size_t s = 0; s < x.size() && s < n; ++s) a[s] = x[s];
  for (std::size_t l = 0; l < n; ++l) b[l] = lagged[l];
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> fa, fb;
  fft.fwd(fa, a);
  fft.fwd(fb, b);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<double> c;
  fft.inv(c, fa);
  for (std::size_t t = 0; t < n; ++t) out[t] += c[t];
}

inline std::vector<double> cumulative_noise(double sigma, std::size_t steps, std::uint64_t seed) {
  std::vector<double> w(steps + 1, 0.0);
  if (sigma == 0.0) return w;
  Rng rng(seed);
  for (std::size_t t = 1; t <= steps; ++t) w[t] = w[t - 1] + sigma * standard_normal(rng);
  return w;
}

}  // namespace detail

/// Price path p_0..p_horizon of the discrete transient impact model
///   p_t = p_start + sum_{s<t} G_{type_s}(t - s) f_{type_s}(v_s) + sum_{u<=t} xi_u,
/// where xi are i.i.d. N(0, noise^2). Event times must be non-decreasing and
/// lie in [0, horizon); several events may share a time stamp.
inline std::vector<double> tim_price(std::span<const TimEvent> events, const ImpactSpec& spec, std::int64_t horizon,
                                     std::uint64_t seed) {
  spec.validate();
  if (horizon < 0) throw InvalidArgument("horizon must be >= 0");
  const auto n = static_cast<std::size_t>(horizon) + 1;
  std::vector<std::vector<double>> flow(spec.types());
  std::int64_t last = 0;
  for (const TimEvent& e : events) {
    if (e.type >= spec.types()) throw InvalidArgument("unknown event type " + std::to_string(e.type));
    if (e.time < last) throw InvalidArgument("events must be time-ordered");
    if (e.time >= horizon) throw InvalidArgument("event time beyond the horizon");
    last = e.time;
    auto& x = flow[e.type];
    if (x.empty()) x.assign(n, 0.0);
    x[static_cast<std::size_t>(e.time)] += spec.impact[e.type](e.volume);
  }
  std::vector<double> p = detail::cumulative_noise(spec.noise, n - 1, seed);
  for (double& v : p) v += spec.start_price;
  for (std::size_t k = 0; k < spec.types(); ++k)
    if (!flow[k].empty()) detail::causal_convolve(spec.kernels[k], flow[k], p);
  return p;
}

/// One unit-volume order per step with the given signs, all of type 0.
inline std::vector<TimEvent> unit_orders(std::span<const int> signs) {
  std::vector<TimEvent> out;
  out.reserve(signs.size());
  for (std::size_t t = 0; t < signs.size(); ++t)
    out.push_back({static_cast<std::int64_t>(t), 0, static_cast<double>(signs[t])});
  return out;
}

/// Signs and prices of a single-type model whose order flow reacts to the
/// latest price move: with probability `chase` the sign of order t is the sign
/// of p_t - p_{t-1}, otherwise a fair coin. Prices follow the propagator model
/// exactly (sequential O(n^2) evaluation).
struct ChasingFlow {
  std::vector<int> signs;
  std::vector<double> prices;  ///< p_0..p_n, p_t just before order t
};

inline ChasingFlow simulate_price_chasing(const Kernel& g, double noise, double chase, std::size_t n,
                                          std::uint64_t seed) {
  if (!(chase >= 0.0 && chase <= 1.0)) throw InvalidArgument("chase probability must lie in [0,1]");
  Rng rng(seed);
  std::vector<double> lagged(n + 1, 0.0);
  for (std::size_t l = 1; l <= n; ++l) lagged[l] = g(static_cast<double>(l));
  ChasingFlow out;
  out.signs.reserve(n);
  out.prices.assign(n + 1, 0.0);
  std::vector<double> impact(n + 1, 0.0);
  double w = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double move = t > 0 ? out.prices[t] - out.prices[t - 1] : 0.0;
    int s = random_sign(rng);
    if (t > 0 && move != 0.0 && bernoulli(rng, chase)) s = move > 0.0 ? 1 : -1;
    out.signs.push_back(s);
    for (std::size_t u = t + 1; u <= n; ++u) impact[u] += lagged[u - t] * s;
    w += noise * standard_normal(rng);
    out.prices[t + 1] = impact[t + 1] + w;
  }
  return out;
}

}  // namespace lobkit
