#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lobkit/core/error.hpp"
#include "lobkit/core/kernel.hpp"
#include "lobkit/core/random.hpp"

namespace lobkit {

/// Lag function kappa(l) for l >= 1.
using LagFunction = std::function<double(std::int64_t)>;

/// History-dependent impact model. `influence[a][b]` is the effect on the
/// current increment, when the current event has type b, of a past event of
/// type a; `support` bounds the lags summed over (0 = the whole history).
struct HdimSpec {
  std::vector<double> immediate;
  std::vector<std::vector<LagFunction>> influence;
  double noise = 0.0;
  std::int64_t support = 0;

  std::size_t types() const { return immediate.size(); }

  void validate() const {
    if (immediate.empty()) throw InvalidArgument("hdim spec needs at least one event type");
    if (influence.size() != types()) throw InvalidArgument("influence matrix has wrong number of rows");
    for (const auto& row : influence)
      if (row.size() != types()) throw InvalidArgument("influence matrix is not square");
    if (!(noise >= 0.0)) throw InvalidArgument("noise volatility must be >= 0");
    if (support < 0) throw InvalidArgument("influence support must be >= 0");
  }

  /// Single type whose influence reproduces the propagator model with kernel g:
  /// kappa(l) = g(l + 1) - g(l).
  static HdimSpec from_propagator(const Kernel& g, double noise = 0.0) {
    HdimSpec s;
    s.immediate = {g(1.0)};
    s.influence = {{[g](std::int64_t l) {
      const auto x = static_cast<double>(l);
      return g(x + 1.0) - g(x);
    }}};
    s.noise = noise;
    return s;
  }
};

/// Price path p_0..p_n with increments
///   p_{t+1} - p_t = G_{type_t}(1) e_t + sum_{s<t} kappa_{type_s, type_t}(t - s) e_s + xi_t.
/// The flow e may be real valued (e.g. a surprise relative to a forecast);
/// `types` may be empty when there is a single type.
inline std::vector<double> hdim_price(std::span<const double> flow, std::span<const std::size_t> types,
                                      const HdimSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (!types.empty() && types.size() != flow.size()) throw InvalidArgument("one type per flow entry required");
  const std::size_t n = flow.size();
  auto type_of = [&](std::size_t t) { return types.empty() ? std::size_t{0} : types[t]; };
  for (std::size_t t = 0; t < n; ++t)
    if (type_of(t) >= spec.types()) throw InvalidArgument("unknown event type " + std::to_string(type_of(t)));
  const std::size_t k = spec.types();
  // Tabulate kappa per (a, b) pair over the lags that can occur.
  const std::size_t max_lag = spec.support > 0 ? std::min<std::size_t>(static_cast<std::size_t>(spec.support), n) : n;
  std::vector<std::vector<double>> table(k * k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      auto& tab = table[a * k + b];
      tab.assign(max_lag + 1, 0.0);
      if (!spec.influence[a][b]) continue;
      for (std::size_t l = 1; l <= max_lag; ++l) tab[l] = spec.influence[a][b](static_cast<std::int64_t>(l));
    }
  Rng rng(seed);
  std::vector<double> p(n + 1, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t b = type_of(t);
    double dp = spec.immediate[b] * flow[t];
    const std::size_t first = t > max_lag ? t - max_lag : 0;
    for (std::size_t s = first; s < t; ++s) dp += table[type_of(s) * k + b][t - s] * flow[s];
    if (spec.noise > 0.0) dp += spec.noise * standard_normal(rng);
    p[t + 1] = p[t] + dp;
  }
  return p;
}

inline std::vector<double> hdim_price(std::span<const int> signs, std::span<const std::size_t> types,
                                      const HdimSpec& spec, std::uint64_t seed) {
  const std::vector<double> flow(signs.begin(), signs.end());
  return hdim_price(flow, types, spec, seed);
}

}  // namespace lobkit
