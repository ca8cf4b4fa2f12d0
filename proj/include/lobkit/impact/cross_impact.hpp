#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lobkit/core/error.hpp"
#include "lobkit/core/kernel.hpp"
#include "lobkit/core/random.hpp"
#include "lobkit/impact/impact_function.hpp"
#include "lobkit/io/csv.hpp"

namespace lobkit {

/// Constant trading rate of one asset over [t_start, t_end).
struct RateSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t asset = 0;
  double rate = 0.0;

  double duration() const { return t_end - t_start; }
  bool operator==(const RateSegment&) const = default;
};

/// A trading strategy: piecewise-constant rates per asset.
using Strategy = std::vector<RateSegment>;

/// Continuous-time multi-asset propagator model:
///   p^i_t = p^i_0 + sum_j int_0^t f^{ij}(rate^j_s) G^{ij}(t - s) ds + sigma^i W^i_t.
struct CrossImpactSpec {
  std::vector<std::vector<ImpactFunction>> impact;
  std::vector<std::vector<Kernel>> kernels;
  std::vector<double> volatility;

  std::size_t assets() const { return kernels.size(); }

  static CrossImpactSpec linear(std::vector<std::vector<Kernel>> kernels) {
    CrossImpactSpec s;
    const std::size_t n = kernels.size();
    s.kernels = std::move(kernels);
    s.impact.assign(n, std::vector<ImpactFunction>(n, ImpactFunction::linear()));
    s.volatility.assign(n, 0.0);
    return s;
  }

  bool is_linear() const {
    for (const auto& row : impact)
      for (const auto& f : row)
        if (!f.is_linear()) return false;
    return true;
  }

  void validate() const {
    const std::size_t n = assets();
    if (n == 0) throw InvalidArgument("cross-impact spec needs at least one asset");
    if (impact.size() != n || volatility.size() != n) throw InvalidArgument("cross-impact spec has inconsistent sizes");
    for (std::size_t i = 0; i < n; ++i) {
      if (kernels[i].size() != n || impact[i].size() != n) throw InvalidArgument("cross-impact matrices must be square");
      for (const auto& f : impact[i]) f.validate();
      if (!(volatility[i] >= 0.0)) throw InvalidArgument("volatility must be >= 0");
    }
  }
};

inline void validate_strategy(const Strategy& s, std::size_t assets) {
  std::vector<std::vector<const RateSegment*>> per(assets);
  for (const RateSegment& seg : s) {
    if (seg.asset >= assets) throw InvalidArgument("strategy references unknown asset " + std::to_string(seg.asset));
    if (!(seg.t_end > seg.t_start) || !(seg.t_start >= 0.0))
      throw InvalidArgument("strategy segments need 0 <= t_start < t_end");
    if (!std::isfinite(seg.rate)) throw InvalidArgument("strategy rates must be finite");
    per[seg.asset].push_back(&seg);
  }
  for (auto& v : per) {
    std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->t_start < b->t_start; });
    for (std::size_t k = 1; k < v.size(); ++k)
      if (v[k]->t_start < v[k - 1]->t_end) throw InvalidArgument("strategy segments of one asset overlap");
  }
}

/// Net position change per asset.
inline std::vector<double> net_volume(const Strategy& s, std::size_t assets) {
  std::vector<double> out(assets, 0.0);
  for (const RateSegment& seg : s) out.at(seg.asset) += seg.rate * seg.duration();
  return out;
}

inline bool is_round_trip(const Strategy& s, std::size_t assets, double tol = 1e-9) {
  std::vector<double> gross(assets, 0.0);
  for (const RateSegment& seg : s) gross.at(seg.asset) += std::abs(seg.rate) * seg.duration();
  const std::vector<double> net = net_volume(s, assets);
  for (std::size_t i = 0; i < assets; ++i)
    if (std::abs(net[i]) > tol * std::max(1.0, gross[i])) return false;
  return true;
}

namespace detail {

/// int_{a0}^{a1} int_{b0}^{min(b1,t)} G(t - s) ds dt, the response accumulated
/// during segment [a0,a1) to unit flow on [b0,b1), built from the second primitive.
inline double segment_interaction(const Kernel& g, double a0, double a1, double b0, double b1) {
  auto k2 = [&g](double u) { return u > 0.0 ? g.second_primitive(u) : 0.0; };
  return k2(a1 - b0) - k2(a0 - b0) - k2(a1 - b1) + k2(a0 - b1);
}

inline double price_from_segment(const Kernel& g, double t, double b0, double b1) {
  if (t <= b0) return 0.0;
  return g.primitive(t - b0) - (t > b1 ? g.primitive(t - b1) : 0.0);
}

}  // namespace detail

/// Prices of every asset at the requested (increasing) times; the segment
/// integrals are exact. Noise is an independent Brownian motion per asset.
inline std::vector<std::vector<double>> multi_tim_price(const Strategy& s, const CrossImpactSpec& spec,
                                                       const std::vector<double>& times, std::uint64_t seed) {
  spec.validate();
  validate_strategy(s, spec.assets());
  for (std::size_t k = 0; k < times.size(); ++k)
    if (!(times[k] >= 0.0) || (k > 0 && !(times[k] > times[k - 1])))
      throw InvalidArgument("evaluation times must be non-negative and increasing");
  const std::size_t n = spec.assets();
  std::vector<std::vector<double>> p(n, std::vector<double>(times.size(), 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (const RateSegment& seg : s) {
      const std::size_t j = seg.asset;
      const double f = spec.impact[i][j](seg.rate);
      if (f == 0.0 || spec.kernels[i][j].is_zero()) continue;
      for (std::size_t k = 0; k < times.size(); ++k)
        p[i][k] += f * detail::price_from_segment(spec.kernels[i][j], times[k], seg.t_start, seg.t_end);
    }
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.volatility[i] == 0.0) continue;
    double w = 0.0, last = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      w += spec.volatility[i] * std::sqrt(times[k] - last) * standard_normal(rng);
      last = times[k];
      p[i][k] += w;
    }
  }
  return p;
}

/// Expected cost sum_{ij} int rate^i_t int_0^t f^{ij}(rate^j_s) G^{ij}(t - s) ds dt,
/// integrated exactly segment by segment. Throws unless the strategy is a
/// round trip in every asset, except when `allow_open` is set.
inline double roundtrip_cost(const Strategy& s, const CrossImpactSpec& spec, bool allow_open = false) {
  spec.validate();
  validate_strategy(s, spec.assets());
  if (!allow_open && !is_round_trip(s, spec.assets()))
    throw InvalidArgument("strategy is not a round trip (net volume non-zero)");
  double cost = 0.0;
  for (const RateSegment& a : s)
    for (const RateSegment& b : s) {
      const Kernel& g = spec.kernels[a.asset][b.asset];
      if (g.is_zero() || b.t_start >= a.t_end) continue;
      const double f = spec.impact[a.asset][b.asset](b.rate);
      cost += a.rate * f * detail::segment_interaction(g, a.t_start, a.t_end, b.t_start, b.t_end);
    }
  return cost;
}

/// Uniform grid of `segments` equal steps on [0, horizon] per asset;
/// rates[i][k] is the rate of asset i on step k.
inline Strategy strategy_on_grid(const std::vector<std::vector<double>>& rates, double horizon) {
  Strategy s;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double h = horizon / static_cast<double>(rates[i].size());
    for (std::size_t k = 0; k < rates[i].size(); ++k)
      if (rates[i][k] != 0.0) s.push_back({h * static_cast<double>(k), h * static_cast<double>(k + 1), i, rates[i][k]});
  }
  return s;
}

/// Matrix M of the cost on a uniform grid for linear impact functions:
/// cost = r' M r with r stacked asset-major (index i * segments + k).
inline Eigen::MatrixXd cost_matrix(const CrossImpactSpec& spec, double horizon, std::size_t segments) {
  spec.validate();
  if (!spec.is_linear()) throw InvalidArgument("cost matrix requires linear impact functions");
  const std::size_t n = spec.assets();
  const double h = horizon / static_cast<double>(segments);
  const auto dim = static_cast<Eigen::Index>(n * segments);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Kernel& g = spec.kernels[i][j];
      if (g.is_zero()) continue;
      // Interaction depends only on the segment offset a - b >= 0.
      std::vector<double> by_offset(segments);
      for (std::size_t d = 0; d < segments; ++d)
        by_offset[d] = spec.impact[i][j].scale *
                       detail::segment_interaction(g, h * static_cast<double>(d), h * static_cast<double>(d + 1), 0.0, h);
      for (std::size_t a = 0; a < segments; ++a)
        for (std::size_t b = 0; b <= a; ++b)
          m(static_cast<Eigen::Index>(i * segments + a), static_cast<Eigen::Index>(j * segments + b)) = by_offset[a - b];
    }
  return m;
}

struct ManipulationGrid {
  double horizon = 1.0;
  std::size_t segments = 20;
  double max_rate = 1.0;
};

struct SearchBudget {
  std::size_t restarts = 8;
  std::size_t iterations = 500;
  std::uint64_t seed = 1;
};

struct ManipulationResult {
  Strategy strategy;
  double cost = 0.0;
  std::vector<double> restart_costs;
};

namespace detail {

/// Euclidean projection onto {|r_k| <= bound, sum_k r_k = 0}.
inline void project_round_trip(std::span<double> r, double bound) {
  auto excess = [&](double mu) {
    double s = 0.0;
    for (double v : r) s += std::clamp(v - mu, -bound, bound);
    return s;
  };
  double lo = *std::min_element(r.begin(), r.end()) - bound;
  double hi = *std::max_element(r.begin(), r.end()) + bound;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  const double mu = 0.5 * (lo + hi);
  for (double& v : r) v = std::clamp(v - mu, -bound, bound);
}

}  // namespace detail

/// Searches for the cheapest round trip on a uniform grid by projected
/// gradient descent (backtracking step) from random starts. The returned cost
/// is the exact cost of the returned strategy.
inline ManipulationResult manipulation_search(const CrossImpactSpec& spec, const ManipulationGrid& grid,
                                              const SearchBudget& budget) {
  spec.validate();
  if (grid.segments < 2 || !(grid.horizon > 0.0) || !(grid.max_rate > 0.0))
    throw InvalidArgument("manipulation grid needs >= 2 segments, positive horizon and rate bound");
  const std::size_t n = spec.assets(), m = grid.segments;
  const double h = grid.horizon / static_cast<double>(m);
  // inter[i][j][d]: interaction of asset-i step a with asset-j step b = a - d.
  std::vector<std::vector<std::vector<double>>> inter(n, std::vector<std::vector<double>>(n, std::vector<double>(m)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t d = 0; d < m; ++d)
        inter[i][j][d] = detail::segment_interaction(spec.kernels[i][j], h * static_cast<double>(d),
                                                     h * static_cast<double>(d + 1), 0.0, h);
  auto cost = [&](const std::vector<double>& r) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t a = 0; a < m; ++a) {
          const double ra = r[i * m + a];
          if (ra == 0.0) continue;
          for (std::size_t b = 0; b <= a; ++b) c += ra * spec.impact[i][j](r[j * m + b]) * inter[i][j][a - b];
        }
    return c;
  };
  auto gradient = [&](const std::vector<double>& r) {
    std::vector<double> g(n * m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const ImpactFunction& f = spec.impact[i][j];
        for (std::size_t a = 0; a < m; ++a)
          for (std::size_t b = 0; b <= a; ++b) {
            const double w = inter[i][j][a - b];
            const double rb = r[j * m + b];
            g[i * m + a] += f(rb) * w;
            const double slope = f.is_linear() ? f.scale
                                               : f.scale * f.exponent * std::pow(std::max(std::abs(rb), 1e-12), f.exponent - 1.0);
            g[j * m + b] += r[i * m + a] * slope * w;
          }
      }
    return g;
  };
  auto project = [&](std::vector<double>& r) {
    for (std::size_t i = 0; i < n; ++i) detail::project_round_trip(std::span<double>(r.data() + i * m, m), grid.max_rate);
  };

  ManipulationResult out;
  out.cost = std::numeric_limits<double>::infinity();
  std::vector<double> best;
  for (std::size_t rs = 0; rs < std::max<std::size_t>(budget.restarts, 1); ++rs) {
    Rng rng(derive_seed(budget.seed, rs));
    std::vector<double> r(n * m);
    for (double& v : r) v = grid.max_rate * (2.0 * uniform01(rng) - 1.0);
    project(r);
    double c = cost(r), step = 1.0 / (h * h + 1e-300);
    for (std::size_t it = 0; it < budget.iterations && step > 1e-16; ++it) {
      const std::vector<double> g = gradient(r);
      bool accepted = false;
      while (step > 1e-16) {
        std::vector<double> trial(n * m);
        for (std::size_t k = 0; k < trial.size(); ++k) trial[k] = r[k] - step * g[k];
        project(trial);
        const double ct = cost(trial);
        if (ct < c - 1e-15 * std::abs(c)) {
          r = std::move(trial);
          c = ct;
          step *= 1.5;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }
    out.restart_costs.push_back(c);
    if (c < out.cost) out.cost = c, best = r;
  }
  std::vector<std::vector<double>> rates(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) rates[i][k] = best[i * m + k];
  out.strategy = strategy_on_grid(rates, grid.horizon);
  out.cost = roundtrip_cost(out.strategy, spec, true);
  return out;
}

/// `t_start,t_end,asset,rate`
inline std::string strategy_to_csv(const Strategy& s) {
  io::CsvWriter w({"t_start", "t_end", "asset", "rate"});
  for (const RateSegment& seg : s) w.row(seg.t_start, seg.t_end, seg.asset, seg.rate);
  return w.str();
}

inline Strategy strategy_from_csv(std::string_view text) {
  const io::Table t = io::parse_csv(text);
  const auto c0 = t.column("t_start"), c1 = t.column("t_end"), c2 = t.column("asset"), c3 = t.column("rate");
  Strategy s;
  for (const auto& r : t.rows) {
    const long long asset = io::parse_int(r[c2], "asset");
    if (asset < 0) throw InvalidArgument("asset index must be >= 0");
    s.push_back({io::parse_double(r[c0]), io::parse_double(r[c1]), static_cast<std::size_t>(asset), io::parse_double(r[c3])});
  }
  return s;
}

}  // namespace lobkit
