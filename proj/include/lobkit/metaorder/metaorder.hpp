#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "lobkit/core/error.hpp"
#include "lobkit/core/kernel.hpp"
#include "lobkit/core/random.hpp"
#include "lobkit/core/schedule.hpp"
#include "lobkit/core/stats.hpp"
#include "lobkit/flow/zero_intelligence.hpp"
#include "lobkit/impact/cross_impact.hpp"
#include "lobkit/impact/impact_function.hpp"
#include "lobkit/io/csv.hpp"
#include "lobkit/llob/llob.hpp"
#include "lobkit/lob/book.hpp"

namespace lobkit {

/// A metaorder of sign eps and size Q traded over duration T (in days) in a
/// stock with daily volume V and daily volatility sigma. phi = Q / V is the
/// volume fraction and eta = phi / T the participation rate.
struct Metaorder {
  int sign = 1;
  double size = 0.0;
  double daily_volume = 1.0;
  double volatility = 1.0;
  double duration = 1.0;

  double fraction() const { return size / daily_volume; }
  double participation() const { return fraction() / duration; }

  static Metaorder from_participation(int sign, double fraction, double participation, double daily_volume = 1.0,
                                      double volatility = 1.0) {
    return {sign, fraction * daily_volume, daily_volume, volatility, fraction / participation};
  }

  void validate() const {
    if (sign != 1 && sign != -1) throw InvalidArgument("metaorder sign must be +1 or -1");
    if (!(size >= 0.0) || !std::isfinite(size)) throw InvalidArgument("metaorder size must be finite and >= 0");
    if (!(daily_volume > 0.0) || !(volatility > 0.0) || !(duration > 0.0))
      throw InvalidArgument("daily volume, volatility and duration must be > 0");
    if (size > 0.0 && !(participation() > 0.0 && participation() <= 1.0 + 1e-12))
      throw InvalidArgument("participation rate must lie in (0, 1], got " + io::format_double(participation()));
  }
};

/// How a metaorder is sliced and observed.
struct ExecutionPlan {
  MetaorderSchedule::Shape shape = MetaorderSchedule::Shape::Constant;
  double decay = 2.0;            ///< front-loaded exponent c, rate ~ (1 - t/T)^c
  std::size_t children = 100;    ///< child orders, one per equal time slice
  std::size_t samples = 51;      ///< path points on [0, T], both ends included
  double post_horizon = 0.0;     ///< observation after execution, in units of T
  std::size_t post_samples = 50; ///< path points on (T, T (1 + post_horizon)]

  static ExecutionPlan constant() { return {}; }
  static ExecutionPlan front_loaded(double decay) {
    ExecutionPlan p;
    p.shape = MetaorderSchedule::Shape::FrontLoaded;
    p.decay = decay;
    return p;
  }

  MetaorderSchedule schedule(const Metaorder& mo) const {
    MetaorderSchedule s{mo.size, mo.duration, mo.sign, shape, decay};
    s.validate();
    return s;
  }
};

/// Child orders: slice k trades `sizes[k]` uniformly over [starts[k], ends[k]).
struct ChildOrders {
  std::vector<double> starts;
  std::vector<double> ends;
  std::vector<double> sizes;

  double total() const {
    double s = 0.0;
    for (double v : sizes) s += v;
    return s;
  }
};

/// Equal time slices carrying the scheduled volume of each slice. With
/// `integral` set, sizes are whole shares (rounded cumulative volume) and
/// empty slices are dropped.
inline ChildOrders slice_schedule(const Metaorder& mo, const ExecutionPlan& plan, bool integral = false) {
  const MetaorderSchedule s = plan.schedule(mo);
  if (plan.children < 1) throw InvalidArgument("a metaorder needs at least one child order");
  ChildOrders c;
  if (mo.size == 0.0) return c;
  const auto n = static_cast<double>(plan.children);
  double done = 0.0;
  for (std::size_t k = 0; k < plan.children; ++k) {
    const double a = mo.duration * static_cast<double>(k) / n;
    const double b = k + 1 == plan.children ? mo.duration : mo.duration * static_cast<double>(k + 1) / n;
    double cum = k + 1 == plan.children ? mo.size : s.executed(b);
    if (integral) cum = std::round(cum);
    const double v = cum - done;
    done = cum;
    if (integral && v == 0.0) continue;
    c.starts.push_back(a);
    c.ends.push_back(b);
    c.sizes.push_back(v);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Market models

/// Continuous propagator: log p_t = sum_k f(eps eta_k) int_{slice k} G(t - s) ds + sigma W_t,
/// where eta_k is the participation rate of child k (its trading rate over V).
struct TimMarket {
  Kernel kernel = Kernel::power_law(1.0, 0.5, 0.0);
  ImpactFunction impact = ImpactFunction::power(0.5);
  double volatility = 0.0;  ///< per square-root day
};

/// Latent order book in the slow-book limit; y(t) is added to log p. The
/// metaorder size is in the book's order units and time in days.
struct LatentBookMarket {
  LlobParams params;
  double volatility = 0.0;
  TrajectoryOptions options;
};

/// Zero-intelligence book with the child orders sent as market orders at the
/// start of each slice; `time_scale` book time units per day.
struct BookMarket {
  PoissonRates background;
  BookState initial = BookState::symmetric(200, 0.01, 99, 1, 10, 5);
  double time_scale = 1.0;
};

using MarketModel = std::variant<TimMarket, LatentBookMarket, BookMarket>;

struct ExecutionRecord {
  Metaorder order;
  ChildOrders children;
  std::vector<double> times;      ///< path times from the start of execution
  std::vector<double> log_price;
  double logp_start = 0.0;        ///< at t = 0
  double logp_end = 0.0;          ///< at t = T
  double peak = 0.0;              ///< eps (log p_T - log p_0), impact at the end of execution
  double max_excursion = 0.0;     ///< max over [0, T] of eps (log p_t - log p_0)
  std::string path_ref;

  /// eps (log p_T - log p_0).
  double impact() const { return order.sign * (logp_end - logp_start); }

  /// Linear interpolation of the recorded path.
  double log_price_at(double t) const {
    if (times.empty()) throw InvalidArgument("record has no price path");
    if (t < times.front() - 1e-12 || t > times.back() * (1.0 + 1e-12) + 1e-12)
      throw InvalidArgument("time " + io::format_double(t) + " outside the recorded path");
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return log_price.front();
    if (it == times.end()) return log_price.back();
    const auto i = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
    return (1.0 - w) * log_price[i - 1] + w * log_price[i];
  }

  /// eps (log p_t - log p_0).
  double signed_move(double t) const { return order.sign * (log_price_at(t) - logp_start); }
};

namespace detail {

inline std::vector<double> path_times(double duration, const ExecutionPlan& plan) {
  if (plan.samples < 2) throw InvalidArgument("a path needs at least two samples on [0, T]");
  if (!(plan.post_horizon >= 0.0)) throw InvalidArgument("post horizon must be >= 0");
  std::vector<double> t;
  for (std::size_t k = 0; k < plan.samples; ++k)
    t.push_back(k + 1 == plan.samples ? duration
                                      : duration * static_cast<double>(k) / static_cast<double>(plan.samples - 1));
  if (plan.post_horizon > 0.0) {
    if (plan.post_samples < 1) throw InvalidArgument("post horizon needs at least one sample");
    for (std::size_t k = 1; k <= plan.post_samples; ++k)
      t.push_back(duration * (1.0 + plan.post_horizon * static_cast<double>(k) / static_cast<double>(plan.post_samples)));
  }
  return t;
}

inline Strategy child_strategy(const Metaorder& mo, const ChildOrders& c, double offset = 0.0) {
  Strategy s;
  for (std::size_t k = 0; k < c.sizes.size(); ++k) {
    if (c.sizes[k] == 0.0) continue;
    const double rate = c.sizes[k] / (c.ends[k] - c.starts[k]) / mo.daily_volume;
    s.push_back({offset + c.starts[k], offset + c.ends[k], 0, mo.sign * rate});
  }
  return s;
}

inline std::vector<double> brownian(std::span<const double> times, double sigma, std::uint64_t seed) {
  std::vector<double> w(times.size(), 0.0);
  if (sigma == 0.0) return w;
  Rng rng(seed);
  double acc = 0.0, last = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    acc += sigma * std::sqrt(times[k] - last) * standard_normal(rng);
    last = times[k];
    w[k] = acc;
  }
  return w;
}

inline std::vector<double> run_model(const TimMarket& m, const Metaorder& mo, const ChildOrders& c,
                                     const ExecutionPlan&, const std::vector<double>& t, std::uint64_t seed) {
  CrossImpactSpec spec;
  spec.kernels = {{m.kernel}};
  spec.impact = {{m.impact}};
  spec.volatility = {m.volatility};
  return multi_tim_price(child_strategy(mo, c), spec, t, seed)[0];
}

inline std::vector<double> run_model(const LatentBookMarket& m, const Metaorder& mo, const ChildOrders&,
                                     const ExecutionPlan& plan, const std::vector<double>& t, std::uint64_t seed) {
  TrajectoryOptions opt = m.options;
  opt.horizon = t.back();
  std::vector<double> p = price_trajectory_selfconsistent(m.params, plan.schedule(mo), t, opt).displacement;
  const std::vector<double> w = brownian(t, m.volatility, seed);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] += w[k];
  return p;
}

inline std::vector<double> run_model(const BookMarket& m, const Metaorder& mo, const ChildOrders& c,
                                     const ExecutionPlan&, const std::vector<double>& t, std::uint64_t seed) {
  if (!(m.time_scale > 0.0)) throw InvalidArgument("book time scale must be > 0");
  MarketOrderSource src;
  for (std::size_t k = 0; k < c.sizes.size(); ++k) {
    src.times.push_back(c.starts[k] * m.time_scale);
    src.sizes.push_back(static_cast<std::int64_t>(c.sizes[k]));
    src.signs.push_back(mo.sign);
    src.traders.push_back("metaorder");
  }
  const EventStream events =
      simulate_zi_with_market_orders(m.background, src, m.initial, t.back() * m.time_scale, seed);
  BookState book = m.initial;
  std::vector<double> p;
  std::size_t next = 0;
  for (double tk : t) {
    while (next < events.size() && events[next].time <= tk * m.time_scale) book.apply(events[next++]);
    p.push_back(std::log(book.midprice()));
  }
  return p;
}

}  // namespace detail

/// Executes explicit child orders in a market model and records the log-price
/// path on [0, T (1 + post_horizon)].
inline ExecutionRecord execute_children(const Metaorder& mo, ChildOrders children, const ExecutionPlan& plan,
                                        const MarketModel& model, std::uint64_t seed) {
  mo.validate();
  if (children.starts.size() != children.sizes.size() || children.ends.size() != children.sizes.size())
    throw InvalidArgument("child order columns differ in length");
  for (std::size_t k = 0; k < children.sizes.size(); ++k)
    if (!(children.sizes[k] >= 0.0) || !(children.ends[k] > children.starts[k]) || children.starts[k] < 0.0 ||
        children.ends[k] > mo.duration * (1.0 + 1e-12))
      throw InvalidArgument("child orders must have non-negative sizes on slices inside [0, T]");
  const double total = children.total();
  if (std::abs(total - mo.size) > 1e-9 * std::max(1.0, mo.size))
    throw InvalidArgument("child orders sum to " + io::format_double(total) + " but the metaorder size is " +
                          io::format_double(mo.size));
  if (std::holds_alternative<BookMarket>(model))
    for (double v : children.sizes)
      if (v != std::floor(v)) throw InvalidArgument("book execution needs whole-share child orders");

  ExecutionRecord r;
  r.order = mo;
  r.children = std::move(children);
  r.times = detail::path_times(mo.duration, plan);
  if (mo.size == 0.0 && !std::holds_alternative<BookMarket>(model)) {
    r.log_price.assign(r.times.size(), 0.0);
  } else {
    r.log_price = std::visit([&](const auto& m) { return detail::run_model(m, mo, r.children, plan, r.times, seed); },
                             model);
  }
  r.logp_start = r.log_price.front();
  r.logp_end = r.log_price[plan.samples - 1];
  r.peak = r.impact();
  for (std::size_t k = 0; k < plan.samples; ++k)
    r.max_excursion = std::max(r.max_excursion, mo.sign * (r.log_price[k] - r.logp_start));
  return r;
}

inline ExecutionRecord execute_metaorder(const Metaorder& mo, const ExecutionPlan& plan, const MarketModel& model,
                                         std::uint64_t seed) {
  mo.validate();
  return execute_children(mo, slice_schedule(mo, plan, std::holds_alternative<BookMarket>(model)), plan, model, seed);
}

/// Signs of consecutive daily metaorders: each day repeats the previous sign
/// with probability `persistence`, otherwise draws a fresh fair sign.
inline std::vector<int> persistent_signs(std::size_t days, double persistence, std::uint64_t seed) {
  if (!(persistence >= 0.0 && persistence <= 1.0)) throw InvalidArgument("sign persistence must lie in [0, 1]");
  Rng rng(seed);
  std::vector<int> s;
  for (std::size_t d = 0; d < days; ++d)
    s.push_back(d > 0 && bernoulli(rng, persistence) ? s.back() : random_sign(rng));
  return s;
}

/// Consecutive daily metaorders (day d starts at d * day_length) executed in
/// one propagator path, so each record's post-execution window contains the
/// impact of the following days' metaorders.
inline std::vector<ExecutionRecord> execute_daily_sequence(std::span<const Metaorder> days, double day_length,
                                                           const ExecutionPlan& plan, const TimMarket& model,
                                                           std::uint64_t seed) {
  if (!(day_length > 0.0)) throw InvalidArgument("day length must be > 0");
  Strategy all;
  std::vector<ChildOrders> children;
  for (std::size_t d = 0; d < days.size(); ++d) {
    days[d].validate();
    if (days[d].duration > day_length) throw InvalidArgument("a daily metaorder must end within its day");
    children.push_back(slice_schedule(days[d], plan));
    const Strategy s = detail::child_strategy(days[d], children.back(), static_cast<double>(d) * day_length);
    all.insert(all.end(), s.begin(), s.end());
  }
  std::vector<double> grid;
  std::vector<std::size_t> offset;
  for (std::size_t d = 0; d < days.size(); ++d) {
    offset.push_back(grid.size());
    for (double t : detail::path_times(days[d].duration, plan)) grid.push_back(static_cast<double>(d) * day_length + t);
  }
  // Path grids of consecutive days may interleave; evaluate on the sorted union.
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  CrossImpactSpec spec;
  spec.kernels = {{model.kernel}};
  spec.impact = {{model.impact}};
  spec.volatility = {model.volatility};
  const std::vector<double> p = multi_tim_price(all, spec, sorted, seed)[0];
  auto price_at = [&](double t) {
    return p[static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin())];
  };
  std::vector<ExecutionRecord> out;
  for (std::size_t d = 0; d < days.size(); ++d) {
    ExecutionRecord r;
    r.order = days[d];
    r.children = children[d];
    const double start = static_cast<double>(d) * day_length;
    const std::size_t n = (d + 1 < days.size() ? offset[d + 1] : grid.size()) - offset[d];
    for (std::size_t k = 0; k < n; ++k) {
      r.times.push_back(grid[offset[d] + k] - start);
      r.log_price.push_back(price_at(grid[offset[d] + k]));
    }
    r.logp_start = r.log_price.front();
    r.logp_end = r.log_price[plan.samples - 1];
    r.peak = r.impact();
    for (std::size_t k = 0; k < plan.samples; ++k)
      r.max_excursion = std::max(r.max_excursion, r.order.sign * (r.log_price[k] - r.logp_start));
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Impact curves and surfaces

struct ImpactBin {
  double lower = 0.0, upper = 0.0;
  double phi = 0.0;  ///< mean volume fraction in the bin
  double impact = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

struct ImpactCurve {
  std::vector<ImpactBin> bins;
  std::vector<std::string> notices;
};

struct SurfaceCell {
  double duration_lower = 0.0, duration_upper = 0.0;
  double participation_lower = 0.0, participation_upper = 0.0;
  double duration = 0.0, participation = 0.0;  ///< bin means
  double impact = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

struct ImpactSurface {
  std::vector<SurfaceCell> cells;
  std::vector<std::string> notices;
};

namespace detail {

/// Bin of x in increasing edges: [e_i, e_{i+1}), the last bin closed.
inline std::optional<std::size_t> bin_of(std::span<const double> edges, double x) {
  if (x < edges.front() || x > edges.back()) return std::nullopt;
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  const auto i = static_cast<std::size_t>(it - edges.begin());
  return i >= edges.size() ? edges.size() - 2 : i - 1;
}

inline void check_edges(std::span<const double> edges, const char* what) {
  if (edges.size() < 2) throw InvalidArgument(std::string(what) + " binning needs at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw InvalidArgument(std::string(what) + " bin edges must increase");
}

struct BinAccumulator {
  RunningStats impact;
  double x = 0.0, y = 0.0;
};

inline double bin_stderr(const RunningStats& s) { return s.count() > 1 ? s.standard_error() : 0.0; }

}  // namespace detail

/// Per-bin mean of eps Delta log p over volume-fraction bins. Empty bins are
/// dropped with a notice; records outside the edges are ignored with a notice.
inline ImpactCurve measure_impact(std::span<const ExecutionRecord> records, std::span<const double> phi_edges) {
  detail::check_edges(phi_edges, "volume-fraction");
  std::vector<detail::BinAccumulator> acc(phi_edges.size() - 1);
  std::size_t outside = 0;
  for (const auto& r : records) {
    const auto b = detail::bin_of(phi_edges, r.order.fraction());
    if (!b) {
      ++outside;
      continue;
    }
    acc[*b].impact.push(r.impact());
    acc[*b].x += r.order.fraction();
  }
  ImpactCurve c;
  if (outside > 0) c.notices.push_back(std::to_string(outside) + " records outside the bin edges ignored");
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const auto n = acc[i].impact.count();
    if (n == 0) {
      c.notices.push_back("empty bin [" + io::format_double(phi_edges[i]) + ", " + io::format_double(phi_edges[i + 1]) +
                          ") dropped");
      continue;
    }
    c.bins.push_back({phi_edges[i], phi_edges[i + 1], acc[i].x / static_cast<double>(n), acc[i].impact.mean(),
                      detail::bin_stderr(acc[i].impact), n});
  }
  return c;
}

/// Per-cell mean of eps Delta log p over (T, eta) bins.
inline ImpactSurface measure_impact_surface(std::span<const ExecutionRecord> records,
                                            std::span<const double> duration_edges,
                                            std::span<const double> participation_edges) {
  detail::check_edges(duration_edges, "duration");
  detail::check_edges(participation_edges, "participation");
  const std::size_t nt = duration_edges.size() - 1, ne = participation_edges.size() - 1;
  std::vector<detail::BinAccumulator> acc(nt * ne);
  std::size_t outside = 0;
  for (const auto& r : records) {
    const auto bt = detail::bin_of(duration_edges, r.order.duration);
    const auto be = detail::bin_of(participation_edges, r.order.participation());
    if (!bt || !be) {
      ++outside;
      continue;
    }
    auto& a = acc[*bt * ne + *be];
    a.impact.push(r.impact());
    a.x += r.order.duration;
    a.y += r.order.participation();
  }
  ImpactSurface s;
  if (outside > 0) s.notices.push_back(std::to_string(outside) + " records outside the bin edges ignored");
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t j = 0; j < ne; ++j) {
      const auto& a = acc[i * ne + j];
      const auto n = a.impact.count();
      if (n == 0) {
        s.notices.push_back("empty cell T in [" + io::format_double(duration_edges[i]) + ", " +
                            io::format_double(duration_edges[i + 1]) + "), eta in [" +
                            io::format_double(participation_edges[j]) + ", " +
                            io::format_double(participation_edges[j + 1]) + ") dropped");
        continue;
      }
      const double dn = static_cast<double>(n);
      s.cells.push_back({duration_edges[i], duration_edges[i + 1], participation_edges[j], participation_edges[j + 1],
                         a.x / dn, a.y / dn, a.impact.mean(), detail::bin_stderr(a.impact), n});
    }
  return s;
}

// ---------------------------------------------------------------------------
// Fits

struct SqrtLawFit {
  double exponent = 0.0;
  double exponent_stderr = 0.0;
  double prefactor = 0.0;       ///< Y with the exponent free
  double prefactor_half = 0.0;  ///< Y with the exponent fixed to 1/2
  double r_squared = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
  std::string warning;
};

/// Log-log regression of I / sigma = Y phi^e over the bins of a curve.
inline SqrtLawFit fit_sqrt_law(const ImpactCurve& curve, double volatility) {
  if (!(volatility > 0.0)) throw InvalidArgument("volatility must be > 0");
  std::vector<double> lx, ly;
  SqrtLawFit f;
  for (const auto& b : curve.bins) {
    if (b.impact > 0.0 && b.phi > 0.0) {
      lx.push_back(std::log(b.phi));
      ly.push_back(std::log(b.impact / volatility));
    } else {
      ++f.excluded;
    }
  }
  if (f.excluded > 0) f.warning = std::to_string(f.excluded) + " non-positive bins excluded from the log-log fit";
  if (lx.size() < 2) throw InvalidArgument("square-root fit needs at least two positive bins");
  const LinearFit lf = ols(lx, ly);
  f.used = lx.size();
  f.exponent = lf.slope;
  f.exponent_stderr = lf.slope_stderr;
  f.prefactor = std::exp(lf.intercept);
  f.r_squared = lf.r_squared;
  double s = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) s += ly[i] - 0.5 * lx[i];
  f.prefactor_half = std::exp(s / static_cast<double>(lx.size()));
  return f;
}

/// One observation for the surface regression.
struct SurfacePoint {
  double duration = 0.0;
  double participation = 0.0;
  double impact = 0.0;
};

struct SurfaceFit {
  double amplitude = 0.0;  ///< A
  double duration_exponent = 0.0;
  double participation_exponent = 0.0;
  double amplitude_log_stderr = 0.0;
  double duration_stderr = 0.0;
  double participation_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
};

/// Least squares of log I on (log T, log eta): I = A T^dT eta^deta.
/// Throws when log T and log eta are collinear (e.g. every point shares phi).
inline SurfaceFit fit_surface(std::span<const SurfacePoint> points) {
  std::vector<double> lt, le, li;
  SurfaceFit f;
  for (const auto& p : points) {
    if (!(p.duration > 0.0) || !(p.participation > 0.0)) throw InvalidArgument("surface points need T, eta > 0");
    if (p.impact > 0.0) {
      lt.push_back(std::log(p.duration));
      le.push_back(std::log(p.participation));
      li.push_back(std::log(p.impact));
    } else {
      ++f.excluded;
    }
  }
  const std::size_t n = li.size();
  if (n < 4) throw InvalidArgument("surface fit needs at least four positive points");
  const double vt = sample_variance(lt), ve = sample_variance(le);
  if (!(vt > 0.0) || !(ve > 0.0)) throw InvalidArgument("surface fit needs spread in both T and eta");
  double cov = 0.0;
  const double mt = mean(lt), me = mean(le);
  for (std::size_t i = 0; i < n; ++i) cov += (lt[i] - mt) * (le[i] - me);
  cov /= static_cast<double>(n - 1);
  if (1.0 - std::abs(cov) / std::sqrt(vt * ve) < 1e-10)
    throw InvalidArgument("T and eta are collinear (all points share the same volume fraction)");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    X(r, 0) = 1.0;
    X(r, 1) = lt[i];
    X(r, 2) = le[i];
    y(r) = li[i];
  }
  const MultiFit m = least_squares(X, y);
  f.amplitude = std::exp(m.coef(0));
  f.duration_exponent = m.coef(1);
  f.participation_exponent = m.coef(2);
  f.amplitude_log_stderr = m.stderr_of(0);
  f.duration_stderr = m.stderr_of(1);
  f.participation_stderr = m.stderr_of(2);
  f.r_squared = m.r_squared;
  f.used = n;
  return f;
}

inline SurfaceFit fit_surface(std::span<const ExecutionRecord> records) {
  std::vector<SurfacePoint> pts;
  for (const auto& r : records) pts.push_back({r.order.duration, r.order.participation(), r.impact()});
  return fit_surface(pts);
}

inline SurfaceFit fit_surface(const ImpactSurface& s) {
  std::vector<SurfacePoint> pts;
  for (const auto& c : s.cells) pts.push_back({c.duration, c.participation, c.impact});
  return fit_surface(pts);
}

namespace detail {

/// Weighted least squares of y = a h(x; theta) over a scalar shape theta:
/// a is profiled out, theta found by a scan followed by Brent's method.
struct ProfiledFit {
  double amplitude = 0.0, shape = 0.0, residual = 0.0;
  bool at_edge = false;
  int evaluations = 0;
};

template <class Basis>
ProfiledFit profiled_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w,
                         const Basis& basis, double lo, double hi) {
  ProfiledFit out;
  auto eval = [&](double theta, double& amp) {
    ++out.evaluations;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double h = basis(x[i], theta);
      num += w[i] * y[i] * h;
      den += w[i] * h * h;
    }
    amp = den > 0.0 ? num / den : 0.0;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sse += w[i] * std::pow(y[i] - amp * basis(x[i], theta), 2);
    return sse;
  };
  constexpr int scan = 60;
  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity(), amp = 0.0;
  for (int i = 0; i <= scan; ++i) {
    const double s = eval(lo + (hi - lo) * i / scan, amp);
    if (s < best_sse) best_sse = s, best = i;
  }
  const double a = lo + (hi - lo) * std::max(best - 1, 0) / scan;
  const double b = lo + (hi - lo) * std::min(best + 1, scan) / scan;
  std::uintmax_t iters = 200;
  const auto [theta, sse] = boost::math::tools::brent_find_minima(
      [&](double t) {
        double unused = 0.0;
        return eval(t, unused);
      },
      a, b, 50, iters);
  out.shape = theta;
  out.residual = eval(theta, out.amplitude);
  const double edge = 1e-6 * (hi - lo);
  out.at_edge = theta < lo + edge || theta > hi - edge;
  (void)sse;
  return out;
}

inline void curve_columns(const ImpactCurve& c, std::vector<double>& x, std::vector<double>& y,
                          std::vector<double>& w) {
  bool weighted = !c.bins.empty();
  for (const auto& b : c.bins) weighted = weighted && b.std_error > 0.0;
  for (const auto& b : c.bins) {
    x.push_back(b.phi);
    y.push_back(b.impact);
    w.push_back(weighted ? 1.0 / (b.std_error * b.std_error) : 1.0);
  }
}

}  // namespace detail

struct LogLawFit {
  double amplitude = 0.0;  ///< a in I = a log(1 + phi / b)
  double scale = 0.0;      ///< b
  double residual = 0.0;   ///< weighted sum of squared residuals
  double power_prefactor = 0.0;  ///< Y in the competing fit I = Y phi^e
  double power_exponent = 0.0;
  double power_residual = 0.0;
  bool converged = false;
  int evaluations = 0;
  std::string message;

  /// Initial slope dI/dphi at phi = 0.
  double initial_slope() const { return amplitude / scale; }
  bool log_law_preferred() const { return residual < power_residual; }
};

/// Nonlinear least squares of I = a log(1 + phi / b) on the bins of a curve
/// (weights 1/stderr^2 when every bin has one), alongside a power law fitted
/// the same way so the residuals compare directly.
inline LogLawFit fit_log_law(const ImpactCurve& curve) {
  std::vector<double> x, y, w;
  detail::curve_columns(curve, x, y, w);
  if (x.size() < 3) throw InvalidArgument("log-law fit needs at least three bins");
  for (double v : x)
    if (!(v > 0.0)) throw InvalidArgument("log-law fit needs positive volume fractions");
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  const double lo = std::log(*xmin) - 7.0, hi = std::log(*xmax) + 7.0;
  const auto log_fit = detail::profiled_fit(
      x, y, w, [](double phi, double lb) { return std::log1p(phi / std::exp(lb)); }, lo, hi);
  const auto pow_fit = detail::profiled_fit(
      x, y, w, [](double phi, double e) { return std::pow(phi, e); }, 0.01, 2.0);
  LogLawFit f;
  f.amplitude = log_fit.amplitude;
  f.scale = std::exp(log_fit.shape);
  f.residual = log_fit.residual;
  f.power_prefactor = pow_fit.amplitude;
  f.power_exponent = pow_fit.shape;
  f.power_residual = pow_fit.residual;
  f.evaluations = log_fit.evaluations;
  f.converged = !log_fit.at_edge;
  if (!f.converged)
    f.message = "scale b at the edge of the search interval [" + io::format_double(std::exp(lo)) + ", " +
                io::format_double(std::exp(hi)) + "]; the data do not resolve the logarithmic bend";
  return f;
}

struct DoubleLogFit {
  double amplitude = 0.0;           ///< a
  double duration_scale = 0.0;      ///< b
  double participation_scale = 0.0; ///< c
  double residual = 0.0;
  bool converged = false;
  std::string assumption =
      "functional form I = a log(1 + T/b) log(1 + eta/c) is a placeholder; the source names a double-logarithmic "
      "surface without writing it";
};

/// Levenberg-Marquardt fit of the placeholder double-logarithmic surface,
/// with a profiled out and (log b, log c) free.
inline DoubleLogFit fit_double_log_surface(std::span<const SurfacePoint> points, double b0 = 1.0, double c0 = 1.0) {
  if (points.size() < 4) throw InvalidArgument("double-log fit needs at least four points");
  auto amplitude = [&](double b, double c) {
    double num = 0.0, den = 0.0;
    for (const auto& p : points) {
      const double h = std::log1p(p.duration / b) * std::log1p(p.participation / c);
      num += p.impact * h;
      den += h * h;
    }
    return den > 0.0 ? num / den : 0.0;
  };
  struct Functor {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    std::span<const SurfacePoint> pts;
    std::function<double(double, double)> amp;
    int inputs() const { return 2; }
    int values() const { return static_cast<int>(pts.size()); }
    int operator()(const Eigen::VectorXd& th, Eigen::VectorXd& fvec) const {
      const double b = std::exp(th(0)), c = std::exp(th(1));
      const double a = amp(b, c);
      for (std::size_t i = 0; i < pts.size(); ++i)
        fvec(static_cast<Eigen::Index>(i)) =
            pts[i].impact - a * std::log1p(pts[i].duration / b) * std::log1p(pts[i].participation / c);
      return 0;
    }
  };
  Functor fn{points, amplitude};
  Eigen::NumericalDiff<Functor> diff(fn);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Functor>> lm(diff);
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  lm.parameters.maxfev = 4000;
  Eigen::VectorXd th(2);
  th << std::log(b0), std::log(c0);
  const auto status = lm.minimize(th);
  DoubleLogFit f;
  f.duration_scale = std::exp(th(0));
  f.participation_scale = std::exp(th(1));
  f.amplitude = amplitude(f.duration_scale, f.participation_scale);
  Eigen::VectorXd r(static_cast<Eigen::Index>(points.size()));
  fn(th, r);
  f.residual = r.squaredNorm();
  f.converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                status == Eigen::LevenbergMarquardtSpace::XtolTooSmall;
  return f;
}

// ---------------------------------------------------------------------------
// Trajectories, decay and cost

struct TrajectoryGroup {
  double duration = 0.0;
  double participation = 0.0;
  std::vector<double> rescaled_time;  ///< t / T in [0, 1]
  std::vector<double> mean;           ///< mean of eps (log p_t - log p_0)
  std::vector<double> std_error;
  std::size_t count = 0;
  bool undersized = false;            ///< fewer than `min_group` records
};

/// Average sign-adjusted path during execution for each (T, eta) group.
inline std::vector<TrajectoryGroup> impact_trajectory(std::span<const ExecutionRecord> records,
                                                      std::size_t points = 21, std::size_t min_group = 30) {
  if (points < 2) throw InvalidArgument("trajectory needs at least two points");
  std::map<std::pair<double, double>, std::vector<const ExecutionRecord*>> groups;
  for (const auto& r : records) groups[{r.order.duration, r.order.participation()}].push_back(&r);
  std::vector<TrajectoryGroup> out;
  for (const auto& [key, members] : groups) {
    TrajectoryGroup g;
    g.duration = key.first;
    g.participation = key.second;
    g.count = members.size();
    g.undersized = g.count < min_group;
    for (std::size_t k = 0; k < points; ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(points - 1);
      RunningStats s;
      for (const auto* r : members) s.push(r->signed_move(u * key.first));
      g.rescaled_time.push_back(u);
      g.mean.push_back(s.mean());
      g.std_error.push_back(detail::bin_stderr(s));
    }
    out.push_back(std::move(g));
  }
  return out;
}

struct DecayProfile {
  std::vector<double> lag;         ///< h in units of T
  std::vector<double> post_mean;   ///< mean of eps (log p_{T+h} - log p_0)
  std::vector<double> ratio;       ///< I(T + h) / I(T)
  std::vector<double> ratio_stderr;
  double asymptotic = 0.0;         ///< extrapolated ratio as h -> infinity
  double asymptotic_stderr = 0.0;
  static constexpr double fair_pricing_reference = 2.0 / 3.0;
  static constexpr double lower_reference = 1.0 / 3.0;
};

/// Post-execution relaxation. The ratio of means uses the delta method for
/// its error; the asymptote extrapolates rho(h) = rho_inf + c h^(-1/2) over
/// the upper half of the lags.
inline DecayProfile decay_profile(std::span<const ExecutionRecord> records, std::span<const double> lags) {
  if (records.empty()) throw InvalidArgument("decay profile needs at least one record");
  if (lags.empty()) throw InvalidArgument("decay profile needs at least one lag");
  for (std::size_t i = 0; i < lags.size(); ++i)
    if (!(lags[i] > 0.0) || (i > 0 && !(lags[i] > lags[i - 1]))) throw InvalidArgument("lags must be positive and increasing");
  DecayProfile d;
  const auto n = static_cast<double>(records.size());
  std::vector<double> peak;
  for (const auto& r : records) peak.push_back(r.signed_move(r.order.duration));
  const double mb = mean(peak);
  if (mb == 0.0) throw InvalidArgument("decay ratio undefined: mean impact at the end of execution is zero");
  for (double h : lags) {
    std::vector<double> post;
    for (const auto& r : records) post.push_back(r.signed_move(r.order.duration * (1.0 + h)));
    const double ma = mean(post);
    const double rho = ma / mb;
    double va = 0.0, vb = 0.0, cab = 0.0;
    if (records.size() > 1) {
      for (std::size_t i = 0; i < post.size(); ++i) {
        va += (post[i] - ma) * (post[i] - ma);
        vb += (peak[i] - mb) * (peak[i] - mb);
        cab += (post[i] - ma) * (peak[i] - mb);
      }
      va /= n - 1.0, vb /= n - 1.0, cab /= n - 1.0;
    }
    d.lag.push_back(h);
    d.post_mean.push_back(ma);
    d.ratio.push_back(rho);
    d.ratio_stderr.push_back(std::sqrt(std::max(0.0, va - 2.0 * rho * cab + rho * rho * vb) / n) / std::abs(mb));
  }
  const std::size_t first = d.lag.size() / 2;
  if (d.lag.size() - first >= 2) {
    std::vector<double> x, y;
    for (std::size_t i = first; i < d.lag.size(); ++i) {
      x.push_back(1.0 / std::sqrt(d.lag[i]));
      y.push_back(d.ratio[i]);
    }
    const LinearFit f = ols(x, y);
    d.asymptotic = f.intercept;
    d.asymptotic_stderr = f.intercept_stderr;
  } else {
    d.asymptotic = d.ratio.back();
    d.asymptotic_stderr = d.ratio_stderr.back();
  }
  return d;
}

/// Piecewise-linear execution path x(t) (position in shares).
struct PositionPath {
  std::vector<double> times;
  std::vector<double> positions;

  static PositionPath constant_rate(double size, double duration) { return {{0.0, duration}, {0.0, size}}; }
  static PositionPath from_schedule(const MetaorderSchedule& s, std::size_t pieces) {
    PositionPath p;
    for (std::size_t k = 0; k <= pieces; ++k) {
      const double t = s.duration * static_cast<double>(k) / static_cast<double>(pieces);
      p.times.push_back(t);
      p.positions.push_back(s.sign * s.executed(t));
    }
    return p;
  }
};

/// Price impact as a function of position (and time for the general law).
struct ImpactLaw {
  enum class Kind { Linear, SquareRoot, General };
  Kind kind = Kind::Linear;
  double coefficient = 0.0;  ///< k for I = k x; Y sigma for I = Y sigma sgn(x) sqrt(|x| / V)
  double daily_volume = 1.0;
  std::function<double(double, double)> general;

  static ImpactLaw linear(double k) { return {Kind::Linear, k, 1.0, {}}; }
  static ImpactLaw square_root(double prefactor, double volatility, double daily_volume) {
    return {Kind::SquareRoot, prefactor * volatility, daily_volume, {}};
  }
  static ImpactLaw custom(std::function<double(double, double)> f) { return {Kind::General, 0.0, 1.0, std::move(f)}; }

  /// Antiderivative in x of a position-only law.
  double antiderivative(double x) const {
    if (kind == Kind::Linear) return 0.5 * coefficient * x * x;
    return coefficient * (2.0 / 3.0) * std::pow(std::abs(x), 1.5) / std::sqrt(daily_volume);
  }
};

/// C = int_0^T xdot_t I(x_t, t) dt over a piecewise-linear path. Position-only
/// laws are integrated exactly through their antiderivative; the general law
/// by adaptive Gauss-Kronrod on each piece.
inline double implementation_shortfall(const PositionPath& path, const ImpactLaw& law) {
  if (path.times.size() != path.positions.size() || path.times.size() < 2)
    throw InvalidArgument("position path needs matching time and position columns of length >= 2");
  for (std::size_t i = 1; i < path.times.size(); ++i)
    if (!(path.times[i] > path.times[i - 1])) throw InvalidArgument("position path times must increase");
  if (law.kind == ImpactLaw::Kind::SquareRoot && !(law.daily_volume > 0.0))
    throw InvalidArgument("square-root law needs a positive daily volume");
  if (law.kind == ImpactLaw::Kind::General && !law.general) throw InvalidArgument("general impact law is empty");
  double cost = 0.0;
  for (std::size_t i = 1; i < path.times.size(); ++i) {
    const double t0 = path.times[i - 1], t1 = path.times[i];
    const double x0 = path.positions[i - 1], x1 = path.positions[i];
    if (law.kind != ImpactLaw::Kind::General) {
      cost += law.antiderivative(x1) - law.antiderivative(x0);
      continue;
    }
    const double rate = (x1 - x0) / (t1 - t0);
    if (rate == 0.0) continue;
    cost += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double t) { return rate * law.general(x0 + rate * (t - t0), t); }, t0, t1, 15, 1e-12);
  }
  return cost;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string records_to_csv(std::span<const ExecutionRecord> records) {
  std::string s = "id,sign,Q,V,sigma,T,eta,phi,logp_start,logp_end,peak,path_ref\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const Metaorder& m = r.order;
    s += std::to_string(i) + "," + std::to_string(m.sign) + "," + io::format_double(m.size) + "," +
         io::format_double(m.daily_volume) + "," + io::format_double(m.volatility) + "," +
         io::format_double(m.duration) + "," + io::format_double(m.participation()) + "," +
         io::format_double(m.fraction()) + "," + io::format_double(r.logp_start) + "," +
         io::format_double(r.logp_end) + "," + io::format_double(r.peak) + "," + r.path_ref + "\n";
  }
  return s;
}

/// Summary rows only; paths are stored separately under `path_ref`.
inline std::vector<ExecutionRecord> records_from_csv(std::string_view text) {
  const io::Table t = io::parse_csv(text);
  const char* cols[] = {"id", "sign", "Q", "V", "sigma", "T", "eta", "phi", "logp_start", "logp_end", "peak", "path_ref"};
  std::vector<std::size_t> idx;
  for (const char* c : cols) idx.push_back(t.column(c));
  std::vector<ExecutionRecord> out;
  for (const auto& row : t.rows) {
    ExecutionRecord r;
    r.order.sign = static_cast<int>(io::parse_int(row[idx[1]], "sign"));
    r.order.size = io::parse_double(row[idx[2]], "Q");
    r.order.daily_volume = io::parse_double(row[idx[3]], "V");
    r.order.volatility = io::parse_double(row[idx[4]], "sigma");
    r.order.duration = io::parse_double(row[idx[5]], "T");
    r.order.validate();
    const double eta = io::parse_double(row[idx[6]], "eta"), phi = io::parse_double(row[idx[7]], "phi");
    if (std::abs(phi - r.order.fraction()) > 1e-12 * std::max(1.0, phi) ||
        std::abs(eta - r.order.participation()) > 1e-12 * std::max(1.0, eta))
      throw InvalidArgument("row " + row[idx[0]] + ": phi and eta inconsistent with Q, V and T");
    r.logp_start = io::parse_double(row[idx[8]], "logp_start");
    r.logp_end = io::parse_double(row[idx[9]], "logp_end");
    r.peak = io::parse_double(row[idx[10]], "peak");
    r.path_ref = row[idx[11]];
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string path_to_csv(const ExecutionRecord& r) {
  std::string s = "t,logp\n";
  for (std::size_t i = 0; i < r.times.size(); ++i)
    s += io::format_double(r.times[i]) + "," + io::format_double(r.log_price[i]) + "\n";
  return s;
}

inline std::string impact_curve_to_csv(const ImpactCurve& c) {
  std::string s = "phi_lower,phi_upper,phi,impact,stderr,n\n";
  for (const auto& b : c.bins)
    s += io::format_double(b.lower) + "," + io::format_double(b.upper) + "," + io::format_double(b.phi) + "," +
         io::format_double(b.impact) + "," + io::format_double(b.std_error) + "," + std::to_string(b.count) + "\n";
  return s;
}

inline ImpactCurve impact_curve_from_csv(std::string_view text) {
  const io::Table t = io::parse_csv(text);
  const std::size_t c[] = {t.column("phi_lower"), t.column("phi_upper"), t.column("phi"),
                           t.column("impact"),    t.column("stderr"),    t.column("n")};
  ImpactCurve out;
  for (const auto& row : t.rows)
    out.bins.push_back({io::parse_double(row[c[0]]), io::parse_double(row[c[1]]), io::parse_double(row[c[2]]),
                        io::parse_double(row[c[3]]), io::parse_double(row[c[4]]),
                        static_cast<std::size_t>(io::parse_int(row[c[5]]))});
  return out;
}

inline std::string impact_surface_to_csv(const ImpactSurface& s) {
  std::string out = "T_lower,T_upper,eta_lower,eta_upper,T,eta,impact,stderr,n\n";
  for (const auto& c : s.cells)
    out += io::format_double(c.duration_lower) + "," + io::format_double(c.duration_upper) + "," +
           io::format_double(c.participation_lower) + "," + io::format_double(c.participation_upper) + "," +
           io::format_double(c.duration) + "," + io::format_double(c.participation) + "," +
           io::format_double(c.impact) + "," + io::format_double(c.std_error) + "," + std::to_string(c.count) + "\n";
  return out;
}

inline ImpactSurface impact_surface_from_csv(std::string_view text) {
  const io::Table t = io::parse_csv(text);
  const char* names[] = {"T_lower", "T_upper", "eta_lower", "eta_upper", "T", "eta", "impact", "stderr", "n"};
  std::vector<std::size_t> c;
  for (const char* n : names) c.push_back(t.column(n));
  ImpactSurface out;
  for (const auto& row : t.rows)
    out.cells.push_back({io::parse_double(row[c[0]]), io::parse_double(row[c[1]]), io::parse_double(row[c[2]]),
                         io::parse_double(row[c[3]]), io::parse_double(row[c[4]]), io::parse_double(row[c[5]]),
                         io::parse_double(row[c[6]]), io::parse_double(row[c[7]]),
                         static_cast<std::size_t>(io::parse_int(row[c[8]]))});
  return out;
}

}  // namespace lobkit
