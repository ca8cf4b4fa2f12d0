#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "lobkit/core/error.hpp"
#include "lobkit/core/schedule.hpp"
#include "lobkit/core/stats.hpp"
#include "lobkit/io/csv.hpp"
#include "lobkit/stats/curve.hpp"

namespace lobkit {

/// Latent order book with diffusivity D, cancellation rate nu and deposition
/// rate lambda. The signed density is positive (buy) below the price.
struct LlobParams {
  double diffusivity = 1.0;
  double cancellation = 1.0;
  double deposition = 1.0;

  void validate() const {
    if (!(diffusivity > 0.0) || !(cancellation > 0.0) || !(deposition > 0.0))
      throw InvalidArgument("latent book parameters must be > 0");
  }
  /// L = lambda / sqrt(D nu): slope of the stationary profile at the price.
  double liquidity() const { return deposition / std::sqrt(diffusivity * cancellation); }
  /// J = D L: flux of orders through the price.
  double transaction_rate() const { return diffusivity * liquidity(); }
  /// Decay length sqrt(D / nu) of the stationary profile.
  double screening_length() const { return std::sqrt(diffusivity / cancellation); }
  /// Far-field density lambda / nu.
  double saturation() const { return deposition / cancellation; }
  /// eta = Q / (J T).
  double participation(double size, double duration) const { return size / (transaction_rate() * duration); }
  /// sqrt(D Q / J), the impact scale.
  double impact_scale(double size) const { return std::sqrt(diffusivity * size / transaction_rate()); }
};

/// Closed-form stationary density at distance y = price - x.
inline double stationary_density(const LlobParams& p, double y) {
  if (y == 0.0) return 0.0;
  return std::copysign(p.saturation() * -std::expm1(-std::abs(y) / p.screening_length()), y);
}

/// Stationary profile on a uniform grid symmetric about 0, solving
/// D phi'' - nu phi + lambda sgn(y) = 0 with phi bounded at infinity.
/// The half line is solved with Numerov's scheme for psi = phi - lambda/nu
/// (psi'' = psi nu / D) on spacing h/2, which contains every |y| of the grid.
inline std::vector<double> stationary_profile(const LlobParams& p, std::span<const double> y) {
  p.validate();
  const std::size_t n = y.size();
  if (n < 2) throw InvalidArgument("profile grid needs at least two nodes");
  const double h = y[1] - y[0];
  if (!(h > 0.0)) throw InvalidArgument("profile grid must be increasing");
  const double tol = 1e-9 * h;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(y[i] - (y[0] + static_cast<double>(i) * h)) > tol) throw InvalidArgument("profile grid must be uniform");
    if (std::abs(y[i] + y[n - 1 - i]) > tol) throw InvalidArgument("profile grid must be symmetric about 0");
  }
  const double step = 0.5 * h;
  const auto nodes = static_cast<std::size_t>(std::llround(y[n - 1] / step));
  const double k2 = p.cancellation / p.diffusivity;
  const double boundary0 = -p.saturation();
  std::vector<double> psi(nodes + 1);
  psi[0] = boundary0;
  psi[nodes] = boundary0 * std::exp(-std::sqrt(k2) * static_cast<double>(nodes) * step);
  if (nodes >= 2) {
    // a psi_{j-1} - b psi_j + a psi_{j+1} = 0, Thomas algorithm on j = 1..nodes-1.
    const double a = 1.0 - step * step * k2 / 12.0;
    const double b = 2.0 + 10.0 * step * step * k2 / 12.0;
    const std::size_t m = nodes - 1;
    std::vector<double> c(m), d(m);
    for (std::size_t j = 0; j < m; ++j) {
      double rhs = 0.0;
      if (j == 0) rhs -= a * psi[0];
      if (j == m - 1) rhs -= a * psi[nodes];
      const double diag = -b - (j > 0 ? a * c[j - 1] : 0.0);
      c[j] = a / diag;
      d[j] = (rhs - (j > 0 ? a * d[j - 1] : 0.0)) / diag;
    }
    psi[m] = d[m - 1];
    for (std::size_t j = m - 1; j-- > 0;) psi[j + 1] = d[j] - c[j] * psi[j + 2];
  }
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(std::llround(std::abs(y[i]) / step));
    const double half = j == 0 ? 0.0 : psi[j] + p.saturation();
    phi[i] = y[i] < 0.0 ? -half : half;
  }
  return phi;
}

// ---------------------------------------------------------------------------
// Self-consistent trajectory

struct TrajectoryOptions {
  std::size_t nodes = 256;  ///< time nodes per graded segment
  double horizon = 0.0;     ///< end of the computed trajectory; 0 = end of execution
  double tolerance = 1e-8;  ///< bracket width per node, in units of sqrt(D Q / J)
  int max_iterations = 100; ///< root-finder iterations per node
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> displacement;  ///< y(t) = p_m(t) - p_0(t)
  double participation = 0.0;
  int iterations = 0;     ///< residual evaluations over all nodes
  double residual = 0.0;  ///< largest final bracket width, in units of sqrt(D Q / J)
  std::string warning;
};

namespace detail {

/// Time nodes graded towards the start of execution, s_k = (k/K)^2 on [0, 1],
/// and towards its end, 1 + (k/K)^2 (S - 1) on [1, S]; interpolation is
/// linear in sqrt(s) and sqrt(s - 1) respectively, which is exact for the
/// square-root onset and relaxation of a constant-rate trajectory.
struct GradedGrid {
  std::size_t K = 0;
  double extent = 1.0;
  std::vector<double> s;

  GradedGrid(std::size_t k, double ext) : K(k), extent(ext) {
    for (std::size_t i = 0; i <= K; ++i) s.push_back(std::pow(static_cast<double>(i) / static_cast<double>(K), 2));
    if (extent > 1.0)
      for (std::size_t i = 1; i <= K; ++i)
        s.push_back(1.0 + std::pow(static_cast<double>(i) / static_cast<double>(K), 2) * (extent - 1.0));
  }

  double interpolate(std::span<const double> u, double v) const {
    std::size_t base = 0;
    double x;
    if (v <= 1.0 || extent <= 1.0) {
      x = std::sqrt(std::clamp(v, 0.0, 1.0)) * static_cast<double>(K);
    } else {
      base = K;
      x = std::sqrt(std::min((v - 1.0) / (extent - 1.0), 1.0)) * static_cast<double>(K);
    }
    const auto i = std::min(static_cast<std::size_t>(x), K - 1);
    const double w = x - static_cast<double>(i);
    return (1.0 - w) * u[base + i] + w * u[base + i + 1];
  }
};

/// eta * int_0^s r(v) exp(-(u(s) - u(v))^2 / (4 (s - v))) / sqrt(4 pi (s - v)) dv
/// on dimensionless time (D = T = 1). Substituting v = s - w^2 absorbs the
/// inverse square-root singularity; composite Gauss-Legendre in w.
template <class Profile>
double memory_integral(const Profile& rate, const GradedGrid& grid, std::span<const double> u, double us, double s,
                       double eta, std::size_t panels, bool linear) {
  using Gauss = boost::math::quadrature::gauss<double, 8>;
  // Beyond the end of execution the rate vanishes for w < sqrt(s - 1).
  const double bottom = s > 1.0 ? std::sqrt(s - 1.0) : 0.0;
  const double width = (std::sqrt(s) - bottom) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double a = bottom + static_cast<double>(k) * width;
    total += Gauss::integrate(
        [&](double w) {
          const double v = s - w * w;
          const double r = rate(v);
          if (r == 0.0) return 0.0;
          if (linear) return r;
          const double dy = us - grid.interpolate(u, v);
          return r * std::exp(-dy * dy / (4.0 * w * w));
        },
        a, a + width);
  }
  return eta * total / std::sqrt(std::numbers::pi);
}

}  // namespace detail

/// Solves y(t) = (1/L) int_0^t m(s) exp(-(y(t) - y(s))^2 / (4 D (t - s))) / sqrt(4 pi D (t - s)) ds
/// on [0, T] node by node on a graded grid, in units where D = T = 1 and the
/// only parameter is eta = Q / (J T). Returns y at the requested times, which
/// may extend past T up to `opt.horizon` (the rate vanishes after T).
/// With `linear` set the Gaussian factor is dropped (small-impact limit).
inline Trajectory price_trajectory_selfconsistent(const LlobParams& params, const MetaorderSchedule& schedule,
                                                  std::span<const double> times, const TrajectoryOptions& opt = {},
                                                  bool linear = false) {
  params.validate();
  schedule.validate();
  if (opt.nodes < 4) throw InvalidArgument("trajectory needs at least four time nodes");
  const double horizon = schedule.duration;
  const double end = std::max(opt.horizon, horizon);
  for (double t : times)
    if (!(t >= 0.0 && t <= end * (1.0 + 1e-12))) throw InvalidArgument("trajectory times must lie in [0, horizon]");

  Trajectory out;
  out.times.assign(times.begin(), times.end());
  out.displacement.assign(times.size(), 0.0);
  const double eta = params.participation(schedule.size, horizon);
  out.participation = eta;
  if (params.cancellation * horizon > 0.1)
    out.warning = "nu T = " + io::format_double(params.cancellation * horizon) + " is not small; the slow-book limit is inaccurate";
  if (eta == 0.0) return out;

  const detail::GradedGrid grid(opt.nodes, end / horizon);
  const std::size_t last = grid.s.size() - 1;
  auto rate = [&](double s) { return schedule.profile(s); };
  // The Gaussian factor has width ~ 1 / sqrt(eta) in w relative to sqrt(s).
  const std::size_t panels = 8 + static_cast<std::size_t>(std::ceil(3.0 * std::sqrt(eta)));
  const double norm = std::sqrt(eta);

  // The equation is causal: y(t_k) depends on y(t_j), j < k, and on itself
  // through the last cell. March forward and bracket each node between 0 and
  // its linear-response value, where the residual changes sign.
  std::vector<double> u(last + 1, 0.0);
  auto width_ok = [&](double a, double b) { return std::abs(b - a) <= opt.tolerance * norm; };
  for (std::size_t k = 1; k <= last; ++k) {
    u[k] = 0.0;
    const double upper = detail::memory_integral(rate, grid, u, 0.0, grid.s[k], eta, panels, true);
    if (linear || upper == 0.0) {
      u[k] = upper;
      ++out.iterations;
      continue;
    }
    auto residual = [&](double v) {
      u[k] = v;
      return v - detail::memory_integral(rate, grid, u, v, grid.s[k], eta, panels, false);
    };
    const double f_lo = residual(0.0), f_hi = residual(upper);
    double root;
    if (f_lo >= 0.0) {
      root = 0.0;
    } else if (f_hi <= 0.0) {
      root = upper;
    } else {
      auto iters = static_cast<std::uintmax_t>(opt.max_iterations);
      const auto [a, b] = boost::math::tools::toms748_solve(residual, 0.0, upper, f_lo, f_hi, width_ok, iters);
      out.iterations += static_cast<int>(iters);
      out.residual = std::max(out.residual, std::abs(b - a) / norm);
      if (!width_ok(a, b))
        throw ConvergenceError("self-consistent trajectory did not converge at t = " +
                                   io::format_double(grid.s[k] * horizon),
                               std::abs(b - a) / norm);
      root = 0.5 * (a + b);
    }
    u[k] = root;
  }

  const double length = std::sqrt(params.diffusivity * horizon);
  for (std::size_t i = 0; i < times.size(); ++i)
    out.displacement[i] = schedule.sign * length * grid.interpolate(u, times[i] / horizon);
  return out;
}

struct ImpactScaling {
  double impact = 0.0;        ///< I(Q, T) = y(T)
  double scaling = 0.0;       ///< F(eta) = I / sqrt(D Q / J)
  double participation = 0.0; ///< eta
  int iterations = 0;
};

/// I(Q, T) = sqrt(D Q / J) F(eta) for a constant-rate buy metaorder.
inline ImpactScaling impact_scaling(double size, double duration, const LlobParams& params,
                                    const TrajectoryOptions& opt = {}) {
  params.validate();
  ImpactScaling out;
  out.participation = params.participation(size, duration);
  if (size == 0.0) return out;
  const double end[] = {duration};
  const Trajectory tr = price_trajectory_selfconsistent(params, MetaorderSchedule::constant(size, duration), end, opt);
  out.impact = tr.displacement[0];
  out.scaling = out.impact / params.impact_scale(size);
  out.iterations = tr.iterations;
  return out;
}

// ---------------------------------------------------------------------------
// Crossover between two power-law regimes

struct CrossoverFit {
  double crossover = 0.0;
  double low_slope = 0.0, low_log_amplitude = 0.0;
  double high_slope = 0.0, high_log_amplitude = 0.0;
  std::size_t branch_points = 0;
};

/// Fits log-log lines to the lowest and highest quarter of a positive curve
/// (at least two points each) and intersects them. Throws RegimeError when the
/// two branches have the same slope (within 0.25), i.e. one regime only.
inline CrossoverFit measure_crossover(const Curve& curve) {
  const std::size_t n = curve.size();
  if (n < 4) throw InvalidArgument("crossover fit needs at least four points");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return curve.x[a] < curve.x[b]; });
  for (std::size_t i = 0; i < n; ++i)
    if (!(curve.x[i] > 0.0 && curve.value[i] > 0.0)) throw InvalidArgument("crossover fit needs a positive curve");
  const std::size_t b = std::max<std::size_t>(2, n / 4);
  auto branch = [&](std::size_t first) {
    std::vector<double> lx, ly;
    for (std::size_t k = first; k < first + b; ++k) {
      lx.push_back(std::log(curve.x[order[k]]));
      ly.push_back(std::log(curve.value[order[k]]));
    }
    return ols(lx, ly);
  };
  const LinearFit low = branch(0), high = branch(n - b);
  if (std::abs(low.slope - high.slope) < 0.25)
    throw RegimeError("curve does not span two regimes (end slopes " + io::format_double(low.slope) + " and " +
                      io::format_double(high.slope) + ")");
  CrossoverFit out;
  out.low_slope = low.slope;
  out.low_log_amplitude = low.intercept;
  out.high_slope = high.slope;
  out.high_log_amplitude = high.intercept;
  out.branch_points = b;
  out.crossover = std::exp((high.intercept - low.intercept) / (low.slope - high.slope));
  return out;
}

// ---------------------------------------------------------------------------
// Time-dependent solver

/// Uniform grid of `nodes` points on [lower, upper].
struct SpatialGrid {
  double lower = -1.0;
  double upper = 1.0;
  std::size_t nodes = 3;

  double spacing() const { return (upper - lower) / static_cast<double>(nodes - 1); }
  double at(std::size_t i) const { return lower + static_cast<double>(i) * spacing(); }
};

struct PdeOptions {
  double dt = 0.0;
  double horizon = 0.0;
  double start_price = 0.0;
  std::size_t record_every = 1;
  std::vector<double> initial;  ///< initial density; empty = stationary at start_price
};

struct MassBalance {
  double max_relative_residual = 0.0;  ///< per step, relative to the gross budget
  double deposited = 0.0;              ///< lambda sgn(y) plus the metaorder source
  double cancelled = 0.0;
  double boundary_inflow = 0.0;        ///< diffusive flux through the domain ends
  double executed = 0.0;               ///< integrated D |dphi/dx| at the price
};

struct PdeSolution {
  std::vector<double> x;
  std::vector<double> times;
  std::vector<double> prices;
  std::vector<double> distance_to_stationary;  ///< sup |phi - phi_st(p - x)| per recorded time
  std::vector<double> density;                 ///< final profile
  MassBalance balance;
  std::size_t steps = 0;
};

namespace detail {

/// Zero crossing (positive to non-positive in increasing x) nearest to `guess`.
inline double zero_crossing(std::span<const double> phi, const SpatialGrid& g, double guess, double t) {
  const std::size_t n = phi.size();
  const double dx = g.spacing();
  const auto start = static_cast<std::ptrdiff_t>(std::clamp((guess - g.lower) / dx, 0.0, static_cast<double>(n - 2)));
  for (std::ptrdiff_t off = 0; off < static_cast<std::ptrdiff_t>(n); ++off)
    for (std::ptrdiff_t j : {start - off, start + off + 1}) {
      if (j < 0 || j + 1 >= static_cast<std::ptrdiff_t>(n)) continue;
      const auto i = static_cast<std::size_t>(j);
      if (phi[i] > 0.0 && phi[i + 1] <= 0.0) return g.at(i) + dx * phi[i] / (phi[i] - phi[i + 1]);
    }
  const auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
  throw BookError("zero crossing of the latent density lost at t = " + io::format_double(t) + " (density range [" +
                  io::format_double(*lo) + ", " + io::format_double(*hi) + "], last price " + io::format_double(guess) + ")");
}

}  // namespace detail

/// Explicit finite-difference evolution of
///   d_t phi = D d_xx phi - nu phi + lambda sgn(p - x) + eps m(t) delta(x - p)
/// with Dirichlet ends pinned to the stationary profile around the current
/// price. The sign term is cell averaged, the source is split linearly between
/// the two nodes bracketing the price, and the price is the interpolated zero
/// crossing of phi. At dt = dx^2 / (2 D) the grid-scale mode is undamped and
/// the source excites it; dt <= dx^2 / (4 D) damps it.
inline PdeSolution solve_pde(const LlobParams& params, const MetaorderSchedule& schedule, const SpatialGrid& grid,
                             const PdeOptions& opt) {
  params.validate();
  schedule.validate();
  if (grid.nodes < 5 || !(grid.upper > grid.lower)) throw InvalidArgument("spatial grid needs >= 5 nodes on a proper interval");
  const double dx = grid.spacing();
  const double D = params.diffusivity, nu = params.cancellation, lambda = params.deposition;
  if (!(opt.dt > 0.0) || !(opt.horizon > 0.0)) throw InvalidArgument("time step and horizon must be > 0");
  if (opt.dt > dx * dx / (2.0 * D) * (1.0 + 1e-12))
    throw InvalidArgument("time step violates the stability bound dt <= dx^2 / (2 D) = " + io::format_double(dx * dx / (2.0 * D)));
  if (opt.record_every == 0) throw InvalidArgument("record_every must be >= 1");
  const std::size_t n = grid.nodes;
  // Distance at which the stationary profile is within 1e-6 of saturation.
  const double margin = params.screening_length() * std::log(1e6);
  auto check_width = [&](double p) {
    if (p - grid.lower < margin || grid.upper - p < margin)
      throw InvalidArgument("spatial grid too narrow: the price must stay " + io::format_double(margin) +
                            " away from both ends");
  };
  check_width(opt.start_price);

  PdeSolution out;
  out.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.x[i] = grid.at(i);
  std::vector<double> phi(n), next(n);
  if (opt.initial.empty()) {
    for (std::size_t i = 0; i < n; ++i) phi[i] = stationary_density(params, opt.start_price - out.x[i]);
  } else {
    if (opt.initial.size() != n) throw InvalidArgument("initial profile size does not match the grid");
    phi = opt.initial;
  }
  double price = detail::zero_crossing(phi, grid, opt.start_price, 0.0);

  auto record = [&](double t) {
    double dist = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      dist = std::max(dist, std::abs(phi[i] - stationary_density(params, price - out.x[i])));
    out.times.push_back(t);
    out.prices.push_back(price);
    out.distance_to_stationary.push_back(dist);
  };
  record(0.0);

  const auto steps = static_cast<std::size_t>(std::ceil(opt.horizon / opt.dt - 1e-9));
  MassBalance& mb = out.balance;
  for (std::size_t step = 0; step < steps; ++step) {
    const double t0 = static_cast<double>(step) * opt.dt;
    const double t1 = std::min(opt.horizon, t0 + opt.dt);
    const double h = t1 - t0;
    const double coef = D * h / (dx * dx);

    double dep = 0.0, canc = 0.0, gross_dep = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double s = std::clamp(2.0 * (price - out.x[i]) / dx, -1.0, 1.0);
      const double lap = phi[i + 1] - 2.0 * phi[i] + phi[i - 1];
      next[i] = phi[i] + coef * lap - h * nu * phi[i] + h * lambda * s;
      dep += h * lambda * s;
      gross_dep += h * lambda * std::abs(s);
      canc += h * nu * phi[i];
    }
    const double inflow = coef * ((phi[n - 1] - phi[n - 2]) - (phi[1] - phi[0]));
    const double volume = schedule.executed(t1) - schedule.executed(t0);
    if (volume > 0.0) {
      const double pos = (price - grid.lower) / dx;
      const auto i0 = static_cast<std::size_t>(pos);
      const double w1 = pos - static_cast<double>(i0);
      const double q = schedule.sign * volume / dx;
      next[i0] += (1.0 - w1) * q;
      next[i0 + 1] += w1 * q;
      dep += schedule.sign * volume / dx;
      gross_dep += volume / dx;
    }
    // Summing per-node increments keeps the far-field density out of the roundoff.
    double change = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) change += next[i] - phi[i];
    const double residual = change - (dep - canc + inflow);
    const double scale = gross_dep + std::abs(canc) + std::abs(inflow) + std::numeric_limits<double>::min();
    mb.max_relative_residual = std::max(mb.max_relative_residual, std::abs(residual) / scale);
    mb.deposited += dep * dx;
    mb.cancelled += canc * dx;
    mb.boundary_inflow += inflow * dx;

    next[0] = phi[0];
    next[n - 1] = phi[n - 1];
    std::swap(phi, next);
    price = detail::zero_crossing(phi, grid, price, t1);
    check_width(price);
    phi[0] = stationary_density(params, price - out.x[0]);
    phi[n - 1] = stationary_density(params, price - out.x[n - 1]);
    {
      const auto i = std::min(static_cast<std::size_t>((price - grid.lower) / dx), n - 2);
      mb.executed += D * std::abs(phi[i] - phi[i + 1]) / dx * h;
    }
    out.steps = step + 1;
    if ((step + 1) % opt.record_every == 0 || step + 1 == steps) record(t1);
  }
  out.density = phi;
  return out;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string trajectory_to_csv(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw InvalidArgument("trajectory columns differ in length");
  std::string s = "t,y\n";
  for (std::size_t i = 0; i < t.size(); ++i) s += io::format_double(t[i]) + "," + io::format_double(y[i]) + "\n";
  return s;
}

inline std::string profile_to_csv(std::span<const double> x, std::span<const double> phi) {
  if (x.size() != phi.size()) throw InvalidArgument("profile columns differ in length");
  std::string s = "x,phi\n";
  for (std::size_t i = 0; i < x.size(); ++i) s += io::format_double(x[i]) + "," + io::format_double(phi[i]) + "\n";
  return s;
}

/// Reads a two-column CSV with the given header names.
inline std::pair<std::vector<double>, std::vector<double>> two_columns_from_csv(std::string_view text,
                                                                              std::string_view first,
                                                                              std::string_view second) {
  const io::Table t = io::parse_csv(text);
  if (t.header.size() != 2 || t.header[0] != first || t.header[1] != second)
    throw InvalidArgument("expected header " + std::string(first) + "," + std::string(second));
  std::pair<std::vector<double>, std::vector<double>> out;
  for (const auto& row : t.rows) {
    out.first.push_back(io::parse_double(row[0], first));
    out.second.push_back(io::parse_double(row[1], second));
  }
  return out;
}

}  // namespace lobkit
