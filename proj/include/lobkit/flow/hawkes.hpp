#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "lobkit/core/error.hpp"
#include "lobkit/core/kernel.hpp"
#include "lobkit/core/random.hpp"
#include "lobkit/lob/event.hpp"

namespace lobkit {

/// One point of a multivariate point process.
struct MarkedPoint {
  double time = 0.0;
  std::int32_t component = 0;
  bool operator==(const MarkedPoint&) const = default;
};

using PointStream = std::vector<MarkedPoint>;

/// Order-book meaning of a Hawkes component, used to turn points into events.
/// `size_bin` tags the volume bin when components are split by order size.
struct ComponentMark {
  EventKind kind = EventKind::MarketOrder;
  Side side = Side::Buy;
  std::int32_t level = 0;
  std::int64_t size = 1;
  std::int32_t size_bin = 0;
};

/// Multivariate Hawkes specification with intensity
///   lambda_i(t) = mu_i + sum_j int Phi_ij(t - s) dP_j(s),
/// i.e. kernel(i, j) is the response of component i to an event of j.
/// dirac(i, j) is the weight of an immediate (lag-0) response, realised as a
/// Bernoulli simultaneous event in i.
struct HawkesSpec {
  std::vector<double> baseline;
  std::vector<std::vector<Kernel>> kernels;
  std::vector<std::vector<double>> dirac;
  std::vector<ComponentMark> marks;
  /// Support over which power-law kernels are approximated by exponentials.
  double support_max = 1e4;
  double support_min = 1e-3;

  std::size_t dimension() const { return baseline.size(); }

  static HawkesSpec independent(std::vector<double> mu) {
    HawkesSpec s;
    const std::size_t d = mu.size();
    s.baseline = std::move(mu);
    s.kernels.assign(d, std::vector<Kernel>(d, Kernel::zero()));
    s.dirac.assign(d, std::vector<double>(d, 0.0));
    return s;
  }

  const Kernel& kernel(std::size_t i, std::size_t j) const { return kernels[i][j]; }
  double dirac_weight(std::size_t i, std::size_t j) const { return dirac.empty() ? 0.0 : dirac[i][j]; }

  void validate_shape() const {
    const std::size_t d = dimension();
    if (d == 0) throw InvalidArgument("hawkes: empty baseline");
    if (kernels.size() != d) throw InvalidArgument("hawkes: kernel matrix has wrong number of rows");
    for (const auto& row : kernels)
      if (row.size() != d) throw InvalidArgument("hawkes: kernel matrix is not square");
    if (!dirac.empty()) {
      if (dirac.size() != d) throw InvalidArgument("hawkes: dirac matrix has wrong shape");
      for (const auto& row : dirac) {
        if (row.size() != d) throw InvalidArgument("hawkes: dirac matrix has wrong shape");
        for (double w : row)
          if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("hawkes: dirac weights must lie in [0,1]");
      }
    }
    for (double m : baseline)
      if (!(m >= 0.0)) throw InvalidArgument("hawkes: baseline intensities must be >= 0");
    if (!marks.empty() && marks.size() != d) throw InvalidArgument("hawkes: one mark per component required");
  }

  /// Branching matrix: integral of each kernel plus its Dirac weight.
  Eigen::MatrixXd branching_matrix() const {
    const std::size_t d = dimension();
    Eigen::MatrixXd b(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) b(i, j) = kernels[i][j].total_integral() + dirac_weight(i, j);
    return b;
  }

  double spectral_radius() const {
    const Eigen::MatrixXd b = branching_matrix();
    if (!b.allFinite()) return std::numeric_limits<double>::infinity();
    Eigen::EigenSolver<Eigen::MatrixXd> es(b, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }

  /// Throws unless the spec describes a stationary process.
  void validate() const {
    validate_shape();
    const double rho = spectral_radius();
    if (!(rho < 1.0))
      throw InvalidArgument("hawkes: branching matrix spectral radius " + std::to_string(rho) +
                            " >= 1 (non-stationary)");
  }
};

/// Exact conditional intensity at `t` given the history (events at times >= t are ignored).
inline std::vector<double> intensity_at(const HawkesSpec& spec, const PointStream& history, double t) {
  spec.validate_shape();
  std::vector<double> lambda = spec.baseline;
  for (const MarkedPoint& p : history) {
    if (!(p.time < t)) continue;
    const auto j = static_cast<std::size_t>(p.component);
    for (std::size_t i = 0; i < spec.dimension(); ++i)
      if (!spec.kernel(i, j).is_zero()) lambda[i] += spec.kernel(i, j)(t - p.time);
  }
  return lambda;
}

namespace detail {

// Recursive exponential-sum state of the excitation of every component.
class HawkesState {
public:
  explicit HawkesState(const HawkesSpec& spec) : d_(spec.dimension()), mu_(spec.baseline) {
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = 0; j < d_; ++j) {
        const ExpSum es = spec.kernel(i, j).as_exp_sum(spec.support_max, spec.support_min);
        for (std::size_t k = 0; k < es.terms(); ++k) terms_.push_back(Term{i, j, es.weights[k], es.rates[k], 0.0});
      }
  }

  void advance(double dt) {
    if (dt <= 0.0) return;
    for (Term& tm : terms_) tm.value *= std::exp(-tm.rate * dt);
  }

  /// Integral of lambda_i over the next dt (before advancing).
  double compensator(std::size_t i, double dt) const {
    double s = mu_[i] * dt;
    for (const Term& tm : terms_)
      if (tm.target == i) s += tm.rate > 0.0 ? tm.value * (-std::expm1(-tm.rate * dt)) / tm.rate : tm.value * dt;
    return s;
  }

  void excite(std::size_t source) {
    for (Term& tm : terms_)
      if (tm.source == source) tm.value += tm.weight;
  }

  std::vector<double> intensities() const {
    std::vector<double> l = mu_;
    for (const Term& tm : terms_) l[tm.target] += tm.value;
    return l;
  }

private:
  struct Term {
    std::size_t target, source;
    double weight, rate, value;
  };
  std::size_t d_;
  std::vector<double> mu_;
  std::vector<Term> terms_;
};

}  // namespace detail

/// Ogata thinning. Kernels are monotone decaying, so the total intensity just
/// after the last accepted (or rejected) point bounds it until the next one.
inline PointStream simulate_hawkes(const HawkesSpec& spec, double horizon, std::uint64_t seed) {
  spec.validate();
  PointStream out;
  if (!(horizon > 0.0)) return out;
  Rng rng(seed);
  detail::HawkesState state(spec);
  const std::size_t d = spec.dimension();
  double t = 0.0;
  auto total = [](const std::vector<double>& l) {
    double s = 0.0;
    for (double v : l) s += v;
    return s;
  };
  double bound = total(state.intensities());
  while (bound > 0.0) {
    const double cand = t + exponential(rng, bound);
    if (cand > horizon) break;
    state.advance(cand - t);
    t = cand;
    std::vector<double> lam = state.intensities();
    const double lt = total(lam);
    if (uniform01(rng) * bound <= lt) {
      double u = uniform01(rng) * lt;
      std::size_t comp = 0;
      for (; comp + 1 < d; ++comp) {
        if (u < lam[comp]) break;
        u -= lam[comp];
      }
      // The accepted point and any Dirac-triggered simultaneous children.
      std::deque<std::size_t> pending{comp};
      std::size_t spawned = 0;
      while (!pending.empty()) {
        const std::size_t c = pending.front();
        pending.pop_front();
        out.push_back(MarkedPoint{t, static_cast<std::int32_t>(c)});
        state.excite(c);
        for (std::size_t i = 0; i < d; ++i) {
          const double w = spec.dirac_weight(i, c);
          if (w > 0.0 && bernoulli(rng, w)) pending.push_back(i);
        }
        if (++spawned > 1000000) throw Error("hawkes: runaway Dirac cascade");
      }
      bound = total(state.intensities());
    } else {
      bound = lt;
    }
  }
  return out;
}

/// Time-change residuals: the compensator increments between consecutive
/// points of each component, which are i.i.d. Exp(1) under the model.
inline std::vector<std::vector<double>> time_change_residuals(const HawkesSpec& spec, const PointStream& points) {
  spec.validate_shape();
  const std::size_t d = spec.dimension();
  detail::HawkesState state(spec);
  std::vector<std::vector<double>> res(d);
  std::vector<double> acc(d, 0.0);
  std::vector<bool> seen(d, false);
  double t = 0.0;
  for (const MarkedPoint& p : points) {
    const double dt = p.time - t;
    for (std::size_t i = 0; i < d; ++i) acc[i] += state.compensator(i, dt);
    state.advance(dt);
    t = p.time;
    const auto c = static_cast<std::size_t>(p.component);
    if (seen[c]) res[c].push_back(acc[c]);
    seen[c] = true;
    acc[c] = 0.0;
    state.excite(c);
  }
  return res;
}

/// Maps points to order-book events through the spec's component marks.
inline EventStream to_events(const HawkesSpec& spec, const PointStream& points) {
  if (spec.marks.size() != spec.dimension()) throw InvalidArgument("hawkes: marks are required to build events");
  EventStream out;
  out.reserve(points.size());
  for (const MarkedPoint& p : points) {
    const ComponentMark& m = spec.marks[static_cast<std::size_t>(p.component)];
    Event e;
    e.time = p.time;
    e.kind = m.kind;
    e.side = m.side;
    if (m.kind != EventKind::MarketOrder) e.level = m.level;
    e.size = m.size;
    out.push_back(e);
  }
  return out;
}

}  // namespace lobkit
