#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lobkit/core/error.hpp"
#include "lobkit/core/stats.hpp"
#include "lobkit/stats/curve.hpp"
#include "lobkit/stats/sign_series.hpp"

namespace lobkit {

struct SignAutocorrelation {
  Curve curve;
  /// Constant series: variance is zero and C is reported as 1.
  bool degenerate = false;
};

namespace detail {

inline std::int64_t lagged_sum(std::span<const int> s, std::size_t lag) {
  std::int64_t acc = 0;
  const std::size_t n = s.size() - lag;
  const int* a = s.data();
  const int* b = s.data() + lag;
  for (std::size_t t = 0; t < n; ++t) acc += a[t] * b[t];
  return acc;
}

}  // namespace detail

/// Sample autocorrelation C(tau) = (<e_t e_{t+tau}> - m^2) / (1 - m^2) at the
/// given lags, with the i.i.d. standard error 1/sqrt(n - tau).
inline SignAutocorrelation sign_autocorr(const SignSeries& s, std::span<const std::size_t> lags) {
  s.validate();
  const std::size_t n = s.size();
  const double m = std::accumulate(s.signs.begin(), s.signs.end(), 0.0) / static_cast<double>(n);
  const double var = 1.0 - m * m;
  SignAutocorrelation out;
  out.degenerate = !(var > 1e-15);
  for (std::size_t lag : lags) {
    if (lag == 0 || lag >= n) throw InvalidArgument("autocorrelation lag must lie in 1..n-1");
    const double pairs = static_cast<double>(n - lag);
    double c = 1.0;
    if (!out.degenerate) c = (static_cast<double>(detail::lagged_sum(s.signs, lag)) / pairs - m * m) / var;
    out.curve.push(static_cast<double>(lag), c, 1.0 / std::sqrt(pairs), static_cast<std::int64_t>(n - lag));
  }
  return out;
}

inline SignAutocorrelation sign_autocorr(const SignSeries& s, std::size_t max_lag) {
  if (s.size() <= max_lag) throw InvalidArgument("series must be longer than max_lag");
  std::vector<std::size_t> lags(max_lag);
  std::iota(lags.begin(), lags.end(), std::size_t{1});
  return sign_autocorr(s, lags);
}

/// Roughly log-spaced distinct integer lags in [lo, hi].
inline std::vector<std::size_t> log_lags(std::size_t lo, std::size_t hi, std::size_t per_decade = 10) {
  std::vector<std::size_t> out;
  const double step = std::pow(10.0, 1.0 / static_cast<double>(per_decade));
  for (double x = static_cast<double>(lo); x <= static_cast<double>(hi) * (1 + 1e-12); x *= step) {
    const auto l = static_cast<std::size_t>(std::llround(x));
    if (out.empty() || l != out.back()) out.push_back(l);
  }
  if (out.back() != hi) out.push_back(hi);
  return out;
}

struct PowerLawTailFit {
  double gamma = 0.0;
  double hurst = 0.0;  ///< H = 1 - gamma/2
  double log_amplitude = 0.0;
  double gamma_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
  bool truncated = false;
  std::string warning;
};

/// Log-log least squares of C(tau) ~ A tau^-gamma over lags in [lag_min, lag_max].
/// The range is cut at the first non-positive value (with a warning).
inline PowerLawTailFit fit_powerlaw_tail(const Curve& c, double lag_min, double lag_max) {
  std::vector<double> lx, ly;
  PowerLawTailFit fit;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.x[i] < lag_min || c.x[i] > lag_max) continue;
    if (!(c.value[i] > 0.0)) {
      fit.truncated = true;
      fit.warning = "non-positive value at lag " + std::to_string(c.x[i]) + "; range truncated";
      break;
    }
    lx.push_back(std::log(c.x[i]));
    ly.push_back(std::log(c.value[i]));
  }
  if (lx.size() < 2) throw InvalidArgument("power-law fit needs at least two positive points in range");
  const LinearFit lf = ols(lx, ly);
  fit.gamma = -lf.slope;
  fit.hurst = 1.0 - fit.gamma / 2.0;
  fit.log_amplitude = lf.intercept;
  fit.gamma_stderr = lf.slope_stderr;
  fit.r_squared = lf.r_squared;
  fit.points = lx.size();
  return fit;
}

struct SplitHerdDecomposition {
  std::vector<std::size_t> lags;
  std::vector<double> total;
  std::vector<double> split;
  std::vector<double> herd;
};

/// Splits C(tau) by whether the two orders of a lagged pair share a trader.
/// The lagged second moment is partitioned exactly and the squared-mean
/// correction is shared in proportion to the pair counts, so
/// total == split + herd up to rounding.
inline SplitHerdDecomposition split_herd_decompose(const SignSeries& s, std::span<const std::size_t> lags) {
  s.validate();
  if (!s.labelled()) throw InvalidArgument("split/herd decomposition requires trader labels");
  const std::size_t n = s.size();
  const double m = std::accumulate(s.signs.begin(), s.signs.end(), 0.0) / static_cast<double>(n);
  const double var = 1.0 - m * m;
  if (!(var > 1e-15)) throw InvalidArgument("split/herd decomposition undefined for a constant series");
  SplitHerdDecomposition out;
  for (std::size_t lag : lags) {
    if (lag == 0 || lag >= n) throw InvalidArgument("decomposition lag must lie in 1..n-1");
    std::int64_t same_sum = 0, diff_sum = 0, same_pairs = 0;
    for (std::size_t t = 0; t + lag < n; ++t) {
      const int p = s.signs[t] * s.signs[t + lag];
      if (s.labels[t] == s.labels[t + lag]) {
        same_sum += p;
        ++same_pairs;
      } else {
        diff_sum += p;
      }
    }
    const double pairs = static_cast<double>(n - lag);
    const double w_same = static_cast<double>(same_pairs) / pairs;
    const double split = (static_cast<double>(same_sum) / pairs - m * m * w_same) / var;
    const double herd = (static_cast<double>(diff_sum) / pairs - m * m * (1.0 - w_same)) / var;
    out.lags.push_back(lag);
    out.split.push_back(split);
    out.herd.push_back(herd);
    out.total.push_back((static_cast<double>(same_sum + diff_sum) / pairs - m * m) / var);
  }
  return out;
}

}  // namespace lobkit
