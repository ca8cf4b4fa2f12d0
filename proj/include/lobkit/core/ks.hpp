#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace lobkit {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Asymptotic Kolmogorov distribution tail P(K > x).
inline double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
inline KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  KsResult r;
  r.n = sample.size();
  if (sample.empty()) return r;
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  r.statistic = d;
  const double sn = std::sqrt(n);
  r.p_value = kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

inline KsResult ks_test_unit_exponential(std::vector<double> sample) {
  return ks_test(std::move(sample), [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); });
}

}  // namespace lobkit
