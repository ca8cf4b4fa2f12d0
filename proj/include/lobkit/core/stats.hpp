#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "lobkit/core/error.hpp"

namespace lobkit {

inline double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample variance with the n-1 denominator.
inline double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double standard_error(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  return std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
}

/// Streaming mean/variance accumulator (Welford).
class RunningStats {
public:
  void push(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double standard_error() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("ols: x and y differ in length");
  if (x.size() < 2) throw InvalidArgument("ols: need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x), my = mean(y);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("ols: zero-variance regressor");
  LinearFit fit;
  fit.n = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (x.size() > 2) {
    const double s2 = sse / (n - 2.0);
    fit.slope_stderr = std::sqrt(s2 / sxx);
    fit.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return fit;
}

struct MultiFit {
  Eigen::VectorXd coef;
  Eigen::MatrixXd covariance;  ///< sigma^2 (X'X)^{-1}
  Eigen::VectorXd residuals;
  double sigma2 = 0.0;
  double r_squared = 0.0;

  double stderr_of(Eigen::Index i) const { return std::sqrt(covariance(i, i)); }
};

/// Least squares y = X b (no implicit intercept). Throws when X is rank deficient.
inline MultiFit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw InvalidArgument("least_squares: row mismatch");
  if (X.rows() <= X.cols()) throw InvalidArgument("least_squares: not enough observations");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) throw InvalidArgument("least_squares: singular design matrix");
  MultiFit fit;
  fit.coef = qr.solve(y);
  fit.residuals = y - X * fit.coef;
  const double dof = static_cast<double>(X.rows() - X.cols());
  fit.sigma2 = fit.residuals.squaredNorm() / dof;
  const Eigen::MatrixXd xtx = X.transpose() * X;
  fit.covariance = fit.sigma2 * xtx.inverse();
  const double ym = y.mean();
  const double sst = (y.array() - ym).square().sum();
  fit.r_squared = sst > 0.0 ? 1.0 - fit.residuals.squaredNorm() / sst : 1.0;
  return fit;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

}  // namespace lobkit
