#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lobkit/core/error.hpp"
#include "lobkit/core/stats.hpp"

namespace lobkit {

/// Contemporaneous regression of price changes on order flow imbalance.
inline LinearFit ofi_regression(std::span<const double> price_change, std::span<const double> ofi) {
  if (price_change.size() != ofi.size()) throw InvalidArgument("price changes and OFI must have equal length");
  if (price_change.size() < 3) throw InvalidArgument("OFI regression needs at least three observations");
  return ols(ofi, price_change);
}

/// Bivariate structural VAR for x_t = (dp_t, f_t):
///   A0 x_t = sum_i A_i x_{t-i} + xi_t,   A0 = [[1, g], [0, 1]].
/// Row 2 reads f_t = (A_i)_{2.} lags + xi_2 and row 1 reads
/// dp_t = -g f_t + (A_i)_{1.} lags + xi_1, so a price that moves with the
/// trade sign has g < 0; `immediate_impact()` returns -g.
struct VarFit {
  double g = 0.0;
  double g_stderr = 0.0;
  std::vector<Eigen::Matrix2d> lags;
  std::vector<Eigen::Matrix2d> lag_stderr;
  Eigen::Matrix2d residual_covariance = Eigen::Matrix2d::Zero();
  std::size_t observations = 0;

  double immediate_impact() const { return -g; }
};

/// Equation-by-equation least squares exploiting the triangular A0: the flow
/// equation on lags only, then the price equation on current flow and lags.
inline VarFit var_fit(std::span<const double> price_change, std::span<const double> flow, std::size_t order) {
  if (price_change.size() != flow.size()) throw InvalidArgument("VAR components must have equal length");
  if (order < 1) throw InvalidArgument("VAR order must be >= 1");
  const std::size_t n = flow.size();
  if (n < 10 * (2 * order + 1)) throw InvalidArgument("VAR sample too short for the requested order");
  const auto rows = static_cast<Eigen::Index>(n - order);
  const auto p = static_cast<Eigen::Index>(order);
  Eigen::MatrixXd lagged(rows, 2 * p);
  Eigen::VectorXd dp(rows), f(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto t = static_cast<std::size_t>(r) + order;
    dp(r) = price_change[t];
    f(r) = flow[t];
    for (std::size_t i = 1; i <= order; ++i) {
      lagged(r, 2 * static_cast<Eigen::Index>(i - 1)) = price_change[t - i];
      lagged(r, 2 * static_cast<Eigen::Index>(i - 1) + 1) = flow[t - i];
    }
  }
  const MultiFit flow_eq = least_squares(lagged, f);
  Eigen::MatrixXd price_design(rows, 2 * p + 1);
  price_design.col(0) = f;
  price_design.rightCols(2 * p) = lagged;
  const MultiFit price_eq = least_squares(price_design, dp);

  VarFit out;
  out.observations = static_cast<std::size_t>(rows);
  out.g = -price_eq.coef(0);
  out.g_stderr = price_eq.stderr_of(0);
  for (Eigen::Index i = 0; i < p; ++i) {
    Eigen::Matrix2d a, se;
    a << price_eq.coef(1 + 2 * i), price_eq.coef(2 + 2 * i), flow_eq.coef(2 * i), flow_eq.coef(2 * i + 1);
    se << price_eq.stderr_of(1 + 2 * i), price_eq.stderr_of(2 + 2 * i), flow_eq.stderr_of(2 * i),
        flow_eq.stderr_of(2 * i + 1);
    out.lags.push_back(a);
    out.lag_stderr.push_back(se);
  }
  const double dof = static_cast<double>(rows);
  out.residual_covariance(0, 0) = price_eq.residuals.squaredNorm() / dof;
  out.residual_covariance(1, 1) = flow_eq.residuals.squaredNorm() / dof;
  out.residual_covariance(0, 1) = out.residual_covariance(1, 0) = price_eq.residuals.dot(flow_eq.residuals) / dof;
  return out;
}

}  // namespace lobkit
